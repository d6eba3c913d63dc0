"""Entropic Riemannian neural optimal transport."""
