"""Fixed-shape SiLU MLP with hand-written reverse mode.

Parameters live in one flat float64 vector; ``layers()`` returns (W, b)
views into it, W shaped ``(out, in)``.  Keeping the vector flat makes Adam,
finite-difference checks and checkpointing one-liners.
"""

import struct
from dataclasses import dataclass

import numpy as np

OUTPUT_INIT_SCALE = 1e-4
_MAGIC = b"ERNOTMLP"
_HEADER = struct.Struct("<8sqqqqq")


def _layer_shapes(input_dim, width, depth):
    shapes = []
    fan_in = input_dim
    for _ in range(depth):
        shapes.append((width, fan_in))
        fan_in = width
    shapes.append((1, fan_in))
    return shapes


@dataclass
class MlpParams:
    theta: np.ndarray
    input_dim: int
    width: int
    depth: int
    seed: int = 0

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=np.float64)
        if self.theta.shape != (self.size,):
            raise ValueError(f"expected {self.size} parameters, got {self.theta.shape}")

    @property
    def shapes(self):
        return _layer_shapes(self.input_dim, self.width, self.depth)

    @property
    def size(self):
        return sum(o * i + o for o, i in self.shapes)

    def layers(self, flat=None):
        """(W, b) views into ``flat`` (default: the parameters themselves)."""
        flat = self.theta if flat is None else flat
        out = []
        pos = 0
        for o, i in self.shapes:
            w = flat[pos : pos + o * i].reshape(o, i)
            pos += o * i
            b = flat[pos : pos + o]
            pos += o
            out.append((w, b))
        return out

    def copy(self):
        return MlpParams(self.theta.copy(), self.input_dim, self.width, self.depth, self.seed)


def init_params(input_dim, width=256, depth=2, seed=0):
    """Kaiming-normal hidden layers, N(0, 1e-8 / fan_in) output layer, zero biases."""
    if width < 1 or depth < 1 or input_dim < 1:
        raise ValueError("input_dim, width and depth must be >= 1")
    rng = np.random.default_rng(seed)
    p = MlpParams(np.zeros(sum(o * i + o for o, i in _layer_shapes(input_dim, width, depth))),
                  input_dim, width, depth, seed)
    layers = p.layers()
    for k, (w, _) in enumerate(layers):
        fan_in = w.shape[1]
        std = np.sqrt(2.0 / fan_in) if k < depth else OUTPUT_INIT_SCALE * np.sqrt(1.0 / fan_in)
        w[...] = std * rng.standard_normal(w.shape)
    return p


def sigmoid(u):
    return 0.5 * (1.0 + np.tanh(0.5 * u))


def silu(u):
    return u * sigmoid(u)


def silu_grad(u):
    s = sigmoid(u)
    return s * (1.0 + u * (1.0 - s))


def _as_batch(p, x):
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    if single:
        x = x[None]
    if x.ndim != 2 or x.shape[1] != p.input_dim:
        raise ValueError(f"expected inputs of dimension {p.input_dim}, got shape {x.shape}")
    return x, single


def forward(p, x):
    """Scalar output per row of ``x`` (or a float for a single vector)."""
    x, single = _as_batch(p, x)
    layers = p.layers()
    a = x
    for w, b in layers[:-1]:
        a = silu(a @ w.T + b)
    w, b = layers[-1]
    out = a @ w[0] + b[0]
    return float(out[0]) if single else out


def backward(p, x, cotangent):
    """Gradient of ``sum_i cotangent[i] * forward(p, x[i])`` w.r.t. all parameters."""
    x, _ = _as_batch(p, x)
    cot = np.asarray(cotangent, dtype=np.float64).reshape(-1)
    if cot.shape[0] != x.shape[0]:
        raise ValueError("need one cotangent per input row")
    layers = p.layers()
    pre = []
    acts = [x]
    a = x
    for w, b in layers[:-1]:
        z = a @ w.T + b
        pre.append(z)
        a = silu(z)
        acts.append(a)

    grad = np.zeros_like(p.theta)
    glayers = p.layers(grad)
    w, _ = layers[-1]
    gw, gb = glayers[-1]
    gw[0] = cot @ acts[-1]
    gb[0] = cot.sum()
    delta = cot[:, None] * w  # d out / d a_last, shape (B, width)
    for k in range(len(layers) - 2, -1, -1):
        delta = delta * silu_grad(pre[k])
        gw, gb = glayers[k]
        gw[...] = delta.T @ acts[k]
        gb[...] = delta.sum(axis=0)
        if k > 0:
            delta = delta @ layers[k][0]
    return grad


def save_checkpoint(path, p):
    """Header (magic, input_dim, width, depth, seed, count) then little-endian f64 params."""
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, p.input_dim, p.width, p.depth, p.seed, p.size))
        fh.write(p.theta.astype("<f8").tobytes())


def load_checkpoint(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    magic, input_dim, width, depth, seed, count = _HEADER.unpack_from(raw)
    if magic != _MAGIC:
        raise ValueError(f"{path}: not a parameter checkpoint")
    theta = np.frombuffer(raw, dtype="<f8", count=count, offset=_HEADER.size)
    return MlpParams(theta.astype(np.float64), input_dim, width, depth, seed)
