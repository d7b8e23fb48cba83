"""Small fully connected networks with hand-written backprop, Adam and
checkpoint I/O.

Parameters are kept as a flat list ``[W0, b0, W1, b1, ...]`` with
``W_k`` of shape ``(fan_in, fan_out)`` so a batch forward pass is ``x @ W + b``.

Checkpoint format (little endian)::

    8 bytes   magic  b"CCRMLP01"
    u32       number of layer sizes L
    u32 * L   layer sizes
    u8        hidden activation tag  (0 = relu, 1 = tanh, 2 = identity)
    u8        output activation tag
    6 bytes   zero padding
    f64 * P   parameters, each W then b, row-major
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .core import FLOAT

ACTIVATIONS = ("relu", "tanh", "identity")
MAGIC = b"CCRMLP01"


def _act(name, z):
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "tanh":
        return np.tanh(z)
    return z


def _act_grad(name, z, out, g):
    if name == "relu":
        return g * (z > 0.0)
    if name == "tanh":
        return g * (1.0 - out * out)
    return g


class Mlp:
    def __init__(self, sizes, hidden="relu", output="identity", rng=None, zero=False):
        sizes = [int(s) for s in sizes]
        if len(sizes) < 2 or min(sizes) < 1:
            raise ValueError(f"invalid layer sizes {sizes}")
        if hidden not in ACTIVATIONS or output not in ACTIVATIONS:
            raise ValueError("unknown activation")
        self.sizes = sizes
        self.hidden = hidden
        self.output = output
        self.params: list[np.ndarray] = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            if zero or rng is None:
                W = np.zeros((fan_in, fan_out), dtype=FLOAT)
                b = np.zeros(fan_out, dtype=FLOAT)
            else:
                bound = 1.0 / np.sqrt(fan_in)
                W = rng.uniform(-bound, bound, size=(fan_in, fan_out))
                b = rng.uniform(-bound, bound, size=fan_out)
            self.params += [W, b]

    @property
    def n_layers(self) -> int:
        return len(self.sizes) - 1

    def copy(self) -> "Mlp":
        other = Mlp.__new__(Mlp)
        other.sizes = list(self.sizes)
        other.hidden = self.hidden
        other.output = self.output
        other.params = [p.copy() for p in self.params]
        return other

    def flat(self) -> np.ndarray:
        return np.concatenate([p.ravel() for p in self.params])

    def set_flat(self, vec) -> None:
        vec = np.asarray(vec, dtype=FLOAT)
        k = 0
        for p in self.params:
            p[...] = vec[k:k + p.size].reshape(p.shape)
            k += p.size
        if k != len(vec):
            raise ValueError("flat parameter vector has the wrong length")

    def __call__(self, x):
        return forward(self, x)[0]

    def save(self, path) -> None:
        save_checkpoint(self, path)


def forward(net: Mlp, x):
    """Returns ``(output, cache)``. Accepts a single vector or a batch."""
    x = np.asarray(x, dtype=FLOAT)
    single = x.ndim == 1
    h = x[None, :] if single else x
    if h.shape[1] != net.sizes[0]:
        raise ValueError(f"input width {h.shape[1]} != first layer size {net.sizes[0]}")
    inputs, pre, post = [], [], []
    L = net.n_layers
    for k in range(L):
        W, b = net.params[2 * k], net.params[2 * k + 1]
        inputs.append(h)
        z = h @ W + b
        h = _act(net.output if k == L - 1 else net.hidden, z)
        pre.append(z)
        post.append(h)
    cache = (inputs, pre, post, single)
    return (h[0] if single else h), cache


def backward(net: Mlp, cache, output_grad):
    """Gradients of ``sum(output * output_grad)`` w.r.t. parameters and input.

    Returns ``(param_grads, input_grad)``; ``param_grads`` mirrors
    ``net.params``.
    """
    inputs, pre, post, single = cache
    g = np.asarray(output_grad, dtype=FLOAT)
    if single:
        g = g[None, :]
    L = net.n_layers
    grads = [None] * (2 * L)
    for k in range(L - 1, -1, -1):
        g = _act_grad(net.output if k == L - 1 else net.hidden, pre[k], post[k], g)
        grads[2 * k] = inputs[k].T @ g
        grads[2 * k + 1] = g.sum(axis=0)
        g = g @ net.params[2 * k].T
    return grads, (g[0] if single else g)


@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)

    @classmethod
    def for_params(cls, params, **kw) -> "AdamState":
        return cls(m=[np.zeros_like(p) for p in params], v=[np.zeros_like(p) for p in params], **kw)


def adam_step(params, grads, state: AdamState):
    """In-place Adam update (gradient descent on ``grads``)."""
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ValueError("parameter, gradient and moment lists differ in length")
    state.step += 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1 ** state.step
    c2 = 1.0 - b2 ** state.step
    step_size = state.lr / c1
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if p.shape != g.shape:
            raise ValueError(f"gradient shape {g.shape} != parameter shape {p.shape}")
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        p -= step_size * m / (np.sqrt(v / c2) + state.eps)
    return params, state


def soft_update(target_params, online_params, tau: float):
    """``target <- tau * online + (1 - tau) * target``, in place."""
    if not 0.0 <= tau <= 1.0:
        raise ValueError("tau must lie in [0, 1]")
    for t, o in zip(target_params, online_params):
        if t.shape != o.shape:
            raise ValueError("target and online shapes differ")
        t *= (1.0 - tau)
        t += tau * o
    return target_params


def save_checkpoint(net: Mlp, path) -> None:
    tags = {name: k for k, name in enumerate(ACTIVATIONS)}
    header = MAGIC + struct.pack(f"<I{len(net.sizes)}I", len(net.sizes), *net.sizes)
    header += struct.pack("<BB6x", tags[net.hidden], tags[net.output])
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(net.flat().astype("<f8").tobytes())


def load_checkpoint(path) -> Mlp:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:8] != MAGIC:
        raise ValueError(f"{path}: not a network checkpoint")
    (L,) = struct.unpack_from("<I", data, 8)
    sizes = struct.unpack_from(f"<{L}I", data, 12)
    off = 12 + 4 * L
    h_tag, o_tag = struct.unpack_from("<BB6x", data, off)
    off += 8
    net = Mlp(sizes, ACTIVATIONS[h_tag], ACTIVATIONS[o_tag], zero=True)
    flat = np.frombuffer(data, dtype="<f8", offset=off)
    net.set_flat(flat.astype(FLOAT))
    return net
