"""Minimal dense-network substrate: affine layers, heads, manual backprop, Adam.

Everything here is plain numpy. Networks are two affine layers with a ReLU in
between (hidden width 32 by default) and a named head activation. Forward
passes can record a GradTape; backward passes replay it exactly, so gradients
are the true derivatives of the forward computation (ReLU subgradient at 0 is
defined as 0).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

HEADS = ("sigmoid", "exponential", "identity", "quaternion-normalize")

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-15


def relu(x):
    return np.maximum(x, 0.0)


def relu_grad(z, dy):
    # subgradient at exactly 0 is 0
    return np.where(z > 0, dy, 0.0)


def sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def positional_encode(v, bands):
    """Sinusoidal lifting of unit directions, band-major layout.

    v: (3,) or (N, 3) unit vectors. Returns (6*bands,) or (N, 6*bands) laid out
    as [sin(2^k pi v), cos(2^k pi v)] for k = 0..bands-1, each block being the
    three components in order.
    """
    v = np.asarray(v)
    if bands < 1:
        raise ValueError("positional encoding needs at least one band")
    single = v.ndim == 1
    vv = v[None, :] if single else v
    norms = np.linalg.norm(vv, axis=-1)
    if np.any(np.abs(norms - 1.0) > 1e-6):
        raise ValueError("direction not normalized")
    parts = []
    for k in range(bands):
        arg = (2.0**k) * np.pi * vv
        parts.append(np.sin(arg))
        parts.append(np.cos(arg))
    out = np.concatenate(parts, axis=-1)
    return out[0] if single else out


def positional_encode_backward(v, bands, dout):
    """Gradient of positional_encode w.r.t. v. Shapes mirror the forward."""
    v = np.asarray(v)
    single = v.ndim == 1
    vv = v[None, :] if single else v
    dd = dout[None, :] if single else dout
    dv = np.zeros_like(vv)
    for k in range(bands):
        f = (2.0**k) * np.pi
        arg = f * vv
        ds = dd[:, 6 * k : 6 * k + 3]
        dc = dd[:, 6 * k + 3 : 6 * k + 6]
        dv += f * (np.cos(arg) * ds - np.sin(arg) * dc)
    return dv[0] if single else dv


@dataclass
class Mlp:
    """Two affine layers with a ReLU between and a named head activation."""

    w0: np.ndarray  # (hidden, in)
    b0: np.ndarray  # (hidden,)
    w1: np.ndarray  # (out, hidden)
    b1: np.ndarray  # (out,)
    head: str = "identity"

    @property
    def in_dim(self):
        return self.w0.shape[1]

    @property
    def out_dim(self):
        return self.w1.shape[0]

    @property
    def hidden_dim(self):
        return self.w0.shape[0]

    def params(self):
        return [self.w0, self.b0, self.w1, self.b1]

    def set_params(self, tensors):
        self.w0, self.b0, self.w1, self.b1 = tensors

    def astype(self, dtype):
        return Mlp(*(p.astype(dtype) for p in self.params()), head=self.head)


def make_mlp(in_dim, out_dim, head, rng, hidden_dim=32, weight_std=0.05, dtype=np.float32):
    """Fresh network with small gaussian weights and zero biases."""
    if head not in HEADS:
        raise ValueError(f"unknown head {head!r}")
    w0 = rng.normal(0.0, weight_std, size=(hidden_dim, in_dim)).astype(dtype)
    b0 = np.zeros(hidden_dim, dtype=dtype)
    w1 = rng.normal(0.0, weight_std, size=(out_dim, hidden_dim)).astype(dtype)
    b1 = np.zeros(out_dim, dtype=dtype)
    return Mlp(w0, b0, w1, b1, head=head)


@dataclass
class GradTape:
    """Cached activations from one forward pass plus accumulated gradients."""

    x: np.ndarray | None = None  # layer-0 input
    z0: np.ndarray | None = None  # pre-ReLU
    h: np.ndarray | None = None  # post-ReLU
    z1: np.ndarray | None = None  # pre-head
    y: np.ndarray | None = None  # head output
    net_token: int = 0
    consumed: bool = False
    param_grads: list = field(default_factory=list)  # [dw0, db0, dw1, db1]
    input_grad: np.ndarray | None = None


def _apply_head(head, z):
    if head == "sigmoid":
        return sigmoid(z)
    if head == "exponential":
        return np.exp(z)
    if head == "identity":
        return z
    if head == "quaternion-normalize":
        return quat_normalize(z)
    raise ValueError(f"unknown head {head!r}")


def _head_backward(head, z, y, dy):
    if head == "sigmoid":
        return dy * y * (1.0 - y)
    if head == "exponential":
        return dy * y
    if head == "identity":
        return dy
    if head == "quaternion-normalize":
        return quat_normalize_backward(z, dy)
    raise ValueError(f"unknown head {head!r}")


def quat_normalize(q):
    """Normalize rows to unit length; rows near zero map to (1, 0, 0, ...)."""
    q = np.asarray(q)
    single = q.ndim == 1
    qq = q[None, :] if single else q
    norms = np.linalg.norm(qq, axis=-1, keepdims=True)
    out = np.where(norms > 1e-12, qq / np.maximum(norms, 1e-12), 0.0)
    unit = np.zeros_like(qq)
    unit[:, 0] = 1.0
    out = np.where(norms > 1e-12, out, unit)
    return out[0] if single else out


def quat_normalize_backward(q, dy):
    q = np.asarray(q)
    single = q.ndim == 1
    qq = q[None, :] if single else q
    dd = dy[None, :] if single else dy
    norms = np.linalg.norm(qq, axis=-1, keepdims=True)
    safe = np.maximum(norms, 1e-12)
    u = qq / safe
    dq = (dd - u * np.sum(u * dd, axis=-1, keepdims=True)) / safe
    dq = np.where(norms > 1e-12, dq, 0.0)
    return dq[0] if single else dq


def mlp_forward(net, x, tape=None):
    """Evaluate the network on a vector or a batch of rows.

    When a tape is supplied, enough state is cached for an exact backward pass.
    """
    x = np.asarray(x)
    if x.shape[-1] != net.in_dim:
        raise ValueError(f"input dim {x.shape[-1]} does not match net input dim {net.in_dim}")
    z0 = x @ net.w0.T + net.b0
    h = relu(z0)
    z1 = h @ net.w1.T + net.b1
    y = _apply_head(net.head, z1)
    if tape is not None:
        tape.x, tape.z0, tape.h, tape.z1, tape.y = x, z0, h, z1, y
        tape.net_token = id(net)
        tape.consumed = False
        tape.param_grads = []
        tape.input_grad = None
    return y


def mlp_backward(net, tape, out_grad):
    """Backprop out_grad through a taped forward pass.

    Accumulates parameter gradients into the tape and returns the gradient
    w.r.t. the forward input (same shape as the input).
    """
    if tape.x is None or tape.net_token != id(net):
        raise ValueError("stale tape: no matching forward pass recorded")
    if tape.consumed:
        raise ValueError("stale tape: backward already ran")
    out_grad = np.asarray(out_grad)
    if out_grad.shape != tape.y.shape:
        raise ValueError(f"out_grad shape {out_grad.shape} does not match output {tape.y.shape}")
    batched = tape.x.ndim == 2
    x = tape.x if batched else tape.x[None, :]
    z0 = tape.z0 if batched else tape.z0[None, :]
    h = tape.h if batched else tape.h[None, :]
    z1 = tape.z1 if batched else tape.z1[None, :]
    y = tape.y if batched else tape.y[None, :]
    dy = out_grad if batched else out_grad[None, :]

    dz1 = _head_backward(net.head, z1, y, dy)
    dw1 = dz1.T @ h
    db1 = dz1.sum(axis=0)
    dh = dz1 @ net.w1
    dz0 = relu_grad(z0, dh)
    dw0 = dz0.T @ x
    db0 = dz0.sum(axis=0)
    dx = dz0 @ net.w0

    tape.param_grads = [dw0, db0, dw1, db1]
    tape.input_grad = dx if batched else dx[0]
    tape.consumed = True
    return tape.input_grad


@dataclass
class AdamState:
    """First/second moment accumulators per named parameter tensor."""

    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)
    step: int = 0

    def ensure(self, name, shape, dtype):
        if name not in self.m or self.m[name].shape != shape:
            self.m[name] = np.zeros(shape, dtype=dtype)
            self.v[name] = np.zeros(shape, dtype=dtype)


def adam_step(state, params, grads, lr):
    """One Adam update over a dict of named tensors, in place.

    lr may be a scalar or a dict mapping names to per-tensor rates. Tensors
    without a gradient entry are left untouched.
    """
    state.step += 1
    t = state.step
    bc1 = 1.0 - ADAM_BETA1**t
    bc2 = 1.0 - ADAM_BETA2**t
    for name, p in params.items():
        g = grads.get(name)
        if g is None:
            continue
        if not np.all(np.isfinite(g)):
            raise ValueError(f"non-finite gradient for tensor {name!r}")
        rate = lr[name] if isinstance(lr, dict) else lr
        state.ensure(name, p.shape, p.dtype)
        m = state.m[name]
        v = state.v[name]
        m *= ADAM_BETA1
        m += (1.0 - ADAM_BETA1) * g
        v *= ADAM_BETA2
        v += (1.0 - ADAM_BETA2) * np.square(g)
        p -= rate * (m / bc1) / (np.sqrt(v / bc2) + ADAM_EPS)
    return params
