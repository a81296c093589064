"""Distributions over GF(q) and the kernel combine rules used by SC decoding.

A distribution is a float array whose last axis has length q; any leading
axes are batch axes, so one call processes many kernels at once.
"""

from functools import lru_cache

import numpy as np
from scipy.linalg import hadamard

PROB_FLOOR = 1e-300

# Above this size the dense Hadamard matrix stops paying off against butterflies.
_DENSE_WHT_MAX_Q = 1024


def fwht(x):
    """Unnormalized Walsh-Hadamard transform along the last axis (butterflies)."""
    x = np.array(x, dtype=float)
    q = x.shape[-1]
    if q & (q - 1):
        raise ValueError(f"length {q} is not a power of two")
    lead = x.shape[:-1]
    h = 1
    while h < q:
        y = x.reshape(*lead, q // (2 * h), 2, h)
        a = y[..., 0, :].copy()
        y[..., 0, :] += y[..., 1, :]
        y[..., 1, :] *= -1.0
        y[..., 1, :] += a
        h *= 2
    return x


@lru_cache(maxsize=None)
def _hadamard(q):
    H = hadamard(q).astype(float)
    H.setflags(write=False)
    return H


def wht(x):
    """Same transform as :func:`fwht`; uses a dense matrix product for small q."""
    x = np.asarray(x, dtype=float)
    q = x.shape[-1]
    if q <= _DENSE_WHT_MAX_Q and not q & (q - 1):
        # 2-D operand so the product is one gemm call, not one per leading index
        return (x.reshape(-1, q) @ _hadamard(q)).reshape(x.shape)
    return fwht(x)


def normalize(d):
    """Clamp to the probability floor and rescale to unit mass, in place."""
    np.maximum(d, PROB_FLOOR, out=d)
    d /= d.sum(axis=-1, keepdims=True)
    return d


def xor_conv_naive(a, b):
    """c(u) = sum_v a(u ^ v) b(v) by direct double sum."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    q = a.shape[-1]
    if b.shape[-1] != q:
        raise ValueError("distributions have different lengths")
    c = np.zeros(np.broadcast_shapes(a.shape, b.shape))
    v = np.arange(q)
    for u in range(q):
        c[..., u] = np.sum(a[..., u ^ v] * b, axis=-1)
    return c


def xor_conv_fast(a, b):
    """XOR convolution through the Walsh-Hadamard transform."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    q = a.shape[-1]
    if b.shape[-1] != q:
        raise ValueError("distributions have different lengths")
    return wht(wht(a) * wht(b)) / q


def _check_coeff(ctx, h):
    if not 0 < h < ctx.q:
        raise ValueError(f"kernel coefficient must be a nonzero element of GF({ctx.q}), got {h}")


def permute_by_multiplier(ctx, d, h):
    """out(u) = d(h*u)."""
    _check_coeff(ctx, h)
    return np.take(d, ctx.mul_row(h), axis=-1)


def gather_last(d, idx):
    """``take_along_axis(d, idx, -1)`` for an index array of the same shape as ``d``."""
    d = np.ascontiguousarray(d)
    q = d.shape[-1]
    base = np.arange(0, d.size, q).reshape(d.shape[:-1] + (1,))
    return np.take(d, base + idx)


def bad_from_permuted(d0, d1p):
    """Bad-branch rule with the second input already re-indexed by h."""
    # the 1/q of the inverse transform is absorbed by the normalization
    return normalize(wht(wht(d0) * wht(d1p)))


def good_from_permuted(d0, d1p, u0):
    """Good-branch rule with the second input already re-indexed by h."""
    d0 = np.asarray(d0, dtype=float)
    q = d0.shape[-1]
    idx = np.asarray(u0, dtype=np.int64)[..., None] ^ np.arange(q)
    out = gather_last(d0, np.broadcast_to(idx, d0.shape)) * d1p
    mass = out.sum(axis=-1, keepdims=True)
    dead = mass[..., 0] <= 0.0
    if np.any(dead):
        out[dead] = 1.0
        mass[dead] = q
    out /= mass
    if out.min() < PROB_FLOOR:
        normalize(out)
    return out


def bad_combine(ctx, d0, d1, h):
    """Posterior of u0 for the kernel (u0, u1) -> (u0 + u1, h*u1).

    out(u) = sum_v d0(u + v) d1(h*v); the second input is re-indexed by the
    multiplier, then XOR-convolved with the first.
    """
    return bad_from_permuted(d0, permute_by_multiplier(ctx, d1, h))


def good_combine(ctx, d0, d1, h, u0):
    """Posterior of u1 given u0 (true or decided): out(u) ~ d0(u0 + u) d1(h*u).

    ``u0`` broadcasts against the batch axes of ``d0``. A distribution with
    zero total mass comes back uniform.
    """
    return good_from_permuted(d0, permute_by_multiplier(ctx, d1, h), u0)


def dist_argmax(d):
    """Most probable symbol; ties go to the smallest index."""
    return np.argmax(d, axis=-1)


def entropy_terms(d, q_base):
    """Per-distribution (H, H2) = (-sum P log_q P, sum P (log_q P)^2).

    Entries equal to zero contribute nothing.
    """
    d = np.asarray(d, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        lg = np.where(d > 0, np.log(d) / np.log(q_base), 0.0)
    h1 = -np.sum(d * lg, axis=-1)
    h2 = np.sum(d * lg * lg, axis=-1)
    return h1, h2
