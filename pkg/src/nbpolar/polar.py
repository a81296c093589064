"""Non-binary polar codes: coefficient tree, encoder and SC decoders.

Wiring convention. The root kernel sits on the channel side. A block of
length L at a tree node takes the encodings c (left child, first L/2
inputs) and d (right child, last L/2 inputs) and emits
``x[2k] = c[k] + d[k]``, ``x[2k+1] = h * d[k]``. Input index j therefore
has channel type equal to its binary expansion, most significant bit
first, with bit 0 meaning the bad branch and bit 1 the good one.

Tree nodes are numbered in heap order (root = 1, children of k are 2k and
2k+1); tree level t holds heap indices 2**t .. 2**(t+1) - 1.
"""

from dataclasses import dataclass, field

import numpy as np

from .gf import GfContext
from .pdist import bad_from_permuted, dist_argmax, gather_last, good_from_permuted


@dataclass(frozen=True, eq=False)
class CoeffTree:
    n: int
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=np.int64).copy()
        if coeffs.shape != ((1 << self.n) - 1,):
            raise ValueError(f"a depth-{self.n} tree needs {(1 << self.n) - 1} coefficients, got {coeffs.size}")
        if np.any(coeffs <= 0):
            raise ValueError("kernel coefficients must be nonzero")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    def __eq__(self, other):
        return isinstance(other, CoeffTree) and self.n == other.n and np.array_equal(self.coeffs, other.coeffs)

    def at(self, heap_index):
        return int(self.coeffs[heap_index - 1])

    def level(self, t):
        """Coefficients of the 2**t nodes on level t, left to right."""
        return self.coeffs[(1 << t) - 1 : (1 << (t + 1)) - 1]

    @classmethod
    def constant(cls, n, h=1):
        return cls(n, np.full((1 << n) - 1, h, dtype=np.int64))

    @classmethod
    def random(cls, gf, n, rng):
        return cls(n, rng.integers(1, gf.q, size=(1 << n) - 1))


@dataclass(frozen=True, eq=False)
class PolarCode:
    gf: GfContext
    tree: CoeffTree
    info_set: tuple
    frozen_value: int = 0
    design_snr_db: float = float("nan")
    frozen_mask: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        info = tuple(int(i) for i in self.info_set)
        if any(b <= a for a, b in zip(info, info[1:])):
            raise ValueError("info set must be strictly increasing")
        if info and not (0 <= info[0] and info[-1] < self.N):
            raise ValueError(f"info indices must lie in [0, {self.N})")
        object.__setattr__(self, "info_set", info)
        mask = np.ones(self.N, dtype=bool)
        mask[list(info)] = False
        mask.setflags(write=False)
        object.__setattr__(self, "frozen_mask", mask)

    @property
    def n(self):
        return self.tree.n

    @property
    def N(self):
        return 1 << self.tree.n

    @property
    def K(self):
        return len(self.info_set)

    def embed(self, info_symbols):
        """Full input vector(s) with ``info_symbols`` on the info set."""
        info_symbols = np.asarray(info_symbols, dtype=np.int64)
        u = np.full(info_symbols.shape[:-1] + (self.N,), self.frozen_value, dtype=np.int64)
        u[..., list(self.info_set)] = info_symbols
        return u


def channel_type_of_index(n, j):
    if not 0 <= j < (1 << n):
        raise ValueError(f"index {j} out of range for n={n}")
    return tuple((j >> (n - 1 - k)) & 1 for k in range(n))


def _kernel_step(gf, c, d, h):
    """Interleave one kernel layer: (c, d) -> (c + d, h*d) on even/odd positions.

    ``h`` is a scalar or broadcasts against ``c`` without its last axis.
    """
    x = np.empty(c.shape[:-1] + (2 * c.shape[-1],), dtype=np.int64)
    x[..., 0::2] = c ^ d
    x[..., 1::2] = gf.mul(np.asarray(h)[..., None], d)
    return x


def encode_levels(gf, tree, u):
    """Encoder state at every tree level.

    Returns a list ``enc`` with ``enc[t]`` of shape (..., 2**t, N / 2**t):
    the encoding of the sub-block below each level-t node. ``enc[0][..., 0, :]``
    is the codeword and ``enc[n]`` is ``u`` itself.
    """
    n = tree.n
    u = np.asarray(u, dtype=np.int64)
    if u.shape[-1] != 1 << n:
        raise ValueError(f"expected {1 << n} input symbols, got {u.shape[-1]}")
    enc = [None] * (n + 1)
    enc[n] = u[..., None]
    for t in range(n - 1, -1, -1):
        child = enc[t + 1]
        enc[t] = _kernel_step(gf, child[..., 0::2, :], child[..., 1::2, :], tree.level(t))
    return enc


def encode(code, u):
    """Polar transform of input vector(s) ``u`` (last axis of length N)."""
    return encode_levels(code.gf, code.tree, u)[0][..., 0, :]


class _Recursion:
    """Depth-first SC over a batch of trials (leading axis)."""

    def __init__(self, gf, tree, frozen_mask, frozen_value, true_u, keep_leaves, stats):
        self.gf = gf
        self.coeffs = tree.coeffs
        self.frozen_mask = frozen_mask
        self.frozen_value = frozen_value
        self.true_u = true_u
        self.keep_leaves = keep_leaves
        self.stats = stats

    def run(self, D):
        B, N, q = D.shape
        self.u_hat = np.empty((B, N), dtype=np.int64)
        self.leaves = np.empty((B, N, q)) if self.keep_leaves else None
        self._node(1, D, 0)
        return self.u_hat, self.leaves

    def _leaf(self, d, j):
        if self.leaves is not None:
            self.leaves[:, j] = d
        if self.true_u is not None:
            u = self.true_u[:, j]
        elif self.frozen_mask[j]:
            u = np.full(d.shape[0], self.frozen_value, dtype=np.int64)
        else:
            u = dist_argmax(d)
        self.u_hat[:, j] = u
        return u[:, None]

    def _node(self, node, D, lo):
        L = D.shape[1]
        if L == 1:
            return self._leaf(D[:, 0], lo)
        h = int(self.coeffs[node - 1])
        d0 = D[:, 0::2]
        d1p = np.take(D[:, 1::2], self.gf.mul_row(h), axis=-1)
        c = self._node(2 * node, bad_from_permuted(d0, d1p), lo)
        d = self._node(2 * node + 1, good_from_permuted(d0, d1p, c), lo + L // 2)
        if self.stats is not None:
            self.stats["bad"] = self.stats.get("bad", 0) + L // 2
            self.stats["good"] = self.stats.get("good", 0) + L // 2
        return _kernel_step(self.gf, c, d, h)


def _batched(channel_dists, N):
    D = np.asarray(channel_dists, dtype=float)
    if D.ndim < 2 or D.shape[-2] != N:
        raise ValueError(f"expected {N} channel distributions, got shape {D.shape}")
    return D, D.ndim == 2


def sc_decode(code, channel_dists, stats=None):
    """Successive-cancellation decoding.

    Parameters
    ----------
    code : PolarCode
    channel_dists : array (..., N, q)
        Per-symbol channel posteriors; at most one leading batch axis.
    stats : dict, optional
        Receives kernel-combine counts per trial under ``"bad"`` and ``"good"``.

    Returns
    -------
    info : array (..., K)
        Decided information symbols.
    u_hat : array (..., N)
        Full input estimate, frozen positions included.
    """
    D, single = _batched(channel_dists, code.N)
    if single:
        D = D[None]
    u_hat, _ = _Recursion(code.gf, code.tree, code.frozen_mask, code.frozen_value, None, False, stats).run(D)
    if single:
        u_hat = u_hat[0]
    return u_hat[..., list(code.info_set)], u_hat


def sc_decode_genie(code, channel_dists, true_u, method="levels"):
    """Genie-aided SC decoding: leaf posterior of every input index.

    Partial sums come from the true inputs ``true_u`` instead of decisions.
    ``method="levels"`` sweeps the tree level by level (all nodes of a level
    at once, possible because genie partial sums are known upfront);
    ``method="recursive"`` runs the same depth-first recursion as
    :func:`sc_decode`. Both return an array (..., N, q).
    """
    return genie_posteriors(code.gf, code.tree, channel_dists, true_u, method)


def genie_posteriors(gf, tree, channel_dists, true_u, method="levels"):
    N = 1 << tree.n
    D, single = _batched(channel_dists, N)
    u = np.asarray(true_u, dtype=np.int64)
    if single:
        D, u = D[None], u[None]
    if method == "recursive":
        _, out = _Recursion(gf, tree, np.ones(N, dtype=bool), 0, u, True, None).run(D)
    elif method == "levels":
        out = genie_descend(gf, tree, D, encode_levels(gf, tree, u), tree.n)[:, :, 0, :]
    else:
        raise ValueError(f"unknown method {method!r}")
    return out[0] if single else out


def genie_descend(gf, tree, D, enc, stop):
    """Propagate channel posteriors from the root down to tree level ``stop``.

    ``D`` has shape (B, N, q) and ``enc`` is :func:`encode_levels` of the true
    inputs. Returns the posteriors seen by the level-``stop`` nodes, shape
    (B, 2**stop, N / 2**stop, q). Only coefficients above ``stop`` are used.
    """
    B, N, q = D.shape
    cur = D[:, None]
    for t in range(stop):
        rows = np.stack([gf.mul_row(h) for h in tree.level(t)])[None, :, None, :]
        d0 = cur[:, :, 0::2]
        d1 = cur[:, :, 1::2]
        d1p = gather_last(d1, np.broadcast_to(rows, d1.shape))
        bad = bad_from_permuted(d0, d1p)
        good = good_from_permuted(d0, d1p, enc[t + 1][:, 0::2])
        cur = np.stack([bad, good], axis=2).reshape(B, 2 << t, N >> (t + 1), q)
    return cur
