"""Arithmetic in GF(2^p) via log/antilog tables."""

from dataclasses import dataclass, field

import numpy as np

MAX_DEGREE = 12

# Lexicographically smallest primitive polynomial of each degree (bit k = coeff of x^k).
PRIMITIVE_POLYS = {
    1: 0x3,
    2: 0x7,
    3: 0xB,
    4: 0x13,
    5: 0x25,
    6: 0x43,
    7: 0x83,
    8: 0x11D,
    9: 0x211,
    10: 0x409,
    11: 0x805,
    12: 0x1053,
}


@dataclass(frozen=True, eq=False)
class GfContext:
    """Tables for GF(q), q = 2**p.

    ``antilog[k] = x**k`` for k in 0..q-2 and ``log`` is its inverse on the
    nonzero elements (``log[0]`` is unused and set to -1).
    """

    p: int
    q: int
    prim_poly: int
    log_table: np.ndarray = field(repr=False)
    antilog_table: np.ndarray = field(repr=False)

    def mul(self, a, b):
        """Elementwise product of (arrays of) field elements."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        k = (self.log_table[a] + self.log_table[b]) % (self.q - 1)
        return np.where((a == 0) | (b == 0), 0, self.antilog_table[k])

    def inv(self, a):
        a = np.asarray(a, dtype=np.int64)
        if np.any(a == 0):
            raise ZeroDivisionError("0 has no multiplicative inverse")
        return self.antilog_table[(-self.log_table[a]) % (self.q - 1)]

    def mul_row(self, h):
        """The map u -> h*u as an index array of length q."""
        return self.mul(h, np.arange(self.q))


def _is_primitive(poly, p):
    q = 1 << p
    if poly >> p != 1:
        return False
    x = 1
    for k in range(1, q):
        x <<= 1
        if x & q:
            x ^= poly
        if x == 1:
            return k == q - 1
    return False


def gf_new(p, prim_poly=None):
    """Build the tables for GF(2^p).

    Parameters
    ----------
    p : int
        Field degree, 1 <= p <= 12.
    prim_poly : int, optional
        Primitive polynomial bitmask of degree p. Defaults to
        ``PRIMITIVE_POLYS[p]``.
    """
    if not 1 <= p <= MAX_DEGREE:
        raise ValueError(f"field degree must be in 1..{MAX_DEGREE}, got {p}")
    if prim_poly is None:
        prim_poly = PRIMITIVE_POLYS[p]
    if not _is_primitive(prim_poly, p):
        raise ValueError(f"{prim_poly:#x} is not a primitive polynomial of degree {p}")
    q = 1 << p
    antilog = np.zeros(q - 1, dtype=np.int64)
    log = np.full(q, -1, dtype=np.int64)
    x = 1
    for k in range(q - 1):
        antilog[k] = x
        log[x] = k
        x <<= 1
        if x & q:
            x ^= prim_poly
    log.setflags(write=False)
    antilog.setflags(write=False)
    return GfContext(p, q, prim_poly, log, antilog)


def gf_add(a, b):
    return a ^ b


def gf_mul(ctx, a, b):
    if a == 0 or b == 0:
        return 0
    return int(ctx.antilog_table[(ctx.log_table[a] + ctx.log_table[b]) % (ctx.q - 1)])


def gf_inv(ctx, a):
    if a == 0:
        raise ZeroDivisionError("0 has no multiplicative inverse")
    return int(ctx.antilog_table[(-ctx.log_table[a]) % (ctx.q - 1)])
