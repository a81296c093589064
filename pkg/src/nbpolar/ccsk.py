"""CCSK modulation over real AWGN and demodulation to symbol posteriors.

All functions accept arbitrary leading batch dimensions; the chip/symbol axis
is always the last one.
"""

from dataclasses import dataclass, field

import numpy as np

from .gf import PRIMITIVE_POLYS

PROB_FLOOR = 1e-300


@dataclass(frozen=True, eq=False)
class PnSequence:
    p: int
    chips: np.ndarray = field(repr=False)
    feedback_poly: int

    @property
    def q(self):
        return 1 << self.p

    def __post_init__(self):
        self.chips.setflags(write=False)


@dataclass(frozen=True)
class ChannelObservation:
    y: np.ndarray
    sigma2: float


def pn_generate(p, feedback_poly=None):
    """Length-q PN sequence from a Fibonacci LFSR.

    The register starts at all ones and runs through its full period q-1;
    the bits obey a[k+p] = sum_i c_i a[k+i] (mod 2) where c_i are the
    lower coefficients of ``feedback_poly``. Bit b maps to chip 1-2b, and
    one +1 chip is appended to reach length q.
    """
    if p < 2:
        raise ValueError(f"PN sequences need p >= 2, got {p}")
    if feedback_poly is None:
        feedback_poly = PRIMITIVE_POLYS[p]
    if feedback_poly >> p != 1:
        raise ValueError(f"feedback polynomial {feedback_poly:#x} is not of degree {p}")
    q = 1 << p
    taps = [i for i in range(p) if (feedback_poly >> i) & 1]
    state = [1] * p
    start = tuple(state)
    bits = []
    for k in range(q - 1):
        bits.append(state[0])
        state = state[1:] + [sum(state[i] for i in taps) & 1]
        if tuple(state) == start and k < q - 2:
            raise ValueError(f"{feedback_poly:#x} is not primitive: LFSR period {k + 1} < {q - 1}")
    if tuple(state) != start:
        raise ValueError(f"{feedback_poly:#x} is not primitive")
    chips = np.ones(q)
    chips[: q - 1] = 1.0 - 2.0 * np.array(bits, dtype=float)
    return PnSequence(p, chips, feedback_poly)


def ccsk_modulate(pn, u):
    """Chip sequence(s) P_u(i) = P_0((i + u) mod q) for symbol(s) u."""
    u = np.asarray(u, dtype=np.int64)
    idx = (np.arange(pn.q) + u[..., None]) % pn.q
    return pn.chips[idx]


def awgn_transmit(chips, sigma2, rng):
    if sigma2 <= 0:
        raise ValueError("noise variance must be positive")
    z = rng.standard_normal(np.shape(chips))
    return ChannelObservation(chips + np.sqrt(sigma2) * z, float(sigma2))


def llr_chips(obs):
    return (2.0 / obs.sigma2) * obs.y


def correlate_fft(llr, pn):
    """All q dot products llr . P_u via the DFT correlation identity."""
    q = pn.q
    spec = np.conj(np.fft.rfft(llr, axis=-1)) * np.fft.rfft(pn.chips)
    return np.fft.irfft(spec, n=q, axis=-1)


def correlate_direct(llr, pn):
    """O(q^2) reference for :func:`correlate_fft`."""
    llr = np.asarray(llr, dtype=float)
    if llr.shape[-1] != pn.q:
        raise ValueError(f"expected {pn.q} chips, got {llr.shape[-1]}")
    out = np.empty(llr.shape)
    for u in range(pn.q):
        out[..., u] = llr @ np.roll(pn.chips, -u)
    return out


def symbol_llrs(pn, llr):
    """Gamma(u) = (llr.P_0 - llr.P_u) / 2."""
    corr = correlate_fft(llr, pn)
    return 0.5 * (corr[..., :1] - corr)


def ccsk_demodulate(pn, llr):
    """Posterior distribution of the transmitted symbol given chip LLRs.

    Returns an array with the same shape as ``llr`` whose last axis is a
    probability distribution over the q symbols.
    """
    llr = np.asarray(llr, dtype=float)
    if llr.shape[-1] != pn.q:
        raise ValueError(f"expected {pn.q} chips, got {llr.shape[-1]}")
    gamma = symbol_llrs(pn, llr)
    w = np.exp(gamma.min(axis=-1, keepdims=True) - gamma)
    w /= w.sum(axis=-1, keepdims=True)
    if w.min() < PROB_FLOOR:
        np.maximum(w, PROB_FLOOR, out=w)
        w /= w.sum(axis=-1, keepdims=True)
    return w


def channel_posteriors(pn, symbols, sigma2, rng):
    """Modulate, transmit and demodulate an array of symbols in one go."""
    obs = awgn_transmit(ccsk_modulate(pn, symbols), sigma2, rng)
    return ccsk_demodulate(pn, llr_chips(obs))
