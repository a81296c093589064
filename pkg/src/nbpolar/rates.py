"""Capacity, dispersion and finite-blocklength rates of the CCSK/AWGN channel."""

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .ccsk import channel_posteriors, pn_generate
from .construct import snr_to_sigma2
from .mc import TASK_RATES, batch_plan, map_batches, rng_stream, stream_key
from .pdist import entropy_terms


@dataclass(frozen=True)
class RatePoint:
    snr_db: float
    R: float
    V: float
    trials: int


def estimate_rate_point(p, snr_db, trials, seed=0, pn=None, threads=1, key=0):
    """Monte-Carlo capacity R = 1 - H(U|Y) and dispersion V = H2 - H^2 (base-q logs)."""
    if trials < 1:
        raise ValueError("need at least one trial")
    pn = pn if pn is not None else pn_generate(p)
    q = 1 << p
    sigma2 = snr_to_sigma2(snr_db)
    sk = stream_key(TASK_RATES, key)

    def run(b, size):
        rng = rng_stream(seed, (sk << 32) + b)
        u = rng.integers(0, q, size=size)
        h1, h2 = entropy_terms(channel_posteriors(pn, u, sigma2, rng), q)
        return h1.sum(), h2.sum()

    s1 = s2 = 0.0
    for a, b in map_batches(run, batch_plan(trials, 16 * q), threads):
        s1 += a
        s2 += b
    H = s1 / trials
    R = 1.0 - H
    V = max(0.0, s2 / trials - H * H)
    return RatePoint(float(snr_db), R, V, trials)


def q_func(x):
    """Standard normal tail probability."""
    return norm.sf(x)


def q_func_inv(eps):
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    return float(norm.isf(eps))


def normal_approximation(R, V, N, eps):
    """R* = R - sqrt(V/N) Q^-1(eps)."""
    if V < 0 or N < 1:
        raise ValueError("need V >= 0 and N >= 1")
    return R - np.sqrt(V / N) * q_func_inv(eps)


def effective_rate(R, p):
    """Rate per chip, p*R/2^p, accounting for the CCSK spreading."""
    return p * R / (1 << p)
