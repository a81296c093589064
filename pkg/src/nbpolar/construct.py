"""Monte-Carlo code construction: reliabilities, kernel coefficients, info set."""

from dataclasses import dataclass
import logging

import numpy as np

from .ccsk import channel_posteriors, pn_generate
from .mc import (
    TASK_OPTIMIZE,
    TASK_RELIABILITY,
    TASK_SUBSAMPLE,
    batch_plan,
    map_batches,
    rng_stream,
    stream_key,
)
from .polar import CoeffTree, PolarCode, encode_levels, genie_descend
from .pdist import gather_last

log = logging.getLogger(__name__)


@dataclass
class Budgets:
    opt_trials: int = 2000
    final_trials: int = 100_000
    candidate_subsample: int | None = None

    def as_dict(self):
        return {
            "opt_trials": self.opt_trials,
            "final_trials": self.final_trials,
            "candidate_subsample": self.candidate_subsample,
        }


@dataclass
class ReliabilityReport:
    error_probs: np.ndarray
    trials: int
    sigma2: float
    tree: CoeffTree


def snr_to_sigma2(snr_db):
    return 10.0 ** (-snr_db / 10.0)


def k_from_rate(rate, n):
    """Number of information symbols for native rate ``rate`` at length 2**n."""
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"rate must lie in [0, 1], got {rate}")
    return int(round(rate * (1 << n)))


def _one_run_errors(leaves, u):
    """1 - Pi(true symbol) per leaf, summed over the batch.

    Computed as the mass on the wrong symbols to keep small values accurate.
    """
    wrong = leaves.copy()
    np.put_along_axis(wrong, u[..., None], 0.0, axis=-1)
    return wrong.sum(axis=-1).sum(axis=0)


def estimate_error_probs(gf, n, tree, sigma2, trials, seed=0, pn=None, threads=1, key=0):
    """Genie-aided Monte-Carlo estimate of every virtual channel's error probability.

    Each trial draws uniform inputs, encodes, sends every coded symbol
    through CCSK + AWGN, runs the genie decoder and records the one-run
    error probability of each leaf.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    if tree.n != n:
        raise ValueError(f"tree depth {tree.n} does not match n={n}")
    pn = pn if pn is not None else pn_generate(gf.p)
    N = 1 << n
    sk = stream_key(TASK_RELIABILITY, key)

    def run(b, size):
        rng = rng_stream(seed, (sk << 32) + b)
        u = rng.integers(0, gf.q, size=(size, N))
        enc = encode_levels(gf, tree, u)
        D = channel_posteriors(pn, enc[0][:, 0, :], sigma2, rng)
        leaves = genie_descend(gf, tree, D, enc, n)[:, :, 0, :]
        return _one_run_errors(leaves, u)

    total = np.zeros(N)
    for part in map_batches(run, batch_plan(trials, N * gf.q), threads):
        total += part
    return ReliabilityReport(total / trials, trials, float(sigma2), tree)


def _stage_scores(gf, d0, d1, v0, v1, candidates):
    """Summed one-run error probabilities of both children, per candidate and node.

    ``d0``/``d1`` (B, nodes, q) are genie posteriors of the kernel outputs
    (v0, v1). For coefficient h the true inputs are u1 = v1/h and
    u0 = v0 + u1, and

        bad posterior of u0  = S(h) = sum_w d0(v0 + (v1 + w)/h) d1(w)
        good posterior of u1 = d0(v0) d1(v1) / S(h)

    which is what the bad/good combine rules give at the true symbols.
    """
    q = gf.q
    d0 = np.ascontiguousarray(d0)
    p_v = np.take_along_axis(d0, v0[..., None], -1)[..., 0] * np.take_along_axis(d1, v1[..., None], -1)[..., 0]
    vw = v1[..., None] ^ np.arange(q)
    P0 = np.empty((len(candidates), d0.shape[1]))
    P1 = np.empty_like(P0)
    for i, h in enumerate(candidates):
        hinv = int(gf.inv(h))
        idx = v0[..., None] ^ gf.mul(hinv, vw)
        S = np.einsum("bjq,bjq->bj", gather_last(d0, idx), d1)
        P0[i] = (1.0 - S).sum(axis=0)
        P1[i] = (1.0 - p_v / S).sum(axis=0)
    return P0, P1


def optimize_coefficients(gf, n, sigma2, trials_per_candidate, seed=0, pn=None, threads=1,
                          candidate_subsample=None, candidate_log=None):
    """Choose kernel coefficients stage by stage, from the channel side inward.

    At every node the coefficient maximizing |P(bad child) - P(good child)|
    is kept (smallest h on ties). All candidates at a stage share the same
    channel-side symbols and noise. When ``candidate_log`` is a list it
    receives one ``(heap_index, h, P_bad, P_good)`` tuple per evaluation.
    """
    if n < 1:
        raise ValueError("need at least one polarization step")
    if trials_per_candidate < 1:
        raise ValueError("need at least one trial per candidate")
    pn = pn if pn is not None else pn_generate(gf.p) if gf.q > 2 else None
    candidates = np.arange(1, gf.q)
    if candidate_subsample is not None and candidate_subsample < candidates.size:
        rng = rng_stream(seed, stream_key(TASK_SUBSAMPLE) << 32)
        candidates = np.sort(rng.choice(candidates, size=candidate_subsample, replace=False))
    coeffs = np.ones((1 << n) - 1, dtype=np.int64)
    if candidates.size == 1:
        coeffs[:] = candidates[0]
        return CoeffTree(n, coeffs)

    for t in range(n):
        s = t + 1
        # depth-s prefix; level-t entries are placeholders, only levels < t matter
        sub = CoeffTree(s, coeffs[: (1 << s) - 1])
        sk = stream_key(TASK_OPTIMIZE, s)

        def run(b, size, sub=sub, t=t, sk=sk):
            rng = rng_stream(seed, (sk << 32) + b)
            u = rng.integers(0, gf.q, size=(size, 1 << s))
            enc = encode_levels(gf, sub, u)
            D = channel_posteriors(pn, enc[0][:, 0, :], sigma2, rng)
            inputs = genie_descend(gf, sub, D, enc, t)
            v = enc[t]
            return _stage_scores(gf, inputs[:, :, 0], inputs[:, :, 1], v[:, :, 0], v[:, :, 1], candidates)

        P0 = np.zeros((candidates.size, 1 << t))
        P1 = np.zeros_like(P0)
        for a, b in map_batches(run, batch_plan(trials_per_candidate, (1 << s) * gf.q), threads):
            P0 += a
            P1 += b
        P0 /= trials_per_candidate
        P1 /= trials_per_candidate
        best = np.argmax(np.abs(P0 - P1), axis=0)
        coeffs[(1 << t) - 1 : (1 << s) - 1] = candidates[best]
        if candidate_log is not None:
            for j in range(1 << t):
                for i, h in enumerate(candidates):
                    candidate_log.append(((1 << t) + j, int(h), float(P0[i, j]), float(P1[i, j])))
        log.debug("stage %d coefficients %s", s, candidates[best])
    return CoeffTree(n, coeffs)


def select_info_set(report, K):
    """Indices of the K most reliable leaves, ascending (ties to the smaller index)."""
    probs = np.asarray(report.error_probs)
    if not 0 <= K <= probs.size:
        raise ValueError(f"K must be in 0..{probs.size}, got {K}")
    order = np.argsort(probs, kind="stable")
    return sorted(int(i) for i in order[:K])


def wer_bound(report, info_set):
    """1 - prod(1 - P) over the information positions."""
    probs = np.asarray(report.error_probs)[list(info_set)]
    if not probs.size:
        return 0.0
    with np.errstate(divide="ignore"):
        return float(-np.expm1(np.sum(np.log1p(-probs))))


def construct_code(gf, n, K, snr_db, budgets=None, seed=0, pn=None, threads=1, candidate_log=None):
    """Optimize coefficients, re-estimate reliabilities, pick the info set.

    Returns
    -------
    code : PolarCode
    report : ReliabilityReport
        From the final high-budget pass; ``wer_bound(report, code.info_set)``
        is the construction-time WER estimate.
    """
    budgets = budgets or Budgets()
    N = 1 << n
    if not 0 <= K <= N:
        raise ValueError(f"K must be in 0..{N}, got {K}")
    sigma2 = snr_to_sigma2(snr_db)
    pn = pn if pn is not None else pn_generate(gf.p)
    if n == 0:
        tree = CoeffTree(0, [])
    else:
        tree = optimize_coefficients(gf, n, sigma2, budgets.opt_trials, seed, pn, threads,
                                     budgets.candidate_subsample, candidate_log)
    report = estimate_error_probs(gf, n, tree, sigma2, budgets.final_trials, seed, pn, threads)
    info = select_info_set(report, K)
    return PolarCode(gf, tree, tuple(info), 0, float(snr_db)), report
