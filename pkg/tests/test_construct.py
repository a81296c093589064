import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nbpolar.ccsk import pn_generate
from nbpolar.construct import (
    Budgets,
    ReliabilityReport,
    _stage_scores,
    construct_code,
    estimate_error_probs,
    k_from_rate,
    optimize_coefficients,
    select_info_set,
    snr_to_sigma2,
    wer_bound,
)
from nbpolar.gf import gf_new
from nbpolar.pdist import bad_combine, good_combine
from nbpolar.polar import CoeffTree


def report(probs):
    probs = np.asarray(probs, dtype=float)
    return ReliabilityReport(probs, 1, 1.0, CoeffTree.constant(int(np.log2(probs.size))))


def direct_symbol_error(p, sigma2, trials, seed):
    """E[1 - Pi(sent)] by a plain loop, written without the library's channel code."""
    pn = pn_generate(p)
    q = pn.q
    rng = np.random.default_rng(seed)
    acc = []
    for _ in range(trials):
        u = int(rng.integers(q))
        y = np.roll(pn.chips, -u) + np.sqrt(sigma2) * rng.standard_normal(q)
        llr = 2 * y / sigma2
        corr = np.array([llr @ np.roll(pn.chips, -v) for v in range(q)])
        w = np.exp(0.5 * (corr - corr.max()))
        acc.append(1 - w[u] / w.sum())
    return np.mean(acc), np.std(acc) / np.sqrt(trials)


def test_noiseless_limit():
    gf = gf_new(3)
    tree = CoeffTree.random(gf, 3, np.random.default_rng(0))
    rep = estimate_error_probs(gf, 3, tree, 1e-4, 200, seed=1)
    assert rep.error_probs.max() < 1e-12
    assert rep.trials == 200


def test_single_channel_matches_direct_loop():
    gf = gf_new(4)
    sigma2 = snr_to_sigma2(-6.0)
    rep = estimate_error_probs(gf, 0, CoeffTree(0, []), sigma2, 20000, seed=3)
    ref, se = direct_symbol_error(4, sigma2, 4000, seed=11)
    assert abs(rep.error_probs[0] - ref) < 4 * se


def test_estimates_stable_across_seeds():
    gf = gf_new(3)
    tree = CoeffTree.random(gf, 4, np.random.default_rng(5))
    T = 4000
    a = estimate_error_probs(gf, 4, tree, snr_to_sigma2(-2.0), T, seed=1).error_probs
    b = estimate_error_probs(gf, 4, tree, snr_to_sigma2(-2.0), T, seed=2).error_probs
    p = (a + b) / 2
    # one-run values lie in [0, 1], so their variance is at most P(1 - P)
    sigma = np.sqrt(2 * p * (1 - p) / T)
    assert np.all(np.abs(a - b) <= 3 * sigma + 1e-12)
    assert not np.array_equal(a, b)


def test_threads_do_not_change_estimates():
    gf = gf_new(2)
    tree = CoeffTree.random(gf, 5, np.random.default_rng(1))
    kw = dict(sigma2=1.0, trials=70000, seed=9)
    a = estimate_error_probs(gf, 5, tree, **kw, threads=1).error_probs
    b = estimate_error_probs(gf, 5, tree, **kw, threads=4).error_probs
    assert np.array_equal(a, b)


def test_estimate_argument_checks():
    gf = gf_new(2)
    with pytest.raises(ValueError):
        estimate_error_probs(gf, 2, CoeffTree.constant(2), 1.0, 0)
    with pytest.raises(ValueError):
        estimate_error_probs(gf, 3, CoeffTree.constant(2), 1.0, 10)


def test_stage_scores_match_combine_rules():
    gf = gf_new(4)
    rng = np.random.default_rng(2)
    B, J, q = 7, 3, 16
    d0 = rng.exponential(size=(B, J, q)) ** 2
    d1 = rng.exponential(size=(B, J, q)) ** 2
    d0 /= d0.sum(-1, keepdims=True)
    d1 /= d1.sum(-1, keepdims=True)
    v0, v1 = rng.integers(0, q, (2, B, J))
    cands = np.array([1, 4, 9, 15])
    P0, P1 = _stage_scores(gf, d0, d1, v0, v1, cands)
    for i, h in enumerate(cands):
        u1 = gf.mul(gf.inv(h), v1)
        u0 = v0 ^ u1
        bad = bad_combine(gf, d0, d1, int(h))
        good = good_combine(gf, d0, d1, int(h), u0)
        e0 = 1 - np.take_along_axis(bad, u0[..., None], -1)[..., 0]
        e1 = 1 - np.take_along_axis(good, u1[..., None], -1)[..., 0]
        assert np.allclose(P0[i], e0.sum(0), atol=1e-12)
        assert np.allclose(P1[i], e1.sum(0), atol=1e-12)


def test_binary_field_gives_arikan_tree():
    tree = optimize_coefficients(gf_new(1), 4, 1.0, 10)
    assert np.array_equal(tree.coeffs, np.ones(15))


def test_selected_coefficients_maximize_gap():
    gf = gf_new(3)
    table = []
    tree = optimize_coefficients(gf, 3, snr_to_sigma2(-3.0), 300, seed=4, candidate_log=table)
    assert len(table) == 7 * 7
    for node in range(1, 8):
        rows = [r for r in table if r[0] == node]
        gaps = {h: abs(a - b) for _, h, a, b in rows}
        best = max(gaps.values())
        assert gaps[tree.at(node)] == best
        assert tree.at(node) == min(h for h, g in gaps.items() if g == best)


def test_candidate_subsample():
    gf = gf_new(5)
    table = []
    optimize_coefficients(gf, 2, 1.0, 50, seed=1, candidate_subsample=6, candidate_log=table)
    hs = sorted({h for _, h, _, _ in table})
    assert len(hs) == 6 and all(1 <= h < 32 for h in hs)


def test_optimizer_picks_statistically_best_root():
    # In GF(4) the candidates h=2 and h=3 are tied, so "the same h" is not a
    # well-posed check; the chosen h must be statistically as good as the
    # best one under a 10x independent re-estimate.
    gf, pn = gf_new(2), pn_generate(2)
    sigma2 = snr_to_sigma2(0.0)
    T = 2000
    ref = {}
    for h in (1, 2, 3):
        rep = estimate_error_probs(gf, 1, CoeffTree(1, [h]), sigma2, 10 * T, seed=999, pn=pn)
        ref[h] = abs(rep.error_probs[0] - rep.error_probs[1])
    best = max(ref.values())
    se = np.sqrt(2 * 0.25 / (10 * T))
    hits = 0
    for seed in range(20):
        h0 = optimize_coefficients(gf, 1, sigma2, T, seed=seed, pn=pn).at(1)
        hits += ref[h0] >= best - 3 * se
    assert hits >= 19


def test_select_info_set():
    rep = report([0.5, 0.1, 0.9, 0.2])
    assert select_info_set(rep, 0) == []
    assert select_info_set(rep, 4) == [0, 1, 2, 3]
    assert select_info_set(rep, 2) == [1, 3]
    assert select_info_set(report([0.1, 0.3, 0.1, 0.3]), 3) == [0, 1, 2]
    with pytest.raises(ValueError):
        select_info_set(rep, 5)


def test_wer_bound_values():
    assert wer_bound(report([0.3, 0.7]), [1]) == pytest.approx(0.7)
    assert wer_bound(report([0.1, 1.0]), [0, 1]) == 1.0
    assert wer_bound(report([0.1, 0.2]), [0, 1]) == pytest.approx(0.28)
    assert wer_bound(report([0.1, 0.2]), []) == 0.0


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=2, max_size=32), st.data())
def test_wer_bound_monotone(probs, data):
    n = int(np.log2(len(probs)))
    probs = probs[: 1 << n]
    rep = report(probs)
    idx = data.draw(st.sets(st.integers(0, len(probs) - 1)))
    extra = data.draw(st.integers(0, len(probs) - 1))
    assert wer_bound(rep, sorted(idx | {extra})) >= wer_bound(rep, sorted(idx)) - 1e-15


def test_rate_to_k_table_i():
    assert k_from_rate(0.5, 10) == 512
    assert k_from_rate(0.5, 10) * 6 == 3072
    assert (1 << 6) * 10 == 640 and (1 << 6) * 1024 == 65536
    with pytest.raises(ValueError):
        k_from_rate(1.5, 3)


def test_construct_zero_rate():
    gf = gf_new(3)
    code, rep = construct_code(gf, 2, 0, 0.0, Budgets(50, 100), seed=1)
    assert code.K == 0
    assert wer_bound(rep, code.info_set) == 0.0


def test_construct_small_code():
    gf = gf_new(3)
    code, rep = construct_code(gf, 3, 4, -2.0, Budgets(200, 2000), seed=1)
    assert code.K == 4 and code.N == 8
    assert rep.error_probs.shape == (8,)
    worst_info = rep.error_probs[list(code.info_set)].max()
    frozen = [i for i in range(8) if i not in code.info_set]
    assert worst_info <= rep.error_probs[frozen].min()
    with pytest.raises(ValueError):
        construct_code(gf, 3, 9, 0.0)
