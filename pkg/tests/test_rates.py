import math

import numpy as np
import pytest

from nbpolar.rates import effective_rate, estimate_rate_point, normal_approximation, q_func, q_func_inv


def q_bisect(eps):
    """Q^-1 by bisection on erfc, independent of scipy.stats."""
    lo, hi = -40.0, 40.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if 0.5 * math.erfc(mid / math.sqrt(2)) > eps:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_q_inverse_values():
    assert q_func_inv(0.5) == pytest.approx(0.0, abs=1e-12)
    assert q_bisect(1e-4) == pytest.approx(3.71901649, abs=1e-8)
    assert abs(q_func_inv(1e-4) - q_bisect(1e-4)) <= 1e-9


@pytest.mark.parametrize("x", [1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 0.1, 0.3, 0.5])
def test_q_roundtrip(x):
    assert abs(q_func(q_func_inv(x)) - x) <= 1e-9
    assert abs(q_func_inv(x) - q_bisect(x)) <= 1e-9


@pytest.mark.parametrize("eps", [0.0, 1.0, -0.1, 2.0])
def test_q_inverse_domain(eps):
    with pytest.raises(ValueError):
        q_func_inv(eps)


def test_normal_approximation():
    assert normal_approximation(0.7, 0.0, 100, 1e-4) == 0.7
    assert normal_approximation(0.7, 0.3, 100, 0.5) == pytest.approx(0.7)
    assert normal_approximation(0.7, 0.3, 100, 1e-3) < 0.7
    assert normal_approximation(0.5, 0.16, 64, 1e-4) == pytest.approx(0.5 - 0.05 * q_bisect(1e-4))
    with pytest.raises(ValueError):
        normal_approximation(0.5, -1.0, 10, 0.1)


def test_effective_rate():
    assert effective_rate(0.5, 6) == pytest.approx(3 / 64)
    assert effective_rate(0.0, 8) == 0.0
    assert effective_rate(0.9, 10) == pytest.approx(0.0087890625)


def test_rate_limits():
    hi = estimate_rate_point(6, 0.0, 20000, seed=1)
    assert hi.R > 0.99 and hi.V < 1e-2
    lo = estimate_rate_point(4, -45.0, 20000, seed=1)
    assert lo.R < 1e-3
    assert lo.V >= 0.0


def test_rate_monotone_in_snr():
    grid = np.arange(-25.0, -4.0, 2.5)
    pts = [estimate_rate_point(6, s, 20000, seed=2, key=i) for i, s in enumerate(grid)]
    R = np.array([p.R for p in pts])
    assert np.all(np.diff(R) > 0)
    assert all(p.V >= 0 for p in pts)


def test_rate_estimates_converge():
    T = 5000
    pts = [estimate_rate_point(4, -8.0, T, seed=3, key=k) for k in range(10)]
    reps = np.array([[pt.R, pt.V] for pt in pts])
    se = reps.std(axis=0, ddof=1)
    one = estimate_rate_point(4, -8.0, T, seed=4)
    two = estimate_rate_point(4, -8.0, 2 * T, seed=5)
    assert abs(one.R - two.R) < 3 * se[0] * math.sqrt(1.5)
    assert abs(one.V - two.V) < 3 * se[1] * math.sqrt(1.5)


def test_rate_point_is_deterministic():
    a = estimate_rate_point(5, -10.0, 3000, seed=7)
    b = estimate_rate_point(5, -10.0, 3000, seed=7, threads=3)
    assert a == b
