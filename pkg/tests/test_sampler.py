import math

import numpy as np
import pytest
from scipy.integrate import cumulative_trapezoid

from momentsteer import realizer as R
from momentsteer.densities import DensitySpec
from momentsteer.errors import AcceptanceStalled, UnboundedRatio
from momentsteer.sampler import (
    SAFETY_FACTOR,
    RngStream,
    agent_stream,
    default_candidate,
    rejection_constant,
    sample_ensemble,
    sample_one,
)

E00 = np.diag([1.0, 0.0, 0.0])
N01 = R.from_lambda(E00, DensitySpec.gaussian(0, 1))
UNIF = R.from_lambda(E00, DensitySpec.uniform(-2, 2))


@pytest.fixture(scope="module")
def n14():
    return R.minimize([1.0, 5.0, 13.0, 73.0])


@pytest.fixture(scope="module")
def boxed():
    return R.minimize([0.3, 0.8, 0.4, 1.2], support=(-2.0, 2.0))


def target_cdf(p, lo, hi, points=200_001):
    u = np.linspace(lo, hi, points)
    F = cumulative_trapezoid(p.pdf(u), u, initial=0.0)
    return lambda x: np.interp(x, u, F / F[-1])


def test_rejection_constant_gaussian_vs_cauchy():
    c = rejection_constant(N01, DensitySpec.cauchy(0, 1))
    # phi(u) pi (1 + u^2) peaks at u = +-1; the grid maximum sits just below
    peak = math.sqrt(2 * math.pi) * math.exp(-0.5)
    assert peak - 2e-4 < c / SAFETY_FACTOR <= peak
    assert c / SAFETY_FACTOR == pytest.approx(1.5203, abs=2e-4)


def test_rejection_constant_self():
    assert rejection_constant(UNIF, DensitySpec.uniform(-2, 2)) == pytest.approx(1.1, rel=1e-12)


def test_rejection_constant_compact_target_wide_candidate(boxed):
    c = rejection_constant(boxed, DensitySpec.gaussian(0, 1))
    assert math.isfinite(c) and c > 1.0


def test_unbounded_ratio():
    # Gaussian candidate lighter than a Cauchy-reference target
    heavy = R.from_lambda(E00, DensitySpec.cauchy(0, 1))
    with pytest.raises(UnboundedRatio):
        rejection_constant(heavy, DensitySpec.gaussian(0, 1))
    with pytest.raises(UnboundedRatio):
        rejection_constant(UNIF, DensitySpec.uniform(-1, 1))


def test_acceptance_rate_self():
    s, trials = sample_ensemble(UNIF, DensitySpec.uniform(-2, 2), 20_000, 3, c=1.1,
                                return_trials=True)
    assert trials.mean() == pytest.approx(1.1, rel=0.02)


def test_acceptance_rate_matches_constant(n14):
    cand = default_candidate(n14)
    c = rejection_constant(n14, cand)
    _, trials = sample_ensemble(n14, cand, 20_000, 5, c=c, return_trials=True)
    assert 1.0 / trials.mean() == pytest.approx(1.0 / c, rel=0.1)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_distribution_ks(n14, seed):
    N = 10_000
    s = np.sort(sample_ensemble(n14, n_agents=N, rng_master=seed))
    F = target_cdf(n14, -30.0, 32.0)(s)
    ecdf_hi = np.arange(1, N + 1) / N
    D = max(np.max(ecdf_hi - F), np.max(F - (ecdf_hi - 1.0 / N)))
    assert D < 1.63 / math.sqrt(N)


def test_constrained_samples_in_interval(boxed):
    for seed in range(3):
        s = sample_ensemble(boxed, n_agents=5000, rng_master=seed)
        assert np.all((s >= -2.0) & (s <= 2.0))


def test_moment_convergence(n14):
    N = 50_000
    s = sample_ensemble(n14, n_agents=N, rng_master=7)
    want = R.realized_moments(n14).values
    for l in range(1, 5):
        v = s ** l
        assert abs(v.mean() - want[l - 1]) <= 5 * v.std() / math.sqrt(N)


def test_mean_within_clt(n14):
    s = sample_ensemble(n14, n_agents=2000, rng_master=0)
    assert abs(s.mean() - 1.0) < 0.134


def test_determinism_and_workers(n14):
    a = sample_ensemble(n14, n_agents=1000, rng_master=11, step=2)
    b = sample_ensemble(n14, n_agents=1000, rng_master=11, step=2, workers=4)
    c = sample_ensemble(n14, n_agents=1000, rng_master=12, step=2)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)
    # agent i's draw does not depend on the ensemble size
    np.testing.assert_array_equal(sample_ensemble(n14, n_agents=10, rng_master=11, step=2), a[:10])
    cand = default_candidate(n14)
    c0 = rejection_constant(n14, cand)
    x = sample_one(n14, cand, c0, agent_stream(11, 2, 0))
    assert x == a[0]
    assert len(sample_ensemble(n14, n_agents=1)) == 1


def test_rng_stream():
    s = RngStream(5, (1, 2))
    assert s.generator().random() == RngStream(5, (1, 2)).generator().random()
    assert s.child(3) == RngStream(5, (1, 2, 3))
    assert s.generator().random() != s.child(3).generator().random()


def test_acceptance_stalled():
    # c far too large: each trial is accepted with probability ~1e-12
    with pytest.raises(AcceptanceStalled):
        sample_ensemble(N01, DensitySpec.cauchy(0, 1), 2, 0, c=1e12, max_rejections=1000)


def test_bad_inputs(n14):
    with pytest.raises(ValueError):
        sample_ensemble(n14, n_agents=0)
    with pytest.raises(ValueError):
        rejection_constant(n14, DensitySpec.laplace_mixture([1.0], [0.0], [1.0]))
