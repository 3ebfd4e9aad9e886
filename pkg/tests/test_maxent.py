import math

import numpy as np
import pytest

from helpers import random_mixture
from momentsteer.densities import DensitySpec
from momentsteer.errors import EntropyOrderViolated, MomentsInfeasible
from momentsteer.maxent import (
    error_report,
    fit_maxent,
    kl_via_entropy,
    shannon_entropy,
    terminal_error_bound,
    tv_from_kl,
)
from momentsteer.moments import moments_of_density

LOG_SQRT_2PI = 0.5 * math.log(2 * math.pi)


def test_fit_standard_gaussian():
    q = fit_maxent([0.0, 1.0])
    np.testing.assert_allclose(q.lambdas, [LOG_SQRT_2PI, 0.0, 0.5], atol=1e-6)
    assert shannon_entropy(q) == pytest.approx(0.5 * math.log(2 * math.pi * math.e), abs=1e-8)


def test_fit_shifted_gaussian():
    q = fit_maxent([1.0, 2.0])
    np.testing.assert_allclose(q.lambdas, [0.5 + LOG_SQRT_2PI, -1.0, 0.5], atol=1e-6)


def test_fit_four_moments_self_consistent():
    m = [1.0, 5.0, 13.0, 73.0]
    q = fit_maxent(m)
    np.testing.assert_allclose(q.moments().values, m, rtol=1e-6)
    assert q.lambdas[-1] >= 0


def test_fit_bounded_support():
    q = fit_maxent([0.5, 1.0 / 3.0], support=(0.0, 1.0))
    # uniform on [0, 1] is its own max-entropy density
    np.testing.assert_allclose(q.lambdas, [0.0, 0.0, 0.0], atol=1e-6)
    assert shannon_entropy(q) == pytest.approx(0.0, abs=1e-8)


def test_fit_rejects_unreachable_moments():
    # kurtosis 6 and no skew: exp(-quartic) is always lighter-tailed than that
    with pytest.raises(MomentsInfeasible):
        fit_maxent(moments_of_density(DensitySpec.laplace_mixture([1.0], [0.0], [1.0]), 2))
    with pytest.raises(MomentsInfeasible):
        fit_maxent([0.0, 1.0, 0.0, 0.5])


@pytest.mark.parametrize("density,expected", [
    (DensitySpec.gaussian(0, 1), 0.5 * math.log(2 * math.pi * math.e)),
    (DensitySpec.uniform(0, 1), 0.0),
    (DensitySpec.gaussian(1, 2), 0.5 * math.log(2 * math.pi * math.e * 4)),
])
def test_shannon_entropy(density, expected):
    assert shannon_entropy(density) == pytest.approx(expected, abs=1e-8)


def test_kl_via_entropy():
    assert kl_via_entropy(1.3, 1.3) == 0.0
    assert kl_via_entropy(1.5, 2.0) == pytest.approx(0.5)
    assert kl_via_entropy(1.0, 1.0 - 1e-10) == 0.0
    with pytest.raises(EntropyOrderViolated):
        kl_via_entropy(1.0, 0.9)
    tau = DensitySpec.gaussian(0.3, 1.7)
    q = fit_maxent(moments_of_density(tau, 1))
    assert kl_via_entropy(shannon_entropy(tau), shannon_entropy(q)) == pytest.approx(0.0, abs=1e-8)


def test_tv_from_kl():
    assert tv_from_kl(0.0) == 0.0
    assert tv_from_kl(0.09) == pytest.approx(3 * math.sqrt(math.sqrt(1.04) - 1), rel=1e-14)
    assert tv_from_kl(0.09) == pytest.approx(0.422179, abs=1e-6)
    kl = np.linspace(0.0, 1.0, 2001)
    tv = np.array([tv_from_kl(k) for k in kl])
    assert np.all(np.diff(tv) > 0)
    assert np.all(tv <= np.sqrt(2 * kl) + 0.35)
    # no cancellation for tiny arguments: tv ~ sqrt(2 kl) as kl -> 0
    assert tv_from_kl(1e-20) == pytest.approx(math.sqrt(2e-20), rel=1e-9)
    with pytest.raises(ValueError):
        tv_from_kl(-1e-3)


def test_maxent_dominates_random_mixtures():
    checked = 0
    for seed in range(60):
        rng = np.random.default_rng(seed)
        d = random_mixture(rng)
        n = 1 + seed % 2
        try:
            q = fit_maxent(moments_of_density(d, n))
        except MomentsInfeasible:
            continue  # entropy supremum not attained for these moments
        np.testing.assert_allclose(q.moments().values, moments_of_density(d, n).values,
                                   rtol=1e-6, atol=1e-6)
        assert shannon_entropy(q) >= shannon_entropy(d) - 1e-8
        checked += 1
    assert checked >= 40


def test_gaussian_bound_is_zero():
    tau = DensitySpec.gaussian(1.0, 2.0)
    assert terminal_error_bound(tau, tau, 1) == pytest.approx(0.0, abs=1e-6)


def test_bound_self_and_nonnegative():
    tau = DensitySpec.laplace_mixture([0.7, 0.3], [1.0, -3.0], [1.0, 1.0])
    rep = error_report(tau, tau, 2)
    assert rep.KL_desired > 0
    assert rep.TV_bound == pytest.approx(2 * tv_from_kl(rep.KL_desired), rel=1e-12)
    assert rep.KL_desired == pytest.approx(0.1088, abs=5e-4)
    assert len(rep.lines()) == 6


def test_ex5_golden():
    # N(0,1) -> N(1,4) with 2000 agents, uniform coefficients, seed 0
    from momentsteer.engine import run_occupation_steering
    from momentsteer.system import SystemSchedule

    tau = DensitySpec.gaussian(1.0, 2.0)
    sched = SystemSchedule.uniform(4, 2, 0.5, 0.7, 0)
    _, ens = run_occupation_steering(DensitySpec.gaussian(0, 1), tau, sched,
                                     rng_master=0, n_agents=2000)
    rep = error_report(ens.states, tau, 2)
    assert rep.H_maxent == pytest.approx(0.5 * math.log(2 * math.pi * math.e * 4), abs=1e-8)
    assert rep.H_terminal == pytest.approx(2.130072877840316, abs=1e-10)
    # the spacing estimate lands above the max-entropy value, so KL clips to 0
    assert rep.KL_terminal == 0.0
    assert rep.TV_bound == pytest.approx(0.0, abs=1e-6)
    assert math.isfinite(terminal_error_bound(ens.states, tau, 2))
