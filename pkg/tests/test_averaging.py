import math

import numpy as np
import pytest

from coulomb_wavepacket import partialwave as pw
from coulomb_wavepacket.averaging import (
    ImpactKernel,
    QuadratureSpec,
    average_over_impact,
    impact_average,
    impact_nodes,
    impact_profile,
)
from coulomb_wavepacket.errors import DomainError, RegimeError
from coulomb_wavepacket.scenario import Scenario

ETA, EPS = 22.8, 0.001


def test_gaussian_profile_recovers_amplitude():
    quad = QuadratureSpec(beta_max=8.0)
    assert impact_average(lambda b, p: 2.5 * math.exp(-b * b), quad) == pytest.approx(2.5, rel=1e-10)


def test_azimuthal_rule_integrates_harmonics():
    quad = QuadratureSpec(beta_max=8.0, n_phi=9)
    for k in range(1, 9):
        val = impact_average(lambda b, p: math.exp(-b * b) * (1 + math.cos(k * p)), quad)
        assert val == pytest.approx(1.0, rel=1e-12)


def test_nodes():
    betas, w, phis = impact_nodes(QuadratureSpec(beta_max=3.0, n_beta=10, n_phi=12))
    assert math.fsum(w) == pytest.approx(3.0, rel=1e-14)
    assert np.all((betas > 0) & (betas < 3))
    assert phis[0] == 0.0 and len(phis) == 12


@pytest.mark.parametrize(
    "kw", [dict(n_phi=8), dict(n_beta=0), dict(beta_max=0.0), dict(delta_policy="nearest")]
)
def test_spec_validation(kw):
    with pytest.raises(DomainError):
        QuadratureSpec(**kw)


def test_policy_alias():
    assert QuadratureSpec(delta_policy="maximize_per_point").delta_policy == "per_point"


def test_beta_max_bound():
    with pytest.raises(RegimeError):
        ImpactKernel(0.1, ETA, 0.01, 11.0, kernel="general")


@pytest.mark.parametrize("theta", [0.10, 0.15, 0.20])
def test_beta_convergence(theta):
    a = average_over_impact(theta, ETA, EPS).value
    b = average_over_impact(theta, ETA, EPS, QuadratureSpec(n_beta=64)).value
    assert abs(b / a - 1) < 1e-6


def test_azimuthal_exactness():
    a = average_over_impact(0.12, ETA, EPS).value
    b = average_over_impact(0.12, ETA, EPS, QuadratureSpec(n_phi=32)).value
    assert abs(b / a - 1) < 1e-12


def test_even_in_phi():
    phis = np.linspace(0.0, math.pi, 9)
    grid = impact_profile(0.1, ETA, EPS, [0.7, 1.9], np.concatenate([phis, 2 * math.pi - phis[1:-1]]))
    half, mirror = grid[:, :9], grid[:, 9:]
    np.testing.assert_allclose(half[:, 1:-1], mirror, rtol=1e-12)
    # trapezoid on [0, pi] is exact for the even trig polynomial
    w = np.full(9, math.pi / 8)
    w[[0, -1]] /= 2
    full = impact_profile(0.1, ETA, EPS, [0.7, 1.9], 2 * math.pi * np.arange(16) / 16)
    np.testing.assert_allclose(2 * (half @ w), full.sum(axis=1) * 2 * math.pi / 16, rtol=1e-12)


def test_worker_count_does_not_change_bits():
    a = average_over_impact(0.15, ETA, EPS, workers=1)
    b = average_over_impact(0.15, ETA, EPS, workers=3)
    assert a.value == b.value


def test_delta_policies_agree():
    ref = average_over_impact(0.15, ETA, EPS)
    per = average_over_impact(0.15, ETA, EPS, QuadratureSpec(delta_policy="per_point"))
    assert math.isnan(per.delta_used)
    assert ref.delta_used > 0
    assert per.value == pytest.approx(ref.value, rel=1e-6)


def test_kernels_agree():
    a = average_over_impact(0.2, ETA, EPS).value
    b = average_over_impact(0.2, ETA, EPS, kernel="general").value
    assert a == pytest.approx(b, rel=5e-3)


def test_tail_beyond_three():
    a = average_over_impact(0.1, ETA, EPS, kernel="general").value
    b = average_over_impact(0.1, ETA, EPS, QuadratureSpec(beta_max=4.0, n_beta=48), kernel="general").value
    assert abs(b / a - 1) < 5e-3


def test_kernel_profile_matches_pointwise():
    k = ImpactKernel(0.1, ETA, EPS, 3.0)
    (csum,) = k.sums(1.3, [0.4])
    s = Scenario(ETA, EPS, 1.3, 0.4, 0.1, 0.25)
    assert csum(0.25) == pytest.approx(pw.probability_small_angle(s).value, rel=1e-13)


def test_profile_shape():
    grid = impact_profile(0.1, ETA, EPS, [0.0, 1.0], [0.0, 1.0, 2.0])
    assert grid.shape == (2, 3)
    np.testing.assert_allclose(grid[0], grid[0, 0], rtol=1e-12)
