import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coulomb_wavepacket.errors import DomainError, RegimeError
from coulomb_wavepacket.scenario import (
    C_ANGSTROM_PER_S,
    HBARC_MEV_FM,
    PhysicalParams,
    Scenario,
    delta_of_time,
    ln_2pR,
    scenario_from_physical,
    time_shift_label,
)

GOLD_ALPHA = PhysicalParams(79, 2, 4.8, 3727.379, 0.001)


def test_gold_alpha_mapping():
    m = scenario_from_physical(GOLD_ALPHA)
    assert m.scenario.eta == pytest.approx(22.8, rel=0.01)
    assert m.sigma_x == pytest.approx(0.0052, rel=0.02)
    assert (m.scenario.beta, m.scenario.phi_b, m.scenario.theta, m.scenario.delta) == (0, 0, 0, 0)


def test_gold_alpha_start_separation():
    # R = sigma_x / sqrt(eps) lands at 0.1649 A
    m = scenario_from_physical(GOLD_ALPHA)
    assert m.r_start == pytest.approx(0.16494, rel=1e-4)


def test_eta_halves_when_energy_quadruples():
    a = scenario_from_physical(GOLD_ALPHA).scenario.eta
    b = scenario_from_physical(PhysicalParams(79, 2, 19.2, 3727.379, 0.001)).scenario.eta
    assert b == pytest.approx(a / 2, rel=1e-14)


@settings(max_examples=30, deadline=None)
@given(
    st.integers(1, 100),
    st.integers(1, 10),
    st.floats(0.1, 8.0),
    st.floats(900.0, 1e4),
    st.floats(1e-4, 0.1),
)
def test_length_ratio_and_log(z1, z2, energy, mass, eps):
    m = scenario_from_physical(PhysicalParams(z1, z2, energy, mass, eps))
    assert m.r_start / m.sigma_x == pytest.approx(1 / math.sqrt(eps), rel=1e-14)
    # 2 p R in natural units, with R converted back from angstrom
    r_natural = m.r_start * 1e5 / HBARC_MEV_FM
    assert math.log(2 * m.p_momentum * r_natural) == pytest.approx(-1.5 * math.log(eps), rel=1e-10)


def test_ln_2pR_values():
    assert ln_2pR(0.001) == pytest.approx(10.361632918473207, rel=1e-15)
    assert ln_2pR(1.0) == 0.0
    assert ln_2pR(Scenario(1.0, 0.001)) == ln_2pR(0.001)


def test_relativistic_rejected():
    with pytest.raises(RegimeError, match="nonrelativistic"):
        scenario_from_physical(PhysicalParams(1, 1, 100.0, 938.0, 0.001))


def test_nonpositive_inputs_rejected():
    with pytest.raises(DomainError):
        PhysicalParams(0, 2, 4.8, 3727.379, 0.001)


def test_delta_of_time():
    m = scenario_from_physical(GOLD_ALPHA)
    t_centered = 2 * m.r_start / (m.velocity * C_ANGSTROM_PER_S)
    assert delta_of_time(t_centered, m) == pytest.approx(0.0, abs=1e-9)
    assert delta_of_time(0.0, m) == pytest.approx(-2 / math.sqrt(0.001), rel=1e-14)


def test_time_shift_labels():
    assert time_shift_label(0.5) == "time delay"
    assert time_shift_label(-0.1) == "advancement"
    assert time_shift_label(0.0) == "none"


class TestScenario:
    def test_bp(self):
        s = Scenario(22.8, 0.001, beta=10.0)
        assert s.bp == 5000.0
        assert s.bp * 2 * s.eps == s.beta

    def test_beta_bound(self):
        Scenario(1.0, 0.001, beta=31.6)
        with pytest.raises(RegimeError):
            Scenario(1.0, 0.001, beta=31.7)

    @pytest.mark.parametrize(
        "kw", [dict(eps=0.0), dict(eps=0.2), dict(beta=-1.0), dict(theta=4.0)]
    )
    def test_invalid(self, kw):
        args = dict(eta=1.0, eps=0.001) | kw
        with pytest.raises(DomainError):
            Scenario(**args)

    def test_frozen_and_replace(self):
        s = Scenario(22.8, 0.001)
        with pytest.raises(AttributeError):
            s.beta = 1.0
        t = s.replace(beta=2.0)
        assert t.beta == 2.0 and s.beta == 0.0
