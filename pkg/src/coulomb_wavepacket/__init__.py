"""Coulomb scattering of Gaussian wavepackets by partial-wave summation."""

from .averaging import (
    QuadratureSpec,
    average_over_impact,
    averaging_identity_check,
    impact_average,
    impact_profile,
)
from .errors import ConfigError, DomainError, RegimeError, WavepacketError
from .partialwave import (
    PhaseShiftTable,
    ProbabilityResult,
    TruncationPolicy,
    build_phase_table,
    cross_section_from_probability,
    find_delta_max,
    lm_density,
    phi_free,
    probability_forward,
    probability_general,
    probability_head_on,
    probability_small_angle,
    rutherford_probability,
    theta_deviation,
    theta_rutherford_unity,
)
from .rutherford import ComparisonPoint, rutherford_cross_section
from .scenario import (
    PhysicalParams,
    Scenario,
    delta_of_time,
    ln_2pR,
    scenario_from_physical,
)

__version__ = "0.1.0"
