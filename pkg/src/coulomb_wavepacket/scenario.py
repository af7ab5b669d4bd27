"""Dimensionless scattering parameters and the laboratory-to-model mapping.

Natural units throughout (MeV, hbar = c = 1).  Lengths handed back to the
caller are in angstrom.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .errors import DomainError, RegimeError

ALPHA = 1.0 / 137.035999084
HBARC_MEV_FM = 197.3269804
FM_PER_ANGSTROM = 1.0e5
C_ANGSTROM_PER_S = 2.99792458e18

# kinetic energy / rest mass above which nonrelativistic kinematics is refused
NONRELATIVISTIC_LIMIT = 0.01


@dataclass(frozen=True)
class Scenario:
    """Everything a probability evaluation depends on.

    ``delta=None`` asks angular evaluations to locate the maximizing time
    shift themselves.
    """

    eta: float
    eps: float
    beta: float = 0.0
    phi_b: float = 0.0
    theta: float = 0.0
    delta: float | None = None

    def __post_init__(self):
        if not (0.0 < self.eps <= 0.1):
            raise DomainError(f"eps must lie in (0, 0.1], got {self.eps}")
        if self.beta < 0.0:
            raise DomainError(f"beta must be non-negative, got {self.beta}")
        if self.beta > self.beta_limit:
            raise RegimeError(
                f"beta={self.beta} exceeds the validity bound 1/sqrt(eps)={self.beta_limit:.6g}"
            )
        if not (0.0 <= self.theta <= math.pi):
            raise DomainError(f"theta must lie in [0, pi], got {self.theta}")

    @property
    def beta_limit(self) -> float:
        return 1.0 / math.sqrt(self.eps)

    @property
    def bp(self) -> float:
        """Classical angular momentum ``b p`` in units of hbar."""
        return self.beta / (2.0 * self.eps)

    def replace(self, **changes) -> "Scenario":
        return replace(self, **changes)


@dataclass(frozen=True)
class PhysicalParams:
    z1: int
    z2: int
    kinetic_energy: float  # MeV
    projectile_mass: float  # MeV
    eps: float

    def __post_init__(self):
        for name in ("z1", "z2", "kinetic_energy", "projectile_mass", "eps"):
            if getattr(self, name) <= 0:
                raise DomainError(f"{name} must be positive")

    @property
    def nonrelativistic(self) -> bool:
        return self.kinetic_energy / self.projectile_mass < NONRELATIVISTIC_LIMIT


@dataclass(frozen=True)
class PhysicalMapping:
    """A :class:`Scenario` together with the lengths it was derived from."""

    scenario: Scenario
    params: PhysicalParams
    p_momentum: float  # MeV
    sigma_x: float  # angstrom
    r_start: float  # angstrom
    notes: dict = field(default_factory=dict)

    @property
    def sigma_p(self) -> float:
        return self.params.eps * self.p_momentum

    @property
    def velocity(self) -> float:
        """Projectile speed in units of c."""
        return self.p_momentum / self.params.projectile_mass


def scenario_from_physical(p: PhysicalParams) -> PhysicalMapping:
    """Map laboratory inputs to the dimensionless model parameters.

    ``eta`` carries the ``Z1 Z2`` charge product; the momentum is
    nonrelativistic, ``sqrt(2 m E)``.
    """
    if not p.nonrelativistic:
        raise RegimeError(
            f"E/m = {p.kinetic_energy / p.projectile_mass:.4g} is not below "
            f"{NONRELATIVISTIC_LIMIT}; nonrelativistic kinematics does not apply"
        )
    mom = math.sqrt(2.0 * p.projectile_mass * p.kinetic_energy)
    eta = p.z1 * p.z2 * ALPHA * p.projectile_mass / mom
    sigma_x_fm = HBARC_MEV_FM / (2.0 * p.eps * mom)
    sigma_x = sigma_x_fm / FM_PER_ANGSTROM
    r_start = sigma_x / math.sqrt(p.eps)
    return PhysicalMapping(
        scenario=Scenario(eta=eta, eps=p.eps, beta=0.0, phi_b=0.0, theta=0.0, delta=0.0),
        params=p,
        p_momentum=mom,
        sigma_x=sigma_x,
        r_start=r_start,
        notes={"kinematics": "nonrelativistic", "hbarc_MeV_fm": HBARC_MEV_FM, "alpha": ALPHA},
    )


def ln_2pR(s: Scenario | float) -> float:
    """``ln(2 p R)``, which reduces to ``-1.5 ln(eps)``.

    Accepts a :class:`Scenario` or a bare ``eps``.
    """
    eps = s.eps if isinstance(s, Scenario) else float(s)
    if eps <= 0.0:
        raise DomainError("eps must be positive")
    return -1.5 * math.log(eps)


def delta_of_time(T: float, mapping: PhysicalMapping) -> float:
    """Dimensionless time shift for an interaction time ``T`` in seconds."""
    travelled = mapping.velocity * C_ANGSTROM_PER_S * T
    return (travelled - 2.0 * mapping.r_start) / mapping.sigma_x


def time_shift_label(delta: float) -> str:
    if delta > 0.0:
        return "time delay"
    if delta < 0.0:
        return "advancement"
    return "none"
