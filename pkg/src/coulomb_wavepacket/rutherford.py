"""Classical Rutherford reference curves."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .scenario import ALPHA, FM_PER_ANGSTROM, HBARC_MEV_FM

FM2_PER_BARN = 100.0


def rutherford_cross_section(theta, z1: int, z2: int, energy: float):
    """Rutherford ``d sigma / d Omega`` in MeV^-2 per steradian.

    ``energy`` is the nonrelativistic kinetic energy of the projectile in MeV.
    """
    theta = np.asarray(theta, dtype=float)
    if np.any(theta <= 0.0) or np.any(theta > math.pi):
        raise DomainError("theta must lie in (0, pi]")
    if energy <= 0.0:
        raise DomainError("energy must be positive")
    out = (z1 * z2 * ALPHA) ** 2 / (16.0 * energy**2 * np.sin(theta / 2.0) ** 4)
    return out[()] if out.ndim == 0 else out


def to_fm2(area_mev2):
    return area_mev2 * HBARC_MEV_FM**2


def to_angstrom2(area_mev2):
    return to_fm2(area_mev2) / FM_PER_ANGSTROM**2


def to_barn(area_mev2):
    return to_fm2(area_mev2) / FM2_PER_BARN


@dataclass(frozen=True)
class ComparisonPoint:
    theta: float
    p_model: float
    p_ruth: float

    @property
    def ratio(self) -> float:
        return self.p_model / self.p_ruth if self.p_ruth > 0.0 else math.nan
