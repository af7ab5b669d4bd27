"""Averages of the transition probability over the impact-parameter plane.

The average is ``(1/pi) int beta d beta int d phi P``, normalized so that a
profile ``A exp(-beta**2)`` averages to ``A``.  Gauss-Legendre nodes cover
``beta`` and equally spaced nodes cover ``phi``; the integrand is a
trigonometric polynomial in ``phi`` of degree at most ``2 m_cut``, so the
azimuthal rule is exact once it has more than that many nodes.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import partialwave as pw
from .errors import DomainError, RegimeError
from .scenario import Scenario

__all__ = [
    "QuadratureSpec",
    "impact_nodes",
    "impact_average",
    "ImpactKernel",
    "average_over_impact",
    "impact_profile",
    "IdentityReport",
    "averaging_identity_check",
]

DELTA_POLICIES = ("reference", "per_point", "zero")
_POLICY_ALIASES = {"maximize_per_point": "per_point"}


@dataclass(frozen=True)
class QuadratureSpec:
    """Quadrature over ``(beta, phi)`` and the time-shift rule at each node.

    ``delta_policy`` is ``"reference"`` (maximize once at ``beta = 0`` and
    hold that value), ``"per_point"`` (alias ``"maximize_per_point"``),
    ``"zero"`` or a fixed float.
    """

    beta_max: float = 3.0
    n_beta: int = 32
    n_phi: int = 16
    delta_policy: str | float = "reference"

    def __post_init__(self):
        if isinstance(self.delta_policy, str):
            alias = _POLICY_ALIASES.get(self.delta_policy, self.delta_policy)
            object.__setattr__(self, "delta_policy", alias)
        if self.beta_max <= 0.0:
            raise DomainError("beta_max must be positive")
        if self.n_beta < 1:
            raise DomainError("n_beta must be at least 1")
        if self.n_phi < 9:
            raise DomainError("n_phi must be at least 9 for an exact azimuthal rule")
        if isinstance(self.delta_policy, str) and self.delta_policy not in DELTA_POLICIES:
            raise DomainError(
                f"delta_policy must be a float or one of {DELTA_POLICIES}, got {self.delta_policy!r}"
            )


def impact_nodes(quad: QuadratureSpec):
    """``(betas, beta_weights, phis)``; weights integrate over ``[0, beta_max]``."""
    x, w = np.polynomial.legendre.leggauss(quad.n_beta)
    half = 0.5 * quad.beta_max
    phis = 2.0 * math.pi * np.arange(quad.n_phi) / quad.n_phi
    return half * (x + 1.0), half * w, phis


def _reduce(values, betas, weights, n_phi):
    """Fixed-order weighted sum of a ``(n_beta, n_phi)`` table of node values."""
    per_beta = [math.fsum(row) * (2.0 * math.pi / n_phi) for row in values]
    return math.fsum(w * b * v for w, b, v in zip(weights, betas, per_beta)) / math.pi


def impact_average(integrand, quad: QuadratureSpec = QuadratureSpec()) -> float:
    """Average ``integrand(beta, phi)`` over the impact-parameter plane."""
    betas, weights, phis = impact_nodes(quad)
    values = [[integrand(float(b), float(p)) for p in phis] for b in betas]
    return _reduce(values, betas, weights, quad.n_phi)


class ImpactKernel:
    """Coherent sums at a fixed scattering angle, reusable across ``(beta, phi)``.

    Angles up to 0.5 use the ``|m| <= 2`` small-angle kernel; larger angles
    use the general sum with exact rotation matrices.  Rotation matrices,
    Bessel values and phase shifts are computed once for the largest
    ``beta`` requested.
    """

    def __init__(
        self,
        theta: float,
        eta: float,
        eps: float,
        beta_max: float,
        policy: pw.TruncationPolicy = pw.DEFAULT_POLICY,
        kernel: str = "auto",
        weights: str = "exact",
    ):
        if kernel == "auto":
            kernel = "small_angle" if theta <= pw.SMALL_ANGLE_MAX else "general"
        if kernel not in ("small_angle", "general"):
            raise DomainError(f"unknown kernel {kernel!r}")
        if beta_max > 1.0 / math.sqrt(eps):
            raise RegimeError(f"beta_max={beta_max} exceeds 1/sqrt(eps)={1.0 / math.sqrt(eps):.6g}")
        self.theta, self.eta, self.eps = theta, eta, eps
        self.policy, self.kernel, self.weights = policy, kernel, weights
        self.beta_max = beta_max
        _, self.l_hi = pw.l_window(eps, beta_max, policy.window_sigmas)
        self.table = pw.phase_table_for_range(eta, eps, 0, self.l_hi)
        if kernel == "general":
            pw._check_d_source("exact", theta, self.l_hi)
            self.m_cut = policy.m_cut_for(beta_max)
            self._d_full = pw._d_block("exact", float(theta), self.l_hi, self.m_cut)
        else:
            pw._check_small_angle(theta, beta_max)
            self.m_cut = 2
            self._bessels = pw._small_angle_bessels(np.arange(self.l_hi + 1), theta)

    def sums(self, beta: float, phis) -> list[pw.CoherentSum]:
        """One :class:`CoherentSum` per azimuth at impact parameter ``beta``."""
        eps, policy = self.eps, self.policy
        lo, hi = pw.l_window(eps, beta, policy.window_sigmas)
        l, sigma, xi = self.table.window(lo, hi)
        keep = pw._gaussian_weight(l, eps, beta / (2.0 * eps)) >= policy.term_floor
        l, sigma, xi = l[keep], sigma[keep], xi[keep]
        rot = np.exp(2j * sigma)
        if self.kernel == "general":
            m_cut = policy.m_cut_for(beta)
            F = pw.phi_free_block(l, m_cut, eps, beta, policy.mu_switch)
            D = pw._d_window(self._d_full, int(l[0]), int(l[-1]), m_cut)
            return [pw.CoherentSum(pw._general_terms(F, D, sigma, float(p)), xi) for p in phis]
        f = pw._small_angle_factors(l, eps, beta, self.weights, policy.mu_switch)
        jn = tuple(j[l[0] : l[-1] + 1] for j in self._bessels)
        pref = self.theta / math.sin(self.theta)
        return [
            pw.CoherentSum(pw._small_angle_bracket(jn, f, float(p)) * rot, xi, pref) for p in phis
        ]

    def reference_delta(self, search: dict | None = None) -> pw.DeltaMax:
        (csum,) = self.sums(0.0, [0.0])
        return pw.find_delta_max(csum, **(search or {}))


def _node_values(kernel, beta, phis, delta_policy, ref_delta):
    out = []
    for csum in kernel.sums(beta, phis):
        if delta_policy == "per_point":
            out.append(pw.find_delta_max(csum).p_max)
        else:
            out.append(csum(ref_delta))
    return out


def _fixed_delta(delta_policy, kernel):
    if delta_policy == "reference":
        return kernel.reference_delta().delta_max
    if delta_policy == "zero":
        return 0.0
    if delta_policy == "per_point":
        return math.nan
    return float(delta_policy)


def average_over_impact(
    theta: float,
    eta: float,
    eps: float,
    quad: QuadratureSpec = QuadratureSpec(),
    policy: pw.TruncationPolicy = pw.DEFAULT_POLICY,
    *,
    kernel: str = "auto",
    weights: str = "exact",
    workers: int = 1,
) -> pw.ProbabilityResult:
    """Impact-parameter averaged probability at scattering angle ``theta``.

    Nodes are evaluated on ``workers`` threads; the reduction always runs
    in node order, so the result does not depend on the worker count.
    ``delta_used`` is NaN under the per-point policy.
    """
    if not (0.0 < theta <= math.pi):
        raise DomainError("theta must lie in (0, pi]")
    k = ImpactKernel(theta, eta, eps, quad.beta_max, policy, kernel, weights)
    betas, bw, phis = impact_nodes(quad)
    delta = _fixed_delta(quad.delta_policy, k)

    def row(b):
        return _node_values(k, float(b), phis, quad.delta_policy, delta)

    if workers == 1:
        values = [row(b) for b in betas]
    else:
        with ThreadPoolExecutor(max_workers=workers or None) as ex:
            values = list(ex.map(row, betas))
    value = _reduce(values, betas, bw, quad.n_phi)
    # beyond beta_max the integrand falls off like exp(-beta**2)
    tail = float(np.mean(values[-1])) * math.exp(-(quad.beta_max**2 - betas[-1] ** 2))
    meta = {
        "kernel": k.kernel,
        "delta_policy": quad.delta_policy,
        "beta_max": quad.beta_max,
        "n_beta": quad.n_beta,
        "n_phi": quad.n_phi,
        "weights": weights,
    }
    return pw.ProbabilityResult(value, delta, (0, k.l_hi), k.m_cut, tail, meta)


def impact_profile(
    theta: float,
    eta: float,
    eps: float,
    betas,
    phis,
    delta_policy: str | float = "reference",
    policy: pw.TruncationPolicy = pw.DEFAULT_POLICY,
    *,
    kernel: str = "auto",
) -> np.ndarray:
    """Probability on the ``betas x phis`` grid; shape ``(len(betas), len(phis))``."""
    betas = np.atleast_1d(np.asarray(betas, dtype=float))
    phis = np.atleast_1d(np.asarray(phis, dtype=float))
    if isinstance(delta_policy, str) and delta_policy not in DELTA_POLICIES:
        raise DomainError(f"unknown delta_policy {delta_policy!r}")
    k = ImpactKernel(theta, eta, eps, float(betas.max()), policy, kernel)
    delta = _fixed_delta(delta_policy, k)
    return np.array([_node_values(k, float(b), phis, delta_policy, delta) for b in betas])


@dataclass
class IdentityReport:
    """Fit of the right-angle profile to ``A exp(-c beta**2)``."""

    amplitude_ratio: float  # A / P_Ruth
    exponent: float  # c
    betas: np.ndarray
    profile: np.ndarray  # phi-averaged probability at each beta
    phi_spread: np.ndarray  # (max - min) / mean over phi at each beta
    average_ratio: float | None = None
    meta: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        ok = 0.95 <= self.amplitude_ratio <= 1.05 and 0.95 <= self.exponent <= 1.05
        if self.average_ratio is not None:
            ok = ok and abs(self.average_ratio - 1.0) <= 0.05
        return ok


def averaging_identity_check(
    eta: float,
    eps: float,
    betas=(0.5, 1.0, 1.5, 2.0),
    n_phi: int = 16,
    *,
    with_average: bool = True,
    quad: QuadratureSpec | None = None,
    policy: pw.TruncationPolicy = pw.DEFAULT_POLICY,
) -> IdentityReport:
    """Check that the right-angle profile is Rutherford times ``exp(-beta**2)``.

    The time shift is maximized separately at every node.  With
    ``with_average`` the full impact average is compared with the
    Rutherford value as well.

    Raises
    ------
    RegimeError
        If the profile has non-positive entries and cannot be fitted.
    """
    theta = 0.5 * math.pi
    betas = np.asarray(betas, dtype=float)
    phis = 2.0 * math.pi * np.arange(n_phi) / n_phi
    grid = impact_profile(theta, eta, eps, betas, phis, "per_point", policy)
    profile = grid.mean(axis=1)
    if np.any(profile <= 0.0):
        raise RegimeError("profile has non-positive values; exponential fit undefined")
    slope, intercept = np.polyfit(betas**2, np.log(profile), 1)
    p_ruth = pw.rutherford_probability(theta, eta, eps)
    report = IdentityReport(
        amplitude_ratio=math.exp(intercept) / p_ruth,
        exponent=-slope,
        betas=betas,
        profile=profile,
        phi_spread=(grid.max(axis=1) - grid.min(axis=1)) / profile,
    )
    if with_average:
        quad = quad or QuadratureSpec(beta_max=3.0, delta_policy="per_point")
        avg = average_over_impact(theta, eta, eps, quad, policy)
        report.average_ratio = avg.value / p_ruth
        report.meta["average"] = avg
    return report
