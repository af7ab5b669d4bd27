"""Wavepacket-to-wavepacket transition probabilities by partial waves.

Every probability here has the form ``|sum_l c_l exp(-(delta - xi_l)**2 / 8)|**2``
where ``c_l`` collects the free-wavepacket amplitudes, the rotation matrix
elements and the Coulomb phase ``exp(2 i sigma_l)``.  :class:`CoherentSum`
holds the ``c_l`` once so the time shift ``delta`` can be scanned cheaply.

Sums over ``l`` use :func:`math.fsum` on the real and imaginary parts; the
result is correctly rounded and so independent of summation order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import special as sc

from . import specfun
from .errors import DomainError, RegimeError
from .scenario import Scenario, ln_2pR

__all__ = [
    "TruncationPolicy",
    "PhaseShiftTable",
    "ProbabilityResult",
    "CoherentSum",
    "DeltaMax",
    "LMDensity",
    "l_window",
    "build_phase_table",
    "phase_table_for_range",
    "phi_free",
    "phi_free_block",
    "probability_general",
    "probability_head_on",
    "probability_forward",
    "probability_small_angle",
    "find_delta_max",
    "rutherford_probability",
    "cross_section_from_probability",
    "probability_from_cross_section",
    "natural_area_to_angstrom2",
    "theta_deviation",
    "theta_rutherford_unity",
    "lm_density",
    "D_SOURCES",
]

D_SOURCES = ("exact", "small_angle", "uniform_m0")
SMALL_ANGLE_MAX = 0.5
SMALL_ANGLE_BETA_MAX = 3.0
FORWARD_BETA_MIN = 10.0


@dataclass(frozen=True)
class TruncationPolicy:
    """Controls where the partial-wave series is cut.

    ``window_sigmas`` is the half-width of the ``l`` window in units of
    ``1/(2 eps)``; ``m_cut=None`` picks ``max(2, ceil(4 beta / sqrt 2))``.
    Arguments of ``mu`` at or above ``mu_switch`` use the asymptotic form.
    """

    window_sigmas: float = 6.0
    m_cut: int | None = None
    term_floor: float = 1e-14
    mu_switch: float = 50.0

    def __post_init__(self):
        if self.window_sigmas < 4.0:
            raise DomainError("window_sigmas must be at least 4")
        if self.m_cut is not None and self.m_cut < 0:
            raise DomainError("m_cut must be non-negative")

    def m_cut_for(self, beta: float) -> int:
        if beta == 0.0:
            return 0
        if self.m_cut is not None:
            return self.m_cut
        return max(2, math.ceil(4.0 * beta / math.sqrt(2.0)))


DEFAULT_POLICY = TruncationPolicy()


def l_window(eps: float, beta: float, window_sigmas: float = 6.0) -> tuple[int, int]:
    """Inclusive ``l`` range centred on ``b p = beta / (2 eps)``."""
    half = window_sigmas / (2.0 * eps)
    if beta == 0.0:
        return 0, math.ceil(half)
    bp = beta / (2.0 * eps)
    return max(0, math.floor(bp - half)), math.ceil(bp + half)


@dataclass(frozen=True)
class PhaseShiftTable:
    """Coulomb phases ``sigma_l`` and time offsets ``xi_l`` on ``[l_lo, l_hi]``."""

    eta: float
    eps: float
    l_lo: int
    l_hi: int
    sigma_l: np.ndarray
    xi_l: np.ndarray

    @property
    def l(self) -> np.ndarray:
        return np.arange(self.l_lo, self.l_hi + 1)

    def covers(self, lo: int, hi: int) -> bool:
        return self.l_lo <= lo and hi <= self.l_hi

    def window(self, lo: int, hi: int):
        """``(l, sigma_l, xi_l)`` restricted to ``[lo, hi]``."""
        if not self.covers(lo, hi):
            raise DomainError(
                f"phase table [{self.l_lo}, {self.l_hi}] does not cover [{lo}, {hi}]"
            )
        a, b = lo - self.l_lo, hi - self.l_lo + 1
        return np.arange(lo, hi + 1), self.sigma_l[a:b], self.xi_l[a:b]


def phase_table_for_range(eta: float, eps: float, l_lo: int, l_hi: int) -> PhaseShiftTable:
    l = np.arange(l_lo, l_hi + 1)
    sigma = specfun.coulomb_phase(l, eta)
    xi = 4.0 * eps * eta * (ln_2pR(eps) - 1.0 - specfun.coulomb_phase_deriv(l, eta))
    sigma.setflags(write=False)
    xi.setflags(write=False)
    return PhaseShiftTable(eta, eps, int(l_lo), int(l_hi), sigma, xi)


def build_phase_table(
    eta: float, eps: float, beta: float, policy: TruncationPolicy = DEFAULT_POLICY
) -> PhaseShiftTable:
    lo, hi = l_window(eps, beta, policy.window_sigmas)
    return phase_table_for_range(eta, eps, lo, hi)


def _table_for(table, eta, eps, lo, hi):
    if table is None:
        return phase_table_for_range(eta, eps, lo, hi)
    if table.eta != eta or table.eps != eps:
        raise DomainError("phase table was built for a different (eta, eps)")
    return table


@dataclass
class ProbabilityResult:
    value: float
    delta_used: float
    l_window: tuple[int, int]
    m_cut_used: int
    truncation_estimate: float
    meta: dict = field(default_factory=dict)

    def __float__(self):
        return float(self.value)


@dataclass(frozen=True)
class CoherentSum:
    """``prefactor * |sum_l terms_l * exp(-(delta - xi_l)**2 / 8)|**2``."""

    terms: np.ndarray
    xi: np.ndarray
    prefactor: float = 1.0

    def amplitude(self, delta: float) -> complex:
        t = self.terms * np.exp(-((delta - self.xi) ** 2) / 8.0)
        return complex(math.fsum(t.real), math.fsum(t.imag))

    def __call__(self, delta: float) -> float:
        a = self.amplitude(delta)
        return self.prefactor * (a.real * a.real + a.imag * a.imag)

    def scan(self, deltas) -> np.ndarray:
        """Uncompensated values on a grid of ``delta``; for bracketing only."""
        deltas = np.asarray(deltas, dtype=float)
        out = np.empty(deltas.shape)
        # bound the (n_delta, n_l) weight matrix to ~32 MB
        step = max(1, (1 << 22) // max(1, self.xi.size))
        for i in range(0, deltas.size, step):
            d = deltas[i : i + step]
            g = np.exp(-((d[:, None] - self.xi[None, :]) ** 2) / 8.0)
            a = g @ self.terms
            out[i : i + step] = a.real**2 + a.imag**2
        return self.prefactor * out

    def magnitude_bound(self) -> float:
        return float(np.sum(np.abs(self.terms)))


# -- free wavepacket amplitudes ------------------------------------------------


def _mu(m, z, switch):
    z = np.asarray(z, dtype=float)
    exact = specfun.mu_exact(m, z)
    if switch is None:
        return exact
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        asym = specfun.mu_asymptotic(m, np.where(z > 0.0, z, 1.0))
    return np.where(z >= switch, asym, exact)


def phi_free_block(l, m_max: int, eps: float, beta: float, mu_switch=50.0) -> np.ndarray:
    """``Phi_free(l, m)`` for ``m = 0..m_max``; shape ``(len(l), m_max + 1)``.

    Entries with ``m > l`` are zero.  Depends on ``m`` only through ``|m|``.
    """
    l = np.asarray(l, dtype=float)[:, None]
    m = np.arange(m_max + 1, dtype=float)[None, :]
    bp = beta / (2.0 * eps)
    ok = m <= l
    with np.errstate(invalid="ignore", divide="ignore"):
        lam = np.sqrt(np.where(ok, (l + 0.5) ** 2 - m * m / 3.0 + 1.0 / 12.0, 1.0))
        log_amp = (
            0.5 * specfun.log_factorial_ratio(l, np.where(ok, m, 0.0))
            - m * np.log(lam)
            - eps * eps * (lam - bp) ** 2
        )
    mu = _mu(m, 2.0 * eps * eps * lam * bp, mu_switch)
    out = 2.0 * eps * np.sqrt(l + 0.5) * np.exp(log_amp) * mu
    return np.where(ok, out, 0.0)


def phi_free(l: int, m: int, s: Scenario, mu_switch=50.0) -> float:
    """Free-wavepacket amplitude in the ``(l, m)`` basis (phase removed)."""
    if l < 0 or abs(m) > l:
        raise DomainError(f"require 0 <= |m| <= l, got l={l}, m={m}")
    return float(phi_free_block([l], abs(m), s.eps, s.beta, mu_switch)[0, abs(m)])


def _gaussian_weight(l, eps, bp):
    return np.exp(-2.0 * eps * eps * (np.asarray(l, dtype=float) - bp) ** 2)


def _window_tail(eps, bp, lo, hi, half):
    """Bound on the summed magnitude of radial weights outside ``[lo, hi]``."""
    x = math.sqrt(2.0) * eps * half
    side = 4.0 * eps * eps * (bp + half + 1.0) * math.sqrt(math.pi / (8.0 * eps * eps)) * 0.5 * math.erfc(x)
    return side * (2.0 if lo > 0 else 1.0)


def _m_tail(beta, m_cut):
    if beta == 0.0:
        return 0.0
    return math.exp(-((m_cut + 1) ** 2) / (beta * beta))


def _truncation_estimate(csum: CoherentSum, delta, eps, bp, lo, hi, half, beta, m_cut):
    tail = _window_tail(eps, bp, lo, hi, half) + csum.magnitude_bound() * _m_tail(beta, m_cut)
    amp = math.sqrt(max(csum(delta), 0.0) / csum.prefactor)
    return csum.prefactor * (2.0 * amp * tail + tail * tail)


# -- rotation-matrix blocks ----------------------------------------------------


@lru_cache(maxsize=16)
def _d_block(d_source: str, theta: float, hi: int, m_cut: int) -> np.ndarray:
    """``d^l_{m_i m_f}(theta)`` for ``l = 0..hi``; shape ``(hi+1, 2m+1, 2m+1)``."""
    ms = list(range(-m_cut, m_cut + 1))
    n = len(ms)
    l = np.arange(hi + 1)
    if d_source == "exact":
        pairs = [(mi, mf) for mi in ms for mf in ms]
        out = specfun.wigner_d_exact_table(hi, pairs, theta).reshape(hi + 1, n, n)
    elif d_source == "small_angle":
        out = np.zeros((hi + 1, n, n))
        lf = l.astype(float)
        pref = math.sqrt(theta / math.sin(theta)) if theta > 0.0 else 1.0
        jn = [sc.jv(k, lf * theta) for k in range(2 * m_cut + 1)]
        for a, mi in enumerate(ms):
            for b, mf in enumerate(ms):
                k = mi - mf
                sign = -1.0 if (k > 0 and k % 2) else 1.0
                valid = l >= max(abs(mi), abs(mf))
                out[:, a, b] = np.where(valid, sign * pref * jn[abs(k)], 0.0)
    elif d_source == "uniform_m0":
        if m_cut != 0:
            raise RegimeError("uniform_m0 rotation matrices only cover m_i = m_f = 0 (beta = 0)")
        out = specfun.wigner_d_m0_uniform(l, 0, theta).reshape(hi + 1, 1, 1)
    else:
        raise DomainError(f"unknown d_source {d_source!r}; expected one of {D_SOURCES}")
    out.setflags(write=False)
    return out


def _d_window(D, lo, hi, m_cut):
    """Slice a block from :func:`_d_block` down to ``[lo, hi]`` and ``|m| <= m_cut``."""
    c = (D.shape[1] - 1) // 2
    if hi >= D.shape[0] or m_cut > c:
        raise DomainError("rotation block does not cover the requested window")
    return D[lo : hi + 1, c - m_cut : c + m_cut + 1, c - m_cut : c + m_cut + 1]


def _check_d_source(d_source, theta, hi):
    if d_source not in D_SOURCES:
        raise DomainError(f"unknown d_source {d_source!r}; expected one of {D_SOURCES}")
    if d_source == "exact" and hi > specfun.WIGNER_EXACT_L_MAX:
        raise RegimeError(
            f"exact rotation matrices are only validated to l={specfun.WIGNER_EXACT_L_MAX}, "
            f"window reaches l={hi}"
        )
    if d_source != "exact" and theta > SMALL_ANGLE_MAX:
        raise RegimeError(f"d_source={d_source!r} requires theta <= {SMALL_ANGLE_MAX}, got {theta}")


def _general_terms(F, D, sigma, phi_b):
    """Per-``l`` coherent terms from amplitude and rotation blocks.

    ``F`` is ``(nl, m_cut+1)`` indexed by ``|m|``; ``D`` is ``(nl, n, n)``.
    """
    m_cut = F.shape[1] - 1
    if m_cut == 0:
        amp = F[:, 0] * F[:, 0] * D[:, 0, 0]
        return amp * np.exp(2j * sigma)
    ms = np.arange(-m_cut, m_cut + 1)
    Fm = F[:, np.abs(ms)]
    diff = ms[:, None] - ms[None, :]
    phase = np.exp(1j * diff * (0.5 * math.pi - phi_b))
    amp = np.einsum("li,ij,lij,lj->l", Fm, phase, D, Fm)
    return amp * np.exp(2j * sigma)


def _general_sum(s: Scenario, table, policy, d_source, d_full=None):
    lo, hi = l_window(s.eps, s.beta, policy.window_sigmas)
    _check_d_source(d_source, s.theta, hi)
    table = _table_for(table, s.eta, s.eps, lo, hi)
    l, sigma, xi = table.window(lo, hi)
    m_cut = policy.m_cut_for(s.beta)
    keep = _gaussian_weight(l, s.eps, s.bp) >= policy.term_floor
    l, sigma, xi = l[keep], sigma[keep], xi[keep]
    F = phi_free_block(l, m_cut, s.eps, s.beta, policy.mu_switch)
    if d_full is None:
        d_full = _d_block(d_source, float(s.theta), int(l[-1]), m_cut)
    D = _d_window(d_full, int(l[0]), int(l[-1]), m_cut)
    terms = _general_terms(F, D, sigma, s.phi_b)
    return CoherentSum(terms, xi), (lo, hi), m_cut


def _resolve_delta(csum, delta, search):
    if delta is not None:
        return float(delta), csum(delta), None
    found = find_delta_max(csum, **(search or {}))
    return found.delta_max, found.p_max, found


def _result(csum, delta, p, s_eps, beta, window, m_cut, policy, meta):
    lo, hi = window
    half = policy.window_sigmas / (2.0 * s_eps)
    bp = beta / (2.0 * s_eps)
    est = _truncation_estimate(csum, delta, s_eps, bp, lo, hi, half, beta, m_cut)
    return ProbabilityResult(p, delta, window, m_cut, est, meta)


def probability_general(
    s: Scenario,
    table: PhaseShiftTable | None = None,
    policy: TruncationPolicy = DEFAULT_POLICY,
    d_source: str = "exact",
    *,
    delta_search: dict | None = None,
) -> ProbabilityResult:
    """Full coherent sum over ``l``, ``m_i`` and ``m_f``.

    With ``s.delta`` unset the time shift is chosen by
    :func:`find_delta_max` (``delta_search`` is forwarded to it).
    """
    csum, window, m_cut = _general_sum(s, table, policy, d_source)
    delta, p, found = _resolve_delta(csum, s.delta, delta_search)
    meta = {"d_source": d_source, "kernel": "general", "mu_switch": policy.mu_switch}
    if found is not None:
        meta["delta_flat"] = found.flat
    return _result(csum, delta, p, s.eps, s.beta, window, m_cut, policy, meta)


def probability_head_on(
    theta: float,
    eta: float,
    eps: float,
    delta: float | None = None,
    table: PhaseShiftTable | None = None,
    policy: TruncationPolicy = DEFAULT_POLICY,
    d_source: str = "exact",
) -> ProbabilityResult:
    """Zero impact parameter: only ``m_i = m_f = 0`` contributes."""
    s = Scenario(eta=eta, eps=eps, beta=0.0, theta=theta, delta=delta)
    lo, hi = l_window(eps, 0.0, policy.window_sigmas)
    _check_d_source(d_source, theta, hi)
    table = _table_for(table, eta, eps, lo, hi)
    l, sigma, xi = table.window(lo, hi)
    keep = _gaussian_weight(l, eps, 0.0) >= policy.term_floor
    l, sigma, xi = l[keep], sigma[keep], xi[keep]
    f0 = phi_free_block(l, 0, eps, 0.0, policy.mu_switch)[:, 0]
    d00 = _d_block(d_source, float(theta), int(l[-1]), 0)[l[0] :, 0, 0]
    csum = CoherentSum(f0 * f0 * d00 * np.exp(2j * sigma), xi)
    delta_used, p, _ = _resolve_delta(csum, s.delta, None)
    meta = {"d_source": d_source, "kernel": "head_on"}
    return _result(csum, delta_used, p, eps, 0.0, (lo, hi), 0, policy, meta)


# -- forward direction ---------------------------------------------------------


def probability_forward(
    eta: float,
    beta: float,
    eps: float,
    delta: float = 0.0,
    policy: TruncationPolicy = DEFAULT_POLICY,
    table: PhaseShiftTable | None = None,
) -> ProbabilityResult:
    """Probability of emerging undeflected, for large impact parameters.

    Uses the Stirling-simplified form valid for ``beta >= 10``; for smaller
    ``beta`` evaluate :func:`probability_general` at ``theta = 0``.
    """
    if beta < FORWARD_BETA_MIN:
        raise RegimeError(
            f"probability_forward needs beta >= {FORWARD_BETA_MIN}; "
            "use probability_general with theta=0 instead"
        )
    lo, hi = l_window(eps, beta, policy.window_sigmas)
    lo = max(lo, 1)
    table = _table_for(table, eta, eps, lo, hi)
    l, sigma, xi = table.window(lo, hi)
    bp = beta / (2.0 * eps)
    lf = l.astype(float)
    weight = _gaussian_weight(lf, eps, bp)
    keep = weight >= policy.term_floor
    lf, sigma, xi, weight = lf[keep], sigma[keep], xi[keep], weight[keep]
    radial = 4.0 * eps * eps * (lf + 0.5) * weight / np.sqrt(8.0 * math.pi * eps * eps * lf * bp)
    csum = CoherentSum(radial * np.exp(2j * sigma), xi)
    p = csum(delta)
    meta = {"kernel": "forward"}
    return _result(csum, float(delta), p, eps, 0.0, (lo, hi), 0, policy, meta)


# -- small-angle kernel with |m| <= 2 -----------------------------------------


def _small_angle_factors(l, eps, beta, weights, mu_switch):
    """Radial factors ``f_0, f_1, f_2`` whose pairwise products weight the bracket."""
    if weights == "exact":
        F = phi_free_block(l, 2, eps, beta, mu_switch)
        return F[:, 0], F[:, 1], F[:, 2]
    if weights == "simplified":
        lf = np.asarray(l, dtype=float)
        bp = beta / (2.0 * eps)
        radial = 2.0 * eps * np.sqrt(lf + 0.5) * np.exp(-eps * eps * (lf - bp) ** 2)
        z = eps * lf * beta
        return tuple(radial * _mu(n, z, mu_switch) for n in range(3))
    raise DomainError(f"weights must be 'exact' or 'simplified', got {weights!r}")


def _small_angle_bracket(jn, f, phi_b):
    """Seven-term ``m_i, m_f`` sum for ``|m| <= 2`` at azimuth ``phi_b``."""
    j0, j1, j2, j3, j4 = jn
    f0, f1, f2 = f
    c1, c2, c3, c4 = (math.cos(k * phi_b) for k in (1, 2, 3, 4))
    real = (
        j0 * (f0 * f0 + 2.0 * f1 * f1 + 2.0 * f2 * f2)
        - 4.0 * j2 * f2 * f0 * c2
        - 2.0 * j2 * f1 * f1 * c2
        + 2.0 * j4 * f2 * f2 * c4
    )
    imag = -4.0 * j1 * f2 * f1 * c1 - 4.0 * j1 * f1 * f0 * c1 + 4.0 * j3 * f2 * f1 * c3
    return real + 1j * imag


def _small_angle_bessels(l, theta):
    lt = np.asarray(l, dtype=float) * theta
    return tuple(sc.jv(n, lt) for n in range(5))


def _check_small_angle(theta, beta):
    if not (0.0 < theta <= SMALL_ANGLE_MAX):
        raise RegimeError(f"small-angle kernel needs 0 < theta <= {SMALL_ANGLE_MAX}, got {theta}")
    if beta > SMALL_ANGLE_BETA_MAX:
        raise RegimeError(f"small-angle kernel needs beta <= {SMALL_ANGLE_BETA_MAX}, got {beta}")


def small_angle_sum(
    s: Scenario,
    table: PhaseShiftTable | None = None,
    policy: TruncationPolicy = DEFAULT_POLICY,
    weights: str = "exact",
) -> tuple[CoherentSum, tuple[int, int]]:
    _check_small_angle(s.theta, s.beta)
    lo, hi = l_window(s.eps, s.beta, policy.window_sigmas)
    table = _table_for(table, s.eta, s.eps, lo, hi)
    l, sigma, xi = table.window(lo, hi)
    keep = _gaussian_weight(l, s.eps, s.bp) >= policy.term_floor
    l, sigma, xi = l[keep], sigma[keep], xi[keep]
    f = _small_angle_factors(l, s.eps, s.beta, weights, policy.mu_switch)
    bracket = _small_angle_bracket(_small_angle_bessels(l, s.theta), f, s.phi_b)
    pref = s.theta / math.sin(s.theta)
    return CoherentSum(bracket * np.exp(2j * sigma), xi, pref), (lo, hi)


def probability_small_angle(
    s: Scenario,
    table: PhaseShiftTable | None = None,
    policy: TruncationPolicy = DEFAULT_POLICY,
    weights: str = "exact",
    *,
    delta_search: dict | None = None,
) -> ProbabilityResult:
    """Small-angle probability truncated to ``|m_i|, |m_f| <= 2``.

    ``weights="exact"`` weights the Bessel bracket with ``Phi_free``
    itself; ``weights="simplified"`` uses the large-``l`` replacements
    ``Lambda -> l`` and ``mu_n(eps l beta)``.  The two differ at
    relative order ``eps``.
    """
    csum, window = small_angle_sum(s, table, policy, weights)
    delta, p, found = _resolve_delta(csum, s.delta, delta_search)
    meta = {"kernel": "small_angle", "weights": weights}
    if found is not None:
        meta["delta_flat"] = found.flat
    return _result(csum, delta, p, s.eps, s.beta, window, 2, policy, meta)


# -- time-shift maximization ---------------------------------------------------

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class DeltaMax:
    delta_max: float
    p_max: float
    flat: bool = False


def _golden_max(f, a, b, tol):
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def find_delta_max(
    evaluator,
    lo: float = -4.0,
    hi: float = 4.0,
    coarse_step: float = 0.05,
    tol: float = 1e-4,
) -> DeltaMax:
    """Maximize ``evaluator(delta)`` over ``[lo, hi]``.

    A coarse grid locates the peak, golden-section search refines it to
    ``tol``.  Equal grid maxima resolve toward the smallest ``|delta|``.
    If the grid shows no variation (max/min below ``1 + 1e-12``) the result
    is flagged ``flat`` and sits at the grid point nearest zero.
    """
    if not hi > lo:
        raise DomainError("need hi > lo")
    n = max(2, int(round((hi - lo) / coarse_step)) + 1)
    grid = np.linspace(lo, hi, n)
    scan = getattr(evaluator, "scan", None)
    if scan is not None:
        vals = np.asarray(scan(grid), dtype=float)
    else:
        vals = np.array([evaluator(float(d)) for d in grid])
    top = vals.max()
    lowest = vals.min()

    def nearest_zero(idx):
        return idx[np.argmin(np.abs(grid[idx]))]

    if top <= 0.0 or (lowest > 0.0 and top / lowest < 1.0 + 1e-12):
        i = nearest_zero(np.arange(n))
        return DeltaMax(float(grid[i]), float(vals[i]), flat=True)
    best = np.flatnonzero(vals >= top * (1.0 - 1e-12))
    i = nearest_zero(best)
    a = grid[max(i - 1, 0)]
    b = grid[min(i + 1, n - 1)]
    x, fx = _golden_max(evaluator, float(a), float(b), tol)
    at_grid = evaluator(float(grid[i]))
    if fx >= at_grid:
        return DeltaMax(float(x), float(fx))
    return DeltaMax(float(grid[i]), float(at_grid))


# -- Rutherford comparison and cross sections -----------------------------------


def rutherford_probability(theta, eta: float, eps: float):
    """Rutherford cross section expressed as a wavepacket "probability".

    ``4 eps**4 eta**2 / sin(theta/2)**4``; not bounded by one.
    """
    theta = np.asarray(theta, dtype=float)
    if np.any(theta <= 0.0) or np.any(theta > math.pi):
        raise DomainError("theta must lie in (0, pi]")
    out = 4.0 * eps**4 * eta**2 / np.sin(theta / 2.0) ** 4
    return out[()] if out.ndim == 0 else out


def cross_section_from_probability(p_value, p_momentum: float, sigma_p: float):
    """``d sigma / d Omega = p**2 / (16 sigma_p**4) * P`` in MeV^-2 per sr."""
    if p_momentum <= 0.0 or sigma_p <= 0.0:
        raise DomainError("momentum and its spread must be positive")
    return p_momentum**2 / (16.0 * sigma_p**4) * np.asarray(p_value, dtype=float)[()]


def probability_from_cross_section(dsigma, p_momentum: float, sigma_p: float):
    if p_momentum <= 0.0 or sigma_p <= 0.0:
        raise DomainError("momentum and its spread must be positive")
    return 16.0 * sigma_p**4 / p_momentum**2 * np.asarray(dsigma, dtype=float)[()]


def natural_area_to_angstrom2(area_mev2):
    """Convert an area in MeV^-2 to square angstrom."""
    from .scenario import FM_PER_ANGSTROM, HBARC_MEV_FM

    return area_mev2 * (HBARC_MEV_FM / FM_PER_ANGSTROM) ** 2


def theta_deviation(eta: float, eps: float) -> float:
    """Angular size ``4 eps |eta|`` of the region of deviation from Rutherford."""
    return 4.0 * eps * abs(eta)


def theta_rutherford_unity(eta: float, eps: float) -> float:
    """Angle at which the Rutherford probability equals one.

    Exact root ``2 asin(eps sqrt(2|eta|))``; for small angles this is
    ``eps sqrt(8 |eta|)``.
    """
    arg = eps * math.sqrt(2.0 * abs(eta))
    if arg >= 1.0:
        raise RegimeError("Rutherford probability stays above one at all angles")
    return 2.0 * math.asin(arg)


# -- (l, m) density ---------------------------------------------------------------


@dataclass(frozen=True)
class LMDensity:
    l: np.ndarray
    m: np.ndarray
    density: np.ndarray  # shape (len(l), len(m))

    def peak(self) -> tuple[int, int]:
        i, j = np.unravel_index(np.argmax(self.density), self.density.shape)
        return int(self.l[i]), int(self.m[j])

    def m_marginal(self) -> np.ndarray:
        return self.density.sum(axis=0)

    def m_std(self) -> float:
        """Standard deviation in ``m`` of the probability density."""
        w = self.m_marginal()
        return float(np.sqrt(np.sum(w * self.m**2) / np.sum(w)))

    def m_amplitude_width(self) -> float:
        """Width in ``m`` of the amplitude ``|Phi_free|`` at the peak ``l``."""
        i = int(np.argmax(self.density.max(axis=1)))
        a = np.sqrt(self.density[i])
        return float(np.sqrt(np.sum(a * self.m**2) / np.sum(a)))


def lm_density(s: Scenario, policy: TruncationPolicy = DEFAULT_POLICY) -> LMDensity:
    """``|Phi_free(l, m)|**2`` over the ``l`` window and ``|m| <= m_cut``."""
    lo, hi = l_window(s.eps, s.beta, policy.window_sigmas)
    l = np.arange(lo, hi + 1)
    m_cut = policy.m_cut_for(s.beta)
    F = phi_free_block(l, m_cut, s.eps, s.beta, policy.mu_switch)
    ms = np.arange(-m_cut, m_cut + 1)
    return LMDensity(l, ms, F[:, np.abs(ms)] ** 2)
