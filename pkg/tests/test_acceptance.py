"""Acceptance gate: one check per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py`` (the lines are repeated in the
terminal summary) or directly with ``python3 tests/test_acceptance.py``.
"""
import math
import random
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

from coulomb_wavepacket import partialwave as pw
from coulomb_wavepacket import specfun as sf
from coulomb_wavepacket.averaging import average_over_impact, averaging_identity_check
from coulomb_wavepacket.cli import parse_config, run_scan
from coulomb_wavepacket.scenario import PhysicalParams, Scenario, scenario_from_physical

ETA, EPS = 22.8, 0.001
RESULTS: dict[int, str] = {}


def within(value, target, rel=None, abs_=None):
    tol = abs_ if abs_ is not None else rel * abs(target)
    return abs(value - target) <= tol


def legendre(l, x):
    p0, p1 = np.ones_like(x), x
    for n in range(1, l):
        p0, p1 = p1, ((2 * n + 1) * x * p1 - n * p0) / (n + 1)
    return p1


def criterion_1():
    m = scenario_from_physical(PhysicalParams(79, 2, 4.8, 3727.379, 0.001))
    checks = {
        "eta": (m.scenario.eta, within(m.scenario.eta, 22.8, rel=0.01)),
        "sigma_x": (m.sigma_x, within(m.sigma_x, 0.0052, rel=0.02)),
        "R": (m.r_start, within(m.r_start, 0.16, rel=0.03)),
    }
    detail = ", ".join(f"{k}={v:.6g}{'' if ok else ' (out of band)'}" for k, (v, ok) in checks.items())
    return all(ok for _, ok in checks.values()), detail


def criterion_2():
    th = np.linspace(0.0, 0.2, 100)
    err = np.abs(sf.wigner_d_m0_uniform(2000, 0, th) - legendre(2000, np.cos(th))).max()
    return err < 5e-10, f"max abs error {err:.3e} (bound 5e-10)"


def criterion_3():
    parts, ok = [], True
    for z in (50.0, 100.0, 500.0):
        m = np.abs(np.arange(-4000, 4001))
        s = math.fsum(sf.mu_asymptotic(m, z) ** 2)
        err = abs(s * math.sqrt(4 * math.pi * z) - 1)
        ok &= err < 0.0013
        parts.append(f"z={z:g}: {err:.3e}")
    return ok, "; ".join(parts) + " (bound 1.3e-3)"


def criterion_4():
    parts, ok = [], True
    for theta in (0.10, 0.15, 0.20):
        r = average_over_impact(theta, ETA, EPS).value / pw.rutherford_probability(theta, ETA, EPS)
        ok &= abs(r - 1) < 0.01
        parts.append(f"theta={theta:.2f}: {r:.5f}")
    return ok, "; ".join(parts) + " (ratio to Rutherford, band 1%)"


def criterion_5():
    rep = averaging_identity_check(ETA, EPS)
    ok = abs(rep.average_ratio - 1) <= 0.05 and abs(rep.exponent - 1) <= 0.05
    return ok, f"average/P_Ruth={rep.average_ratio:.5f}, fitted exponent=-{rep.exponent:.5f}, A/P_Ruth={rep.amplitude_ratio:.5f}"


def criterion_6():
    betas = (10, 50, 100, 150, 200, 250)
    vals = [pw.probability_forward(ETA, b, EPS, 0.0).value for b in betas]
    mono = all(b >= a for a, b in zip(vals, vals[1:]))
    ok = mono and 0.95 <= vals[-1] <= 1.02
    return ok, "P=" + ", ".join(f"{v:.4g}" for v in vals) + f"; monotone={mono}"


def criterion_7():
    table = pw.build_phase_table(ETA, EPS, 0.0)
    low = np.linspace(0.002, 0.05, 25)
    below = all(
        pw.probability_head_on(t, ETA, EPS, None, table).value < pw.rutherford_probability(t, ETA, EPS) for t in low
    )
    band = np.linspace(0.25, 0.5, 11)
    ratios = np.array(
        [pw.probability_head_on(t, ETA, EPS, None, table).value / pw.rutherford_probability(t, ETA, EPS) for t in band]
    )
    worst = np.abs(ratios - 1).max()
    ok = below and worst < 0.05
    return ok, (
        f"below Rutherford for theta<=0.05: {below}; max |P/P_Ruth-1| on [0.25,0.5] = {worst:.4f} "
        f"(ratio {ratios[0]:.4f} at 0.25, {ratios[-1]:.4f} at 0.5)"
    )


def criterion_8():
    t1 = pw.theta_rutherford_unity(ETA, EPS)
    td = pw.theta_deviation(ETA, EPS)
    ok = within(t1, 0.014, abs_=0.0005) and within(td, 0.0912, abs_=1e-4)
    return ok, f"theta_1={t1:.6f}, theta_D={td:.6f}"


def criterion_9():
    rng = random.Random(2024)
    worst = 0.0
    pol = pw.TruncationPolicy(m_cut=2)
    for _ in range(20):
        s = Scenario(
            ETA, EPS, rng.uniform(0.0, 3.0), rng.uniform(0.0, 2 * math.pi), rng.uniform(0.05, 0.3), rng.uniform(-1, 1)
        )
        a = pw.probability_small_angle(s).value
        b = pw.probability_general(s, policy=pol, d_source="small_angle").value
        worst = max(worst, abs(a / b - 1))
    # beta = 0: library path vs a direct Legendre m = 0 sum
    l = np.arange(3001)
    phi2 = (2 * EPS * np.sqrt(l + 0.5) * np.exp(-(EPS**2) * ((l + 0.5) ** 2 + 1 / 12))) ** 2
    sigma = sf.coulomb_phase(l, ETA)
    xi = 4 * EPS * ETA * (-1.5 * math.log(EPS) - 1 - sf.coulomb_phase_deriv(l, ETA))
    red = 0.0
    for _ in range(5):
        theta, delta = rng.uniform(0.05, math.pi), rng.uniform(-1, 1)
        pl = np.empty(3001)
        pl[0], pl[1] = 1.0, math.cos(theta)
        for n in range(1, 3000):
            pl[n + 1] = ((2 * n + 1) * math.cos(theta) * pl[n] - n * pl[n - 1]) / (n + 1)
        t = phi2 * pl * np.exp(2j * sigma - (delta - xi) ** 2 / 8)
        ref = abs(complex(math.fsum(t.real), math.fsum(t.imag))) ** 2
        got = pw.probability_general(Scenario(ETA, EPS, 0.0, 0.0, theta, delta)).value
        red = max(red, abs(got / ref - 1))
    norms = [math.fsum(pw.lm_density(Scenario(ETA, EPS, b)).density.ravel()) for b in (0.0, 1.0, 3.0, 10.0)]
    ok = worst < 1e-6 and red < 1e-12 and all(abs(n - 1) <= 0.05 for n in norms)
    return ok, (
        f"small-angle vs general max rel {worst:.2e}; beta=0 reduction {red:.2e}; "
        "norms " + ", ".join(f"{n:.4f}" for n in norms)
    )


def criterion_10():
    ok, parts = True, []
    with tempfile.TemporaryDirectory() as tmp:
        for command, extra in (
            ("shadow_zone", {"lo": 0.02, "hi": 0.5, "steps": 16}),
            ("averaged_points", {"steps": 2, "lo": 0.1, "hi": 0.2, "n_beta": 8}),
            ("beta_phi_profile", {"steps": 7}),
        ):
            bodies = []
            for threads in (1, 4):
                out = Path(tmp) / f"{command}-{threads}.csv"
                run_scan(parse_config(None, {"command": command, "threads": threads, "out": str(out), **extra}))
                bodies.append(out.read_bytes())
            same = bodies[0] == bodies[1]
            ok &= same
            parts.append(f"{command}: {'identical' if same else 'DIFFERENT'}")
    return ok, "; ".join(parts)


CRITERIA = {
    1: ("physical mapping", criterion_1),
    2: ("uniform Wigner approximation", criterion_2),
    3: ("asymptotic mu squared sum", criterion_3),
    4: ("averaged Rutherford agreement", criterion_4),
    5: ("right-angle averaging identity", criterion_5),
    6: ("forward flux", criterion_6),
    7: ("shadow zone", criterion_7),
    8: ("constants", criterion_8),
    9: ("oracle equivalences", criterion_9),
    10: ("thread determinism", criterion_10),
}


def run_criterion(n):
    name, fn = CRITERIA[n]
    start = time.perf_counter()
    ok, detail = fn()
    line = f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {name}: {detail} [{time.perf_counter() - start:.1f}s]"
    RESULTS[n] = line
    print(line)
    return ok, line


@pytest.mark.parametrize("n", sorted(CRITERIA), ids=[f"c{n}-{CRITERIA[n][0].replace(' ', '_')}" for n in sorted(CRITERIA)])
def test_criterion(n):
    ok, line = run_criterion(n)
    assert ok, line


if __name__ == "__main__":
    failed = [n for n in sorted(CRITERIA) if not run_criterion(n)[0]]
    sys.exit(1 if failed else 0)
