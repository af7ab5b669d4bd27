"""Command-line scan runner that writes figure data as CSV.

Each subcommand sweeps one variable and writes ``<out>`` (CSV, 17
significant digits) plus ``<out>.meta.json`` describing the run.  Values
come from built-in defaults, then an optional ``key=value`` config file,
then command-line flags, in increasing precedence.

Exit codes: 0 success, 1 invalid scan settings or config, 2 numerical-regime error,
3 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from . import partialwave as pw
from .averaging import ImpactKernel, QuadratureSpec, average_over_impact
from .errors import ConfigError, DomainError, RegimeError
from .scenario import PhysicalParams, scenario_from_physical

CSV_SCHEMA_VERSION = 1

COMMANDS = (
    "shadow_zone",
    "forward_vs_beta",
    "lm_density",
    "beta_phi_profile",
    "averaged_points",
    "physical_map",
)

# allowed sweep axes per command; the first is the default
AXES = {
    "shadow_zone": ("theta",),
    "forward_vs_beta": ("beta",),
    "lm_density": (),
    "beta_phi_profile": ("beta", "phi"),
    "averaged_points": ("theta",),
    "physical_map": (),
}

DEFAULT_GRIDS = {
    ("shadow_zone", "theta"): (0.001, 0.5, 200),
    ("forward_vs_beta", "beta"): (10.0, 250.0, 25),
    ("beta_phi_profile", "beta"): (0.0, 3.0, 31),
    ("beta_phi_profile", "phi"): (0.0, 2.0 * math.pi, 33),
    ("averaged_points", "theta"): (0.10, 0.20, 3),
}

COLUMNS = {
    "shadow_zone": ("theta", "p_model", "p_ruth", "ratio", "delta_used"),
    "forward_vs_beta": ("beta", "p_forward", "delta_used"),
    "lm_density": ("l", "m", "density"),
    "beta_phi_profile": ("beta", "phi", "p_model", "delta_used"),
    "averaged_points": ("theta", "p_avg", "p_ruth", "p_beta0", "ratio", "delta_used"),
    "physical_map": ("eta", "sigma_x_angstrom", "r_angstrom", "p_momentum_mev", "theta_d", "theta_1"),
}


def _opt_float(text: str) -> float | None:
    if text.strip().lower() in ("none", "max", "auto"):
        return None
    return float(text)


def _opt_int(text: str) -> int | None:
    if text.strip().lower() in ("none", "auto"):
        return None
    return int(text)


def _delta_policy(text: str):
    t = text.strip()
    if t == "maximize_per_point":
        return "per_point"
    if t in ("reference", "per_point", "zero"):
        return t
    return float(t)


def _format(text: str) -> str:
    if text not in ("csv", "csv+svg"):
        raise ValueError(text)
    return text


@dataclass
class ScanSpec:
    command: str | None = None
    eta: float = 22.8
    eps: float = 0.001
    beta: float | None = None
    phi_b: float = 0.0
    theta: float | None = None
    delta: float | None = None
    axis: str | None = None
    lo: float | None = None
    hi: float | None = None
    steps: int | None = None
    window_sigmas: float = 6.0
    m_cut: int | None = None
    beta_max: float = 3.0
    n_beta: int = 32
    n_phi: int = 16
    delta_policy: str | float = "reference"
    z1: int = 79
    z2: int = 2
    energy: float = 4.8
    mass: float = 3727.379
    out: str | None = None
    format: str = "csv"
    threads: int = 1
    sources: dict = field(default_factory=dict)

    def policy(self) -> pw.TruncationPolicy:
        return pw.TruncationPolicy(window_sigmas=self.window_sigmas, m_cut=self.m_cut)

    def quadrature(self) -> QuadratureSpec:
        return QuadratureSpec(self.beta_max, self.n_beta, self.n_phi, self.delta_policy)

    def grid(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.steps)

    def parameters(self) -> dict:
        d = asdict(self)
        d.pop("sources")
        return d


PARSERS = {
    "command": str,
    "eta": float,
    "eps": float,
    "beta": _opt_float,
    "phi_b": float,
    "theta": _opt_float,
    "delta": _opt_float,
    "axis": str,
    "lo": float,
    "hi": float,
    "steps": int,
    "window_sigmas": float,
    "m_cut": _opt_int,
    "beta_max": float,
    "n_beta": int,
    "n_phi": int,
    "delta_policy": _delta_policy,
    "z1": int,
    "z2": int,
    "energy": float,
    "mass": float,
    "out": str,
    "format": _format,
    "threads": int,
}


def read_config_file(path) -> dict[str, tuple[str, int]]:
    """Raw ``key -> (value, line number)`` pairs from a ``key=value`` file."""
    entries: dict[str, tuple[str, int]] = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in PARSERS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if key in entries:
            raise ConfigError(
                f"{path}: duplicate key {key!r} on lines {entries[key][1]} and {lineno}"
            )
        entries[key] = (value, lineno)
    return entries


def _convert(key, value, where):
    try:
        return PARSERS[key](value)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: invalid value {value!r} for {key!r}") from None


def parse_config(path=None, flags: dict | None = None) -> ScanSpec:
    """Build a validated :class:`ScanSpec` from a config file and flag values.

    ``flags`` maps field names to already-typed values; ``None`` entries
    count as "not given".  Flags override file values.
    """
    spec = ScanSpec()
    sources = {f.name: "default" for f in fields(ScanSpec) if f.name != "sources"}
    if path is not None:
        for key, (value, lineno) in read_config_file(path).items():
            setattr(spec, key, _convert(key, value, f"{path}:{lineno}"))
            sources[key] = "config"
    for key, value in (flags or {}).items():
        if value is None:
            continue
        if key not in PARSERS:
            raise ConfigError(f"unknown option {key!r}")
        setattr(spec, key, value)
        sources[key] = "flag"
    spec.sources = sources
    _finalize(spec)
    return spec


def _finalize(spec: ScanSpec) -> None:
    if spec.command not in COMMANDS:
        raise ConfigError(f"command: expected one of {', '.join(COMMANDS)}, got {spec.command!r}")
    allowed = AXES[spec.command]
    gridded = spec.axis is not None or any(
        spec.sources.get(k) != "default" for k in ("lo", "hi", "steps")
    )
    if not allowed:
        if gridded:
            raise ConfigError(f"axis: {spec.command} takes no sweep axis")
    else:
        if spec.axis is None:
            spec.axis = allowed[0]
        if spec.axis not in allowed:
            raise ConfigError(f"axis: {spec.command} sweeps {'/'.join(allowed)}, not {spec.axis!r}")
        lo, hi, steps = DEFAULT_GRIDS[(spec.command, spec.axis)]
        spec.lo = lo if spec.lo is None else spec.lo
        spec.hi = hi if spec.hi is None else spec.hi
        spec.steps = steps if spec.steps is None else spec.steps
        if spec.steps < 2:
            raise ConfigError(f"steps: need at least 2 grid points, got {spec.steps}")
        if not spec.hi > spec.lo:
            raise ConfigError(f"hi: must exceed lo ({spec.lo}), got {spec.hi}")
    if spec.eps <= 0.0:
        raise ConfigError(f"eps: must be positive, got {spec.eps}")
    if spec.threads < 0:
        raise ConfigError(f"threads: must be >= 0, got {spec.threads}")
    if spec.window_sigmas < 4.0:
        raise ConfigError(f"window_sigmas: must be >= 4, got {spec.window_sigmas}")
    if spec.n_phi < 9:
        raise ConfigError(f"n_phi: must be >= 9, got {spec.n_phi}")
    if spec.n_beta < 1:
        raise ConfigError(f"n_beta: must be >= 1, got {spec.n_beta}")
    if spec.out is None:
        spec.out = f"{spec.command}.csv"


# -- commands ----------------------------------------------------------------------


def _pmap(fn, items, threads):
    items = list(items)
    workers = threads or os.cpu_count() or 1
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def _run_shadow_zone(spec: ScanSpec):
    beta = spec.beta or 0.0
    if beta != 0.0:
        raise ConfigError("beta: shadow_zone is defined at zero impact parameter")
    policy = spec.policy()
    table = pw.build_phase_table(spec.eta, spec.eps, 0.0, policy)

    def row(theta):
        r = pw.probability_head_on(theta, spec.eta, spec.eps, spec.delta, table, policy)
        pr = pw.rutherford_probability(theta, spec.eta, spec.eps)
        return (theta, r.value, pr, r.value / pr, r.delta_used)

    meta = {"delta_policy": "maximize_per_point" if spec.delta is None else spec.delta,
            "d_source": "exact"}
    return _pmap(row, spec.grid(), spec.threads), meta


def _run_forward(spec: ScanSpec):
    delta = 0.0 if spec.delta is None else spec.delta
    policy = spec.policy()

    def row(beta):
        r = pw.probability_forward(spec.eta, beta, spec.eps, delta, policy)
        return (beta, r.value, r.delta_used)

    return _pmap(row, spec.grid(), spec.threads), {"delta_policy": delta}


def _run_lm_density(spec: ScanSpec):
    from .scenario import Scenario

    beta = 10.0 if spec.beta is None else spec.beta
    dens = pw.lm_density(Scenario(spec.eta, spec.eps, beta), spec.policy())
    rows = [
        (int(l), int(m), dens.density[i, j])
        for i, l in enumerate(dens.l)
        for j, m in enumerate(dens.m)
    ]
    return rows, {"beta": beta, "peak": dens.peak(), "m_std": dens.m_std(),
                  "m_amplitude_width": dens.m_amplitude_width()}


def _run_beta_phi(spec: ScanSpec):
    theta = 0.1 if spec.theta is None else spec.theta
    grid = spec.grid()
    if spec.axis == "beta":
        points = [(float(b), spec.phi_b) for b in grid]
    else:
        beta = 1.0 if spec.beta is None else spec.beta
        points = [(beta, float(p)) for p in grid]
    beta_max = max(b for b, _ in points)
    kernel = ImpactKernel(theta, spec.eta, spec.eps, beta_max, spec.policy())
    if spec.delta is not None:
        delta, rule = spec.delta, spec.delta
    elif spec.delta_policy == "per_point":
        delta, rule = None, "per_point"
    elif spec.delta_policy == "zero":
        delta, rule = 0.0, "zero"
    elif spec.delta_policy == "reference":
        delta, rule = kernel.reference_delta().delta_max, "reference"
    else:
        delta, rule = float(spec.delta_policy), spec.delta_policy

    def row(pt):
        beta, phi = pt
        (csum,) = kernel.sums(beta, [phi])
        if delta is None:
            found = pw.find_delta_max(csum)
            return (beta, phi, found.p_max, found.delta_max)
        return (beta, phi, csum(delta), delta)

    return _pmap(row, points, spec.threads), {"theta": theta, "delta_policy": rule,
                                               "kernel": kernel.kernel}


def _run_averaged(spec: ScanSpec):
    quad = spec.quadrature()
    policy = spec.policy()

    def row(theta):
        avg = average_over_impact(theta, spec.eta, spec.eps, quad, policy)
        b0 = pw.probability_head_on(theta, spec.eta, spec.eps, None, None, policy)
        pr = pw.rutherford_probability(theta, spec.eta, spec.eps)
        return (theta, avg.value, pr, b0.value, avg.value / pr, avg.delta_used)

    meta = {"quadrature": asdict(quad), "beta0_delta_policy": "maximize_per_point"}
    return _pmap(row, spec.grid(), spec.threads), meta


def _run_physical(spec: ScanSpec):
    params = PhysicalParams(spec.z1, spec.z2, spec.energy, spec.mass, spec.eps)
    m = scenario_from_physical(params)
    eta = m.scenario.eta
    row = (
        eta,
        m.sigma_x,
        m.r_start,
        m.p_momentum,
        pw.theta_deviation(eta, spec.eps),
        pw.theta_rutherford_unity(eta, spec.eps),
    )
    return [row], {"notes": m.notes}


RUNNERS = {
    "shadow_zone": _run_shadow_zone,
    "forward_vs_beta": _run_forward,
    "lm_density": _run_lm_density,
    "beta_phi_profile": _run_beta_phi,
    "averaged_points": _run_averaged,
    "physical_map": _run_physical,
}


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


def render_csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    return buf.getvalue()


def _write_svg(spec: ScanSpec, columns, rows, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4.5))
    data = np.array(rows, dtype=float)
    if spec.command == "lm_density":
        ls, ms = np.unique(data[:, 0]), np.unique(data[:, 1])
        img = data[:, 2].reshape(len(ls), len(ms)).T
        mesh = ax.pcolormesh(ls, ms, img, shading="auto")
        fig.colorbar(mesh, ax=ax, label="|Phi_free(l, m)|^2")
        ax.set_xlabel("l")
        ax.set_ylabel("m")
    elif spec.command == "physical_map":
        plt.close(fig)
        return
    else:
        xcol = 1 if (spec.command == "beta_phi_profile" and spec.axis == "phi") else 0
        x = data[:, xcol]
        label = columns[xcol]
        if label in ("theta", "phi"):
            x = np.degrees(x)
            label = f"{label} (deg)"
        ycols = [c for c in columns if c.startswith("p_")]
        for c in ycols:
            ax.plot(x, data[:, columns.index(c)], label=c)
        if spec.command != "forward_vs_beta":
            ax.set_yscale("log")
        ax.set_xlabel(label)
        ax.set_ylabel("probability")
        ax.legend()
    ax.set_title(spec.command)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def run_scan(spec: ScanSpec, *, stdout=None) -> int:
    """Execute ``spec`` and write its CSV, sidecar and optional SVG."""
    stdout = stdout or sys.stdout
    start = time.perf_counter()
    rows, extra = RUNNERS[spec.command](spec)
    columns = COLUMNS[spec.command]
    wall = time.perf_counter() - start
    out = Path(spec.out)
    out.write_text(render_csv(columns, rows), encoding="utf-8")
    meta = {
        "command": spec.command,
        "library_version": __version__,
        "csv_schema_version": CSV_SCHEMA_VERSION,
        "columns": list(columns),
        "parameters": spec.parameters(),
        "sources": spec.sources,
        "truncation_policy": asdict(spec.policy()),
        "wall_time_s": wall,
        **extra,
    }
    Path(f"{out}.meta.json").write_text(json.dumps(meta, indent=2, default=str), encoding="utf-8")
    if spec.format == "csv+svg":
        _write_svg(spec, columns, rows, out.with_suffix(".svg"))
    if spec.command == "physical_map":
        for name, value in zip(columns, rows[0]):
            print(f"{name} = {value:.6g}", file=stdout)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="key=value file; flags override it")
    for key, conv in PARSERS.items():
        if key == "command":
            continue
        common.add_argument(f"--{key.replace('_', '-')}", dest=key, type=str, default=None)
    parser = argparse.ArgumentParser(
        prog="coulomb-wavepacket", description="Regenerate wavepacket scattering scans as CSV."
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd in COMMANDS:
        sub.add_parser(cmd, parents=[common])
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        flags = {"command": args.command}
        for key in PARSERS:
            raw = getattr(args, key, None)
            if key != "command" and raw is not None:
                flags[key] = _convert(key, raw, f"--{key.replace('_', '-')}")
        spec = parse_config(args.config, flags)
        return run_scan(spec)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (RegimeError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
