"""Scenario runners and the plain-text experiment configuration.

Configuration files are ``key=value`` lines (one key per line, ``#`` starts
a comment, lists are comma-separated).  Unknown keys are rejected with the
line number; validation errors name the offending key.  Every runner writes
deterministic CSV artifacts (header row, comma-separated, 17 significant
digits for reals, LF endings, UTF-8, no timestamps) into ``out_dir``.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, replace

import numpy as np

from .fem import DiffusionProfile, HeatProblem, Mesh1D, solve_monolithic
from .frequency import DiffusionPair, frequency_band_from_grid, rho
from .optimize import optimize, optimize_v3, v3_equation_sides
from .schwarz import (
    IterationDiverged,
    decompose,
    interface_diffusion_pairs,
    oswr_iterate,
)

__all__ = [
    "ConfigError",
    "ScenarioError",
    "ExperimentConfig",
    "parse_config",
    "run_ratio_sweep",
    "run_dt_sweep",
    "run_dx_sweep",
    "run_rho_curves",
    "run_v3_root_scan",
    "run_tps_three_layer",
    "run_custom",
    "run_scenario",
    "SCENARIOS",
]


class ConfigError(ValueError):
    """Invalid configuration file or option."""


class ScenarioError(RuntimeError):
    """A scenario could not produce its contracted result."""


SCENARIOS = (
    "ratio_sweep",
    "dt_sweep",
    "dx_sweep",
    "rho_curves",
    "v3_root_scan",
    "tps_three_layer",
    "custom",
)

_DEFAULT_RATIOS = {
    "ratio_sweep": (10.0, 100.0, 1000.0, 10000.0),
    "dt_sweep": (10.0, 1000.0),
    "dx_sweep": (10.0, 1000.0),
    "rho_curves": (10.0, 100.0),
}


@dataclass
class ExperimentConfig:
    """Validated settings for one scenario run.

    ``ratios`` left as None picks the scenario's default list.  For the
    layered scenarios (``tps_three_layer``, ``custom``) the diffusion field
    is given by ``nu_layers`` split at ``interfaces``; the two-domain sweeps
    use ``nu1`` on the left and ``nu1/ratio`` on the right of the single
    interface.
    """

    scenario: str = "ratio_sweep"
    final_time: float = 5.0
    dx: float = 1.0 / 40.0
    dt: float = 1.0 / 40.0
    dt_list: tuple[float, ...] = (1.0 / 20.0, 1.0 / 40.0, 1.0 / 80.0, 1.0 / 160.0)
    dx_list: tuple[float, ...] = (1.0 / 20.0, 1.0 / 40.0, 1.0 / 80.0)
    ratios: tuple[float, ...] | None = None
    nu1: float = 1.0
    nu_layers: tuple[float, ...] = ()
    interfaces: tuple[float, ...] = (0.5,)
    versions: tuple[str, ...] = ("I", "II", "III")
    initial_value: float = 20.0
    bc_left: float = 0.0
    bc_right: float = 0.0
    tolerance: float = 1e-8
    max_iter: int = 1000
    init: str = "zero"
    sweep: str = "gauss_seidel"
    out_dir: str | None = None
    param_grid_size: int = 512
    freq_grid_size: int = 128
    rho_points: int = 512
    scan_points: int = 1000
    mu: float = math.sqrt(10.0)

    def validate(self) -> None:
        def positive(key, value):
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ConfigError(f"{key} must be positive, got {value!r}")

        if self.scenario not in SCENARIOS:
            raise ConfigError(
                f"scenario must be one of {', '.join(SCENARIOS)}, got {self.scenario!r}"
            )
        positive("T", self.final_time)
        positive("dx", self.dx)
        positive("dt", self.dt)
        positive("nu1", self.nu1)
        positive("tolerance", self.tolerance)
        positive("mu", self.mu)
        for key, seq in (("dts", self.dt_list), ("dxs", self.dx_list)):
            if not seq:
                raise ConfigError(f"{key} must not be empty")
            for v in seq:
                positive(key, v)
        if self.ratios is not None:
            if not self.ratios:
                raise ConfigError("ratios must not be empty")
            for v in self.ratios:
                positive("ratios", v)
        for v in self.nu_layers:
            positive("nu_layers", v)
        if list(self.interfaces) != sorted(set(self.interfaces)):
            raise ConfigError("interfaces must be strictly increasing")
        for v in self.interfaces:
            if not (0.0 < v < 1.0):
                raise ConfigError(f"interfaces must lie inside (0, 1), got {v}")
        bad = [v for v in self.versions if v not in ("I", "II", "III")]
        if bad or not self.versions:
            raise ConfigError(f"versions must be a nonempty subset of I,II,III, got {self.versions!r}")
        if self.max_iter < 1:
            raise ConfigError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.init not in ("zero", "from_initial", "exact"):
            raise ConfigError(f"init must be zero, from_initial or exact, got {self.init!r}")
        if self.sweep not in ("gauss_seidel", "jacobi"):
            raise ConfigError(f"sweep must be gauss_seidel or jacobi, got {self.sweep!r}")
        if self.param_grid_size < 16 or self.freq_grid_size < 16:
            raise ConfigError("param_grid_size and freq_grid_size must be >= 16")
        if self.scenario == "rho_curves" and self.rho_points < 500:
            raise ConfigError("rho_points must be >= 500 for rho_curves")
        if self.scenario == "v3_root_scan" and self.scan_points < 500:
            raise ConfigError("scan_points must be >= 500 for v3_root_scan")
        if self.scenario in ("tps_three_layer", "custom"):
            if len(self.nu_layers) != len(self.interfaces) + 1:
                raise ConfigError(
                    "nu_layers must have exactly one more entry than interfaces"
                )

    def effective_ratios(self) -> tuple[float, ...]:
        if self.ratios is not None:
            return self.ratios
        return _DEFAULT_RATIOS.get(self.scenario, (10.0,))


_FLOAT_KEYS = {
    "T": "final_time",
    "dx": "dx",
    "dt": "dt",
    "nu1": "nu1",
    "u0": "initial_value",
    "g_left": "bc_left",
    "g_right": "bc_right",
    "tolerance": "tolerance",
    "mu": "mu",
}
_INT_KEYS = {
    "max_iter": "max_iter",
    "param_grid_size": "param_grid_size",
    "freq_grid_size": "freq_grid_size",
    "rho_points": "rho_points",
    "scan_points": "scan_points",
}
_LIST_KEYS = {
    "dts": "dt_list",
    "dxs": "dx_list",
    "ratios": "ratios",
    "nu_layers": "nu_layers",
    "interfaces": "interfaces",
}
_STR_KEYS = {
    "scenario": "scenario",
    "init": "init",
    "sweep": "sweep",
    "out_dir": "out_dir",
}

CONFIG_KEYS = sorted(
    list(_FLOAT_KEYS) + list(_INT_KEYS) + list(_LIST_KEYS) + list(_STR_KEYS) + ["versions"]
)


def _parse_float(key: str, raw: str, lineno: int) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"line {lineno}: {key} expects a number, got {raw!r}") from None


def parse_config(path: str) -> ExperimentConfig:
    """Parse a key=value configuration file and validate it."""
    cfg = ExperimentConfig()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise ConfigError(f"line {lineno}: expected key=value, got {text!r}")
            key, raw = (part.strip() for part in text.split("=", 1))
            if key in _FLOAT_KEYS:
                setattr(cfg, _FLOAT_KEYS[key], _parse_float(key, raw, lineno))
            elif key in _INT_KEYS:
                try:
                    setattr(cfg, _INT_KEYS[key], int(raw))
                except ValueError:
                    raise ConfigError(
                        f"line {lineno}: {key} expects an integer, got {raw!r}"
                    ) from None
            elif key in _LIST_KEYS:
                items = [s.strip() for s in raw.split(",") if s.strip()]
                values = tuple(_parse_float(key, s, lineno) for s in items)
                setattr(cfg, _LIST_KEYS[key], values if values else None)
            elif key == "versions":
                setattr(cfg, "versions", tuple(s.strip() for s in raw.split(",") if s.strip()))
            elif key in _STR_KEYS:
                setattr(cfg, _STR_KEYS[key], raw)
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
    try:
        cfg.validate()
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return cfg


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    if value is None:
        return ""
    return str(value)


def _write_csv(path: str, header: list[str], rows: list[list]) -> str:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    return path


def _out_path(cfg: ExperimentConfig, name: str) -> str:
    if not cfg.out_dir:
        raise ConfigError("out_dir is required to write results")
    os.makedirs(cfg.out_dir, exist_ok=True)
    return os.path.join(cfg.out_dir, name)


def _elements_for(dx: float) -> int:
    n = round(1.0 / dx)
    if n < 2 or abs(n * dx - 1.0) > 1e-9:
        raise ConfigError(f"dx={dx} does not divide the unit domain")
    return n


@dataclass
class _CaseResult:
    params: object = None
    rho_star: float | None = None
    iterations: int | None = None
    final_error: float | None = None
    errors: tuple[float, ...] = ()
    field: object = None
    error: str = ""


def _run_layered_case(
    cfg: ExperimentConfig,
    version: str,
    layers: tuple[float, ...],
    interfaces: tuple[float, ...],
    dx: float,
    dt: float,
) -> _CaseResult:
    """One (version, geometry, grid) waveform-relaxation run."""
    out = _CaseResult()
    try:
        mesh = Mesh1D.uniform(0.0, 1.0, _elements_for(dx))
        deco = decompose(mesh, interfaces)
        profile = DiffusionProfile(layers, interfaces)
        problem = HeatProblem(
            profile,
            None,
            cfg.initial_value,
            cfg.bc_left,
            cfg.bc_right,
            cfg.final_time,
            dt,
        )
        reference = solve_monolithic(problem, mesh)
        band = frequency_band_from_grid(cfg.final_time, dt)
        pairs = interface_diffusion_pairs(problem, deco)
        results = [optimize(version, band, pair) for pair in pairs]
        out.params = results[0].params
        out.rho_star = max(r.rho_star for r in results)
        history, combined = oswr_iterate(
            problem,
            deco,
            [r.params for r in results],
            tol=cfg.tolerance,
            max_iter=cfg.max_iter,
            init=cfg.init,
            sweep=cfg.sweep,
            reference=reference,
        )
        out.errors = history.errors
        out.final_error = history.errors[-1]
        out.field = combined
        if history.converged:
            out.iterations = history.iterations_to_tolerance
        else:
            out.error = f"did not converge within {cfg.max_iter} iterations"
    except (ConfigError, ValueError, IterationDiverged, RuntimeError) as exc:
        out.error = str(exc)
    return out


def _two_domain_layers(cfg: ExperimentConfig, ratio: float) -> tuple[float, ...]:
    return (cfg.nu1, cfg.nu1 / ratio)


def run_ratio_sweep(cfg: ExperimentConfig) -> list[str]:
    """Iteration counts over the diffusion-ratio list at fixed grid."""
    header = [
        "ratio",
        "version",
        "p",
        "q",
        "sigma1",
        "sigma2",
        "rho_star_analytic",
        "iterations",
        "final_error",
        "error",
    ]
    rows = []
    for ratio in cfg.effective_ratios():
        for version in cfg.versions:
            case = _run_layered_case(
                cfg, version, _two_domain_layers(cfg, ratio), cfg.interfaces, cfg.dx, cfg.dt
            )
            p = case.params
            rows.append(
                [
                    ratio,
                    version,
                    p.p if p else None,
                    p.q if p else None,
                    p.sigma1 if p else None,
                    p.sigma2 if p else None,
                    case.rho_star,
                    case.iterations,
                    case.final_error,
                    case.error,
                ]
            )
    return [_write_csv(_out_path(cfg, "ratio_sweep.csv"), header, rows)]


def _run_grid_sweep(cfg: ExperimentConfig, kind: str) -> list[str]:
    header = ["ratio", "version", kind, "iterations", "rho_star", "error"]
    values = cfg.dt_list if kind == "dt" else cfg.dx_list
    rows = []
    paths = []
    for ratio in cfg.effective_ratios():
        for version in cfg.versions:
            for value in values:
                dx = cfg.dx if kind == "dt" else value
                dt = value if kind == "dt" else cfg.dt
                case = _run_layered_case(
                    cfg, version, _two_domain_layers(cfg, ratio), cfg.interfaces, dx, dt
                )
                rows.append(
                    [ratio, version, value, case.iterations, case.rho_star, case.error]
                )
                hist_rows = [[i + 1, e] for i, e in enumerate(case.errors)]
                name = f"{kind}_sweep_history_ratio{ratio:g}_v{version}_{kind}{value:g}.csv"
                paths.append(
                    _write_csv(_out_path(cfg, name), ["iteration", "error"], hist_rows)
                )
    paths.insert(0, _write_csv(_out_path(cfg, f"{kind}_sweep.csv"), header, rows))
    return paths


def run_dt_sweep(cfg: ExperimentConfig) -> list[str]:
    """Iteration counts across the time-step list, plus error histories."""
    return _run_grid_sweep(cfg, "dt")


def run_dx_sweep(cfg: ExperimentConfig) -> list[str]:
    """Iteration counts across the mesh-size list, plus error histories."""
    return _run_grid_sweep(cfg, "dx")


_RHO_PLOT_SCRIPT = """\
#!/usr/bin/env python3
\"\"\"Plot the convergence-factor curves written by the rho_curves scenario.\"\"\"
import csv
from collections import defaultdict

import matplotlib.pyplot as plt

curves = defaultdict(lambda: ([], []))
with open("rho_curves.csv", encoding="utf-8") as fh:
    for row in csv.DictReader(fh):
        key = (float(row["ratio"]), row["version"])
        curves[key][0].append(float(row["wt"]))
        curves[key][1].append(float(row["rho"]))

ratios = sorted({k[0] for k in curves})
fig, axes = plt.subplots(1, len(ratios), figsize=(6 * len(ratios), 4.5), squeeze=False)
for ax, ratio in zip(axes[0], ratios):
    for version in ("I", "II", "III"):
        if (ratio, version) in curves:
            wt, r = curves[(ratio, version)]
            ax.semilogx(wt, r, label=f"Version {version}")
    ax.set_xlabel("transformed frequency")
    ax.set_ylabel("convergence factor")
    ax.set_title(f"diffusion ratio {ratio:g}")
    ax.legend()
fig.tight_layout()
fig.savefig("rho_curves.png", dpi=150)
print("wrote rho_curves.png")
"""


def run_rho_curves(cfg: ExperimentConfig) -> list[str]:
    """Convergence-factor curves over the band for the optimized parameters."""
    band = frequency_band_from_grid(cfg.final_time, cfg.dt)
    grid = band.geometric_grid(cfg.rho_points)
    header = ["ratio", "version", "wt", "rho"]
    rows = []
    for ratio in cfg.effective_ratios():
        pair = DiffusionPair(cfg.nu1, cfg.nu1 / ratio)
        for version in cfg.versions:
            params = optimize(version, band, pair).params
            values = rho(grid, params, pair)
            rows.extend(
                [ratio, version, float(w), float(r)] for w, r in zip(grid, values)
            )
    paths = [_write_csv(_out_path(cfg, "rho_curves.csv"), header, rows)]
    script = _out_path(cfg, "plot_rho_curves.py")
    with open(script, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_RHO_PLOT_SCRIPT)
    paths.append(script)
    return paths


def run_v3_root_scan(cfg: ExperimentConfig) -> list[str]:
    """Scan of the two-parameter scalar equation over its bracket.

    Writes the pointwise left/right sides and residual, plus a one-row
    summary with the sign-change count and the root located by bisection.
    Raises ScenarioError unless exactly one sign change is found.
    """
    band = frequency_band_from_grid(cfg.final_time, cfg.dt)
    mu = cfg.mu
    p_lo = band.wt1 * (math.sqrt(mu * mu + 1.0) - (mu - 1.0))
    p_hi = math.sqrt(2.0 * band.wt1 * band.wt2)
    ps = np.linspace(p_lo + 1e-9 * (p_hi - p_lo), p_hi, cfg.scan_points)
    lhs, rhs = v3_equation_sides(ps, band, mu)
    residual = lhs - rhs
    sign = np.sign(residual)
    changes = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    scan_root = float(0.5 * (ps[changes[0]] + ps[changes[0] + 1])) if changes.size else None

    pair = DiffusionPair(mu * mu, 1.0)
    result = optimize_v3(band, pair)
    rows = [
        [float(p), float(l), float(r), float(d)]
        for p, l, r, d in zip(ps, lhs, rhs, residual)
    ]
    paths = [_write_csv(_out_path(cfg, "v3_root_scan.csv"), ["p", "lhs", "rhs", "residual"], rows)]
    summary = [
        [
            int(changes.size),
            scan_root,
            result.params.p,
            float(ps[1] - ps[0]),
        ]
    ]
    paths.append(
        _write_csv(
            _out_path(cfg, "v3_root_scan_summary.csv"),
            ["sign_changes", "scan_root", "bisection_root", "grid_spacing"],
            summary,
        )
    )
    if changes.size != 1:
        raise ScenarioError(
            f"expected exactly one sign change in the bracket, found {changes.size}"
        )
    return paths


_FIELD_PLOT_SCRIPT = """\
#!/usr/bin/env python3
\"\"\"Plot the space-time field written by the layered scenario.\"\"\"
import csv

import matplotlib.pyplot as plt
import numpy as np

xs, ts, us = [], [], []
with open("{name}", encoding="utf-8") as fh:
    for row in csv.DictReader(fh):
        xs.append(float(row["x"]))
        ts.append(float(row["t"]))
        us.append(float(row["u"]))
x = np.unique(xs)
t = np.unique(ts)
u = np.array(us).reshape(t.size, x.size)

fig, ax = plt.subplots(figsize=(7, 4.5))
mesh = ax.pcolormesh(x, t, u, shading="auto")
fig.colorbar(mesh, ax=ax, label="temperature")
ax.set_xlabel("x")
ax.set_ylabel("t")
fig.tight_layout()
fig.savefig("{png}", dpi=150)
print("wrote {png}")
"""


def _run_layered_scenario(cfg: ExperimentConfig, prefix: str) -> list[str]:
    layers = cfg.nu_layers
    interfaces = cfg.interfaces
    summary_rows = []
    paths = []
    dump_field = None
    dump_version = None
    for version in cfg.versions:
        case = _run_layered_case(cfg, version, layers, interfaces, cfg.dx, cfg.dt)
        summary_rows.append(
            [version, case.iterations, case.final_error, case.error]
        )
        hist_rows = [[i + 1, e] for i, e in enumerate(case.errors)]
        paths.append(
            _write_csv(
                _out_path(cfg, f"{prefix}_history_v{version}.csv"),
                ["iteration", "error"],
                hist_rows,
            )
        )
        if case.field is not None and not case.error:
            if dump_version is None or version == "III":
                dump_field = case.field
                dump_version = version
    paths.insert(
        0,
        _write_csv(
            _out_path(cfg, f"{prefix}_summary.csv"),
            ["version", "iterations", "final_error", "error"],
            summary_rows,
        ),
    )
    if dump_field is None:
        raise ScenarioError("no version converged; no field to write")
    field_rows = []
    times = dump_field.times
    nodes = dump_field.mesh.nodes
    for k, t in enumerate(times):
        for j, x in enumerate(nodes):
            field_rows.append([float(x), float(t), float(dump_field.values[k, j])])
    field_name = f"{prefix}_field.csv"
    paths.append(_write_csv(_out_path(cfg, field_name), ["x", "t", "u"], field_rows))
    script = _out_path(cfg, f"plot_{prefix}_field.py")
    with open(script, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_FIELD_PLOT_SCRIPT.format(name=field_name, png=f"{prefix}_field.png"))
    paths.append(script)
    return paths


def run_tps_three_layer(cfg: ExperimentConfig) -> list[str]:
    """Three-layer protection-stack scenario with asymmetric subdomains."""
    return _run_layered_scenario(cfg, "tps")


def run_custom(cfg: ExperimentConfig) -> list[str]:
    """Layered scenario fully driven by the configuration keys."""
    return _run_layered_scenario(cfg, "custom")


def tps_defaults(cfg: ExperimentConfig) -> ExperimentConfig:
    """The protection-stack presets: three layers, hot right boundary."""
    return replace(
        cfg,
        scenario="tps_three_layer",
        dx=1.0 / 100.0,
        dt=1.0 / 40.0,
        final_time=5.0,
        nu_layers=(1.0, 1e-2, 1e-3),
        interfaces=(0.2, 0.4),
        bc_left=0.0,
        bc_right=50.0,
    )


_RUNNERS = {
    "ratio_sweep": run_ratio_sweep,
    "dt_sweep": run_dt_sweep,
    "dx_sweep": run_dx_sweep,
    "rho_curves": run_rho_curves,
    "v3_root_scan": run_v3_root_scan,
    "tps_three_layer": run_tps_three_layer,
    "custom": run_custom,
}


def run_scenario(cfg: ExperimentConfig) -> list[str]:
    """Validate the configuration and run its scenario; returns written paths."""
    cfg.validate()
    return _RUNNERS[cfg.scenario](cfg)
