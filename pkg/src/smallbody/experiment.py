"""Run configuration, d-sweeps and the CSV/plot-data outputs."""

from __future__ import annotations

import csv
import logging
import math
import re
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

from .compare import compare_all
from .geometry import partition_cube, place_uniform_lattice, regime_ratio
from .kernel import incident_rhs, ie_operator, ori_operator, red_operator
from .model import PhysicalConfig, design_material
from .solver import SolveReport, SolveSettings, gmres_solve

logger = logging.getLogger(__name__)

SWEEP_HEADER = (
    "d",
    "a_over_d",
    "e_ori_red",
    "e_ie_ori",
    "e_ie_red",
    "error_sum",
    "ori_iters",
    "red_iters",
    "ie_iters",
    "overflow",
    "converged",
)
DIAGNOSTICS_HEADER = (
    "d",
    "regime_ratio",
    "ori_residual",
    "red_residual",
    "ie_residual",
    "excluded_particles",
    "e_ori_red_normalized",
    "ori_seconds",
)
BEST_ROWS = ("M", "a", "d", "a_over_d", "e_ori_red", "e_ie_ori", "e_ie_red", "error_sum")

# (label, column, gnuplot dash style)
PLOT_SERIES = (
    ("ori_vs_red", "e_ori_red", "solid"),
    ("ie_vs_ori", "e_ie_ori", "dashed"),
    ("ie_vs_red", "e_ie_red", "dot-dashed"),
)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    physical: PhysicalConfig
    M: int
    a: float
    d_values: tuple[float, ...]
    P_per_side: int = 5
    C_per_side: int = 20
    solver: SolveSettings = field(default_factory=SolveSettings)
    output_dir: Path = Path("out")

    def __post_init__(self) -> None:
        d_values = tuple(float(d) for d in self.d_values)
        object.__setattr__(self, "d_values", d_values)
        object.__setattr__(self, "output_dir", Path(self.output_dir))
        if not d_values:
            raise ConfigError("d_values must be nonempty")
        if any(not d > 0.0 for d in d_values):
            raise ConfigError("all d values must be positive")
        if self.M < 1:
            raise ConfigError("M must be >= 1")
        if not 0.0 < self.a < min(d_values):
            raise ConfigError(f"need 0 < a < min(d), got a={self.a}, min(d)={min(d_values)}")
        if self.P_per_side < 1 or self.C_per_side < 1:
            raise ConfigError("grid sizes must be >= 1 per side")
        if not self.P_per_side**3 <= self.C_per_side**3 <= self.M:
            raise ConfigError(
                f"need P <= C <= M, got P={self.P_per_side**3}, C={self.C_per_side**3}, M={self.M}"
            )


@dataclass(frozen=True)
class SweepRow:
    d: float
    a_over_d: float
    e_ori_red: float
    e_ie_ori: float
    e_ie_red: float
    error_sum: float
    ori_iters: int
    red_iters: int
    ie_iters: int
    overflow: bool
    converged: bool
    # diagnostics (written to diagnostics.csv, not sweep.csv)
    regime_ratio: float = float("nan")
    ori_residual: float = float("nan")
    red_residual: float = float("nan")
    ie_residual: float = float("nan")
    excluded_particles: int = 0
    e_ori_red_normalized: float = float("nan")
    ori_seconds: float = float("nan")


# ---------------------------------------------------------------------------
# config file parsing
# ---------------------------------------------------------------------------
def parse_complex(text: str) -> complex:
    """Parse ``re+imi`` notation, e.g. ``-1+0.001i``, ``1``, ``2.5i``."""
    s = text.strip().replace(" ", "")
    if s.endswith(("i", "j")):
        try:
            return complex(s[:-1] + "j")
        except ValueError:
            pass
    try:
        return complex(float(s))
    except ValueError:
        raise ConfigError(f"cannot parse complex number {text!r}") from None


def format_complex(z: complex) -> str:
    sign = "-" if math.copysign(1.0, z.imag) < 0 else "+"
    return f"{z.real!r}{sign}{abs(z.imag)!r}i"


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(t) for t in re.split(r"[,\s]+", text.strip()) if t)


_KEYS = {
    "k", "alpha", "kappa", "omega_side", "n0", "n_desired",
    "M", "a", "d_values", "P_per_side", "C_per_side",
    "relative_tolerance", "restart_length", "max_iterations", "output_dir",
}


def parse_config_text(text: str) -> ExperimentConfig:
    """Build a config from ``key = value`` lines; ``#`` starts a comment.

    Physical keys missing from the file fall back to the paper constants.
    """
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value
    for required in ("M", "a", "d_values"):
        if required not in raw:
            raise ConfigError(f"missing required key {required!r}")

    defaults = PhysicalConfig.paper_defaults()
    try:
        physical = PhysicalConfig(
            k=float(raw.get("k", defaults.k)),
            alpha=_floats(raw["alpha"]) if "alpha" in raw else defaults.alpha,
            kappa=float(raw.get("kappa", defaults.kappa)),
            omega_side=float(raw.get("omega_side", defaults.omega_side)),
            n0=parse_complex(raw["n0"]) if "n0" in raw else defaults.n0,
            n_desired=parse_complex(raw["n_desired"]) if "n_desired" in raw else defaults.n_desired,
        )
        solver = SolveSettings(
            relative_tolerance=float(raw.get("relative_tolerance", 1e-3)),
            restart_length=int(raw.get("restart_length", 50)),
            max_iterations=int(raw.get("max_iterations", 10_000)),
        )
        output_dir = Path(raw.get("output_dir", "out"))
        return ExperimentConfig(
            physical=physical,
            M=int(float(raw["M"])),
            a=float(raw["a"]),
            d_values=_floats(raw["d_values"]),
            P_per_side=int(raw.get("P_per_side", 5)),
            C_per_side=int(raw.get("C_per_side", 20)),
            solver=solver,
            output_dir=output_dir,
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path) -> ExperimentConfig:
    return parse_config_text(Path(path).read_text())


def format_config(cfg: ExperimentConfig) -> str:
    """Fully resolved config text; parses back to an equal config."""
    phys = cfg.physical
    lines = [
        f"k = {phys.k!r}",
        "alpha = " + ", ".join(repr(c) for c in phys.alpha),
        f"kappa = {phys.kappa!r}",
        f"omega_side = {phys.omega_side!r}",
        f"n0 = {format_complex(phys.n0)}",
        f"n_desired = {format_complex(phys.n_desired)}",
        f"M = {cfg.M}",
        f"a = {cfg.a!r}",
        "d_values = " + ", ".join(repr(d) for d in cfg.d_values),
        f"P_per_side = {cfg.P_per_side}",
        f"C_per_side = {cfg.C_per_side}",
        f"relative_tolerance = {cfg.solver.relative_tolerance!r}",
        f"restart_length = {cfg.solver.restart_length}",
        f"max_iterations = {cfg.solver.max_iterations}",
        f"output_dir = {cfg.output_dir.resolve()}",
    ]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------
def _solve(op, cfg: PhysicalConfig, settings: SolveSettings) -> SolveReport:
    report = gmres_solve(op, incident_rhs(cfg, op), settings)
    if not report.converged:
        logger.warning(
            "%s solve did not converge: residual %.3e after %d iterations",
            op.kind.value, report.final_relative_residual, report.iterations,
        )
    return report


def run_sweep(
    config: ExperimentConfig,
    on_row: Callable[[SweepRow], None] | None = None,
) -> list[SweepRow]:
    """Solve ORI for every d, RED and IE once, and compare.

    A non-converged solve flags the affected rows instead of aborting.
    """
    phys = config.physical
    recipe = design_material(phys, config.M, config.a)
    if not recipe.solvable:
        logger.warning("recipe gives Im h = %.3e > 0; proceeding anyway", recipe.h.imag)
    side = phys.omega_side
    red_grid = partition_cube(side, config.P_per_side)
    ie_grid = partition_cube(side, config.C_per_side)
    red = _solve(red_operator(phys, red_grid, recipe), phys, config.solver)
    ie = _solve(ie_operator(phys, ie_grid, recipe), phys, config.solver)

    rows = []
    for d in config.d_values:
        cloud = place_uniform_lattice(config.M, d, side=side, radius=config.a)
        if cloud.overflow:
            logger.warning("d=%g: particle lattice does not fit strictly inside the domain", d)
        t0 = time.perf_counter()
        ori = _solve(ori_operator(phys, cloud, recipe), phys, config.solver)
        elapsed = time.perf_counter() - t0
        report = compare_all(ori.solution, red.solution, ie.solution, cloud, red_grid, ie_grid)
        row = SweepRow(
            d=d,
            a_over_d=config.a / d,
            e_ori_red=report.e_ori_red,
            e_ie_ori=report.e_ie_ori,
            e_ie_red=report.e_ie_red,
            error_sum=report.error_sum,
            ori_iters=ori.iterations,
            red_iters=red.iterations,
            ie_iters=ie.iterations,
            overflow=cloud.overflow,
            converged=ori.converged and red.converged and ie.converged,
            regime_ratio=regime_ratio(d, config.a, phys.kappa),
            ori_residual=ori.final_relative_residual,
            red_residual=red.final_relative_residual,
            ie_residual=ie.final_relative_residual,
            excluded_particles=report.excluded_particles,
            e_ori_red_normalized=report.e_ori_red_normalized,
            ori_seconds=elapsed,
        )
        logger.info("d=%g  e=%.3e  (%.1fs)", d, row.error_sum, elapsed)
        if on_row is not None:
            on_row(row)
        rows.append(row)
    return rows


def best_ratio(rows: Sequence[SweepRow]) -> SweepRow:
    """Row with the smallest error sum among converged rows; ties go to larger d."""
    ok = [r for r in rows if r.converged]
    if not ok:
        raise ValueError("no converged rows in sweep table")
    return min(ok, key=lambda r: (r.error_sum, -r.d))


# ---------------------------------------------------------------------------
# output files
# ---------------------------------------------------------------------------
def format_sci(x: float) -> str:
    """``2.000000e-2`` style: 6 digits after the point, unpadded exponent."""
    if not math.isfinite(x):
        return repr(float(x))
    mantissa, exp = f"{x:.6e}".split("e")
    return f"{mantissa}e{int(exp)}"


def _sweep_fields(row: SweepRow) -> list[str]:
    return [
        format_sci(row.d),
        format_sci(row.a_over_d),
        format_sci(row.e_ori_red),
        format_sci(row.e_ie_ori),
        format_sci(row.e_ie_red),
        format_sci(row.error_sum),
        str(row.ori_iters),
        str(row.red_iters),
        str(row.ie_iters),
        str(int(row.overflow)),
        str(int(row.converged)),
    ]


def write_sweep_csv(path: Path, rows: Sequence[SweepRow]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SWEEP_HEADER)
        for row in rows:
            writer.writerow(_sweep_fields(row))


def read_sweep_csv(path: str | Path) -> list[SweepRow]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != SWEEP_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        rows = []
        for rec in reader:
            if not rec:
                continue
            vals = dict(zip(header, rec))
            rows.append(
                SweepRow(
                    d=float(vals["d"]),
                    a_over_d=float(vals["a_over_d"]),
                    e_ori_red=float(vals["e_ori_red"]),
                    e_ie_ori=float(vals["e_ie_ori"]),
                    e_ie_red=float(vals["e_ie_red"]),
                    error_sum=float(vals["error_sum"]),
                    ori_iters=int(vals["ori_iters"]),
                    red_iters=int(vals["red_iters"]),
                    ie_iters=int(vals["ie_iters"]),
                    overflow=bool(int(vals["overflow"])),
                    converged=bool(int(vals["converged"])),
                )
            )
    return rows


def write_diagnostics_csv(path: Path, rows: Sequence[SweepRow]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(DIAGNOSTICS_HEADER)
        for r in rows:
            writer.writerow([
                format_sci(r.d),
                format_sci(r.regime_ratio),
                format_sci(r.ori_residual),
                format_sci(r.red_residual),
                format_sci(r.ie_residual),
                str(r.excluded_particles),
                format_sci(r.e_ori_red_normalized),
                f"{r.ori_seconds:.3f}",
            ])


def write_sweep_dat(path: Path, rows: Sequence[SweepRow]) -> None:
    """One whitespace-separated block per difference series, gnuplot ``index`` layout."""
    blocks = []
    for label, column, style in PLOT_SERIES:
        lines = [f"# series: {label} ({style})", "# d a_over_d value"]
        for r in rows:
            lines.append(f"{format_sci(r.d)} {format_sci(r.a_over_d)} {format_sci(getattr(r, column))}")
        blocks.append("\n".join(lines))
    lines = ["# series: error_sum", "# d a_over_d value"]
    lines += [f"{format_sci(r.d)} {format_sci(r.a_over_d)} {format_sci(r.error_sum)}" for r in rows]
    blocks.append("\n".join(lines))
    path.write_text("\n\n\n".join(blocks) + "\n")


def best_table(entries: Sequence[tuple[str, int | None, SweepRow]]) -> str:
    """Table-4 layout: one column per run, one line per quantity."""
    lines = [",".join(["quantity"] + [label for label, _, _ in entries])]
    for name in BEST_ROWS:
        cells = [name]
        for _, M, row in entries:
            if name == "M":
                cells.append(format_sci(float(M)) if M is not None else "")
            elif name == "a":
                cells.append(format_sci(row.a_over_d * row.d))
            else:
                cells.append(format_sci(getattr(row, name)))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def emit_outputs(rows: Sequence[SweepRow], config: ExperimentConfig, out_dir: Path | None = None) -> Path:
    """Write sweep.csv, sweep.dat, diagnostics.csv, best.csv and the resolved config."""
    if not rows:
        raise ValueError("empty sweep table")
    out_dir = Path(out_dir or config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_sweep_csv(out_dir / "sweep.csv", rows)
    write_sweep_dat(out_dir / "sweep.dat", rows)
    write_diagnostics_csv(out_dir / "diagnostics.csv", rows)
    (out_dir / "config.resolved.cfg").write_text(format_config(config))
    try:
        best = best_ratio(rows)
    except ValueError:
        logger.error("no converged rows; best.csv not written")
    else:
        (out_dir / "best.csv").write_text(best_table([(f"M={config.M}", config.M, best)]))
    return out_dir


def with_output_dir(config: ExperimentConfig, output_dir: Path) -> ExperimentConfig:
    return replace(config, output_dir=Path(output_dir))


__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "SweepRow",
    "best_ratio",
    "best_table",
    "emit_outputs",
    "format_config",
    "load_config",
    "parse_config_text",
    "read_sweep_csv",
    "run_sweep",
]
