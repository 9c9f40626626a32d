"""Command line entry point.

    smallbody run <config>        full d-sweep, writes CSV/plot files
    smallbody best <sweep.csv>... Table-4 style best-ratio extraction
    smallbody check <config>      validate and print diagnostics

``<config>`` is a path or the name of a bundled preset (table1, table2,
table3). The worker count for the pairwise kernel is read from
``SMALLBODY_WORKERS``.

Exit codes: 0 success, 2 some rows did not converge, 1 error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from importlib import resources
from pathlib import Path

from . import experiment
from .geometry import place_uniform_lattice, regime_ratio
from .model import design_material

logger = logging.getLogger("smallbody")

WORKERS_ENV = "SMALLBODY_WORKERS"
PRESETS = ("table1", "table2", "table3")


def resolve_config_path(name: str) -> Path:
    path = Path(name)
    if path.exists():
        return path
    if name in PRESETS:
        return Path(str(resources.files("smallbody.configs") / f"{name}.cfg"))
    raise FileNotFoundError(f"no config file or preset named {name!r}")


def _configure_workers() -> None:
    value = os.environ.get(WORKERS_ENV)
    if not value:
        return
    import numba

    n = int(value)
    if not 1 <= n <= numba.config.NUMBA_NUM_THREADS:
        raise ValueError(f"{WORKERS_ENV} must lie in [1, {numba.config.NUMBA_NUM_THREADS}]")
    numba.set_num_threads(n)


def cmd_run(args: argparse.Namespace) -> int:
    config = experiment.load_config(resolve_config_path(args.config))
    if args.output_dir is not None:
        config = experiment.with_output_dir(config, args.output_dir)
    logger.info("running %d d values with M=%d", len(config.d_values), config.M)
    rows = experiment.run_sweep(config)
    out = experiment.emit_outputs(rows, config)
    print(out / "sweep.csv")
    for row in rows:
        print(
            f"d={row.d:.4g}  e1={row.e_ori_red:.3e}  e2={row.e_ie_ori:.3e}  "
            f"e3={row.e_ie_red:.3e}  e={row.error_sum:.3e}"
            + ("  [overflow]" if row.overflow else "")
            + ("" if row.converged else "  [NOT CONVERGED]")
        )
    return 0 if all(r.converged for r in rows) else 2


def cmd_best(args: argparse.Namespace) -> int:
    entries = []
    for name in args.sweeps:
        path = Path(name)
        rows = experiment.read_sweep_csv(path)
        M = None
        resolved = path.with_name("config.resolved.cfg")
        if resolved.exists():
            M = experiment.load_config(resolved).M
        label = f"M={M}" if M is not None else path.parent.name or str(path)
        entries.append((label, M, experiment.best_ratio(rows)))
    table = experiment.best_table(entries)
    if args.out:
        Path(args.out).write_text(table)
    sys.stdout.write(table)
    return 0


def cmd_check(args: argparse.Namespace) -> int:
    config = experiment.load_config(resolve_config_path(args.config))
    sys.stdout.write(experiment.format_config(config))
    phys = config.physical
    recipe = design_material(phys, config.M, config.a)
    print("# derived")
    print(f"p = {recipe.p:.6e}")
    print(f"N = {recipe.n_density:.6e}")
    print(f"h = {recipe.h:.6e}")
    print(f"zeta = {recipe.zeta(config.a, phys.kappa):.6e}")
    print(f"k*a = {phys.k * config.a:.3e}")
    print(f"M*a^(2-kappa) = {config.M * config.a ** (2 - phys.kappa):.6e}")
    flags = sorted(recipe.flags | phys.flags)
    print(f"flags = {', '.join(flags) if flags else 'none'}")
    print("# per d: d, a/d, d/a^((2-kappa)/3), lattice overflow")
    for d in config.d_values:
        cloud = place_uniform_lattice(config.M, d, side=phys.omega_side, radius=config.a)
        print(
            f"{d:.6e}  {config.a / d:.6e}  {regime_ratio(d, config.a, phys.kappa):.6e}  "
            f"{'overflow' if cloud.overflow else 'ok'}"
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="smallbody", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a d-sweep")
    p.add_argument("config")
    p.add_argument("-o", "--output-dir", type=Path, default=None)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("best", help="extract the best a/d ratio from sweep.csv files")
    p.add_argument("sweeps", nargs="+")
    p.add_argument("-o", "--out", default=None, help="also write the table to this file")
    p.set_defaults(func=cmd_best)

    p = sub.add_parser("check", help="validate a config and print diagnostics")
    p.add_argument("config")
    p.set_defaults(func=cmd_check)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        _configure_workers()
        return args.func(args)
    except (OSError, ValueError) as exc:
        logger.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
