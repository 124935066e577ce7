"""Command-line front end.

Exit codes: 0 success, 1 scientific verdict or evaluation failure,
2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .config import ConfigError, RunConfig, build_objects, load_config, resolve_metric
from .coords import sample_grid
from .errors import PreconditionFailed, SpraylabError
from .finsler import (
    geodesic_equation_residual,
    metrizability_residual,
    scalar_flag_decompose,
)
from .projective import deformed_connection_residual, deformed_jacobi_residual, funk_residual
from .scenarios import ScenarioReport, run_flat_control, run_proposition1, run_theorem1
from .spraycalc import isotropy_decompose, jacobi_endomorphism

__all__ = ["main", "format_float", "read_table", "summarize"]

EXIT_OK, EXIT_VERDICT, EXIT_CONFIG = 0, 1, 2


def format_float(v: float) -> str:
    return format(float(v), ".17g")


# --- tables -------------------------------------------------------------------


def summarize(columns: Sequence[str], rows: Sequence[Sequence[float]]) -> dict:
    data = np.array(rows, dtype=float).reshape(len(rows), len(columns))
    out = {}
    for k, name in enumerate(columns):
        col = data[:, k]
        out[name] = {"min": float(np.min(col)), "max": float(np.max(col)),
                     "mean": float(np.mean(col))}
    return out


def _render(columns: list[str], rows: list[list[float]], fmt: str) -> str:
    if fmt == "json":
        payload = {
            "schema": "spraylab.table/1",
            "columns": columns,
            "rows": rows,
            "summary": summarize(columns, rows),
        }
        return json.dumps(payload, sort_keys=True, indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([format_float(v) for v in r])
    return buf.getvalue()


def read_table(text: str, fmt: str = "csv") -> tuple[list[str], list[list[float]]]:
    """Parse a table written by any table command."""
    if fmt == "json":
        d = json.loads(text)
        return d["columns"], [[float(v) for v in r] for r in d["rows"]]
    reader = csv.reader(io.StringIO(text))
    columns = next(reader)
    return columns, [[float(v) for v in r] for r in reader]


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _point_columns(n: int) -> list[str]:
    return [f"x{i + 1}" for i in range(n)] + [f"y{i + 1}" for i in range(n)]


# --- commands -----------------------------------------------------------------


def cmd_curvature(cfg: RunConfig) -> int:
    obj = build_objects(cfg)
    n = obj.chart.dim
    samples = sample_grid(obj.chart, cfg.grid())
    columns = _point_columns(n) + [f"phi_{i + 1}_{j + 1}" for i in range(n) for j in range(n)]
    columns += ["rho", "iso_res", "kappa", "sfc_res"]
    rows = []
    for p in samples:
        Phi = jacobi_endomorphism(obj.spray, p)
        iso = isotropy_decompose(obj.spray, p, Phi)
        sfc = scalar_flag_decompose(obj.spray, obj.metric, p, Phi)
        rows.append([*p.x, *p.y, *Phi.ravel(), iso.rho, iso.residual, sfc.kappa, sfc.residual])
    _emit(_render(columns, rows, cfg.format), cfg.out)
    return EXIT_OK


def cmd_funk(cfg: RunConfig) -> int:
    obj = build_objects(cfg)
    if obj.factor is None:
        raise ConfigError("factor.spec", "the funk command needs --factor")
    n = obj.chart.dim
    samples = sample_grid(obj.chart, cfg.grid())
    columns = _point_columns(n) + [f"lhs_{j + 1}" for j in range(n)]
    columns += [f"rhs_{j + 1}" for j in range(n)] + [f"res_{j + 1}" for j in range(n)]
    columns += ["res_norm", "res_normalized", "side_ratio"]
    rows = []
    for p in samples:
        fr = funk_residual(obj.spray, obj.factor, p)
        rr = float(fr.rhs @ fr.rhs)
        ratio = float(fr.lhs @ fr.rhs) / rr if rr > 0 else 0.0
        rows.append([*p.x, *p.y, *fr.lhs, *fr.rhs, *fr.residual, fr.norm, fr.normalized, ratio])
    _emit(_render(columns, rows, cfg.format), cfg.out)
    return EXIT_OK


def cmd_metrizability(cfg: RunConfig) -> int:
    obj = build_objects(cfg)
    n = obj.chart.dim
    samples = sample_grid(obj.chart, cfg.grid())
    columns = _point_columns(n) + ["geodesic_res", "metrizability_res"]
    rows = [[*p.x, *p.y, geodesic_equation_residual(obj.spray, obj.metric, p),
             metrizability_residual(obj.spray, obj.metric, p)] for p in samples]
    _emit(_render(columns, rows, cfg.format), cfg.out)
    return EXIT_OK


def cmd_deform_check(cfg: RunConfig) -> int:
    obj = build_objects(cfg)
    if obj.factor is None:
        raise ConfigError("factor.spec", "the deform-check command needs --factor")
    n = obj.chart.dim
    samples = sample_grid(obj.chart, cfg.grid())
    columns = _point_columns(n) + ["connection_res", "jacobi_res"]
    rows = [[*p.x, *p.y, deformed_connection_residual(obj.spray, obj.factor, p),
             deformed_jacobi_residual(obj.spray, obj.factor, p)] for p in samples]
    _emit(_render(columns, rows, cfg.format), cfg.out)
    return EXIT_OK


def run_scenario(name: str, cfg: RunConfig) -> ScenarioReport:
    settings = cfg.settings()
    echo = {"config": cfg.echo()}
    grid = cfg.grid()
    if name == "thm1":
        dim = cfg.dim or 2
        metric = resolve_metric(cfg.metric or "poincare", dim)
        return run_theorem1(metric, cfg.a, grid, cfg.b, settings, echo)
    if name == "prop1":
        dim = cfg.dim or 3
        metric = resolve_metric(cfg.metric or "poincare", dim)
        return run_proposition1(metric, cfg.lam, grid, settings, echo)
    if name == "flat":
        return run_flat_control(grid, cfg.dim or 2, settings, echo)
    raise ConfigError("scenario", f"unknown scenario {name!r}")


def cmd_scenario(name: str, cfg: RunConfig) -> int:
    report = run_scenario(name, cfg)
    if cfg.out:
        out = Path(cfg.out)
        out.write_text(report.to_json(), encoding="utf-8")
        out.with_suffix(".txt").write_text(report.to_text(), encoding="utf-8")
        sys.stdout.write(report.to_text())
    else:
        sys.stdout.write(report.to_json() if cfg.format == "json" else report.to_text())
    return EXIT_OK if report.verdict else EXIT_VERDICT


# --- argument handling --------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="TOML run configuration")
    common.add_argument("--metric", help="euclidean | poincare | constant:<json> | expr:<F> | oneform:<a>")
    common.add_argument("--spray", help="geodesic | flat | expr:<G1>;<G2>;...")
    common.add_argument("--deform", help="factor spec; use the spray S - 2PC instead of S")
    common.add_argument("--factor", help="zero | funk | expr:<P> | lift:<a> | neg-metric:<lambda>")
    common.add_argument("--dim", type=int)
    common.add_argument("--domain", choices=["auto", "ball", "all"])
    common.add_argument("--samples", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--max-norm", dest="max_norm", type=float)
    common.add_argument("--min-norm", dest="min_norm", type=float)
    common.add_argument("--out", metavar="PATH")
    common.add_argument("--format", choices=["csv", "json"])

    parser = argparse.ArgumentParser(prog="spraylab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in [
        ("curvature", "Jacobi endomorphism, Ricci scalar, isotropy and flag-curvature fits"),
        ("funk", "both sides of the Funk equation for a factor"),
        ("metrizability", "geodesic-equation and d_h F^2 residuals of a spray"),
        ("deform-check", "transformation-law residuals for a deformation"),
    ]:
        sub.add_parser(name, parents=[common], help=helptext)
    sc = sub.add_parser("scenario", parents=[common], help="replay thm1, prop1 or flat")
    sc.add_argument("name", choices=["thm1", "prop1", "flat"])
    sc.add_argument("--lambda", dest="lam", type=float)
    sc.add_argument("--a", dest="a", help="base function for thm1")
    sc.add_argument("--b", dest="b", help="coefficient of the degenerate one-form metric")
    return parser


def _merge(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.command == "scenario" and not args.config:
        cfg.samples = 200
    for key in ("metric", "spray", "deform", "factor", "dim", "domain", "samples", "seed",
                "max_norm", "min_norm", "out", "format", "lam", "a", "b"):
        v = getattr(args, key, None)
        if v is not None:
            setattr(cfg, key, v)
    cfg.validate()
    return cfg


def main(argv: Sequence[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = _merge(args)
        if args.command == "scenario":
            return cmd_scenario(args.name, cfg)
        return {
            "curvature": cmd_curvature,
            "funk": cmd_funk,
            "metrizability": cmd_metrizability,
            "deform-check": cmd_deform_check,
        }[args.command](cfg)
    except (ConfigError, PreconditionFailed) as exc:
        print(f"spraylab: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SpraylabError as exc:
        print(f"spraylab: evaluation failed: {exc}", file=sys.stderr)
        return EXIT_VERDICT


if __name__ == "__main__":
    sys.exit(main())
