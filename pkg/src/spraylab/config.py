"""Run configuration: a TOML file with one table per kind of spec.

Example::

    [chart]
    dim = 3

    [metric]
    spec = "poincare"          # euclidean | poincare | constant:<json> | expr:<F> | oneform:<a>

    [spray]
    spec = "geodesic"          # geodesic | flat | expr:<G1>;<G2>;...
    deform = "neg-metric:2"    # optional factor applied as S - 2PC

    [factor]
    spec = "lift:x1"           # zero | funk | expr:<P> | lift:<a> | neg-metric:<lambda>

    [grid]
    samples = 200
    seed = 0
    max_norm = 0.8

    [scenario]
    lambda = 2.0
    a = "x1"
    b = "1"

    [tolerances]
    nonzero_floor = 1e-3

    [output]
    path = "report.json"
    format = "json"
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

from .coords import Chart, GridSpec
from .errors import SpraylabError
from .expr import ExprError, field_from_expression
from .finsler import FinslerFunction, builtin_metric, geodesic_spray
from .projective import ProjectiveFactor, ball_funk, complete_lift, deform
from .scenarios import ScenarioSettings
from .spraycalc import SprayField

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = ["ConfigError", "RunConfig", "load_config", "build_objects", "resolve_factor"]


class ConfigError(SpraylabError):
    """Invalid configuration; ``field`` names the offending key."""

    def __init__(self, fieldname: str, message: str):
        self.field = fieldname
        super().__init__(f"config field {fieldname}: {message}")


# config key -> (table, key in table)
_LAYOUT = {
    "dim": ("chart", "dim"),
    "domain": ("chart", "domain"),
    "radius": ("chart", "radius"),
    "metric": ("metric", "spec"),
    "spray": ("spray", "spec"),
    "deform": ("spray", "deform"),
    "factor": ("factor", "spec"),
    "samples": ("grid", "samples"),
    "seed": ("grid", "seed"),
    "fibers": ("grid", "fibers"),
    "min_norm": ("grid", "min_norm"),
    "max_norm": ("grid", "max_norm"),
    "lam": ("scenario", "lambda"),
    "a": ("scenario", "a"),
    "b": ("scenario", "b"),
    "out": ("output", "path"),
    "format": ("output", "format"),
}


@dataclass
class RunConfig:
    dim: int | None = None
    domain: str = "auto"  # auto | ball | all
    radius: float = 1.0
    metric: str | None = None
    spray: str = "geodesic"
    deform: str | None = None
    factor: str | None = None
    samples: int = 50
    seed: int = 0
    fibers: int = 1
    min_norm: float = 0.0
    max_norm: float = 0.8
    lam: float = 2.0
    a: str = "x1"
    b: str = "1"
    out: str | None = None
    format: str = "csv"
    tolerances: dict = field(default_factory=dict)

    def field_name(self, key: str) -> str:
        table, name = _LAYOUT.get(key, ("", key))
        return f"{table}.{name}" if table else key

    def validate(self) -> None:
        if self.dim is not None and (not isinstance(self.dim, int) or self.dim < 2):
            raise ConfigError("chart.dim", f"must be an integer >= 2, got {self.dim!r}")
        if self.domain not in ("auto", "ball", "all"):
            raise ConfigError("chart.domain", f"must be auto, ball or all, got {self.domain!r}")
        if not isinstance(self.samples, int) or self.samples < 1:
            raise ConfigError("grid.samples", f"must be a positive integer, got {self.samples!r}")
        if self.format not in ("csv", "json"):
            raise ConfigError("output.format", f"must be csv or json, got {self.format!r}")
        known = {f.name for f in fields(ScenarioSettings)}
        for k in self.tolerances:
            if k not in known:
                raise ConfigError(f"tolerances.{k}", "unknown tolerance")

    def grid(self) -> GridSpec:
        return GridSpec(samples=self.samples, seed=self.seed, fibers=self.fibers,
                        min_norm=self.min_norm, max_norm=self.max_norm)

    def settings(self) -> ScenarioSettings:
        kw = dict(self.tolerances)
        if "annulus" in kw:
            kw["annulus"] = tuple(kw["annulus"])
        return ScenarioSettings(**kw)

    def echo(self) -> dict:
        """Config values as plain data for report provenance."""
        d = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "out"}
        return d


def load_config(path: str | Path) -> RunConfig:
    try:
        data = tomllib.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError("--config", str(exc)) from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("--config", f"{path}: {exc}") from exc
    cfg = RunConfig()
    seen = set()
    for key, (table, name) in _LAYOUT.items():
        section = data.get(table, {})
        if not isinstance(section, dict):
            raise ConfigError(table, "must be a table")
        if name in section:
            value = section[name]
            expected = type(getattr(RunConfig(), key)) if getattr(RunConfig(), key) is not None else None
            if expected is float and isinstance(value, int):
                value = float(value)
            if expected is not None and not isinstance(value, expected):
                raise ConfigError(f"{table}.{name}",
                                  f"expected {expected.__name__}, got {type(value).__name__}")
            setattr(cfg, key, value)
            seen.add((table, name))
    cfg.tolerances = dict(data.get("tolerances", {}))
    for table, section in data.items():
        if table == "tolerances":
            continue
        if table not in {t for t, _ in _LAYOUT.values()}:
            raise ConfigError(table, "unknown table")
        for name in section:
            if (table, name) not in seen:
                raise ConfigError(f"{table}.{name}", "unknown key")
    cfg.validate()
    return cfg


# --- building objects -------------------------------------------------------


def _chart(cfg: RunConfig, dim: int, prefer_ball: bool) -> Chart:
    if cfg.domain == "ball" or (cfg.domain == "auto" and prefer_ball):
        return Chart.ball(dim, cfg.radius)
    return Chart.euclidean(dim)


def resolve_metric(spec: str, dim: int) -> FinslerFunction:
    try:
        return builtin_metric(spec, dim)
    except (ExprError, ValueError) as exc:
        raise ConfigError("metric.spec", str(exc)) from exc


def resolve_factor(spec: str, chart: Chart, metric: FinslerFunction, where: str
                   ) -> ProjectiveFactor:
    kind, _, rest = spec.partition(":")
    try:
        if spec == "zero":
            return ProjectiveFactor.zero(chart)
        if spec == "funk":
            return ball_funk(chart)
        if kind == "expr":
            return ProjectiveFactor.from_expression(rest, chart)
        if kind == "lift":
            return complete_lift(field_from_expression(rest, chart))
        if kind == "neg-metric":
            lam = float(rest)
            return ProjectiveFactor(-lam * metric.F, f"-{lam!r} {metric.name}")
    except (ExprError, ValueError) as exc:
        raise ConfigError(where, str(exc)) from exc
    raise ConfigError(where, f"unknown factor {spec!r}")


def resolve_spray(cfg: RunConfig, chart: Chart, metric: FinslerFunction) -> SprayField:
    spec = cfg.spray
    kind, _, rest = spec.partition(":")
    if spec == "geodesic":
        S = geodesic_spray(metric)
    elif spec == "flat":
        S = SprayField.flat(chart)
    elif kind == "expr":
        parts = [s.strip() for s in rest.split(";")]
        if len(parts) != chart.dim:
            raise ConfigError("spray.spec", f"needs {chart.dim} coefficients, got {len(parts)}")
        try:
            S = SprayField.from_expressions(parts, chart)
        except ExprError as exc:
            raise ConfigError("spray.spec", str(exc)) from exc
    else:
        raise ConfigError("spray.spec", f"unknown spray {spec!r}")
    if cfg.deform:
        S = deform(S, resolve_factor(cfg.deform, chart, metric, "spray.deform"))
    return S


@dataclass
class Objects:
    chart: Chart
    metric: FinslerFunction
    spray: SprayField
    factor: ProjectiveFactor | None


def build_objects(cfg: RunConfig, default_metric: str = "euclidean", default_dim: int = 2
                  ) -> Objects:
    dim = cfg.dim or default_dim
    metric_spec = cfg.metric or default_metric
    metric = resolve_metric(metric_spec, dim)
    prefer_ball = metric_spec == "poincare" or "funk" in (cfg.factor or "") or "funk" in (
        cfg.deform or "")
    chart = _chart(cfg, dim, prefer_ball)
    spray = resolve_spray(cfg, chart, metric)
    factor = resolve_factor(cfg.factor, chart, metric, "factor.spec") if cfg.factor else None
    return Objects(chart, metric, spray, factor)
