"""Charts, tangent samples, scalar fields and derivative towers.

Every geometric object in the package is evaluated pointwise on the slit
tangent bundle of a single coordinate chart.  Points are ``TangentSample``
pairs ``(x, y)``; scalar fields hand out forward-mode jets in the ``2n``
coordinates ``(x^1..x^n, y^1..y^n)`` in that order.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

from . import jet as _jet
from .errors import DomainError, EmptyGridError, SmoothnessError
from .jet import Jet

__all__ = [
    "Chart",
    "TangentSample",
    "DerivativeTower",
    "ScalarField",
    "GridSpec",
    "Tolerances",
    "TOLERANCES",
    "evaluate_tower",
    "sample_grid",
    "parallel_map",
]

T = TypeVar("T")
R = TypeVar("R")


@dataclass(frozen=True)
class Tolerances:
    """Default numerical tolerances used across the package."""

    rel: float = 1e-7
    abs_floor: float = 1e-10
    degenerate_det: float = 1e-12
    nonzero_floor: float = 1e-3


TOLERANCES = Tolerances()


def _always(*_args) -> bool:
    return True


@dataclass(frozen=True)
class Chart:
    """A single coordinate patch of an ``n``-manifold and its fiber cone."""

    dim: int
    domain_predicate: Callable[[np.ndarray], bool] = _always
    cone_predicate: Callable[[np.ndarray, np.ndarray], bool] = _always
    name: str = "R^n"

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError(f"charts need dim >= 2, got {self.dim}")

    @classmethod
    def euclidean(cls, dim: int) -> "Chart":
        return cls(dim, name=f"R^{dim}")

    @classmethod
    def ball(cls, dim: int, radius: float = 1.0) -> "Chart":
        r2 = radius * radius

        def inside(x):
            return float(np.dot(x, x)) < r2

        return cls(dim, inside, name=f"ball(r={radius!r})^{dim}")

    def admissible(self, x: np.ndarray, y: np.ndarray) -> bool:
        if len(x) != self.dim or len(y) != self.dim:
            return False
        if not np.all(np.isfinite(x)) or not np.all(np.isfinite(y)):
            return False
        if not np.any(y):
            return False
        return bool(self.domain_predicate(x)) and bool(self.cone_predicate(x, y))


@dataclass(frozen=True, eq=False)
class TangentSample:
    """A point of the slit tangent bundle in one chart."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        y = np.array(self.y, dtype=float)
        if x.ndim != 1 or x.shape != y.shape:
            raise ValueError("x and y must be 1-d arrays of equal length")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def dim(self) -> int:
        return len(self.x)

    @property
    def z(self) -> np.ndarray:
        return np.concatenate([self.x, self.y])

    def key(self) -> tuple:
        return (self.x.tobytes(), self.y.tobytes())

    def scaled(self, lam: float) -> "TangentSample":
        return TangentSample(self.x, lam * self.y)

    def __eq__(self, other):
        if not isinstance(other, TangentSample):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"TangentSample(x={self.x.tolist()}, y={self.y.tolist()})"


@dataclass(frozen=True)
class DerivativeTower:
    """Value and partials of a scalar field at one point, ``(x, y)`` ordering."""

    value: float
    first: np.ndarray | None = None
    second: np.ndarray | None = None
    third: np.ndarray | None = None

    @classmethod
    def from_jet(cls, j: Jet, order: int) -> "DerivativeTower":
        return cls(
            j.value,
            j.gradient() if order >= 1 else None,
            j.hessian() if order >= 2 else None,
            j.third() if order >= 3 else None,
        )


JetFn = Callable[[TangentSample, int], Jet]


class ScalarField:
    """A smooth real function on (an open cone of) the slit tangent bundle.

    The field is defined by ``jet_fn(p, order)``, which returns a jet in the
    ``2n`` variables ``(x, y)`` about ``p``.  Results are memoised per point,
    which is safe because fields are immutable.
    """

    def __init__(
        self,
        chart: Chart,
        jet_fn: JetFn,
        max_order: int | None = None,
        name: str = "field",
    ):
        self.chart = chart
        self.max_order = max_order
        self.name = name
        self._jet_fn = jet_fn
        self._cached = lru_cache(maxsize=512)(self._compute)

    @property
    def dim(self) -> int:
        return self.chart.dim

    def __repr__(self):
        return f"ScalarField({self.name!r}, dim={self.dim})"

    def _compute(self, key: tuple, order: int) -> Jet:
        x = np.frombuffer(key[0])
        y = np.frombuffer(key[1])
        j = self._jet_fn(TangentSample(x, y), order)
        return _jet.as_jet(j, 2 * self.dim, order)

    def jet(self, p: TangentSample, order: int) -> Jet:
        if self.max_order is not None and order > self.max_order:
            raise SmoothnessError(
                f"{self.name} supports derivatives up to order {self.max_order}, not {order}"
            )
        return self._cached(p.key(), order)

    def value(self, p: TangentSample) -> float:
        return self.jet(p, 0).value

    def __call__(self, x, y) -> float:
        return self.value(TangentSample(x, y))

    # constructors -------------------------------------------------------
    @classmethod
    def from_function(
        cls,
        chart: Chart,
        fn: Callable[[list, list], object],
        name: str = "function",
        max_order: int | None = None,
    ) -> "ScalarField":
        """Wrap ``fn(x, y)`` written against jet-or-float arithmetic."""
        n = chart.dim

        def jet_fn(p, order):
            z = _jet.variables(p.z, order)
            return fn(z[:n], z[n:])

        return cls(chart, jet_fn, max_order, name)

    @classmethod
    def constant(cls, chart: Chart, value: float) -> "ScalarField":
        m = 2 * chart.dim
        return cls(chart, lambda p, order: Jet.const(value, m, order), name=repr(value))

    @classmethod
    def coordinate(cls, chart: Chart, block: str, index: int) -> "ScalarField":
        """The coordinate function ``x^index`` or ``y^index`` (0-based index)."""
        offset = {"x": 0, "y": chart.dim}[block]
        m = 2 * chart.dim

        def jet_fn(p, order):
            return _jet.variables(p.z, order)[offset + index] if order else Jet.const(
                p.z[offset + index], m, 0
            )

        return cls(chart, jet_fn, name=f"{block}{index + 1}")

    # arithmetic -----------------------------------------------------------
    def _combine(self, other, op, symbol) -> "ScalarField":
        if isinstance(other, ScalarField):
            orders = [o for o in (self.max_order, other.max_order) if o is not None]
            mo = min(orders) if orders else None
            return ScalarField(
                self.chart,
                lambda p, k: op(self.jet(p, k), other.jet(p, k)),
                mo,
                f"({self.name} {symbol} {other.name})",
            )
        c = float(other)
        return ScalarField(
            self.chart, lambda p, k: op(self.jet(p, k), c), self.max_order,
            f"({self.name} {symbol} {c!r})",
        )

    def __add__(self, other):
        return self._combine(other, lambda a, b: a + b, "+")

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, lambda a, b: a - b, "-")

    def __rsub__(self, other):
        return self._combine(other, lambda a, b: b - a, "r-")

    def __mul__(self, other):
        return self._combine(other, lambda a, b: a * b, "*")

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._combine(other, lambda a, b: a / b, "/")

    def __neg__(self):
        return ScalarField(self.chart, lambda p, k: -self.jet(p, k), self.max_order, f"-{self.name}")

    def __pow__(self, exponent: float):
        e = float(exponent)
        return ScalarField(self.chart, lambda p, k: self.jet(p, k) ** e, self.max_order,
                           f"{self.name}^{e!r}")

    def apply(self, fn: Callable[[Jet], Jet], name: str) -> "ScalarField":
        """Compose with a univariate jet function such as :func:`spraylab.jet.exp`."""
        return ScalarField(self.chart, lambda p, k: fn(self.jet(p, k)), self.max_order, name)


def evaluate_tower(f: ScalarField, p: TangentSample, order: int) -> DerivativeTower:
    """Value and all partials of ``f`` at ``p`` up to ``order`` (at most 3)."""
    if not 0 <= order <= 3:
        raise ValueError("towers are available for orders 0..3")
    if not f.chart.admissible(p.x, p.y):
        raise DomainError(f"{p!r} is not admissible for chart {f.chart.name}")
    return DerivativeTower.from_jet(f.jet(p, order), order)


@dataclass(frozen=True)
class GridSpec:
    """How to place base points and fiber directions.

    Base points come from exactly one source: ``base_points`` (explicit),
    ``counts`` (a regular grid over ``ranges``) or ``samples`` (uniform random
    draws from ``ranges``).  ``min_norm``/``max_norm`` filter base points by
    Euclidean norm; ``fibers`` random unit directions are drawn per base point.
    """

    samples: int | None = None
    counts: tuple[int, ...] | None = None
    ranges: tuple[tuple[float, float], ...] | None = None
    base_points: tuple[tuple[float, ...], ...] | None = None
    fibers: int = 1
    seed: int = 0
    min_norm: float = 0.0
    max_norm: float = math.inf
    max_attempts: int = 100_000


def _unit_vectors(rng: np.random.Generator, n: int, k: int) -> np.ndarray:
    v = rng.standard_normal((k, n))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def sample_grid(chart: Chart, spec: GridSpec) -> list[TangentSample]:
    n = chart.dim
    rng = np.random.default_rng(spec.seed)
    ranges = spec.ranges
    if ranges is None:
        half = min(spec.max_norm, 1e3) if math.isfinite(spec.max_norm) else 1.0
        ranges = ((-half, half),) * n
    if len(ranges) != n:
        raise ValueError(f"grid ranges have {len(ranges)} axes, chart has {n}")

    def base_ok(x):
        r = float(np.linalg.norm(x))
        return spec.min_norm <= r <= spec.max_norm and chart.domain_predicate(x)

    def fibers_at(x, count):
        out = []
        attempts = 0
        while len(out) < count:
            attempts += 1
            if attempts > spec.max_attempts:
                break
            y = _unit_vectors(rng, n, 1)[0]
            if chart.admissible(x, y):
                out.append(TangentSample(x, y))
        return out

    result: list[TangentSample] = []
    if spec.base_points is not None or spec.counts is not None:
        if spec.base_points is not None:
            bases = [np.asarray(b, dtype=float) for b in spec.base_points]
        else:
            if len(spec.counts) != n:
                raise ValueError("grid counts must give one entry per axis")
            axes = [np.linspace(lo, hi, c) for (lo, hi), c in zip(ranges, spec.counts)]
            bases = [np.array(pt) for pt in product(*axes)]
        for x in bases:
            if base_ok(x):
                result.extend(fibers_at(x, spec.fibers))
    elif spec.samples is not None:
        lo = np.array([r[0] for r in ranges], dtype=float)
        hi = np.array([r[1] for r in ranges], dtype=float)
        attempts = 0
        while len(result) < spec.samples and attempts < spec.max_attempts:
            attempts += 1
            x = lo + (hi - lo) * rng.random(n)
            if base_ok(x):
                result.extend(fibers_at(x, min(spec.fibers, spec.samples - len(result))))
    else:
        raise ValueError("GridSpec needs base_points, counts or samples")
    if not result:
        raise EmptyGridError(f"no admissible samples for chart {chart.name}")
    return result


def parallel_map(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    """Ordered map, threaded up to ``SPRAYLAB_THREADS`` workers."""
    items = list(items)
    try:
        workers = int(os.environ.get("SPRAYLAB_THREADS", "1"))
    except ValueError:
        workers = 1
    if workers <= 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def norm_ratio(num: float, den: float, floor: float = TOLERANCES.abs_floor) -> float:
    return float(num) / (float(den) + floor)


def as_samples(points: Sequence[tuple[Sequence[float], Sequence[float]]]) -> list[TangentSample]:
    return [TangentSample(x, y) for x, y in points]
