"""Forward-mode differentiation with truncated multivariate Taylor series.

A :class:`Jet` holds the Taylor coefficients of a function of ``m`` variables
about a fixed point, up to total degree ``order``.  Arithmetic on jets
propagates all partial derivatives at once, so towers of mixed partials come
out exactly symmetric.  Jets can also be differentiated symbolically
(:meth:`Jet.diff`), which drops one order: this is how derivative-defined
fields (geodesic sprays, complete lifts) stay differentiable themselves.

Monomials are stored degree by degree, so the coefficient vector of a jet of
order ``k`` is a prefix of the one of order ``k + 1`` and truncation is a
slice.
"""

from __future__ import annotations

import math
from functools import lru_cache
from itertools import combinations_with_replacement
from typing import Sequence

import numpy as np

from .errors import DomainError

__all__ = ["Jet", "variables", "constant", "sqrt", "exp", "log", "fabs", "as_jet"]


class _Layout:
    """Monomial bookkeeping for ``m`` variables up to degree ``order``."""

    def __init__(self, m: int, order: int):
        self.m = m
        self.order = order
        exps: list[tuple[int, ...]] = []
        degree_start = [0]
        for d in range(order + 1):
            for combo in combinations_with_replacement(range(m), d):
                e = [0] * m
                for v in combo:
                    e[v] += 1
                exps.append(tuple(e))
            degree_start.append(len(exps))
        self.exps = np.array(exps, dtype=np.int64).reshape(len(exps), m)
        self.size = len(exps)
        self.degree_start = degree_start
        self.index = {e: k for k, e in enumerate(exps)}
        self.degrees = self.exps.sum(axis=1)
        self.factorials = np.array(
            [math.prod(math.factorial(int(v)) for v in e) for e in exps], dtype=float
        )

        left, right, out = [], [], []
        for i, ei in enumerate(exps):
            di = self.degrees[i]
            # pairs (i, j) whose product survives truncation
            for j in range(degree_start[order - di + 1]):
                ej = exps[j]
                left.append(i)
                right.append(j)
                out.append(self.index[tuple(a + b for a, b in zip(ei, ej))])
        self.mul_left = np.array(left, dtype=np.int64)
        self.mul_right = np.array(right, dtype=np.int64)
        self.mul_out = np.array(out, dtype=np.int64)


@lru_cache(maxsize=None)
def _layout(m: int, order: int) -> _Layout:
    return _Layout(m, order)


@lru_cache(maxsize=None)
def _diff_map(m: int, order: int, var: int) -> tuple[np.ndarray, np.ndarray]:
    """Source indices and factors mapping order-``order`` coefficients to the
    order ``order - 1`` coefficients of the partial derivative along ``var``."""
    hi = _layout(m, order)
    lo = _layout(m, order - 1)
    src = np.empty(lo.size, dtype=np.int64)
    fac = np.empty(lo.size, dtype=float)
    for k, e in enumerate(lo.exps):
        raised = list(int(v) for v in e)
        raised[var] += 1
        src[k] = hi.index[tuple(raised)]
        fac[k] = raised[var]
    return src, fac


class Jet:
    """Truncated Taylor polynomial in ``m`` variables, degree ``<= order``."""

    __slots__ = ("c", "m", "order")
    __array_ufunc__ = None  # numpy scalars defer to Jet operators

    def __init__(self, coeffs: np.ndarray, m: int, order: int):
        self.c = coeffs
        self.m = m
        self.order = order

    # construction --------------------------------------------------------
    @classmethod
    def const(cls, value: float, m: int, order: int) -> "Jet":
        c = np.zeros(_layout(m, order).size)
        c[0] = value
        return cls(c, m, order)

    def _like(self, c: np.ndarray) -> "Jet":
        return Jet(c, self.m, self.order)

    # access --------------------------------------------------------------
    @property
    def value(self) -> float:
        return float(self.c[0])

    def truncate(self, order: int) -> "Jet":
        if order >= self.order:
            return self
        return Jet(self.c[: _layout(self.m, order).size].copy(), self.m, order)

    def partial(self, exps: Sequence[int]) -> float:
        """Mixed partial derivative with the given exponent multi-index."""
        lay = _layout(self.m, self.order)
        k = lay.index.get(tuple(exps))
        if k is None:
            raise ValueError(f"derivative of degree {sum(exps)} exceeds jet order {self.order}")
        return float(self.c[k] * lay.factorials[k])

    def gradient(self) -> np.ndarray:
        if self.order < 1:
            raise ValueError("jet of order 0 carries no gradient")
        return self.c[1 : self.m + 1].copy()

    def hessian(self) -> np.ndarray:
        if self.order < 2:
            raise ValueError("jet of order < 2 carries no Hessian")
        lay = _layout(self.m, self.order)
        h = np.empty((self.m, self.m))
        for a in range(self.m):
            for b in range(a, self.m):
                e = [0] * self.m
                e[a] += 1
                e[b] += 1
                k = lay.index[tuple(e)]
                h[a, b] = h[b, a] = self.c[k] * lay.factorials[k]
        return h

    def third(self) -> np.ndarray:
        if self.order < 3:
            raise ValueError("jet of order < 3 carries no third derivatives")
        lay = _layout(self.m, self.order)
        m = self.m
        t = np.empty((m, m, m))
        for a, b, c in combinations_with_replacement(range(m), 3):
            e = [0] * m
            e[a] += 1
            e[b] += 1
            e[c] += 1
            k = lay.index[tuple(e)]
            v = self.c[k] * lay.factorials[k]
            for i, j, l in {(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)}:
                t[i, j, l] = v
        return t

    def diff(self, var: int) -> "Jet":
        """Partial derivative along variable ``var``; the order drops by one."""
        if self.order < 1:
            raise ValueError("cannot differentiate a jet of order 0")
        src, fac = _diff_map(self.m, self.order, var)
        return Jet(self.c[src] * fac, self.m, self.order - 1)

    # arithmetic ----------------------------------------------------------
    def _coerce(self, other) -> tuple["Jet", "Jet"]:
        if other.m != self.m:
            raise ValueError("jets over different variable counts")
        if other.order == self.order:
            return self, other
        k = min(self.order, other.order)
        return self.truncate(k), other.truncate(k)

    def __add__(self, other):
        if isinstance(other, Jet):
            a, b = self._coerce(other)
            return a._like(a.c + b.c)
        c = self.c.copy()
        c[0] += other
        return self._like(c)

    __radd__ = __add__

    def __neg__(self):
        return self._like(-self.c)

    def __pos__(self):
        return self

    def __sub__(self, other):
        if isinstance(other, Jet):
            a, b = self._coerce(other)
            return a._like(a.c - b.c)
        c = self.c.copy()
        c[0] -= other
        return self._like(c)

    def __rsub__(self, other):
        c = -self.c
        c[0] += other
        return self._like(c)

    def __mul__(self, other):
        if isinstance(other, Jet):
            a, b = self._coerce(other)
            return a._like(_mul(a.c, b.c, a.m, a.order))
        return self._like(self.c * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        if other == 0:
            raise DomainError("division by zero")
        return self._like(self.c / other)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, Jet):
            raise TypeError("jet exponents must be numeric literals")
        return power(self, p)

    def reciprocal(self) -> "Jet":
        if self.c[0] == 0.0:
            raise DomainError("division by zero")
        return power(self, -1)

    def __repr__(self) -> str:
        return f"Jet(value={self.value!r}, m={self.m}, order={self.order})"


def _mul(a: np.ndarray, b: np.ndarray, m: int, order: int) -> np.ndarray:
    lay = _layout(m, order)
    if order == 0:
        return a * b
    return np.bincount(
        lay.mul_out, weights=a[lay.mul_left] * b[lay.mul_right], minlength=lay.size
    )


def _compose(u: Jet, derivs: Sequence[float]) -> Jet:
    """Apply a univariate function with derivatives ``derivs`` at ``u.value``."""
    out = np.zeros_like(u.c)
    out[0] = derivs[0]
    if u.order == 0:
        return u._like(out)
    delta = u.c.copy()
    delta[0] = 0.0
    term = delta
    for k in range(1, u.order + 1):
        if derivs[k] != 0.0:
            out += (derivs[k] / math.factorial(k)) * term
        if k < u.order:
            term = _mul(term, delta, u.m, u.order)
    return u._like(out)


def power(u: Jet, p: float) -> Jet:
    p = float(p)
    if p.is_integer() and p >= 0:
        n = int(p)
        result = Jet.const(1.0, u.m, u.order)
        base = u
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result
    u0 = u.value
    if u0 == 0.0:
        raise DomainError(f"power {p} is singular at 0")
    if u0 < 0.0 and not p.is_integer():
        raise DomainError(f"non-integer power {p} of a negative value")
    derivs = []
    coef = 1.0
    for k in range(u.order + 1):
        derivs.append(coef * u0 ** (p - k))
        coef *= p - k
    return _compose(u, derivs)


def sqrt(u):
    if not isinstance(u, Jet):
        if u < 0:
            raise DomainError("sqrt of a negative value")
        return math.sqrt(u)
    u0 = u.value
    if u0 < 0.0 or (u0 == 0.0 and u.order > 0):
        raise DomainError(f"sqrt is not smooth at {u0!r}")
    if u.order == 0:
        return u._like(np.array([math.sqrt(u0)]))
    return power(u, 0.5)


def exp(u):
    if not isinstance(u, Jet):
        return math.exp(u)
    e = math.exp(u.value)
    return _compose(u, [e] * (u.order + 1))


def log(u):
    if not isinstance(u, Jet):
        if u <= 0:
            raise DomainError("ln of a non-positive value")
        return math.log(u)
    u0 = u.value
    if u0 <= 0.0:
        raise DomainError(f"ln of non-positive value {u0!r}")
    derivs = [math.log(u0)]
    for k in range(1, u.order + 1):
        derivs.append((-1.0) ** (k - 1) * math.factorial(k - 1) / u0**k)
    return _compose(u, derivs)


def fabs(u):
    if not isinstance(u, Jet):
        return abs(u)
    u0 = u.value
    if u0 == 0.0 and u.order > 0:
        raise DomainError("abs is not differentiable where its argument vanishes")
    return -u if u0 < 0.0 else u


def variables(point: Sequence[float], order: int) -> list[Jet]:
    """Seed one jet per coordinate of ``point``."""
    m = len(point)
    lay = _layout(m, order)
    out = []
    for a, v in enumerate(point):
        c = np.zeros(lay.size)
        c[0] = v
        if order >= 1:
            c[1 + a] = 1.0
        out.append(Jet(c, m, order))
    return out


def constant(value: float, m: int, order: int) -> Jet:
    return Jet.const(value, m, order)


def as_jet(v, m: int, order: int) -> Jet:
    if isinstance(v, Jet):
        if v.order < order:
            raise ValueError(f"jet of order {v.order} where {order} was required")
        return v.truncate(order)
    return Jet.const(float(v), m, order)
