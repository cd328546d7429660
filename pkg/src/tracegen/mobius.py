"""Möbius polynomials of sub-alphabets and their evaluation.

``mu_S(X) = sum over independence cliques c of S of (-X)^|c|``; the
reciprocal ``1/mu_S`` is the length generating series of the traces over
``S``.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import DomainError, InputError
from .monoid import DependenceGraph, components, enumerate_cliques

DEFAULT_TOL = 1e-12


@dataclass(frozen=True)
class MobiusPolynomial:
    """Integer coefficients ``c_0 .. c_d`` with ``c_j = (-1)^j * #cliques of size j``."""

    coefficients: tuple[int, ...]

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, x):
        acc = 0 * x
        for c in reversed(self.coefficients):
            acc = acc * x + c
        return acc

    def derivative(self) -> MobiusPolynomial:
        d = tuple(j * c for j, c in enumerate(self.coefficients))[1:]
        return MobiusPolynomial(d or (0,))

    def __mul__(self, other: MobiusPolynomial) -> MobiusPolynomial:
        out = [0] * (len(self.coefficients) + len(other.coefficients) - 1)
        for i, a in enumerate(self.coefficients):
            for j, b in enumerate(other.coefficients):
                out[i + j] += a * b
        return MobiusPolynomial(tuple(out))

    def __str__(self) -> str:
        terms = []
        for j, c in enumerate(self.coefficients):
            if c == 0:
                continue
            mag = abs(c)
            if j == 0:
                body = str(mag)
            else:
                body = ("" if mag == 1 else str(mag)) + ("X" if j == 1 else f"X^{j}")
            sign = "-" if c < 0 else "+"
            terms.append((sign, body))
        if not terms:
            return "0"
        first_sign, first = terms[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in terms[1:]:
            out += f" {sign} {body}"
        return out


@lru_cache(maxsize=None)
def mobius_poly(g: DependenceGraph, s: int) -> MobiusPolynomial:
    """Möbius polynomial of the sub-alphabet ``s``, by clique census."""
    if s & ~g.full:
        raise InputError("subset contains letters outside the alphabet")
    counts = [0] * (s.bit_count() + 1)
    for c in enumerate_cliques(g, s):
        counts[c.bit_count()] += 1
    while len(counts) > 1 and counts[-1] == 0:
        counts.pop()
    return MobiusPolynomial(tuple((-1) ** j * n for j, n in enumerate(counts)))


class MobiusTable:
    """Lazily memoized values ``mu_S(p)`` and ``mu_S'(p)`` at a fixed ``p``.

    ``p`` may be a float or a :class:`~fractions.Fraction`; with a fraction
    every value is exact.
    """

    def __init__(self, graph: DependenceGraph, p):
        if not 0 < p <= 1:
            raise DomainError(f"p must lie in (0, 1], got {p}")
        self.graph = graph
        self.p = p
        self._values: dict[int, object] = {}
        self._derivs: dict[int, object] = {}
        # concurrent misses may compute twice; inserts are idempotent
        self._lock = threading.Lock()

    def value(self, s: int):
        try:
            return self._values[s]
        except KeyError:
            v = mobius_poly(self.graph, s)(self.p)
            with self._lock:
                self._values[s] = v
            return v

    def derivative(self, s: int):
        try:
            return self._derivs[s]
        except KeyError:
            v = mobius_poly(self.graph, s).derivative()(self.p)
            with self._lock:
                self._derivs[s] = v
            return v

    def __len__(self) -> int:
        return len(self._values)


def mobius_eval(table: MobiusTable, s: int):
    return table.value(s)


def deriv_eval(table: MobiusTable, s: int):
    return table.derivative(s)


@dataclass(frozen=True)
class CriticalRoot:
    """Smallest positive root ``p_S`` of ``mu_S`` with a certified bracket."""

    value: float
    lo: Fraction
    hi: Fraction
    tolerance: float
    exact: Fraction | None = None
    degenerate: bool = False


def _first_sign_change(poly: MobiusPolynomial, step: Fraction, upto: Fraction):
    """Scan ``step, 2*step, ...`` up to ``upto``; return ``(lo, hi)`` around the
    first grid point where ``poly <= 0`` or ``None``."""
    prev = Fraction(0)
    x = step
    while x <= upto:
        if poly(x) <= 0:
            return prev, x
        prev = x
        x += step
    return None


def _connected_root(poly: MobiusPolynomial, n: int, tol: float) -> CriticalRoot:
    step = Fraction(1, 4 * n)
    min_step = Fraction(1, 1 << 20)
    found = _first_sign_change(poly, step, Fraction(1))
    while found is None and step > min_step:
        step /= 2
        found = _first_sign_change(poly, step, Fraction(1))
    if found is None:
        return CriticalRoot(1.0, Fraction(1), Fraction(1), tol, Fraction(1), degenerate=True)
    # refine the grid a few times so a pair of close roots cannot hide an
    # earlier sign change
    for _ in range(4):
        step /= 2
        finer = _first_sign_change(poly, step, found[1])
        if finer is not None and finer[1] < found[1]:
            found = finer
    lo, hi = found
    if poly(hi) == 0:
        return CriticalRoot(float(hi), hi, hi, tol, hi)
    while hi - lo > tol:
        mid = (lo + hi) / 2
        v = poly(mid)
        if v == 0:
            return CriticalRoot(float(mid), mid, mid, tol, mid)
        if v > 0:
            lo = mid
        else:
            hi = mid
    return CriticalRoot(float((lo + hi) / 2), lo, hi, tol)


@lru_cache(maxsize=None)
def _critical_root_cached(g: DependenceGraph, s: int, tol: float) -> CriticalRoot:
    roots = []
    for comp in components(g, s):
        poly = mobius_poly(g, comp)
        roots.append(_connected_root(poly, comp.bit_count(), tol))
    return min(roots, key=lambda r: r.value)


def critical_root(g: DependenceGraph, s: int, tol: float = DEFAULT_TOL) -> CriticalRoot:
    """Smallest positive root of ``mu_S``.

    ``mu_S`` factors over the connected components of ``S``, so the root is
    located per component by a grid scan from 0 followed by bisection, both
    with exact rational sign tests.
    """
    if s == 0:
        raise InputError("critical root of the empty alphabet is undefined")
    if tol <= 0:
        raise InputError("tolerance must be positive")
    if s & ~g.full:
        raise InputError("subset contains letters outside the alphabet")
    return _critical_root_cached(g, s, tol)


def series_expand(g: DependenceGraph, u: int, degree: int, within: int | None = None) -> list[int]:
    """Coefficients ``0..degree`` of ``mu_{S\\U}(X) / mu_S(X)``.

    Coefficient ``j`` counts the traces over ``S`` (default: the whole
    alphabet) of length ``j`` whose maximal letters all lie in ``U``.
    """
    if degree < 0:
        raise InputError("degree must be non-negative")
    s = g.full if within is None else within
    num = mobius_poly(g, s & ~u).coefficients
    den = mobius_poly(g, s).coefficients
    out: list[int] = []
    for j in range(degree + 1):
        acc = num[j] if j < len(num) else 0
        for i in range(1, min(j, len(den) - 1) + 1):
            acc -= den[i] * out[j - i]
        out.append(acc)  # den[0] == 1
    return out
