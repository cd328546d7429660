"""Exact laws on traces and the enumeration oracle used to check samplers.

``B_{S,p}(x) = mu_S(p) p^|x|`` on traces over ``S``; ``D_{S,T}`` is that law
conditioned on ``max(x) <= T``, whose normalizer simplifies to
``mu_{S \\ T}(p)``.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from scipy import stats

from .errors import DomainError, InputError
from .mobius import MobiusTable, critical_root, series_expand
from .monoid import DependenceGraph, Trace, enumerate_traces, format_cf, from_cf, max_letters

CONSISTENCY_TOL = 1e-9


def below_critical(g: DependenceGraph, s: int, p) -> bool:
    """Whether ``0 < p < p_S`` (always true for the empty alphabet)."""
    if p <= 0:
        return False
    if s == 0:
        return p <= 1
    root = critical_root(g, s)
    if root.exact is not None:
        return p < root.exact
    return p < root.lo


@dataclass(frozen=True)
class TraceLaw:
    """``B_{S,p}`` when ``max_set`` is None, else ``D_{S,T}`` with ``T = max_set``."""

    graph: DependenceGraph
    p: object
    alphabet: int | None = None
    max_set: int | None = None
    table: MobiusTable = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        s = self.graph.full if self.alphabet is None else self.alphabet
        object.__setattr__(self, "alphabet", s)
        if not below_critical(self.graph, s, self.p):
            raise DomainError(f"p = {self.p} is not below the critical root of the alphabet")
        object.__setattr__(self, "table", MobiusTable(self.graph, self.p))

    @property
    def normalizer(self):
        """``B_{S,p}(max <= T)``, equal to ``mu_{S \\ T}(p)``."""
        if self.max_set is None:
            return 1 + 0 * self.p
        z = self.table.value(self.alphabet & ~self.max_set)
        if z <= 0:
            raise DomainError("conditioning event has non-positive mass")
        return z


def b_weight(law: TraceLaw, x: Trace):
    if law.max_set is not None:
        raise InputError("b_weight needs an unconditioned law")
    if x.alphabet & ~law.alphabet:
        return 0 * law.p
    return law.table.value(law.alphabet) * law.p ** len(x)


def conditional_weight(law: TraceLaw, x: Trace):
    if x.alphabet & ~law.alphabet:
        return 0 * law.p
    t = law.alphabet if law.max_set is None else law.max_set
    if max_letters(x) & ~t:
        return 0 * law.p
    return law.table.value(law.alphabet) * law.p ** len(x) / law.normalizer


def geometric_param(table: MobiusTable, s: int, a1: int):
    """Parameter ``r`` of the geometric number of ``a1``-pyramids under ``B_{S,p}``.

    Both ``p mu_{S\\L(a1)} / mu_{S\\a1}`` and ``1 - mu_S / mu_{S\\a1}`` are
    formed and must agree.
    """
    g = table.graph
    bit = 1 << a1
    if not s & bit:
        raise InputError(f"letter {g.letters[a1]!r} is not in the alphabet")
    rest = table.value(s & ~bit)
    if rest <= 0:
        raise DomainError("mu_{S\\a1}(p) <= 0: p is not below the critical root")
    via_link = table.p * table.value(s & ~g.links[a1]) / rest
    mu_s = table.value(s)
    if mu_s < 0 and -mu_s < 1e-12:
        mu_s = 0 * mu_s
    via_ratio = 1 - mu_s / rest
    if abs(via_link - via_ratio) > CONSISTENCY_TOL:
        raise ArithmeticError(f"inconsistent geometric parameter: {via_link} vs {via_ratio}")
    if not 0 <= via_ratio < 1:
        raise DomainError(f"geometric parameter {via_ratio} outside [0, 1)")
    return via_ratio


@dataclass
class ExactTable:
    """Exact weights of every trace up to ``horizon`` letters, keyed by the
    serialized Cartier-Foata form."""

    entries: dict[str, Fraction]
    horizon: int
    tail_bound: float
    lengths: dict[str, int] = field(default_factory=dict)

    @property
    def mass(self) -> Fraction:
        return sum(self.entries.values(), Fraction(0))

    def to_json(self) -> dict:
        return {
            "horizon": self.horizon,
            "tail_bound": self.tail_bound,
            "mass": float(self.mass),
            "entries": {k: str(v) for k, v in self.entries.items()},
        }


def exact_distribution(g: DependenceGraph, p, s: int, t: int, horizon: int) -> ExactTable:
    """Enumerate ``D_{S,T}`` exactly on all traces over ``S`` of length
    ``<= horizon``."""
    if s.bit_count() > 5 or horizon > 10:
        raise InputError("exact enumeration limited to |S| <= 5 and horizon <= 10")
    if horizon < 0:
        raise InputError("horizon must be non-negative")
    p = Fraction(p)
    law = TraceLaw(g, p, alphabet=s, max_set=t & s)
    base = law.table.value(s) / law.normalizer
    entries: dict[str, Fraction] = {}
    lengths: dict[str, int] = {}
    for cf in enumerate_traces(g, s, horizon):
        if max_letters(from_cf(g, cf)) & ~t:
            continue
        n = sum(c.bit_count() for c in cf)
        key = format_cf(g, cf)
        entries[key] = base * p**n
        lengths[key] = n
    return ExactTable(entries, horizon, _tail_bound(g, float(p), s, t & s, horizon, float(base)), lengths)


def _tail_bound(g, p: float, s: int, t: int, horizon: int, base: float) -> float:
    # counts of longer traces come from the rational series; stop once terms
    # are negligible and close with a geometric remainder
    if not t:
        return 0.0
    degree = horizon + 64
    while True:
        coeffs = series_expand(g, t, degree, within=s)
        total = 0.0
        prev = None
        for j in range(horizon + 1, degree + 1):
            term = base * coeffs[j] * p**j
            total += term
            if prev and term < 1e-15 and term <= prev:
                q = term / prev
                if q < 1:
                    return total + term * q / (1 - q)
            prev = term
        if degree > 4096:
            return math.inf
        degree *= 2


def empirical_table(samples: Iterable[Trace]) -> Counter:
    counts: Counter = Counter()
    for x in samples:
        counts[format_cf(x.graph, x.canonical)] += 1
    return counts


def total_variation(counts: Mapping[str, int], table: ExactTable) -> float:
    """Total variation between an empirical histogram and an exact table, with
    everything beyond the horizon lumped into one atom."""
    n = sum(counts.values())
    if n == 0:
        raise InputError("empty sample")
    tv = 0.0
    inside = 0
    for key, w in table.entries.items():
        c = counts.get(key, 0)
        inside += c
        tv += abs(c / n - float(w))
    tv += abs((n - inside) / n - float(1 - table.mass))
    return tv / 2


@dataclass(frozen=True)
class GoodnessOfFit:
    statistic: float
    dof: int
    p_value: float
    observed: tuple[int, ...]
    expected: tuple[float, ...]


def k_law_check(samples, r: float, min_expected: float = 5.0) -> GoodnessOfFit:
    """Chi-square test of integer samples against ``(1 - r) r^k``; bins whose
    expected count falls under ``min_expected`` are pooled into the tail."""
    samples = list(samples)
    if not samples:
        raise InputError("empty sample")
    if not 0 <= r < 1:
        raise DomainError(f"geometric parameter must lie in [0, 1), got {r}")
    n = len(samples)
    hist = Counter(samples)
    observed: list[int] = []
    expected: list[float] = []
    k = 0
    while True:
        e_k = n * (1 - r) * r**k
        tail = n * r ** (k + 1)
        if tail < min_expected:
            observed.append(sum(c for v, c in hist.items() if v >= k))
            expected.append(n * r**k)
            break
        observed.append(hist.get(k, 0))
        expected.append(e_k)
        k += 1
    dof = len(observed) - 1
    if dof == 0:
        return GoodnessOfFit(0.0, 0, 1.0, tuple(observed), tuple(expected))
    stat = sum((o - e) ** 2 / e for o, e in zip(observed, expected))
    return GoodnessOfFit(stat, dof, float(stats.chi2.sf(stat, dof)), tuple(observed), tuple(expected))
