"""Graph diagnostics and statistical estimation.

Chordality is certified by lexicographic BFS; an ordering is
*rejection-free* when the rejection sampler never has to discard a draw.
Chordal graphs are exactly those admitting such an ordering, and a perfect
elimination ordering is one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from statistics import NormalDist
from typing import Sequence

from .errors import DomainError, InputError
from .laws import below_critical
from .mobius import MobiusTable, critical_root
from .monoid import DependenceGraph, bits, connected_component, is_connected, lowest
from .rng import RandomSource
from .samplers import FiniteSampler, PrefixStream


@dataclass(frozen=True)
class OrderingReport:
    ordering: tuple[int, ...]
    chordal: bool
    rejection_free: bool
    peo_found: tuple[int, ...] | None

    def to_json(self, g: DependenceGraph) -> dict:
        return {
            "ordering": [g.letters[i] for i in self.ordering],
            "chordal": self.chordal,
            "rejection_free": self.rejection_free,
            "peo_found": None if self.peo_found is None else [g.letters[i] for i in self.peo_found],
        }


@dataclass(frozen=True)
class RateReport:
    tau: float
    expected_pyramid_length: float
    p_critical: float

    def to_json(self) -> dict:
        return {
            "tau": self.tau,
            "expected_pyramid_length": self.expected_pyramid_length,
            "p_critical": self.p_critical,
        }


def _ordering(g: DependenceGraph, ordering) -> tuple[int, ...]:
    if ordering is None:
        return tuple(range(g.n))
    order = tuple(g.index(a) for a in ordering)
    if sorted(order) != list(range(g.n)):
        raise InputError("ordering must be a permutation of the alphabet")
    return order


def lex_bfs(g: DependenceGraph) -> list[int]:
    """Lexicographic breadth-first search visit order (ties to the lowest index)."""
    labels: dict[int, list[int]] = {v: [] for v in range(g.n)}
    order: list[int] = []
    unvisited = set(range(g.n))
    for step in range(g.n):
        v = max(unvisited, key=lambda u: (labels[u], -u))
        order.append(v)
        unvisited.discard(v)
        for w in bits(g.links[v] & ~(1 << v)):
            if w in unvisited:
                labels[w].append(g.n - step)
    return order


def is_perfect_elimination(g: DependenceGraph, order: Sequence[int]) -> bool:
    """Whether the neighbours of each vertex placed after it are pairwise adjacent."""
    pos = {v: i for i, v in enumerate(order)}
    for v in order:
        later = [w for w in bits(g.links[v]) if pos[w] > pos[v]]
        for u, w in combinations(later, 2):
            if not g.depends(u, w):
                return False
    return True


def is_rejection_free(g: DependenceGraph, ordering) -> bool:
    order = _ordering(g, ordering)
    prefix = 0
    for k, ak in enumerate(order):
        prefix |= 1 << ak
        comp = None
        for al in order[k + 1:]:
            link_l = g.links[al]
            if (link_l >> ak) & 1:
                continue
            if comp is None:
                comp = connected_component(g, prefix, ak)
            if comp & link_l:
                return False
    return True


def find_peo(g: DependenceGraph, ordering=None) -> OrderingReport:
    """Chordality certificate plus the rejection-free verdict for ``ordering``
    (default: the declared letter order)."""
    order = _ordering(g, ordering)
    peo = tuple(reversed(lex_bfs(g)))
    chordal = is_perfect_elimination(g, peo)
    return OrderingReport(order, chordal, is_rejection_free(g, order), peo if chordal else None)


def rate_bound(g: DependenceGraph, ordering=None) -> RateReport:
    if not is_connected(g):
        raise DomainError("rate bound needs a connected dependence graph")
    order = _ordering(g, ordering)
    p = critical_root(g, g.full).value
    table = MobiusTable(g, p)
    body = g.full & ~(1 << order[-1])
    mu_body = table.value(body)
    slope = table.derivative(g.full)
    tau = abs((mu_body + p * slope) / g.n)
    length = (-mu_body - p * slope) / mu_body
    return RateReport(tau, 1 + length, p)


@dataclass
class RatioEstimate:
    alphabet: int
    target: int
    hits: int = 0
    trials: int = 0

    @property
    def value(self) -> float:
        return self.hits / self.trials


@dataclass
class MobiusEstimate:
    estimate: float
    interval: tuple[float, float]
    half_width: float
    sample_count: int
    ratios: list[RatioEstimate] = field(default_factory=list)
    naive_estimate: float = math.nan
    naive_interval: tuple[float, float] = (math.nan, math.nan)

    def to_json(self, g: DependenceGraph) -> dict:
        return {
            "estimate": self.estimate,
            "interval": list(self.interval),
            "half_width": self.half_width,
            "sample_count": self.sample_count,
            "ratios": [
                {"S": g.names(r.alphabet), "T": g.names(r.target), "hits": r.hits, "trials": r.trials}
                for r in self.ratios
            ],
            "naive_estimate": self.naive_estimate,
            "naive_interval": list(self.naive_interval),
        }


def mobius_chain(g: DependenceGraph) -> list[tuple[int, int]]:
    """Pairs ``(S, S \\ L(a))`` peeling the least letter ``a`` and its
    neighbours until nothing is left; ``mu_Sigma`` is the product of the
    ratios ``mu_S / mu_T`` along the chain."""
    chain = []
    s = g.full
    while s:
        t = s & ~g.links[lowest(s)]
        chain.append((s, t))
        s = t
    return chain


def estimate_mobius(g: DependenceGraph, p, epsilon: float, alpha: float, rng: RandomSource,
                    batch: int = 1000, max_samples: int = 50_000_000) -> MobiusEstimate:
    """Monte-Carlo confidence interval for ``mu_Sigma(p)`` using only the sampler.

    Each ratio ``mu_S(p) / mu_T(p)`` is the probability that a draw from
    ``B_{S,p}`` avoids the letters outside ``T``.  All ratios are sampled in
    lockstep batches until the delta-method half-width of their product falls
    to ``epsilon * min(p, 1 - p) / 2``.
    """
    if epsilon <= 0:
        raise InputError("epsilon must be positive")
    if not 0 < alpha < 1:
        raise InputError("alpha must lie in (0, 1)")
    p = float(p)
    if not below_critical(g, g.full, p):
        raise DomainError(f"p = {p} is not below the critical root")
    lam = NormalDist().inv_cdf((1 + alpha) / 2)
    target = epsilon * min(p, 1 - p) / 2
    sampler = FiniteSampler(g, p)
    ratios = [RatioEstimate(s, t) for s, t in mobius_chain(g)]
    empties = 0
    while True:
        for i, ratio in enumerate(ratios):
            outside = ratio.alphabet & ~ratio.target
            for _ in range(batch):
                word = sampler.sample_word(ratio.alphabet, ratio.alphabet, rng)
                if not any((outside >> c) & 1 for c in word):
                    ratio.hits += 1
                if i == 0 and not word:
                    empties += 1
            ratio.trials += batch
        estimate, half = _product_interval(ratios, lam)
        total = sum(r.trials for r in ratios)
        if half <= target or total >= max_samples:
            break
    n0 = ratios[0].trials
    naive = empties / n0
    naive_half = lam * math.sqrt(max(naive * (1 - naive), 1e-300) / n0)
    return MobiusEstimate(
        estimate,
        (estimate - half, estimate + half),
        half,
        total,
        ratios,
        naive,
        (naive - naive_half, naive + naive_half),
    )


def _product_interval(ratios: list[RatioEstimate], lam: float) -> tuple[float, float]:
    values = [r.value for r in ratios]
    estimate = math.prod(values)
    # delta method on the log; a continuity-corrected rate avoids a zero
    # variance while a ratio has no misses yet
    rel_var = 0.0
    for r in ratios:
        q = (r.hits + 0.5) / (r.trials + 1)
        rel_var += (1 - q) / (q * r.trials)
    return estimate, lam * estimate * math.sqrt(rel_var)


def letter_density(stream: PrefixStream, a, letter_budget: int) -> float:
    """Share of letter ``a`` in the first prefix longer than ``letter_budget``."""
    if letter_budget <= 0:
        raise InputError("letter budget must be positive")
    g = stream.config.graph
    i = g.index(a)
    while len(stream.prefix) <= letter_budget:
        next(stream)
    return stream.prefix.count(i) / len(stream.prefix)
