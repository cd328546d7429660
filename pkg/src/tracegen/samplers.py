"""Exact samplers for finite traces and endless prefix streams.

``FiniteSampler`` draws from ``D_{S,T}`` by recursion on the alphabet,
splitting a trace into its pyramids over the least letter of ``S & T``.
``RejectionSampler`` only needs ``mu`` on the prefixes ``{a_1..a_k}`` of an
ordering, at the price of a rejection loop.  The two stream classes stack
i.i.d. anchor-pyramids to produce growing prefixes of a uniformly
distributed infinite trace.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterator, Sequence

from .errors import DomainError, InputError
from .laws import below_critical, geometric_param
from .mobius import MobiusTable, critical_root
from .monoid import DependenceGraph, Trace, connected_component, is_connected, lowest
from .rng import DEFAULT_SEED, RandomSource, sample_geometric

CRITICAL = "critical"

__all__ = [
    "CRITICAL",
    "FiniteSampler",
    "PrefixStream",
    "RejectionSampler",
    "RejectionStats",
    "SamplerConfig",
    "StreamRecord",
    "sample_finite",
    "sample_finite_rejection",
    "sample_geometric",
    "stream_uniform",
    "stream_uniform_rejection",
]


def resolve_p(graph: DependenceGraph, p) -> float:
    if isinstance(p, str):
        if p != CRITICAL:
            raise InputError(f"p must be a number or {CRITICAL!r}, got {p!r}")
        return critical_root(graph, graph.full).value
    p = float(p)
    if not 0 < p <= 1:
        raise DomainError(f"p must lie in (0, 1], got {p}")
    return p


@dataclass(frozen=True)
class SamplerConfig:
    graph: DependenceGraph
    p: object = CRITICAL
    anchor: int | None = None
    ordering: tuple[int, ...] | None = None
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        g = self.graph
        if self.anchor is not None:
            object.__setattr__(self, "anchor", g.index(self.anchor))
        if self.ordering is not None:
            order = tuple(g.index(a) for a in self.ordering)
            if sorted(order) != list(range(g.n)):
                raise InputError("ordering must be a permutation of the alphabet")
            object.__setattr__(self, "ordering", order)

    @property
    def anchor_letter(self) -> int:
        return self.graph.n - 1 if self.anchor is None else self.anchor

    @property
    def order(self) -> tuple[int, ...]:
        return tuple(range(self.graph.n)) if self.ordering is None else self.ordering

    def rng(self) -> RandomSource:
        return RandomSource(self.seed)


@dataclass
class RejectionStats:
    attempts: int = 0
    rejections: int = 0
    letters: int = 0

    @property
    def accepted(self) -> int:
        return self.attempts - self.rejections


class FiniteSampler:
    """Recursive exact sampler for ``D_{S,T}`` at a fixed ``p``.

    The least letter of ``S & T`` is used as the pyramid anchor at every
    level; per-``(S, T)`` parameters are memoized.  ``calls`` counts recursive
    invocations.
    """

    def __init__(self, graph: DependenceGraph, p, table: MobiusTable | None = None):
        self.graph = graph
        self.p = resolve_p(graph, p)
        self.table = table if table is not None else MobiusTable(graph, self.p)
        self.calls = 0
        self._plans: dict[tuple[int, int], tuple | None] = {}
        self._checked: set[int] = set()

    def check(self, s: int) -> None:
        if s in self._checked:
            return
        if not below_critical(self.graph, s, self.p):
            raise DomainError(f"p = {self.p} is not below the critical root of the alphabet")
        self._checked.add(s)

    def _plan(self, s: int, t: int):
        common = s & t
        if not common:
            plan = None
        else:
            a1 = lowest(common)
            r = geometric_param(self.table, s, a1)
            plan = (a1, r, math.log(r) if r > 0 else 0.0, s & ~(1 << a1), self.graph.links[a1])
        self._plans[(s, t)] = plan
        return plan

    def _fill(self, s: int, t: int, rand: Callable[[], float], out: list[int]) -> None:
        self.calls += 1
        key = (s, t & s)
        try:
            plan = self._plans[key]
        except KeyError:
            plan = self._plan(*key)
        if plan is None:
            return
        a1, r, log_r, rest, link = plan
        k = int(math.log1p(-rand()) / log_r) if r > 0 else 0
        for _ in range(k):
            self._fill(rest, link, rand, out)
            out.append(a1)
        self._fill(rest, t, rand, out)

    def sample_word(self, s: int, t: int, rng: RandomSource) -> list[int]:
        self.check(s)
        out: list[int] = []
        self._fill(s, t, rng.random, out)
        return out

    def sample(self, s: int, t: int, rng: RandomSource) -> Trace:
        return Trace(self.graph, tuple(self.sample_word(s, t, rng)))


class RejectionSampler:
    """Sampler for ``D_{Sigma_k, L(a_l)}`` where ``Sigma_k`` is the first ``k``
    letters of ``ordering``; needs ``mu`` on those prefixes only."""

    def __init__(self, graph: DependenceGraph, p, ordering: Sequence[int] | None = None,
                 table: MobiusTable | None = None):
        self.graph = graph
        self.p = resolve_p(graph, p)
        self.order = tuple(range(graph.n)) if ordering is None else tuple(ordering)
        if sorted(self.order) != list(range(graph.n)):
            raise InputError("ordering must be a permutation of the alphabet")
        self.table = table if table is not None else MobiusTable(graph, self.p)
        prefixes = [0]
        for a in self.order:
            prefixes.append(prefixes[-1] | (1 << a))
        self.prefixes = tuple(prefixes)
        self.stats = RejectionStats()
        self._plans: dict[tuple[int, int], tuple | None] = {}
        self._checked: set[int] = set()

    def _plan(self, k: int, ell: int):
        g = self.graph
        link_l = g.links[self.order[ell - 1]]
        sk = self.prefixes[k]
        if not sk & link_l:
            plan = None
        else:
            ak = self.order[k - 1]
            component = connected_component(g, sk, ak)
            r = geometric_param(self.table, sk, ak) if component & link_l else 0.0
            plan = (ak, r, bool((link_l >> ak) & 1), g.links[ak])
        self._plans[(k, ell)] = plan
        return plan

    def _draw(self, k: int, ell: int, rand: Callable[[], float], stats: RejectionStats) -> list[int]:
        try:
            plan = self._plans[(k, ell)]
        except KeyError:
            plan = self._plan(k, ell)
        if plan is None:
            return []
        ak, r, ak_in_link, link_ak = plan
        while True:
            stats.attempts += 1
            big_r = rand() < r
            v_inf = self._draw(k - 1, ell, rand, stats)
            if not big_r or ak_in_link:
                break
            # v_inf lies outside M_{Sigma_{k-1} \ L(a_k)} iff it uses a letter of L(a_k)
            if any((link_ak >> c) & 1 for c in v_inf):
                break
            stats.rejections += 1
        xi: list[int] = []
        if big_r:
            for _ in range(1 + int(math.log1p(-rand()) / math.log(r))):
                xi.extend(self._draw(k - 1, k, rand, stats))
                xi.append(ak)
        xi.extend(v_inf)
        return xi

    def check(self, k: int) -> None:
        if k in self._checked:
            return
        if not below_critical(self.graph, self.prefixes[k], self.p):
            raise DomainError(f"p = {self.p} is not below the critical root of the prefix alphabet")
        self._checked.add(k)

    def sample_word(self, k: int, ell: int, rng: RandomSource, stats: RejectionStats | None = None) -> list[int]:
        if not 0 <= k < ell <= self.graph.n:
            raise InputError(f"need 0 <= k < ell <= {self.graph.n}, got k={k}, ell={ell}")
        self.check(k)
        stats = self.stats if stats is None else stats
        word = self._draw(k, ell, rng.random, stats)
        stats.letters += len(word)
        return word

    def sample(self, k: int, ell: int, rng: RandomSource, stats: RejectionStats | None = None) -> Trace:
        return Trace(self.graph, tuple(self.sample_word(k, ell, rng, stats)))


@lru_cache(maxsize=64)
def _finite_sampler(graph: DependenceGraph, p: float) -> FiniteSampler:
    return FiniteSampler(graph, p)


@lru_cache(maxsize=64)
def _rejection_sampler(graph: DependenceGraph, p: float, order: tuple[int, ...]) -> RejectionSampler:
    return RejectionSampler(graph, p, order)


def sample_finite(cfg: SamplerConfig, s: int, t: int, rng: RandomSource) -> Trace:
    """One trace distributed as ``D_{S,T}``."""
    return _finite_sampler(cfg.graph, resolve_p(cfg.graph, cfg.p)).sample(s, t, rng)


def sample_finite_rejection(cfg: SamplerConfig, k: int, ell: int, rng: RandomSource) -> tuple[Trace, RejectionStats]:
    """One trace distributed as ``D_{Sigma_k, L(a_ell)}`` and the counters of that draw."""
    sampler = _rejection_sampler(cfg.graph, resolve_p(cfg.graph, cfg.p), cfg.order)
    stats = RejectionStats()
    trace = sampler.sample(k, ell, rng, stats)
    return trace, stats


# Streams -------------------------------------------------------------------

@dataclass(frozen=True)
class StreamRecord:
    loop: int
    increment: tuple[int, ...]
    total_length: int
    rejections: int

    def to_json(self, graph: DependenceGraph) -> dict:
        return {
            "loop": self.loop,
            "increment": ".".join(graph.letters[i] for i in self.increment),
            "total_length": self.total_length,
            "rejections": self.rejections,
        }


@dataclass
class PrefixStream:
    """Endless iterator over the prefixes ``xi_1 <= xi_2 <= ...``.

    Each step appends one anchor-pyramid ``v . a`` to the prefix and yields a
    :class:`StreamRecord`; the prefix itself is available as :attr:`trace`.
    """

    config: SamplerConfig
    draw: Callable[[RandomSource], list[int]] = field(repr=False)
    anchor: int
    rng: RandomSource = field(repr=False)
    stats: RejectionStats = field(default_factory=RejectionStats)
    prefix: list[int] = field(default_factory=list, repr=False)
    loop: int = 0

    def __iter__(self) -> Iterator[StreamRecord]:
        return self

    def __next__(self) -> StreamRecord:
        increment = self.draw(self.rng)
        increment.append(self.anchor)
        self.prefix.extend(increment)
        self.loop += 1
        return StreamRecord(self.loop, tuple(increment), len(self.prefix), self.stats.rejections)

    @property
    def trace(self) -> Trace:
        return Trace(self.config.graph, tuple(self.prefix))


def _require_connected(g: DependenceGraph) -> None:
    if not is_connected(g):
        raise DomainError("streaming needs an irreducible monoid (connected dependence graph)")


def stream_uniform(cfg: SamplerConfig, rng: RandomSource | None = None) -> PrefixStream:
    """Prefix stream built from direct pyramid sampling around ``cfg.anchor``."""
    g = cfg.graph
    _require_connected(g)
    a = cfg.anchor_letter
    sampler = FiniteSampler(g, CRITICAL)
    body, link = g.full & ~(1 << a), g.links[a]
    sampler.check(body)
    stats = RejectionStats()

    def draw(source: RandomSource) -> list[int]:
        word = sampler.sample_word(body, link, source)
        stats.letters += len(word) + 1
        return word

    return PrefixStream(cfg, draw, a, rng or cfg.rng(), stats)


def stream_uniform_rejection(cfg: SamplerConfig, rng: RandomSource | None = None) -> PrefixStream:
    """Prefix stream whose pyramids come from the rejection sampler along
    ``cfg.order``; the anchor is the last letter of the ordering."""
    g = cfg.graph
    _require_connected(g)
    sampler = RejectionSampler(g, CRITICAL, cfg.order)
    n = g.n
    sampler.check(n - 1)
    stats = sampler.stats

    def draw(source: RandomSource) -> list[int]:
        word = sampler.sample_word(n - 1, n, source, stats)
        stats.letters += 1
        return word

    return PrefixStream(cfg, draw, cfg.order[-1], rng or cfg.rng(), stats)
