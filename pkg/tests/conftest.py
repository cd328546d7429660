"""Shared graphs and brute-force oracles that do not use the library's
canonical forms."""
from __future__ import annotations

import itertools
import random

import pytest

from tracegen.monoid import DependenceGraph, cycle_graph, graph_from_masks, path_graph


def path4() -> DependenceGraph:
    return path_graph("abcd")


@pytest.fixture
def g4() -> DependenceGraph:
    return path4()


@pytest.fixture
def c4() -> DependenceGraph:
    return cycle_graph("abcd")


def projection_key(g: DependenceGraph, word) -> tuple:
    """Two words are congruent iff their projections on every dependent pair
    of letters agree."""
    key = []
    for i in range(g.n):
        for j in range(i, g.n):
            if g.depends(i, j):
                key.append(tuple(c for c in word if c in (i, j)))
    return tuple(key)


def maximal_by_projection(g: DependenceGraph, word) -> int:
    """Letters ``a`` such that the word is congruent to ``w . a``."""
    out = 0
    for a in set(word):
        ok = True
        for b in range(g.n):
            if g.depends(a, b):
                proj = [c for c in word if c in (a, b)]
                if proj[-1] != a:
                    ok = False
                    break
        if ok:
            out |= 1 << a
    return out


def brute_force_classes(g: DependenceGraph, letters, length: int) -> dict:
    """Congruence classes of words of ``length`` over ``letters``: key -> one word."""
    classes = {}
    for w in itertools.product(letters, repeat=length):
        classes.setdefault(projection_key(g, w), w)
    return classes


def all_graphs(n: int):
    pairs = list(itertools.combinations(range(n), 2))
    for mask in range(1 << len(pairs)):
        edges = [e for k, e in enumerate(pairs) if (mask >> k) & 1]
        yield graph_from_masks(n, edges)


def random_graph(rng: random.Random, n: int, density: float | None = None) -> DependenceGraph:
    density = rng.random() if density is None else density
    edges = [(i, j) for i, j in itertools.combinations(range(n), 2) if rng.random() < density]
    return graph_from_masks(n, edges)


def null_tv_quantile(table, n: int, q: float = 0.999, reps: int = 2000, seed: int = 0) -> float:
    """Quantile of the total variation between ``n`` exact draws from
    ``table`` (tail lumped) and the table itself."""
    import numpy as np

    probs = np.array([float(w) for w in table.entries.values()] + [float(1 - table.mass)])
    probs = np.clip(probs, 0, None)
    probs /= probs.sum()
    rng = np.random.default_rng(seed)
    draws = rng.multinomial(n, probs, size=reps) / n
    tv = 0.5 * np.abs(draws - probs).sum(axis=1)
    return float(np.quantile(tv, q))


def chordal_by_cycles(g: DependenceGraph) -> bool:
    """No induced cycle on four or more vertices (brute force)."""
    for size in range(4, g.n + 1):
        for vs in itertools.combinations(range(g.n), size):
            sub = sum(1 << v for v in vs)
            degrees = [(g.links[v] & sub & ~(1 << v)).bit_count() for v in vs]
            if any(d != 2 for d in degrees):
                continue
            seen, stack = 1 << vs[0], [vs[0]]
            while stack:
                v = stack.pop()
                for w in vs:
                    if not (seen >> w) & 1 and g.depends(v, w):
                        seen |= 1 << w
                        stack.append(w)
            if seen == sub:
                return False
    return True


def has_rejection_free_ordering(g: DependenceGraph) -> bool:
    from tracegen.analysis import is_rejection_free

    return any(is_rejection_free(g, order) for order in itertools.permutations(range(g.n)))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
