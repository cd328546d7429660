"""Dependence alphabets, traces and their structural operations.

Letters are referred to by their index in the declared order; a set of
letters (a *letter set*) is an ``int`` bit mask, bit ``i`` standing for the
letter of index ``i``.  Alphabets are capped at 64 letters.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence

from .errors import InputError

MAX_LETTERS = 64


def bits(mask: int) -> Iterator[int]:
    """Indices of the set bits of ``mask``, ascending."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def lowest(mask: int) -> int:
    return (mask & -mask).bit_length() - 1


@dataclass(frozen=True)
class DependenceGraph:
    """An alphabet together with a reflexive, symmetric dependence relation.

    ``links[i]`` is the bit mask of the letters depending on letter ``i``,
    which always contains ``i`` itself.
    """

    letters: tuple[str, ...]
    links: tuple[int, ...]
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        n = len(self.letters)
        if n == 0:
            raise InputError("alphabet must contain at least one letter")
        if n > MAX_LETTERS:
            raise InputError(f"alphabet has {n} letters; at most {MAX_LETTERS} are supported")
        if len(set(self.letters)) != n:
            raise InputError("duplicate letters in alphabet")
        if len(self.links) != n:
            raise InputError("links must have one entry per letter")
        for i, m in enumerate(self.links):
            if not (m >> i) & 1:
                raise InputError("dependence relation must be reflexive")
            if m >> n:
                raise InputError("dependence mask refers to unknown letters")
            for j in bits(m):
                if not (self.links[j] >> i) & 1:
                    raise InputError("dependence relation must be symmetric")
        object.__setattr__(self, "_index", {a: i for i, a in enumerate(self.letters)})

    @classmethod
    def from_pairs(cls, letters: Sequence[str], pairs: Iterable[Sequence[str]]) -> DependenceGraph:
        """Build a graph from dependent pairs; reflexive and symmetric closure is applied."""
        letters = tuple(str(a) for a in letters)
        if len(set(letters)) != len(letters):
            raise InputError("duplicate letters in alphabet")
        if len(letters) > MAX_LETTERS:
            raise InputError(f"alphabet has {len(letters)} letters; at most {MAX_LETTERS} are supported")
        index = {a: i for i, a in enumerate(letters)}
        links = [1 << i for i in range(len(letters))]
        for pair in pairs:
            if len(pair) != 2:
                raise InputError(f"dependence pair {pair!r} must have two letters")
            a, b = pair
            if a not in index or b not in index:
                raise InputError(f"unknown letter in dependence pair {pair!r}")
            i, j = index[a], index[b]
            links[i] |= 1 << j
            links[j] |= 1 << i
        return cls(letters, tuple(links))

    @classmethod
    def from_document(cls, doc: dict) -> DependenceGraph:
        if not isinstance(doc, dict) or "letters" not in doc:
            raise InputError('graph document must be an object with a "letters" list')
        letters = doc["letters"]
        if not isinstance(letters, list) or not all(isinstance(a, str) for a in letters):
            raise InputError('"letters" must be a list of strings')
        pairs = doc.get("dependence", [])
        if not isinstance(pairs, list):
            raise InputError('"dependence" must be a list of pairs')
        return cls.from_pairs(letters, pairs)

    @classmethod
    def load(cls, path) -> DependenceGraph:
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"malformed graph JSON in {path}: {exc}") from None
        except OSError as exc:
            raise InputError(f"cannot read graph file {path}: {exc.strerror}") from None
        return cls.from_document(doc)

    def to_document(self) -> dict:
        pairs = [
            [self.letters[i], self.letters[j]]
            for i in range(self.n)
            for j in bits(self.links[i])
            if i < j
        ]
        return {"letters": list(self.letters), "dependence": pairs}

    @property
    def n(self) -> int:
        return len(self.letters)

    @property
    def full(self) -> int:
        return (1 << self.n) - 1

    def index(self, letter: str | int) -> int:
        if isinstance(letter, int):
            if 0 <= letter < self.n:
                return letter
            raise InputError(f"letter index {letter} out of range")
        try:
            return self._index[letter]
        except KeyError:
            raise InputError(f"unknown letter {letter!r}") from None

    def mask(self, letters: Iterable[str | int]) -> int:
        m = 0
        for a in letters:
            m |= 1 << self.index(a)
        return m

    def names(self, mask: int) -> list[str]:
        return [self.letters[i] for i in bits(mask)]

    def depends(self, a: int, b: int) -> bool:
        return bool((self.links[a] >> b) & 1)

    def trace(self, word: str | Iterable[str | int] = ()) -> Trace:
        """Build a trace from a dotted string ``"b.a.c"`` or a letter sequence."""
        if isinstance(word, str):
            word = word.split(".") if word else []
        return Trace(self, tuple(self.index(a) for a in word))

    def empty(self) -> Trace:
        return Trace(self, ())


# Common graphs -------------------------------------------------------------

def path_graph(letters: Sequence[str]) -> DependenceGraph:
    """Consecutive letters depend on each other (the dimer monoid)."""
    return DependenceGraph.from_pairs(letters, zip(letters, letters[1:]))


def cycle_graph(letters: Sequence[str]) -> DependenceGraph:
    pairs = list(zip(letters, letters[1:])) + [(letters[-1], letters[0])]
    return DependenceGraph.from_pairs(letters, pairs)


def complete_graph(letters: Sequence[str]) -> DependenceGraph:
    """Every pair dependent: the free monoid."""
    return DependenceGraph.from_pairs(letters, [(a, b) for a in letters for b in letters])


def independent_graph(letters: Sequence[str]) -> DependenceGraph:
    """No dependence besides reflexivity: the free commutative monoid."""
    return DependenceGraph.from_pairs(letters, [])


def graph_from_masks(n: int, edges: Iterable[tuple[int, int]], names: Sequence[str] | None = None) -> DependenceGraph:
    if names is None:
        names = [f"a{i + 1}" for i in range(n)]
    return DependenceGraph.from_pairs(names, [(names[i], names[j]) for i, j in edges])


# Traces ----------------------------------------------------------------------

class Trace:
    """An element of the trace monoid, held as a representative word.

    Equality and hashing go through the Cartier-Foata normal form, so two
    traces compare equal iff their words are congruent.
    """

    def __init__(self, graph: DependenceGraph, word: tuple[int, ...]):
        self.graph = graph
        self.word = tuple(word)

    def __len__(self) -> int:
        return len(self.word)

    def __mul__(self, other: Trace) -> Trace:
        if other.graph != self.graph:
            raise InputError("cannot multiply traces over different graphs")
        return Trace(self.graph, self.word + other.word)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Trace):
            return NotImplemented
        return self.graph == other.graph and self.canonical == other.canonical

    def __hash__(self) -> int:
        return hash(self.canonical)

    def __str__(self) -> str:
        return ".".join(self.graph.letters[i] for i in self.word)

    def __repr__(self) -> str:
        return f"Trace({str(self)!r})"

    @cached_property
    def canonical(self) -> tuple[int, ...]:
        """Cartier-Foata normal form as a tuple of clique masks."""
        return tuple(cf_masks(self.graph, self.word))

    @property
    def alphabet(self) -> int:
        m = 0
        for i in self.word:
            m |= 1 << i
        return m

    def count(self, letter: str | int) -> int:
        return self.word.count(self.graph.index(letter))


def link(g: DependenceGraph, a: str | int) -> int:
    """Letters depending on ``a`` (``a`` included)."""
    return g.links[g.index(a)]


def connected_component(g: DependenceGraph, within: int, a: str | int) -> int:
    """Connected component of ``a`` in the subgraph induced on ``within``."""
    i = g.index(a)
    if not (within >> i) & 1:
        raise InputError(f"letter {g.letters[i]!r} is not in the given set")
    comp = frontier = 1 << i
    while frontier:
        reach = 0
        for j in bits(frontier):
            reach |= g.links[j]
        frontier = reach & within & ~comp
        comp |= frontier
    return comp


def components(g: DependenceGraph, within: int) -> list[int]:
    out = []
    rest = within
    while rest:
        comp = connected_component(g, within, lowest(rest))
        out.append(comp)
        rest &= ~comp
    return out


def is_connected(g: DependenceGraph) -> bool:
    return connected_component(g, g.full, 0) == g.full


def enumerate_cliques(g: DependenceGraph, s: int) -> list[int]:
    """All sets of pairwise independent letters inside ``s`` (the empty set
    included), sorted by mask value."""
    out = []

    def extend(current: int, candidates: int):
        out.append(current)
        while candidates:
            i = lowest(candidates)
            candidates &= candidates - 1
            extend(current | (1 << i), candidates & ~g.links[i])

    extend(0, s)
    out.sort()
    return out


def max_letters(x: Trace) -> int:
    """Labels of the maximal pieces of the heap of ``x``."""
    links = x.graph.links
    seen = 0
    out = 0
    for i in reversed(x.word):
        if not links[i] & seen:
            out |= 1 << i
        seen |= 1 << i
    return out


def cf_masks(g: DependenceGraph, word: Sequence[int]) -> list[int]:
    # height of a piece = 1 + highest dependent piece below it; the
    # Cartier-Foata cliques are the height levels.
    top = [0] * g.n
    levels: list[int] = []
    links = g.links
    for i in word:
        h = 0
        for j in bits(links[i]):
            if top[j] > h:
                h = top[j]
        top[i] = h + 1
        if h == len(levels):
            levels.append(0)
        levels[h] |= 1 << i
    return levels


def cf_normal_form(x: Trace) -> list[int]:
    """Cartier-Foata normal form of ``x`` as a list of nonempty clique masks."""
    return list(x.canonical)


def from_cf(g: DependenceGraph, cliques: Iterable[int]) -> Trace:
    word: list[int] = []
    for c in cliques:
        word.extend(bits(c))
    return Trace(g, tuple(word))


def format_cf(g: DependenceGraph, cliques: Iterable[int]) -> str:
    return "".join("[" + " ".join(g.names(c)) + "]" for c in cliques)


def traces_equal(x: Trace, y: Trace) -> bool:
    return x.canonical == y.canonical


def left_divides(x: Trace, y: Trace) -> bool:
    """Whether ``y = x . z`` for some trace ``z``.

    Cancels the letters of ``x`` one at a time from the left of ``y``: a
    letter ``a`` left-divides ``y`` iff no letter depending on ``a`` occurs in
    ``y`` before its first ``a``.
    """
    links = y.graph.links
    rest = list(y.word)
    for a in x.word:
        for pos, b in enumerate(rest):
            if b == a:
                del rest[pos]
                break
            if (links[a] >> b) & 1:
                return False
        else:
            return False
    return True


@dataclass(frozen=True)
class PyramidalFactorization:
    pyramids: tuple[Trace, ...]
    tail: Trace
    anchor: int

    @property
    def k(self) -> int:
        return len(self.pyramids)

    def concatenation(self) -> Trace:
        out = self.tail.graph.empty()
        for u in self.pyramids:
            out = out * u
        return out * self.tail


def pyramidal_decompose(x: Trace, a1: str | int) -> PyramidalFactorization:
    """Split ``x`` as ``u_0 ... u_{k-1} . u_k`` with each ``u_i`` (i < k)
    ``a1``-pyramidal and ``u_k`` free of ``a1``.

    A piece goes to the pyramid of the first occurrence of ``a1`` lying above
    it in the heap; pieces below no occurrence of ``a1`` form the tail.
    """
    g = x.graph
    a = g.index(a1)
    word = x.word
    k = word.count(a)
    none = k
    best = [none] * g.n
    assign = [none] * len(word)
    occ = k
    for pos in range(len(word) - 1, -1, -1):
        c = word[pos]
        if c == a:
            occ -= 1
            slot = occ
        else:
            slot = none
            for b in bits(g.links[c]):
                if best[b] < slot:
                    slot = best[b]
        assign[pos] = slot
        if slot < best[c]:
            best[c] = slot
    parts: list[list[int]] = [[] for _ in range(k + 1)]
    for c, slot in zip(word, assign):
        parts[slot].append(c)
    pyramids = tuple(Trace(g, tuple(p)) for p in parts[:k])
    return PyramidalFactorization(pyramids, Trace(g, tuple(parts[k])), a)


def is_pyramidal(x: Trace, a1: str | int) -> bool:
    a = x.graph.index(a1)
    return x.word.count(a) == 1 and max_letters(x) == 1 << a


def enumerate_traces(g: DependenceGraph, s: int, max_len: int) -> Iterator[tuple[int, ...]]:
    """Cartier-Foata forms of every trace over the letters ``s`` of length at
    most ``max_len``, including the empty trace.

    Generated directly as chains of cliques ``c_1 -> c_2 -> ...`` where every
    letter of ``c_{i+1}`` depends on some letter of ``c_i``.
    """
    cliques = [c for c in enumerate_cliques(g, s) if c]
    size = {c: c.bit_count() for c in cliques}
    reach = {}
    for c in cliques:
        r = 0
        for i in bits(c):
            r |= g.links[i]
        reach[c] = r
    succ = {c: [d for d in cliques if d & ~reach[c] == 0] for c in cliques}

    def walk(prefix: list[int], budget: int, options: list[int]):
        yield tuple(prefix)
        for c in options:
            if size[c] <= budget:
                prefix.append(c)
                yield from walk(prefix, budget - size[c], succ[c])
                prefix.pop()

    yield from walk([], max_len, cliques)
