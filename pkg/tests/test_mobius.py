import random
import threading
from fractions import Fraction
from itertools import combinations

import pytest

from conftest import all_graphs, path4, random_graph
from tracegen.errors import DomainError, InputError
from tracegen.mobius import (
    MobiusPolynomial,
    MobiusTable,
    critical_root,
    deriv_eval,
    mobius_eval,
    mobius_poly,
    series_expand,
)
from tracegen.monoid import (
    bits,
    complete_graph,
    enumerate_traces,
    from_cf,
    independent_graph,
    max_letters,
)

G = path4()


def subsets(mask):
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def shift(poly):
    return (0,) + poly.coefficients


def poly_sub(a, b):
    n = max(len(a), len(b))
    a, b = a + (0,) * (n - len(a)), b + (0,) * (n - len(b))
    out = [x - y for x, y in zip(a, b)]
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return tuple(out)


def test_polynomial_examples():
    assert mobius_poly(G, G.full).coefficients == (1, -4, 3)
    assert str(mobius_poly(G, G.full)) == "1 - 4X + 3X^2"
    assert mobius_poly(G, 0).coefficients == (1,)
    for k in range(1, 8):
        assert mobius_poly(complete_graph([f"x{i}" for i in range(k)]), (1 << k) - 1).coefficients == (1, -k)


def test_coefficient_signs_alternate():
    rng = random.Random(3)
    for _ in range(50):
        g = random_graph(rng, rng.randint(1, 9))
        c = mobius_poly(g, g.full).coefficients
        assert c[0] == 1 and c[1] == -g.n
        assert all(x == 0 or (x > 0) == (j % 2 == 0) for j, x in enumerate(c))


def _recurrence_holds(g, s):
    mu = mobius_poly(g, s)
    for a in bits(s):
        lhs = mu.coefficients
        rhs = poly_sub(mobius_poly(g, s & ~(1 << a)).coefficients, shift(mobius_poly(g, s & ~g.links[a])))
        if lhs != rhs:
            return False
    return True


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_deletion_recurrence_exhaustive(n):
    for g in all_graphs(n):
        for s in subsets(g.full):
            assert _recurrence_holds(g, s)


def test_deletion_recurrence_random_large():
    rng = random.Random(11)
    for _ in range(200):
        g = random_graph(rng, rng.randint(5, 16), rng.uniform(0.2, 0.8))
        s = rng.getrandbits(g.n) or 1
        assert _recurrence_holds(g, s)


def test_evaluation_examples():
    t = MobiusTable(G, 0.2)
    assert mobius_eval(t, G.full) == pytest.approx(0.32, abs=1e-15)
    assert mobius_eval(t, G.mask("abd")) == pytest.approx(0.48, abs=1e-15)
    assert mobius_eval(t, 0) == 1.0
    assert deriv_eval(t, G.full) == pytest.approx(-4 + 6 * 0.2)
    exact = MobiusTable(G, Fraction(1, 5))
    assert exact.value(G.full) == Fraction(8, 25)
    assert exact.value(G.mask("abd")) == Fraction(12, 25)


def test_table_is_memoized_and_reproducible():
    t = MobiusTable(G, 0.27)
    first = t.value(G.full)
    assert len(t) == 1
    assert t.value(G.full) == first == mobius_poly(G, G.full)(0.27)


def test_table_concurrent_lookups_agree():
    rng = random.Random(5)
    g = random_graph(rng, 12, 0.5)
    t = MobiusTable(g, 0.05)
    masks = [rng.getrandbits(12) for _ in range(300)]
    results = [[] for _ in range(4)]

    def work(out):
        for m in masks:
            out.append(t.value(m))

    threads = [threading.Thread(target=work, args=(r,)) for r in results]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    assert all(r == results[0] for r in results)


@pytest.mark.parametrize("p", [0, -0.1, 1.5])
def test_table_rejects_bad_p(p):
    with pytest.raises(DomainError):
        MobiusTable(G, p)


def test_critical_root_examples():
    root = critical_root(G, G.full)
    assert abs(root.value - 1 / 3) < 1e-9
    mu = mobius_poly(G, G.full)
    assert mu(root.lo) > 0 >= mu(root.hi) or root.exact is not None
    assert root.hi - root.lo <= 1e-12
    assert root.lo <= root.value <= root.hi
    for k in range(1, 11):
        g = complete_graph([f"x{i}" for i in range(k)])
        assert abs(critical_root(g, g.full).value - 1 / k) < 1e-9
    comm = independent_graph("ab")
    assert critical_root(comm, comm.full).value == 1.0
    assert critical_root(G, G.mask("a")).value == 1.0


def test_critical_root_is_smallest_positive_root():
    rng = random.Random(17)
    for _ in range(60):
        g = random_graph(rng, rng.randint(1, 8))
        root = critical_root(g, g.full)
        mu = mobius_poly(g, g.full)
        assert 0 < root.value <= 1
        # no sign change on a fine grid strictly below the bracket
        grid = [Fraction(j, 2000) * root.lo for j in range(2000)]
        assert all(mu(x) > 0 for x in grid)
        assert mu(root.hi) <= 0 or root.degenerate or root.exact is not None


def test_critical_root_errors():
    with pytest.raises(InputError):
        critical_root(G, 0)
    with pytest.raises(InputError):
        critical_root(G, G.full, tol=0)


def test_series_examples():
    assert series_expand(G, G.full, 8) == [1, 4, 13, 40, 121, 364, 1093, 3280, 9841]
    assert series_expand(G, 0, 5) == [1, 0, 0, 0, 0, 0]
    assert series_expand(G, G.mask("c"), 3) == [1, 1, 3, 9]
    with pytest.raises(InputError):
        series_expand(G, G.full, -1)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_series_counts_traces_exhaustive(n):
    degree = 8 if n <= 3 else 6
    for g in all_graphs(n):
        counts = {}
        for cf in enumerate_traces(g, g.full, degree):
            x = from_cf(g, cf)
            counts.setdefault(len(x), []).append(max_letters(x))
        for u in subsets(g.full):
            expected = [sum(1 for m in counts.get(j, []) if m & ~u == 0) for j in range(degree + 1)]
            assert series_expand(g, u, degree) == expected


def test_series_partial_sums_increase_to_inverse():
    coeffs = series_expand(G, G.full, 200)
    for p in (Fraction(1, 10), Fraction(1, 5), Fraction(3, 10)):
        target = 1 / mobius_poly(G, G.full)(p)
        partial, prev = Fraction(0), Fraction(-1)
        for j, c in enumerate(coeffs):
            partial += c * p**j
            assert prev < partial < target
            prev = partial
        assert float(partial) == pytest.approx(float(target), rel=1e-3)


def _grid(g, points=12):
    pc = critical_root(g, g.full).value
    return [pc * k / (points + 1) for k in range(1, points + 1)]


@pytest.mark.parametrize("n", [2, 3, 4])
def test_positivity_and_monotonicity_exhaustive(n):
    for g in all_graphs(n):
        for p in _grid(g):
            for s in subsets(g.full):
                mu = mobius_poly(g, s)(p)
                assert mu > 0
                for u in bits(s):
                    rest = mobius_poly(g, s & ~(1 << u))(p)
                    assert mu <= rest + 1e-15
                    if g.links[u] & s & ~(1 << u):
                        assert mu <= (1 - p) * rest + 1e-15


@pytest.mark.parametrize("n", [2, 3, 4])
def test_ratio_double_inequality(n):
    # for a outside S with a neighbour in S: p <= mu_S / mu_{S \ L(a)} <= 1 - p
    for g in all_graphs(n):
        for p in _grid(g):
            for s in subsets(g.full):
                for a in range(g.n):
                    if (s >> a) & 1 or not g.links[a] & s:
                        continue
                    ratio = mobius_poly(g, s)(p) / mobius_poly(g, s & ~g.links[a])(p)
                    assert p - 1e-12 <= ratio <= 1 - p + 1e-12


def test_product_over_components():
    g = independent_graph("ab")
    for s, t in combinations([1, 2], 2):
        assert (mobius_poly(g, s) * mobius_poly(g, t)).coefficients == mobius_poly(g, s | t).coefficients
    assert isinstance(mobius_poly(g, 3), MobiusPolynomial)
