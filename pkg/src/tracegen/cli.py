"""Command-line entry point: ``tracegen <subcommand> --graph g.json ...``.

Exit status is 0 on success, 1 on input errors and 2 on domain errors
(for instance ``p`` at or above the critical root).
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .analysis import estimate_mobius, find_peo, rate_bound
from .errors import DomainError, InputError
from .laws import TraceLaw, empirical_table, exact_distribution, geometric_param, k_law_check, total_variation
from .mobius import critical_root, mobius_poly, series_expand
from .monoid import DependenceGraph, bits, format_cf, is_connected, lowest
from .rng import DEFAULT_SEED, RandomSource
from .samplers import (
    CRITICAL,
    FiniteSampler,
    RejectionSampler,
    SamplerConfig,
    stream_uniform,
    stream_uniform_rejection,
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def parse_p(text: str):
    """``"critical"``, a fraction ``"1/5"`` or a decimal ``"0.2"`` (read exactly)."""
    text = text.strip()
    if text == CRITICAL:
        return CRITICAL
    try:
        p = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise InputError(f"cannot parse p = {text!r}") from None
    if not 0 < p <= 1:
        raise InputError(f"p must lie in (0, 1], got {text}")
    return p


def _p_fields(text: str, p) -> dict:
    out = {"p": str(p)}
    if p != CRITICAL and "/" not in text and str(p) != text:
        out["p_note"] = f"decimal {text} read exactly as {p}"
    return out


def _letters(g: DependenceGraph, text: str | None, default: int) -> int:
    if text is None:
        return default
    names = [a for a in text.split(",") if a]
    return g.mask(names)


def _ordering(g: DependenceGraph, text: str | None):
    if text is None:
        return None
    order = tuple(g.index(a) for a in text.split(",") if a)
    if sorted(order) != list(range(g.n)):
        raise InputError("ordering must list every letter exactly once")
    return order


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, sort_keys=True) + "\n")


# Subcommands -------------------------------------------------------------------

def cmd_mobius(args) -> None:
    g = DependenceGraph.load(args.graph)
    s = _letters(g, args.subset, g.full)
    poly = mobius_poly(g, s)
    p = parse_p(args.p) if args.p is not None else None
    if p == CRITICAL:
        raise InputError("use --critical for the critical root")
    result: dict = {"subset": g.names(s), "polynomial": str(poly), "coefficients": list(poly.coefficients)}
    lines = []
    if p is not None:
        value, slope = poly(p), poly.derivative()(p)
        result.update(_p_fields(args.p, p))
        result.update(value=float(value), value_exact=str(value), derivative=float(slope))
        lines.append(f"{float(value):.12g}")
    if args.critical:
        if s == 0:
            raise InputError("the empty alphabet has no critical root")
        root = critical_root(g, s)
        result.update(critical_root=root.value, bracket=[float(root.lo), float(root.hi)])
        lines.append(f"{root.value:.12f}")
    if args.series_degree is not None:
        u = _letters(g, args.max_set, s)
        coeffs = series_expand(g, u, args.series_degree, within=s)
        result["series"] = coeffs
        result["max_set"] = g.names(u & s)
        lines.append(" ".join(map(str, coeffs)))
    if args.format == "json":
        _emit(result)
    else:
        sys.stdout.write("\n".join(lines or [str(poly)]) + "\n")


def cmd_sample(args) -> None:
    g = DependenceGraph.load(args.graph)
    p = parse_p(args.p)
    if args.count < 0:
        raise InputError("count must be non-negative")
    rng = RandomSource(args.seed)
    if args.algorithm == "direct":
        s = _letters(g, args.subset, g.full)
        t = _letters(g, args.max_set, s)
        sampler = FiniteSampler(g, p)
        sampler.check(s)
        draw = lambda: sampler.sample(s, t, rng)  # noqa: E731
    else:
        if args.max_set is not None or args.subset is not None:
            raise InputError("--max-set/--subset apply to the direct algorithm; use --k/--ell")
        sampler = RejectionSampler(g, p, _ordering(g, args.ordering))
        k = g.n - 1 if args.k is None else args.k
        ell = g.n if args.ell is None else args.ell
        if not 0 <= k < ell <= g.n:
            raise InputError(f"need 0 <= k < ell <= {g.n}")
        sampler.check(k)
        draw = lambda: sampler.sample(k, ell, rng)  # noqa: E731
    out = sys.stdout
    for _ in range(args.count):
        x = draw()
        out.write((format_cf(g, x.canonical) if args.canonical else str(x)) + "\n")


def cmd_stream(args) -> None:
    g = DependenceGraph.load(args.graph)
    if args.loops is None and args.budget_letters is None:
        raise InputError("give --loops and/or --budget-letters")
    if args.algorithm == "direct" and args.ordering is not None:
        raise InputError("--ordering applies to the rejection algorithm")
    if args.algorithm == "rejection" and args.anchor is not None:
        raise InputError("--anchor applies to the direct algorithm; the rejection stream anchors on the last letter of --ordering")
    cfg = SamplerConfig(g, CRITICAL, anchor=args.anchor, ordering=_ordering(g, args.ordering), seed=args.seed)
    stream = stream_uniform(cfg) if args.algorithm == "direct" else stream_uniform_rejection(cfg)
    out = sys.stdout
    while True:
        if args.loops is not None and stream.loop >= args.loops:
            break
        if args.budget_letters is not None and len(stream.prefix) >= args.budget_letters:
            break
        record = next(stream)
        out.write(json.dumps(record.to_json(g)) + "\n")


def cmd_analyze(args) -> None:
    g = DependenceGraph.load(args.graph)
    order = _ordering(g, args.ordering)
    result: dict = {"ordering_report": find_peo(g, order).to_json(g)}
    result["rate_report"] = rate_bound(g, order).to_json() if is_connected(g) else None
    if args.estimate is not None:
        parts = args.estimate.split(",")
        if len(parts) != 3:
            raise InputError("--estimate expects p,eps,alpha")
        p = parse_p(parts[0])
        if p == CRITICAL:
            raise DomainError("the estimator needs p below the critical root")
        try:
            eps, alpha = float(parts[1]), float(parts[2])
        except ValueError:
            raise InputError("--estimate expects numeric eps and alpha") from None
        est = estimate_mobius(g, p, eps, alpha, RandomSource(args.seed))
        result["estimate"] = est.to_json(g) | _p_fields(parts[0], p)
        result["estimate"]["true_value"] = float(mobius_poly(g, g.full)(p))
    _emit(result)


def cmd_verify(args) -> None:
    g = DependenceGraph.load(args.graph)
    p = parse_p(args.p)
    if p == CRITICAL:
        raise DomainError("verification tables need p below the critical root")
    rng = RandomSource(args.seed)
    report: dict = {"algorithm": args.algorithm, "count": args.count, "seed": args.seed, "horizon": args.horizon}
    report.update(_p_fields(args.p, p))
    if args.algorithm == "direct":
        s = _letters(g, args.subset, g.full)
        t = _letters(g, args.max_set, s)
        sampler = FiniteSampler(g, p)
        sampler.check(s)
        draw = lambda: sampler.sample(s, t, rng)  # noqa: E731
    else:
        sampler = RejectionSampler(g, p, _ordering(g, args.ordering))
        k = g.n - 1 if args.k is None else args.k
        ell = g.n if args.ell is None else args.ell
        if not 0 <= k < ell <= g.n:
            raise InputError(f"need 0 <= k < ell <= {g.n}")
        sampler.check(k)
        s = sampler.prefixes[k]
        t = g.links[sampler.order[ell - 1]]
        draw = lambda: sampler.sample(k, ell, rng)  # noqa: E731
    table = exact_distribution(g, p, s, t, args.horizon)
    if args.count <= 0:
        raise InputError("count must be positive")
    samples = [draw() for _ in range(args.count)]
    counts = empirical_table(samples)
    report.update(
        S=g.names(s),
        T=g.names(t & s),
        table=table.to_json(),
        total_variation=total_variation(counts, table),
        empirical_unit=counts.get("", 0) / args.count,
        exact_unit=float(table.entries[""]),
    )
    if args.algorithm == "direct" and s & t:
        # the number of pyramids over a letter a, hence |x|_a when a is the
        # anchor or when nothing is conditioned, is geometric
        table_mu = TraceLaw(g, p, alphabet=s).table
        letters = s if not s & ~t else 1 << lowest(s & t)
        report["k_law"] = {}
        for a in bits(letters):
            fit = k_law_check([x.count(a) for x in samples], float(geometric_param(table_mu, s, a)))
            report["k_law"][g.letters[a]] = {
                "r": float(geometric_param(table_mu, s, a)),
                "statistic": fit.statistic,
                "dof": fit.dof,
                "p_value": fit.p_value,
            }
    if args.algorithm == "rejection":
        report["rejections"] = sampler.stats.rejections
        report["attempts"] = sampler.stats.attempts
    _emit(report)


# Wiring -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tracegen", description="Uniform random generation of traces.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, seed=True):
        sp.add_argument("--graph", required=True, help="graph JSON document")
        if seed:
            sp.add_argument("--seed", type=int, default=DEFAULT_SEED)

    sp = sub.add_parser("mobius", help="Möbius polynomial, value, critical root, series")
    common(sp, seed=False)
    sp.add_argument("--subset", help="comma-separated letters (default: whole alphabet)")
    group = sp.add_mutually_exclusive_group()
    group.add_argument("--p", help="evaluation point, decimal or fraction")
    group.add_argument("--critical", action="store_true", help="smallest positive root")
    sp.add_argument("--series-degree", type=int, help="count traces of each length up to N")
    sp.add_argument("--max-set", help="letters U the counted traces may end with (default: all)")
    sp.add_argument("--format", choices=["text", "json"], default="text")
    sp.set_defaults(func=cmd_mobius)

    sp = sub.add_parser("sample", help="finite traces, one per line")
    common(sp)
    sp.add_argument("--p", required=True)
    sp.add_argument("--count", type=int, default=1)
    sp.add_argument("--algorithm", choices=["direct", "rejection"], default="direct")
    sp.add_argument("--subset", help="alphabet S of the direct sampler")
    sp.add_argument("--max-set", help="max-letter constraint T of the direct sampler")
    sp.add_argument("--ordering", help="letter ordering of the rejection sampler")
    sp.add_argument("--k", type=int)
    sp.add_argument("--ell", type=int)
    sp.add_argument("--canonical", action="store_true", help="print Cartier-Foata forms")
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("stream", help="NDJSON prefixes of a uniform infinite trace")
    common(sp)
    sp.add_argument("--algorithm", choices=["direct", "rejection"], default="direct")
    sp.add_argument("--loops", type=int)
    sp.add_argument("--budget-letters", type=int)
    sp.add_argument("--anchor")
    sp.add_argument("--ordering")
    sp.set_defaults(func=cmd_stream)

    sp = sub.add_parser("analyze", help="chordality, rejection-free ordering, rate bound")
    common(sp)
    sp.add_argument("--ordering")
    sp.add_argument("--estimate", help="p,eps,alpha for the Monte-Carlo Möbius estimator")
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("verify", help="compare a sampler with the exact enumeration oracle")
    common(sp)
    sp.add_argument("--p", required=True)
    sp.add_argument("--algorithm", choices=["direct", "rejection"], default="direct")
    sp.add_argument("--subset")
    sp.add_argument("--max-set")
    sp.add_argument("--ordering")
    sp.add_argument("--k", type=int)
    sp.add_argument("--ell", type=int)
    sp.add_argument("--horizon", type=int, default=4)
    sp.add_argument("--count", type=int, default=10000)
    sp.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        args.func(args)
    except InputError as exc:
        sys.stderr.write(f"tracegen: error: {exc}\n")
        return 1
    except DomainError as exc:
        sys.stderr.write(f"tracegen: domain error: {exc}\n")
        return 2
    except BrokenPipeError:
        return 0
    return 0


if __name__ == "__main__":
    sys.exit(main())
