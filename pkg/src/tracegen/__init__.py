"""Uniform random generation of traces in partially commutative monoids."""
from .analysis import (
    MobiusEstimate,
    OrderingReport,
    RateReport,
    estimate_mobius,
    find_peo,
    is_perfect_elimination,
    is_rejection_free,
    letter_density,
    lex_bfs,
    rate_bound,
)
from .errors import DomainError, InputError, TraceGenError
from .laws import (
    ExactTable,
    TraceLaw,
    b_weight,
    conditional_weight,
    exact_distribution,
    geometric_param,
    k_law_check,
    total_variation,
)
from .mobius import CriticalRoot, MobiusPolynomial, MobiusTable, critical_root, mobius_poly, series_expand
from .monoid import (
    DependenceGraph,
    PyramidalFactorization,
    Trace,
    cf_normal_form,
    complete_graph,
    cycle_graph,
    format_cf,
    independent_graph,
    is_connected,
    left_divides,
    max_letters,
    path_graph,
    pyramidal_decompose,
)
from .rng import RandomSource, sample_geometric
from .samplers import (
    CRITICAL,
    FiniteSampler,
    PrefixStream,
    RejectionSampler,
    RejectionStats,
    SamplerConfig,
    StreamRecord,
    sample_finite,
    sample_finite_rejection,
    stream_uniform,
    stream_uniform_rejection,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
