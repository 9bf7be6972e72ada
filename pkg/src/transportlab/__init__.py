"""transportlab: exact transportation distances with convergence and CLT diagnostics."""

__version__ = "0.1.0"

from .measures import (
    DiscreteMeasure,
    Distribution1D,
    MetricSpaceFinite,
    QuantileFunction,
    cdf,
    kolmogorov_distance,
    load_measure,
    moment_integral,
    quantile,
    validate_metric,
)
from .costs import (
    CostFunction,
    check_doubling,
    check_reverse_split,
    check_split_inequality,
    make_cost,
    parse_cost_spec,
)
from .ot_exact import (
    MonotoneCoupling1D,
    distance_to_gaussian,
    gaussian_quantile,
    monotone_coupling,
    transport_cost_convex,
    wasserstein_p,
)
from .ot_lp import (
    Coupling,
    SolveResult,
    build_cost_matrix,
    phi_tv_bound,
    solve_kantorovich,
    total_variation,
    verify_coupling,
)
