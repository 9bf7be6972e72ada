"""Numerical convergence diagnostics for measure sequences.

The forward diagnostic checks that weak convergence together with
convergence of the doubled-argument cost moments forces the transportation
distance to zero; the converse diagnostic checks that transportation
convergence forces weak convergence.  Verdicts are threshold-based and
recomputed from the per-n records, and a VIOLATION flag is raised only when
the recorded values contradict the implication -- on correct inputs that
indicates a bug, not mathematics.

Also builds the two-part mixture family ((n-1)/n uniform on (0,1) plus a
1/n atom escaping to x_n), whose total variation distance to the uniform
limit is exactly 2/n while its cost moments may diverge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .costs import CostFunction
from .errors import PreconditionError, ValidationError
from .measures import (DiscreteMeasure, Distribution1D, kolmogorov_distance,
                       moment_integral)
from .ot_exact import transport_cost_convex
from .ot_lp import build_cost_matrix, solve_kantorovich, total_variation

MeasureLike = Union[DiscreteMeasure, Distribution1D]


# ---------------------------------------------------------------------------
# Sequences, thresholds, reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MeasureSequence:
    generator: Callable[[int], MeasureLike]
    limit: MeasureLike
    n_values: tuple

    def __init__(self, generator, limit, n_values):
        object.__setattr__(self, "generator", generator)
        object.__setattr__(self, "limit", limit)
        object.__setattr__(self, "n_values", tuple(int(n) for n in n_values))
        if not self.n_values:
            raise ValidationError("n_values must be non-empty")


@dataclass(frozen=True)
class Thresholds:
    weak: float = 1e-2
    moment: float = 1e-2
    tc: float = 1e-2
    monotone_fraction: float = 0.8

    def to_dict(self) -> dict:
        return {"weak": self.weak, "moment": self.moment, "tc": self.tc,
                "monotone_fraction": self.monotone_fraction}


def monotone_majority(values: Sequence[float], fraction: float = 0.8) -> bool:
    """True when at least the given fraction of consecutive steps do not increase."""
    vals = [v for v in values]
    if len(vals) < 2:
        return True
    good = 0
    for a, b in zip(vals, vals[1:]):
        if b <= a + 1e-15 * max(1.0, abs(a)):
            good += 1
    return good >= fraction * (len(vals) - 1)


def _trend_to_zero(values, threshold, fraction) -> bool:
    if any(math.isinf(v) or math.isnan(v) for v in values):
        return False
    return values[-1] < threshold and monotone_majority(values, fraction)


def compute_forward_verdicts(records, moment_limit, thresholds: Thresholds) -> dict:
    weaks = [r["weak"] for r in records]
    moments = [r["moment"] for r in records]
    tcs = [r["tc"] for r in records]
    cond_a = _trend_to_zero(weaks, thresholds.weak, thresholds.monotone_fraction)
    cond_b = (all(math.isfinite(v) for v in moments) and math.isfinite(moment_limit)
              and abs(moments[-1] - moment_limit) < thresholds.moment)
    tc_zero = _trend_to_zero(tcs, thresholds.tc, thresholds.monotone_fraction)
    return {
        "cond_a": cond_a,
        "cond_b": cond_b,
        "tc_to_zero": tc_zero,
        "violation": bool(cond_a and cond_b and not tc_zero),
    }


@dataclass(frozen=True)
class DiagnosticReport:
    per_n: tuple
    moment_limit: float
    thresholds: Thresholds
    direction: str                      # "forward" | "converse"
    weak_proxy_kind: str
    grid_step: Optional[float] = None

    @property
    def verdicts(self) -> dict:
        if self.direction == "forward":
            return compute_forward_verdicts(self.per_n, self.moment_limit, self.thresholds)
        weaks = [r["weak"] for r in self.per_n]
        tcs = [r["tc"] for r in self.per_n]
        tc_zero = _trend_to_zero(tcs, self.thresholds.tc, self.thresholds.monotone_fraction)
        weak_zero = _trend_to_zero(weaks, self.thresholds.weak, self.thresholds.monotone_fraction)
        return {
            "tc_to_zero": tc_zero,
            "weak_to_zero": weak_zero,
            "violation": bool(tc_zero and not weak_zero),
        }

    def to_dict(self) -> dict:
        return {
            "per_n": [dict(r) for r in self.per_n],
            "verdicts": self.verdicts,
            "thresholds": self.thresholds.to_dict(),
            "moment_limit": self.moment_limit,
            "direction": self.direction,
            "weak_proxy_kind": self.weak_proxy_kind,
            "grid_step": self.grid_step,
        }


# ---------------------------------------------------------------------------
# Weak-convergence proxy
# ---------------------------------------------------------------------------

def _as_distribution(measure: MeasureLike) -> Distribution1D:
    if isinstance(measure, DiscreteMeasure):
        return measure.to_distribution()
    return measure


def _continuity_grid(limit: Distribution1D) -> np.ndarray:
    """Fixed CDF evaluation points avoiding the limit's jump set.

    The Kolmogorov supremum stays at 1 for sequences like delta_{1/n} vs
    delta_0 even though weak convergence holds, because the sup chases the
    shrinking gap next to the limit atom.  Evaluating both CDFs on a fixed
    grid of continuity points of the limit gives a proxy that does converge
    exactly when the CDFs converge where they should.
    """
    v = limit.values
    gap = float(np.min(np.diff(v))) if v.size > 1 else 1.0
    pts = [v[0] - 1.0, v[-1] + 1.0]
    pts.extend((v[:-1] + 0.5 * np.diff(v)).tolist())
    off = 0.25 * gap
    pts.extend((v - off).tolist())
    pts.extend((v + off).tolist())
    return np.unique(np.asarray(pts))


def weak_proxy(measure: MeasureLike, limit: MeasureLike) -> tuple:
    """(value, kind): Kolmogorov distance, or its jump-avoiding grid variant
    when the limit has atoms; total variation on finite metric spaces."""
    if isinstance(measure, DiscreteMeasure) and not measure.on_line:
        if not isinstance(limit, DiscreteMeasure) or limit.on_line:
            raise ValidationError("sequence and limit live on different geometries")
        return total_variation(measure, limit), "total_variation"
    f = _as_distribution(measure)
    g = _as_distribution(limit)
    if g.is_gaussian:
        return kolmogorov_distance(f, g), "kolmogorov"
    grid = _continuity_grid(g)
    fv = np.asarray([_cdf_at(f, x) for x in grid])
    gv = np.asarray([_cdf_at(g, x) for x in grid])
    return float(np.max(np.abs(fv - gv))), "continuity_grid"


def _cdf_at(dist: Distribution1D, x: float) -> float:
    from .measures import cdf
    return cdf(dist, x)


# ---------------------------------------------------------------------------
# Transport distance routing
# ---------------------------------------------------------------------------

def _transport_distance(measure: MeasureLike, limit: MeasureLike,
                        cost: CostFunction, method: str) -> float:
    if method not in ("auto", "exact", "lp"):
        raise ValidationError(f"unknown tc method {method!r}")
    on_line = not (isinstance(measure, DiscreteMeasure) and not measure.on_line)
    if method == "auto":
        method = "exact" if (cost.convex and on_line) else "lp"
    if method == "exact":
        return transport_cost_convex(_as_distribution(measure), _as_distribution(limit), cost)
    mu = measure.to_measure() if isinstance(measure, Distribution1D) else measure
    nu = limit.to_measure() if isinstance(limit, Distribution1D) else limit
    c = build_cost_matrix(mu, nu, cost)
    return solve_kantorovich(mu, nu, c).cost


def _require_theorem2_cost(cost: CostFunction):
    if not cost.continuous:
        raise PreconditionError(
            f"convergence diagnostics need a continuous cost, got {cost.name!r}")
    if not (cost.nondecreasing and cost.zero_at_zero):
        raise PreconditionError("convergence diagnostics need a non-decreasing cost with C(0)=0")


# ---------------------------------------------------------------------------
# Forward / converse / doubling-equivalence diagnostics
# ---------------------------------------------------------------------------

def theorem2_forward(seq: MeasureSequence, cost: CostFunction, a: float = 0.0,
                     thresholds: Thresholds = Thresholds(),
                     tc_method: str = "auto",
                     grid_step: Optional[float] = None) -> DiagnosticReport:
    """Forward implication: (weak) + (doubled moment converges) => T_c -> 0."""
    _require_theorem2_cost(cost)
    moment_limit = moment_integral(seq.limit, cost, a, scale=2.0)
    records = []
    kind = "kolmogorov"
    for n in seq.n_values:
        mu_n = seq.generator(n)
        wk, kind = weak_proxy(mu_n, seq.limit)
        mom = moment_integral(mu_n, cost, a, scale=2.0)
        tc = _transport_distance(mu_n, seq.limit, cost, tc_method)
        records.append({"n": n, "weak": wk, "moment": mom, "tc": tc})
    return DiagnosticReport(tuple(records), moment_limit, thresholds,
                            "forward", kind, grid_step)


def theorem2_converse(seq: MeasureSequence, cost: CostFunction,
                      thresholds: Thresholds = Thresholds(),
                      tc_method: str = "auto",
                      grid_step: Optional[float] = None) -> DiagnosticReport:
    """Converse implication: T_c -> 0 => weak convergence."""
    _require_theorem2_cost(cost)
    records = []
    kind = "kolmogorov"
    for n in seq.n_values:
        mu_n = seq.generator(n)
        wk, kind = weak_proxy(mu_n, seq.limit)
        tc = _transport_distance(mu_n, seq.limit, cost, tc_method)
        records.append({"n": n, "weak": wk, "moment": math.nan, "tc": tc})
    return DiagnosticReport(tuple(records), math.nan, thresholds,
                            "converse", kind, grid_step)


@dataclass(frozen=True)
class EquivalenceReport:
    per_n: tuple
    limit_scale1: float
    limit_scale2: float
    thresholds: Thresholds

    @property
    def verdicts(self) -> dict:
        m1 = [r["moment_scale1"] for r in self.per_n]
        m2 = [r["moment_scale2"] for r in self.per_n]
        conv1 = (all(math.isfinite(v) for v in m1) and math.isfinite(self.limit_scale1)
                 and abs(m1[-1] - self.limit_scale1) < self.thresholds.moment)
        conv2 = (all(math.isfinite(v) for v in m2) and math.isfinite(self.limit_scale2)
                 and abs(m2[-1] - self.limit_scale2) < self.thresholds.moment)
        finiteness_agree = all(
            math.isfinite(r["moment_scale1"]) == math.isfinite(r["moment_scale2"])
            for r in self.per_n)
        return {
            "scale1_converges": conv1,
            "scale2_converges": conv2,
            "verdicts_agree": conv1 == conv2,
            "finiteness_equivalent": finiteness_agree,
        }

    def to_dict(self) -> dict:
        return {"per_n": [dict(r) for r in self.per_n],
                "limits": {"scale1": self.limit_scale1, "scale2": self.limit_scale2},
                "verdicts": self.verdicts,
                "thresholds": self.thresholds.to_dict()}


def corollary1_equivalence(seq: MeasureSequence, cost: CostFunction, a: float = 0.0,
                           thresholds: Thresholds = Thresholds()) -> EquivalenceReport:
    """Under a doubling cost, the scale-1 and scale-2 moment sequences
    converge (and are finite) together."""
    cost.require_doubling()
    _require_theorem2_cost(cost)
    lim1 = moment_integral(seq.limit, cost, a, scale=1.0)
    lim2 = moment_integral(seq.limit, cost, a, scale=2.0)
    records = []
    for n in seq.n_values:
        mu_n = seq.generator(n)
        records.append({
            "n": n,
            "moment_scale1": moment_integral(mu_n, cost, a, scale=1.0),
            "moment_scale2": moment_integral(mu_n, cost, a, scale=2.0),
        })
    return EquivalenceReport(tuple(records), lim1, lim2, thresholds)


# ---------------------------------------------------------------------------
# The escaping-atom mixture family
# ---------------------------------------------------------------------------

def _grid_count(grid_step: float) -> int:
    if not 0 < grid_step <= 0.5:
        raise ValidationError("grid_step must lie in (0, 0.5]")
    k = round(1.0 / grid_step)
    if abs(k * grid_step - 1.0) > 1e-9:
        raise ValidationError(f"grid_step {grid_step!r} does not divide 1 evenly")
    return int(k)


def _resolve_xn(n: int, xn_rule) -> float:
    if xn_rule == "pow2":
        return float(2.0 ** n)
    x = float(xn_rule)
    if 0.0 < x < 1.0:
        raise ValidationError(f"the escaping atom must satisfy x_n not in (0,1), got {x!r}")
    return x


def example1_measure(n: int, xn_rule, grid_step: float = 1e-3) -> DiscreteMeasure:
    """mu_n = ((n-1)/n) * Uniform(0,1) + (1/n) * delta_{x_n}, discretized.

    The uniform part becomes k midpoint atoms (2i-1)/(2k) with weight
    (n-1)/(n k) each; weights are built in rational arithmetic and carried
    alongside the floats so shared-grid total variation cancels exactly.
    """
    if n < 2:
        raise ValidationError("n must be at least 2")
    k = _grid_count(grid_step)
    xn = _resolve_xn(n, xn_rule)
    support = np.empty(k + 1)
    support[:k] = (2.0 * np.arange(1, k + 1) - 1.0) / (2.0 * k)
    support[k] = xn
    w_unif = Fraction(n - 1, n * k)
    w_atom = Fraction(1, n)
    exact = [w_unif] * k + [w_atom]
    weights = np.empty(k + 1)
    weights[:k] = float(w_unif)
    weights[k] = float(w_atom)
    return DiscreteMeasure(support, weights, exact_weights=exact)


def example1_limit(grid_step: float = 1e-3) -> DiscreteMeasure:
    """Uniform(0,1) discretized on the same midpoint grid."""
    k = _grid_count(grid_step)
    support = (2.0 * np.arange(1, k + 1) - 1.0) / (2.0 * k)
    w = Fraction(1, k)
    return DiscreteMeasure(support, np.full(k, float(w)), exact_weights=[w] * k)


def example1_sequence(xn_rule, n_values, grid_step: float = 1e-3) -> MeasureSequence:
    limit = example1_limit(grid_step)
    return MeasureSequence(lambda n: example1_measure(n, xn_rule, grid_step),
                           limit, n_values)


def example1_tv(n: int) -> float:
    """Total variation between mu_n and the uniform limit: exactly 2/n."""
    if n < 1:
        raise ValidationError("n must be at least 1")
    return 2.0 / n


DIVERGE_BOUND = 1e6


def _log10_cost(cost: CostFunction, y: float) -> Optional[float]:
    """log10 C(y) evaluated stably for catalog costs, None for black boxes."""
    if cost.name == "exp":
        # log(e^y - 1) = y + log(1 - e^-y)
        return (y + math.log1p(-math.exp(-y))) / math.log(10.0) if y > 0 else None
    if cost.name.startswith("power:"):
        p = float(cost.name.split(":")[1])
        return p * math.log10(y) if y > 0 else None
    c = float(cost.eval(y))
    return math.log10(c) if 0 < c < math.inf else None


@dataclass(frozen=True)
class MomentDivergenceReport:
    per_n: tuple
    verdict: str          # "DIVERGES" | "CONVERGES" | "INCONCLUSIVE"
    diverge_bound: float
    converge_tol: float

    def to_dict(self) -> dict:
        return {"per_n": [dict(r) for r in self.per_n], "verdict": self.verdict,
                "diverge_bound": self.diverge_bound, "converge_tol": self.converge_tol}


def example1_moment_divergence(n_list, cost: CostFunction, xn_rule,
                               grid_step: float = 1e-3,
                               converge_tol: float = 1e-2) -> MomentDivergenceReport:
    """Exact cost moments of the mixture family with a divergence verdict.

    The escaping-atom term C(x_n)/n is additionally tracked in log10 so the
    trend survives float overflow (pow2 with the exponential cost overflows
    by n around 10).
    """
    records = []
    trend = []
    for n in n_list:
        mu_n = example1_measure(n, xn_rule, grid_step)
        mom = moment_integral(mu_n, cost, 0.0, scale=1.0)
        xn = _resolve_xn(int(n), xn_rule)
        log_atom = _log10_cost(cost, xn)
        log_term = None if log_atom is None else log_atom - math.log10(n)
        records.append({"n": int(n), "moment": mom, "log10_atom_term": log_term})
        if math.isfinite(mom):
            trend.append(math.log10(mom) if mom > 0 else -math.inf)
        elif log_term is not None:
            trend.append(log_term)
        else:
            trend.append(math.inf)
    moments = [r["moment"] for r in records]
    tail = max(2, len(trend) // 3)
    growing = all(b >= a for a, b in zip(trend[-tail:], trend[-tail + 1:])) if len(trend) >= 2 else False
    exceeds = trend[-1] > math.log10(DIVERGE_BOUND) or not math.isfinite(moments[-1])
    if exceeds and (growing or not math.isfinite(moments[-1])):
        verdict = "DIVERGES"
    elif (all(math.isfinite(v) for v in moments)
          and max(abs(v - moments[-1]) for v in moments[-tail:]) < converge_tol):
        verdict = "CONVERGES"
    else:
        verdict = "INCONCLUSIVE"
    return MomentDivergenceReport(tuple(records), verdict, DIVERGE_BOUND, converge_tol)


# ---------------------------------------------------------------------------
# Builder families for seeded diagnostics
# ---------------------------------------------------------------------------

def delta_sequence(n_values) -> MeasureSequence:
    """delta_{1/n} converging to delta_0."""
    return MeasureSequence(
        lambda n: DiscreteMeasure([1.0 / n], [1.0]),
        DiscreteMeasure([0.0], [1.0]),
        n_values,
    )


def random_converging_sequence(seed: int, n_values, kind: str = "both") -> MeasureSequence:
    """Seeded atom sequences converging to a random atomic limit.

    ``weights`` perturbs only the weights at rate 1/n, ``shift`` moves the
    atoms by O(1/n), ``both`` does both.  All variants converge weakly with
    converging cost moments.
    """
    if kind not in ("weights", "shift", "both"):
        raise ValidationError(f"unknown sequence kind {kind!r}")
    rng = np.random.default_rng(seed)
    size = int(rng.integers(2, 9))
    values = np.sort(rng.choice(np.arange(-16, 17), size=size, replace=False)) / 8.0
    w_limit = rng.random(size) + 0.25
    w_limit /= w_limit.sum()
    w_rand = rng.random(size) + 0.25
    w_rand /= w_rand.sum()
    # keep the 1/n perturbation small enough that the default thresholds,
    # calibrated to n up to 1024, clear with margin for power costs
    w_start = 0.7 * w_limit + 0.3 * w_rand
    # atoms sit at least 1/8 apart; shifts stay below half a gap even at n=2
    shift = (rng.random(size) - 0.5) * 0.06
    limit = DiscreteMeasure(values, w_limit)

    def gen(n: int) -> DiscreteMeasure:
        w = w_limit if kind == "shift" else w_limit + (w_start - w_limit) / n
        v = values if kind == "weights" else values + shift / n
        return DiscreteMeasure(v, w / w.sum())

    return MeasureSequence(gen, limit, n_values)
