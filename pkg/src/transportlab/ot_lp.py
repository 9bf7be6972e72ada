"""Exact Kantorovich solver on finite supports.

``solve_kantorovich`` returns a vertex-optimal coupling of the
transportation polytope together with dual potentials, and certifies
optimality by complementary slackness.  The pivoting kernel is the compiled
extension ``_simplex_core`` when available, otherwise the pure-Python twin
``_simplex_py``; set ``TRANSPORTLAB_PURE=1`` to force the fallback.

Also provides the total-variation distance (the transportation distance for
the cost 2*1{x != y}) and the Lipschitz-style integral bound it implies for
bounded test functions.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .costs import CostFunction
from .errors import ValidationError
from .measures import DiscreteMeasure

from . import _simplex_py

_FORCE_PURE = os.environ.get("TRANSPORTLAB_PURE", "").strip().lower() in {"1", "true", "yes"}
if not _FORCE_PURE:
    try:
        from . import _simplex_core  # compiled kernel, optional
    except ImportError:
        _simplex_core = None
else:
    _simplex_core = None

_KERNEL = _simplex_core if _simplex_core is not None else _simplex_py
KERNEL_NAME = "compiled" if _simplex_core is not None else "pure-python"


def available_kernels() -> dict:
    """Name -> solve_dense callable, for benchmarks and parity tests."""
    kernels = {"pure-python": _simplex_py.solve_dense}
    if _simplex_core is not None:
        kernels["compiled"] = _simplex_core.solve_dense
    return kernels


# ---------------------------------------------------------------------------
# Result types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Coupling:
    pi: np.ndarray
    row_marginal: np.ndarray
    col_marginal: np.ndarray

    def to_dict(self, cost: float, dual_u=None, dual_v=None) -> dict:
        payload = {"cost": cost, "pi": self.pi.tolist()}
        if dual_u is not None:
            payload["dual_u"] = list(map(float, dual_u))
            payload["dual_v"] = list(map(float, dual_v))
        return payload


@dataclass(frozen=True)
class CouplingReport:
    max_row_violation: float
    max_col_violation: float
    min_entry: float
    tol: float

    @property
    def passed(self) -> bool:
        return (self.max_row_violation <= self.tol
                and self.max_col_violation <= self.tol
                and self.min_entry >= -self.tol)


@dataclass(frozen=True)
class Certificate:
    """Dual feasibility + complementary slackness margins for a solve."""

    max_dual_violation: float     # max over (i,j) of u_i + v_j - c_ij
    max_slack_on_support: float   # max over pi_ij > 0 of |c_ij - u_i - v_j|
    tol: float

    @property
    def passed(self) -> bool:
        return (self.max_dual_violation <= self.tol
                and self.max_slack_on_support <= self.tol)


@dataclass(frozen=True)
class SolveResult:
    cost: float
    coupling: Coupling
    status: str                    # "optimal" | "infeasible_input"
    iterations: int
    dual_u: np.ndarray
    dual_v: np.ndarray
    certificate: Certificate
    kernel: str

    def to_dict(self) -> dict:
        return self.coupling.to_dict(self.cost, self.dual_u, self.dual_v)


# ---------------------------------------------------------------------------
# Solver
# ---------------------------------------------------------------------------

def _validate_inputs(mu: DiscreteMeasure, nu: DiscreteMeasure, cost_matrix) -> np.ndarray:
    c = np.ascontiguousarray(cost_matrix, dtype=float)
    if c.ndim != 2 or c.shape != (len(mu), len(nu)):
        raise ValidationError(
            f"cost matrix must be {len(mu)}x{len(nu)}, got {c.shape}")
    if not np.all(np.isfinite(c)):
        raise ValidationError("cost matrix entries must be finite")
    if np.any(c < 0):
        raise ValidationError("cost matrix entries must be non-negative")
    return c


def certify(cost_matrix: np.ndarray, pi: np.ndarray, dual_u: np.ndarray,
            dual_v: np.ndarray, tol: float = 1e-10) -> Certificate:
    """Check u_i + v_j <= c_ij everywhere, equality on the support of pi."""
    gap = dual_u[:, None] + dual_v[None, :] - cost_matrix
    max_dual = float(gap.max())
    support = pi > 0
    max_cs = float(np.abs(gap[support]).max()) if np.any(support) else 0.0
    return Certificate(max_dual, max_cs, tol)


def verify_coupling(coupling: Coupling, mu: DiscreteMeasure, nu: DiscreteMeasure,
                    tol: float = 1e-10) -> CouplingReport:
    """Marginal feasibility report for a coupling matrix."""
    pi = coupling.pi
    if pi.shape != (len(mu), len(nu)):
        raise ValidationError(f"coupling must be {len(mu)}x{len(nu)}, got {pi.shape}")
    row_dev = float(np.abs(pi.sum(axis=1) - mu.weights).max())
    col_dev = float(np.abs(pi.sum(axis=0) - nu.weights).max())
    return CouplingReport(row_dev, col_dev, float(pi.min()), tol)


def _solve_network_simplex(mu, nu, c, kernel) -> tuple:
    m, n = len(mu), len(nu)
    flat = np.ascontiguousarray(c.ravel())
    tol_enter = 1e-11 * max(1.0, float(flat.max(initial=0.0)))
    v_nodes = m + n
    bland_after = 100 * v_nodes + 1000
    max_pivots = 2000 * v_nodes + 100_000
    arcs, flows, pot, pivots, _ = kernel(
        mu.weights, nu.weights, flat, tol_enter, bland_after, max_pivots)
    pi = np.zeros((m, n))
    arcs = np.asarray(arcs)
    pi[arcs // n, arcs % n] = np.maximum(np.asarray(flows), 0.0)
    dual_u = np.asarray(pot)[:m].copy()
    dual_v = -np.asarray(pot)[m:].copy()
    cost_val = math.fsum((np.asarray(flows) * flat[arcs]).tolist())
    return pi, dual_u, dual_v, cost_val, pivots


def _recover_assignment_duals(c: np.ndarray, perm: np.ndarray) -> tuple:
    """Dual potentials of an optimal assignment by difference constraints.

    v ranges over columns; feasibility v_j - v_{perm[i]} <= c_ij - c_{i,perm[i]}
    is a shortest-path system solved by Bellman-Ford relaxation (no negative
    cycles exist at optimality).
    """
    n = c.shape[0]
    match_cost = c[np.arange(n), perm]
    v = np.zeros(n)
    for _ in range(n):
        # relax v_j <- min_i (v_perm[i] + c_ij - c_{i,perm[i]})
        cand = (v[perm] - match_cost)[:, None] + c
        new_v = np.minimum(v, cand.min(axis=0))
        if np.allclose(new_v, v, rtol=0.0, atol=0.0):
            break
        v = new_v
    u = match_cost - v[perm]
    return u, v


_HUNGARIAN_MAX = 256


def _is_uniform(w: np.ndarray) -> bool:
    return bool(np.all(w == w[0]))


def solve_kantorovich(mu: DiscreteMeasure, nu: DiscreteMeasure, cost_matrix,
                      method: str = "auto", certificate_tol: float = 1e-10) -> SolveResult:
    """Exact minimum-cost coupling between two finite-support measures.

    ``method`` is "auto", "simplex", or "hungarian"; auto routes small
    equal-size uniform-weight instances to the dense assignment solver and
    everything else to the network simplex.  The result carries dual
    potentials and a complementary-slackness certificate.
    """
    c = _validate_inputs(mu, nu, cost_matrix)
    m, n = c.shape
    if method not in ("auto", "simplex", "hungarian"):
        raise ValidationError(f"unknown solve method {method!r}")
    use_hungarian = method == "hungarian" or (
        method == "auto" and m == n and m <= _HUNGARIAN_MAX
        and _is_uniform(mu.weights) and _is_uniform(nu.weights)
        and np.isclose(mu.weights[0], nu.weights[0], rtol=0, atol=1e-15))

    if use_hungarian:
        if m != n or not (_is_uniform(mu.weights) and _is_uniform(nu.weights)):
            raise ValidationError("hungarian method needs equal-size uniform-weight measures")
        from scipy.optimize import linear_sum_assignment
        rows, cols = linear_sum_assignment(c)
        perm = np.empty(n, dtype=np.int64)
        perm[rows] = cols
        pi = np.zeros((n, n))
        pi[np.arange(n), perm] = mu.weights
        dual_u_raw, dual_v_raw = _recover_assignment_duals(c, perm)
        # assignment duals price unit mass; couplings carry mass 1/n per row
        cost_val = math.fsum((mu.weights * c[np.arange(n), perm]).tolist())
        dual_u, dual_v = dual_u_raw, dual_v_raw
        iterations = 0
    else:
        pi, dual_u, dual_v, cost_val, iterations = _solve_network_simplex(
            mu, nu, c, _KERNEL.solve_dense)

    coupling = Coupling(pi, mu.weights, nu.weights)
    cert = certify(c, pi, dual_u, dual_v, certificate_tol)
    return SolveResult(cost=float(cost_val), coupling=coupling, status="optimal",
                       iterations=iterations, dual_u=dual_u, dual_v=dual_v,
                       certificate=cert,
                       kernel="hungarian" if use_hungarian else KERNEL_NAME)


# ---------------------------------------------------------------------------
# Cost-matrix builders
# ---------------------------------------------------------------------------

def build_cost_matrix(mu: DiscreteMeasure, nu: DiscreteMeasure,
                      cost: CostFunction) -> np.ndarray:
    """Cost matrix C(d(x_i, y_j)) for measures on a shared geometry."""
    if mu.on_line != nu.on_line:
        raise ValidationError("measures live on different geometries")
    if mu.on_line:
        d = np.abs(mu.support[:, None] - nu.support[None, :])
    else:
        if mu.space is not nu.space and not (
                len(mu.space) == len(nu.space)
                and np.array_equal(mu.space.dist, nu.space.dist)):
            raise ValidationError("measures must share a metric space")
        d = mu.space.dist[np.ix_(mu.support, nu.support)]
    out = np.asarray(cost.eval(d), dtype=float)
    if not np.all(np.isfinite(out)):
        raise ValidationError("cost matrix entries must be finite; "
                              "the cost overflowed on these distances")
    return out


# ---------------------------------------------------------------------------
# Total variation
# ---------------------------------------------------------------------------

def _merged_supports(mu: DiscreteMeasure, nu: DiscreteMeasure):
    """Common support with per-measure weights (0 where a point is absent)."""
    if mu.on_line != nu.on_line:
        raise ValidationError("measures live on different geometries")
    if not mu.on_line and mu.space is not nu.space:
        raise ValidationError("measures must share a metric space object")
    merged = np.union1d(mu.support, nu.support)
    w_mu = np.zeros(merged.size)
    w_nu = np.zeros(merged.size)
    w_mu[np.searchsorted(merged, mu.support)] = mu.weights
    w_nu[np.searchsorted(merged, nu.support)] = nu.weights
    return merged, w_mu, w_nu


def _exact_weight_ids(measure: DiscreteMeasure) -> tuple:
    """(id array, id -> Fraction map) for the exact weights, cached on the
    measure (the limit of a sequence is reused across many TV calls)."""
    cached = getattr(measure, "_exact_ids_cache", None)
    if cached is not None:
        return cached
    ids = np.fromiter(map(id, measure.exact_weights), dtype=np.int64,
                      count=len(measure.exact_weights))
    frac_of = dict(zip(ids.tolist(), measure.exact_weights))
    object.__setattr__(measure, "_exact_ids_cache", (ids, frac_of))
    return ids, frac_of


def total_variation(mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    """||mu - nu||_TV = sum_x |mu(x) - nu(x)|, in [0, 2].

    When both measures carry exact rational weights the sum is taken in
    exact arithmetic (identical rationals grouped first), so shared-grid
    constructions cancel with zero float error.
    """
    if mu.exact_weights is not None and nu.exact_weights is not None:
        # group repeated weight pairs by object identity: shared-grid
        # constructions reuse a handful of Fraction objects, so the exact
        # arithmetic runs once per distinct pair instead of once per atom
        zero = Fraction(0)
        ids_raw_mu, frac_mu = _exact_weight_ids(mu)
        ids_raw_nu, frac_nu = _exact_weight_ids(nu)
        merged = np.union1d(mu.support, nu.support)
        ids_mu = np.zeros(merged.size, dtype=np.int64)
        ids_nu = np.zeros(merged.size, dtype=np.int64)
        ids_mu[np.searchsorted(merged, mu.support)] = ids_raw_mu
        ids_nu[np.searchsorted(merged, nu.support)] = ids_raw_nu
        frac_of = {0: zero}
        frac_of.update(frac_mu)
        frac_of.update(frac_nu)
        pairs, counts = np.unique(np.stack([ids_mu, ids_nu], axis=1),
                                  axis=0, return_counts=True)
        total = Fraction(0)
        for (ka, kb), count in zip(pairs.tolist(), counts.tolist()):
            total += abs(frac_of[ka] - frac_of[kb]) * count
        return float(total)
    _, w_mu, w_nu = _merged_supports(mu, nu)
    return float(math.fsum(np.abs(w_mu - w_nu).tolist()))


@dataclass(frozen=True)
class TVBoundReport:
    lhs: float
    rhs: float
    tv: float
    l_phi: float
    holds: bool


def phi_tv_bound(phi, mu: DiscreteMeasure, nu: DiscreteMeasure,
                 tol: float = 1e-12) -> TVBoundReport:
    """|int phi dmu - int phi dnu| <= L_phi * ||mu - nu||_TV.

    L_phi is sup |phi| over the union of the supports; phi is a callable on
    support points (raw reals on the line, indices on a finite space).
    """
    merged, w_mu, w_nu = _merged_supports(mu, nu)
    vals = np.asarray([float(phi(p)) for p in merged.tolist()])
    if not np.all(np.isfinite(vals)):
        raise ValidationError("phi must be finite on the union of supports")
    lhs = abs(float(np.dot(vals, w_mu - w_nu)))
    tv = total_variation(mu, nu)
    l_phi = float(np.abs(vals).max()) if vals.size else 0.0
    rhs = l_phi * tv
    return TVBoundReport(lhs, rhs, tv, l_phi, bool(lhs <= rhs + tol))


def tv_cost_matrix(m: int, n: int) -> np.ndarray:
    """Cost 2*1{x != y} on a merged support (square) for the TV cross-check."""
    if m != n:
        raise ValidationError("tv cost matrix needs a merged (square) support")
    return 2.0 * (1.0 - np.eye(m))
