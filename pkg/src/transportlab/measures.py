"""Probability measures on the real line and on finite metric spaces.

Two concrete representations are used everywhere:

* :class:`DiscreteMeasure` -- finitely many support points with positive
  weights summing to one, either raw reals on the line or indices into a
  :class:`MetricSpaceFinite`.  This is the input format of the exact LP
  solver.
* :class:`Distribution1D` -- a measure on the line seen through its CDF and
  quantile function: a list of atoms, an empirical sample, or the standard
  Gaussian.

Measures are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from scipy import integrate as _integrate

from ._normal import norm_cdf, norm_quantile
from .errors import EvaluationError, ValidationError

WEIGHT_TOL = 1e-12
OVERFLOW_GUARD = 1e300


# ---------------------------------------------------------------------------
# Finite metric spaces
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MetricSpaceFinite:
    """A finite metric space: opaque point labels plus a distance matrix."""

    points: tuple
    dist: np.ndarray

    def __init__(self, points: Sequence, dist) -> None:
        object.__setattr__(self, "points", tuple(points))
        d = np.asarray(dist, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ValidationError("distance matrix must be square")
        if d.shape[0] != len(self.points):
            raise ValidationError(
                f"distance matrix is {d.shape[0]}x{d.shape[1]} "
                f"but there are {len(self.points)} points")
        d = d.copy()
        d.setflags(write=False)
        object.__setattr__(self, "dist", d)

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class MetricViolation:
    axiom: str          # "identity" | "symmetry" | "positivity" | "triangle"
    indices: tuple
    detail: str


@dataclass(frozen=True)
class MetricValidationReport:
    violations: tuple

    @property
    def valid(self) -> bool:
        return not self.violations


def validate_metric(space: MetricSpaceFinite, tol: float = 1e-12) -> MetricValidationReport:
    """Check the metric axioms; the report lists every violation found."""
    d = space.dist
    n = d.shape[0]
    out = []
    for i in range(n):
        if abs(d[i, i]) > tol:
            out.append(MetricViolation("identity", (i,), f"d({i},{i}) = {d[i, i]!r} != 0"))
    for i in range(n):
        for j in range(i + 1, n):
            if abs(d[i, j] - d[j, i]) > tol:
                out.append(MetricViolation("symmetry", (i, j),
                                           f"d({i},{j}) = {d[i, j]!r} != d({j},{i}) = {d[j, i]!r}"))
            if d[i, j] <= tol:
                out.append(MetricViolation("positivity", (i, j),
                                           f"d({i},{j}) = {d[i, j]!r} is not positive"))
    # triangle: d[i,k] <= min_j (d[i,j] + d[j,k]) + tol, via min-plus product
    if n:
        through = (d[:, :, None] + d[None, :, :]).min(axis=1)
        bad = np.argwhere(d > through + tol)
        for i, k in bad:
            j = int(np.argmin(d[i, :] + d[:, k]))
            out.append(MetricViolation("triangle", (int(i), j, int(k)),
                                       f"d({i},{k}) = {d[i, k]!r} > d({i},{j}) + d({j},{k})"))
    return MetricValidationReport(tuple(out))


# ---------------------------------------------------------------------------
# Weight handling
# ---------------------------------------------------------------------------

def _normalized_weights(weights) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ValidationError("weights must be a non-empty 1-D sequence")
    if np.any(w <= 0.0):
        raise ValidationError("all weights must be strictly positive")
    total = math.fsum(w.tolist())
    if abs(total - 1.0) > WEIGHT_TOL:
        raise ValidationError(f"weights sum to {total!r}, outside tolerance {WEIGHT_TOL}")
    if total != 1.0:
        w = w / total
    return w


def _validate_exact_weights(exact, w: np.ndarray):
    exact = tuple(exact)
    if len(exact) != w.size:
        raise ValidationError("exact_weights length does not match weights")
    # group identical Fraction objects so measures built from a handful of
    # distinct rationals (the common case) validate in O(#distinct)
    from collections import Counter
    ids = list(map(id, exact))
    counts = Counter(ids)
    by_id = dict(zip(ids, exact))
    total = Fraction(0)
    for key, fr in by_id.items():
        if not isinstance(fr, Fraction) or fr <= 0:
            raise ValidationError("exact_weights must be positive Fractions")
        total += fr * counts[key]
    if total != 1:
        raise ValidationError(f"exact_weights sum to {total}, not 1")
    return exact


# ---------------------------------------------------------------------------
# DiscreteMeasure
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiscreteMeasure:
    """Finitely supported probability measure.

    ``support`` holds raw reals when ``space`` is None, otherwise integer
    indices into ``space.points``.  ``exact_weights``, when provided, carries
    the rational weights the floats were rounded from; operations that can
    exploit exact cancellation (total variation) use them.
    """

    support: np.ndarray
    weights: np.ndarray
    space: Optional[MetricSpaceFinite] = None
    exact_weights: Optional[tuple] = None

    def __init__(self, support, weights, space=None, exact_weights=None) -> None:
        w = _normalized_weights(weights)
        if space is None:
            s = np.asarray(support, dtype=float)
            if not np.all(np.isfinite(s)):
                raise ValidationError("support points must be finite reals")
        else:
            s = np.asarray(support, dtype=np.intp)
            if s.size and (s.min() < 0 or s.max() >= len(space)):
                raise ValidationError("support indices out of range for the space")
        if s.ndim != 1 or s.size != w.size:
            raise ValidationError("support and weights must be 1-D of equal length")
        if s.size > 1:
            diffs = np.diff(s)
            if not (np.all(diffs > 0) or np.all(diffs < 0)):
                if np.unique(s).size != s.size:
                    raise ValidationError("support entries must be distinct")
        if exact_weights is not None:
            exact_weights = _validate_exact_weights(exact_weights, w)
        s.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "support", s)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "exact_weights", exact_weights)

    def __len__(self) -> int:
        return self.support.size

    @property
    def on_line(self) -> bool:
        return self.space is None

    def to_distribution(self) -> "Distribution1D":
        if not self.on_line:
            raise ValidationError("only line-supported measures convert to Distribution1D")
        order = np.argsort(self.support, kind="stable")
        return Distribution1D.from_atoms(self.support[order], self.weights[order])


# ---------------------------------------------------------------------------
# Distribution1D
# ---------------------------------------------------------------------------

ATOMS = "atoms"
EMPIRICAL = "empirical"
GAUSSIAN = "standard_gaussian"


@dataclass(frozen=True)
class Distribution1D:
    """A 1-D distribution exposed through its CDF/quantile machinery."""

    kind: str
    values: Optional[np.ndarray] = None
    weights: Optional[np.ndarray] = None
    base_point: float = 0.0
    _cum: Optional[np.ndarray] = field(default=None, repr=False)

    @staticmethod
    def from_atoms(values, weights, base_point: float = 0.0) -> "Distribution1D":
        v = np.asarray(values, dtype=float)
        w = _normalized_weights(weights)
        if v.ndim != 1 or v.size != w.size:
            raise ValidationError("values and weights must be 1-D of equal length")
        if not np.all(np.isfinite(v)):
            raise ValidationError("atom values must be finite")
        if v.size > 1 and not np.all(np.diff(v) > 0):
            raise ValidationError("atom values must be strictly increasing")
        cum = np.cumsum(w)
        cum[-1] = 1.0
        for a in (v, w, cum):
            a.setflags(write=False)
        return Distribution1D(ATOMS, v, w, base_point, cum)

    @staticmethod
    def from_samples(samples, base_point: float = 0.0) -> "Distribution1D":
        s = np.sort(np.asarray(samples, dtype=float).ravel())
        if s.size == 0:
            raise ValidationError("empirical distribution needs at least one sample")
        if not np.all(np.isfinite(s)):
            raise ValidationError("samples must be finite")
        w = np.full(s.size, 1.0 / s.size)
        cum = np.arange(1, s.size + 1, dtype=float) / s.size
        cum[-1] = 1.0
        for a in (s, w, cum):
            a.setflags(write=False)
        return Distribution1D(EMPIRICAL, s, w, base_point, cum)

    @staticmethod
    def standard_gaussian() -> "Distribution1D":
        return Distribution1D(GAUSSIAN)

    @property
    def is_gaussian(self) -> bool:
        return self.kind == GAUSSIAN

    @property
    def cum_weights(self) -> np.ndarray:
        return self._cum

    def to_measure(self) -> DiscreteMeasure:
        if self.is_gaussian:
            raise ValidationError("the Gaussian has no finite-support representation")
        if self.kind == EMPIRICAL:
            vals, counts = np.unique(self.values, return_counts=True)
            return DiscreteMeasure(vals, counts / self.values.size)
        return DiscreteMeasure(self.values, self.weights)


def _step_cdf(values: np.ndarray, cum: np.ndarray, xs: np.ndarray,
              left_limit: bool = False) -> np.ndarray:
    side = "left" if left_limit else "right"
    idx = np.searchsorted(values, xs, side=side)
    padded = np.concatenate(([0.0], cum))
    return padded[idx]


def cdf(dist: Distribution1D, x: float) -> float:
    """Right-continuous CDF value F(x)."""
    if dist.is_gaussian:
        return norm_cdf(x)
    return float(_step_cdf(dist.values, dist.cum_weights, np.asarray([x], dtype=float))[0])


INF_CONVENTION = "inf"
SUP_CONVENTION = "paper_sup"


def quantile(dist: Distribution1D, t: float, convention: str = INF_CONVENTION) -> float:
    """Quantile of F at level t in (0, 1).

    ``inf`` returns inf{x : F(x) >= t}; ``paper_sup`` returns
    sup{x : F(x) <= t}.  The two agree except when t is a jump level of F.
    """
    if not 0.0 < t < 1.0:
        raise ValidationError(f"quantile level must lie in (0, 1), got {t!r}")
    if convention not in (INF_CONVENTION, SUP_CONVENTION):
        raise ValidationError(f"unknown quantile convention {convention!r}")
    if dist.is_gaussian:
        return norm_quantile(t)
    cum = dist.cum_weights
    side = "left" if convention == INF_CONVENTION else "right"
    idx = int(np.searchsorted(cum, t, side=side))
    idx = min(idx, dist.values.size - 1)
    return float(dist.values[idx])


@dataclass(frozen=True)
class QuantileFunction:
    """Piecewise-constant quantile map on (0, 1), or the Gaussian analytic one.

    ``levels`` has K+1 entries starting at 0 and ending at 1; ``values[i]`` is
    the quantile on the open interval (levels[i], levels[i+1]).
    """

    levels: Optional[np.ndarray]
    values: Optional[np.ndarray]
    analytic_gaussian: bool = False

    @staticmethod
    def from_distribution(dist: Distribution1D) -> "QuantileFunction":
        if dist.is_gaussian:
            return QuantileFunction(None, None, True)
        cum = dist.cum_weights
        vals = dist.values
        # drop zero-length segments (possible after float rounding of tiny
        # weights) so levels stay strictly increasing
        keep = np.concatenate(([True], np.diff(cum) > 0))
        cum = cum[keep]
        vals = vals[keep]
        levels = np.concatenate(([0.0], cum))
        levels[-1] = 1.0
        if vals.size > 1 and np.any(np.diff(vals) < 0):
            raise ValidationError("quantile values must be non-decreasing")
        return QuantileFunction(levels, np.asarray(vals, dtype=float))

    def __call__(self, t: float, convention: str = INF_CONVENTION) -> float:
        if self.analytic_gaussian:
            return norm_quantile(t)
        if not 0.0 < t < 1.0:
            raise ValidationError(f"quantile level must lie in (0, 1), got {t!r}")
        side = "left" if convention == INF_CONVENTION else "right"
        idx = int(np.searchsorted(self.levels[1:], t, side=side))
        idx = min(idx, self.values.size - 1)
        return float(self.values[idx])


# ---------------------------------------------------------------------------
# Moment integrals
# ---------------------------------------------------------------------------

def _finite_moment_sum(points: np.ndarray, weights: np.ndarray, cost,
                       a: float, scale: float) -> float:
    dvals = scale * np.abs(points - a)
    cvals = np.asarray(cost(dvals), dtype=float)
    if np.any(np.isnan(cvals)):
        bad = points[np.isnan(cvals)][0]
        raise EvaluationError(f"cost evaluated to NaN at point {bad!r}", point=float(bad))
    if np.any(np.isinf(cvals)):
        return math.inf
    total = float(np.dot(weights, cvals))
    return math.inf if total > OVERFLOW_GUARD else total


def moment_integral(measure, cost, a, scale: float = 1.0) -> float:
    """Integral of C(scale * d(x, a)) against the measure.

    Exact finite sum on discrete supports; adaptive quadrature against the
    standard Gaussian (relative error kept below 1e-8).  Returns math.inf as
    the divergence sentinel when the value exceeds the overflow guard.
    """
    if scale < 0:
        raise ValidationError("scale must be non-negative")
    if isinstance(measure, DiscreteMeasure):
        if measure.on_line:
            return _finite_moment_sum(measure.support, measure.weights, cost.eval, float(a), scale)
        a_idx = int(a)
        d = measure.space.dist[measure.support, a_idx]
        cvals = np.asarray(cost.eval(scale * d), dtype=float)
        if np.any(np.isnan(cvals)):
            bad = measure.support[np.isnan(cvals)][0]
            raise EvaluationError(f"cost evaluated to NaN at point index {bad}", point=int(bad))
        if np.any(np.isinf(cvals)):
            return math.inf
        total = float(np.dot(measure.weights, cvals))
        return math.inf if total > OVERFLOW_GUARD else total
    dist = measure
    if not dist.is_gaussian:
        return _finite_moment_sum(dist.values, dist.weights, cost.eval, float(a), scale)

    a = float(a)

    class _Diverged(ArithmeticError):
        pass

    def integrand(u):
        # density first: where phi underflows the cost is never evaluated,
        # and a cost overflow at positive density marks divergence
        pdf = math.exp(-0.5 * u * u) / math.sqrt(2 * math.pi)
        if pdf == 0.0:
            return 0.0
        c = float(cost.eval(scale * abs(u - a)))
        if math.isinf(c):
            raise _Diverged
        return c * pdf

    import warnings
    try:
        with np.errstate(over="ignore"), warnings.catch_warnings():
            warnings.simplefilter("ignore", _integrate.IntegrationWarning)
            left, err_l = _integrate.quad(integrand, -np.inf, a,
                                          epsabs=1e-12, epsrel=1e-10, limit=200)
            right, err_r = _integrate.quad(integrand, a, np.inf,
                                           epsabs=1e-12, epsrel=1e-10, limit=200)
    except _Diverged:
        return math.inf
    total = left + right
    if math.isnan(total):
        raise EvaluationError("cost produced NaN under the Gaussian moment integral")
    if total > OVERFLOW_GUARD or math.isinf(total):
        return math.inf
    if total > 0 and (err_l + err_r) > 1e-8 * total:
        if total > 1e10:
            return math.inf  # runaway integral: quadrature cannot stabilize it
        raise EvaluationError(
            f"Gaussian moment quadrature error {err_l + err_r!r} exceeds 1e-8 relative")
    return total


# ---------------------------------------------------------------------------
# Kolmogorov distance
# ---------------------------------------------------------------------------

def kolmogorov_distance(f: Distribution1D, g: Distribution1D) -> float:
    """sup_x |F(x) - G(x)|, exact for the supported kinds.

    Both CDFs are piecewise constant between their atoms (or analytic for the
    Gaussian), so the supremum is attained at an atom or its left limit.
    """
    if f.is_gaussian and g.is_gaussian:
        return 0.0
    if f.is_gaussian:
        f, g = g, f
    if g.is_gaussian:
        xs = f.values
        fr = _step_cdf(f.values, f.cum_weights, xs)
        fl = _step_cdf(f.values, f.cum_weights, xs, left_limit=True)
        phi = norm_cdf(xs)
        return float(np.max(np.maximum(np.abs(fr - phi), np.abs(fl - phi))))
    xs = np.union1d(f.values, g.values)
    fr = _step_cdf(f.values, f.cum_weights, xs)
    gr = _step_cdf(g.values, g.cum_weights, xs)
    fl = _step_cdf(f.values, f.cum_weights, xs, left_limit=True)
    gl = _step_cdf(g.values, g.cum_weights, xs, left_limit=True)
    return float(max(np.max(np.abs(fr - gr)), np.max(np.abs(fl - gl))))


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------

def measure_to_dict(measure) -> dict:
    """JSON-ready representation; floats survive a round-trip bit-exactly."""
    if isinstance(measure, DiscreteMeasure):
        if measure.on_line:
            return {"support": measure.support.tolist(),
                    "weights": measure.weights.tolist()}
        return {
            "space": {
                "points": list(measure.space.points),
                "dist": measure.space.dist.tolist(),
            },
            "support": measure.support.tolist(),
            "weights": measure.weights.tolist(),
        }
    if measure.is_gaussian:
        return {"gaussian": True}
    if measure.kind == EMPIRICAL:
        return {"samples": measure.values.tolist()}
    return {"atoms": {"values": measure.values.tolist(),
                      "weights": measure.weights.tolist()}}


def measure_from_dict(payload: dict):
    if "space" in payload:
        sp = payload["space"]
        space = MetricSpaceFinite(sp["points"], sp["dist"])
        return DiscreteMeasure(payload["support"], payload["weights"], space=space)
    if "gaussian" in payload and payload["gaussian"]:
        return Distribution1D.standard_gaussian()
    if "atoms" in payload:
        return Distribution1D.from_atoms(payload["atoms"]["values"], payload["atoms"]["weights"])
    if "samples" in payload:
        return Distribution1D.from_samples(payload["samples"])
    if "support" in payload:
        return DiscreteMeasure(payload["support"], payload["weights"])
    raise ValidationError("unrecognized measure payload")


def load_measure(path: str):
    """Load a measure from JSON (any supported schema) or CSV raw samples."""
    if not os.path.exists(path):
        raise ValidationError(f"measure file not found: {path}")
    text = open(path, "r", encoding="utf-8").read()
    if path.endswith(".json"):
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"bad JSON in {path}: {exc}") from exc
        return measure_from_dict(payload)
    # CSV / plain text: one value per line
    samples = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            samples.append(float(line.split(",")[0]))
        except ValueError as exc:
            raise ValidationError(f"{path}:{lineno}: not a number: {line!r}") from exc
    if not samples:
        raise ValidationError(f"no samples found in {path}")
    return Distribution1D.from_samples(samples)
