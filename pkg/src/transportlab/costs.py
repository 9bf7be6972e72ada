"""Cost functions C on [0, inf) with machine-checkable structural properties.

The catalog covers power costs y^p (p >= 1), the exponential cost e^y - 1,
the total-variation indicator 2*1{y > 0}, and tabulated custom costs.  Each
carries flags (non-decreasing, C(0) = 0, convex, continuous), an optional
doubling constant lambda with C(2y) <= lambda * C(y), and an optional
polynomial growth order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import PreconditionError, ValidationError


@dataclass(frozen=True)
class CostFunction:
    name: str
    eval: Callable[[np.ndarray], np.ndarray]
    nondecreasing: bool = True
    zero_at_zero: bool = True
    convex: bool = False
    continuous: bool = True
    doubling_lambda: Optional[float] = None
    growth_order: Optional[float] = None

    def __call__(self, y):
        return self.eval(y)

    def require_doubling(self) -> float:
        if self.doubling_lambda is None:
            raise PreconditionError(f"cost {self.name!r} has no doubling constant")
        return self.doubling_lambda


def power_cost(p: float) -> CostFunction:
    if p < 1:
        raise ValidationError(f"power cost needs p >= 1, got {p!r}")
    p = float(p)

    def _eval(y):
        return np.power(np.asarray(y, dtype=float), p) if not np.isscalar(y) else float(y) ** p

    return CostFunction(name=f"power:{p:g}", eval=_eval, convex=True,
                        doubling_lambda=2.0 ** p, growth_order=p)


def exp_minus_one_cost() -> CostFunction:
    def _eval(y):
        with np.errstate(over="ignore"):
            return np.expm1(y)

    # e^y - 1 grows too fast for any doubling constant:
    # C(2y)/C(y) = e^y + 1 is unbounded.
    return CostFunction(name="exp", eval=_eval, convex=True,
                        doubling_lambda=None, growth_order=None)


def tv_indicator_cost() -> CostFunction:
    def _eval(y):
        if np.isscalar(y):
            return 2.0 if y > 0 else 0.0
        return np.where(np.asarray(y, dtype=float) > 0, 2.0, 0.0)

    # Lower semicontinuous jump at 0: admissible for the LP solver, rejected
    # by the convergence diagnostics that need continuity.
    return CostFunction(name="tv", eval=_eval, convex=False, continuous=False,
                        doubling_lambda=1.0, growth_order=0.0)


def table_cost(ys: Sequence[float], cs: Sequence[float], name: str = "table") -> CostFunction:
    y = np.asarray(ys, dtype=float)
    c = np.asarray(cs, dtype=float)
    if y.ndim != 1 or y.size != c.size or y.size < 2:
        raise ValidationError("table cost needs two equal-length columns with >= 2 rows")
    if y[0] != 0.0 or c[0] != 0.0:
        raise ValidationError("table cost must start at (0, 0)")
    if np.any(np.diff(y) <= 0):
        raise ValidationError("table cost arguments must be strictly increasing")
    if np.any(np.diff(c) < 0):
        raise ValidationError("table cost values must be non-decreasing")
    convex = bool(np.all(np.diff(np.diff(c) / np.diff(y)) >= -1e-12))

    def _eval(v):
        # linear interpolation, clamped to the final value beyond the table
        return np.interp(np.asarray(v, dtype=float), y, c) if not np.isscalar(v) \
            else float(np.interp(v, y, c))

    return CostFunction(name=name, eval=_eval, convex=convex)


def make_cost(spec) -> CostFunction:
    """Build a catalog cost from a spec.

    Accepts ("power", p), "exp_minus_one", "tv_indicator", or
    ("custom", ys, cs).  See :func:`parse_cost_spec` for the CLI string form.
    """
    if isinstance(spec, tuple):
        if spec[0] == "power":
            return power_cost(spec[1])
        if spec[0] == "custom":
            return table_cost(spec[1], spec[2])
        raise ValidationError(f"unknown cost spec {spec!r}")
    if spec == "exp_minus_one":
        return exp_minus_one_cost()
    if spec == "tv_indicator":
        return tv_indicator_cost()
    raise ValidationError(f"unknown cost spec {spec!r}")


def parse_cost_spec(text: str) -> CostFunction:
    """CLI cost strings: "power:2", "exp", "tv", "table:path.csv"."""
    if text.startswith("power:"):
        try:
            p = float(text.split(":", 1)[1])
        except ValueError as exc:
            raise ValidationError(f"bad power cost spec {text!r}") from exc
        return power_cost(p)
    if text == "exp":
        return exp_minus_one_cost()
    if text == "tv":
        return tv_indicator_cost()
    if text.startswith("table:"):
        path = text.split(":", 1)[1]
        ys, cs = [], []
        try:
            with open(path, "r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line or line.startswith("#"):
                        continue
                    parts = line.split(",")
                    ys.append(float(parts[0]))
                    cs.append(float(parts[1]))
        except (OSError, ValueError, IndexError) as exc:
            raise ValidationError(f"bad cost table {path!r}: {exc}") from exc
        return table_cost(ys, cs, name=f"table:{path}")
    raise ValidationError(f"unknown cost spec {text!r}")


# ---------------------------------------------------------------------------
# Structural checks
# ---------------------------------------------------------------------------

def default_doubling_grid() -> np.ndarray:
    return np.geomspace(1e-6, 1e6, 1000)


@dataclass(frozen=True)
class DoublingReport:
    holds: bool
    worst_ratio: float
    witness: float
    lam: float


def check_doubling(cost: CostFunction, lam: float, grid=None) -> DoublingReport:
    """Grid check of C(2y) <= lam * C(y).

    Runs over the points with finite positive C(y); an infinite C(2y) there
    counts as a failure with ratio +inf.
    """
    g = default_doubling_grid() if grid is None else np.asarray(grid, dtype=float)
    if g.size == 0 or np.any(g <= 0):
        raise ValidationError("doubling grid must be non-empty and positive")
    with np.errstate(over="ignore", invalid="ignore"):
        cy = np.asarray(cost.eval(g), dtype=float)
        c2y = np.asarray(cost.eval(2.0 * g), dtype=float)
    mask = np.isfinite(cy) & (cy > 0)
    if not np.any(mask):
        return DoublingReport(True, 0.0, float(g[0]), float(lam))
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        ratio = c2y[mask] / cy[mask]
    worst_idx = int(np.argmax(ratio))
    worst = float(ratio[worst_idx])
    witness = float(g[mask][worst_idx])
    return DoublingReport(bool(worst <= lam), worst, witness, float(lam))


@dataclass(frozen=True)
class SplitViolation:
    triple: tuple
    lhs: float
    rhs: float


@dataclass(frozen=True)
class SplitReport:
    violations: tuple
    checked: int

    @property
    def holds(self) -> bool:
        return not self.violations


def _triple_distances(triple, space):
    x, y, a = triple
    if space is None:
        return abs(x - y), abs(x - a), abs(y - a)
    d = space.dist
    return d[x, y], d[x, a], d[y, a]


def check_split_inequality(cost: CostFunction, triples, space=None,
                           tol: float = 1e-12) -> SplitReport:
    """C(d(x, y)) <= C(2 d(x, a)) + C(2 d(y, a)) on each (x, y, a) triple."""
    if not (cost.nondecreasing and cost.zero_at_zero):
        raise PreconditionError("split inequality check needs a non-decreasing cost with C(0)=0")
    bad = []
    count = 0
    for triple in triples:
        dxy, dxa, dya = _triple_distances(triple, space)
        lhs = float(cost.eval(dxy))
        rhs = float(cost.eval(2.0 * dxa)) + float(cost.eval(2.0 * dya))
        count += 1
        if lhs > rhs + tol:
            bad.append(SplitViolation(tuple(triple), lhs, rhs))
    return SplitReport(tuple(bad), count)


def check_reverse_split(cost: CostFunction, triples, space=None,
                        tol: float = 1e-12) -> SplitReport:
    """C(d(x, a)) <= lam*C(d(x, y)) + lam*C(d(y, a)) for doubling costs."""
    lam = cost.require_doubling()
    bad = []
    count = 0
    for triple in triples:
        dxy, dxa, dya = _triple_distances(triple, space)
        lhs = float(cost.eval(dxa))
        rhs = lam * float(cost.eval(dxy)) + lam * float(cost.eval(dya))
        count += 1
        if lhs > rhs + tol:
            bad.append(SplitViolation(tuple(triple), lhs, rhs))
    return SplitReport(tuple(bad), count)
