import numpy as np
import pytest

from transportlab import DiscreteMeasure


def rational_weights(rng, k, denom_max=16):
    """k positive rational weights with a common denominator <= denom_max."""
    d = int(rng.integers(k, denom_max + 1))
    if k == 1:
        return np.array([1.0])
    cuts = np.sort(rng.choice(np.arange(1, d), size=k - 1, replace=False))
    parts = np.diff(np.concatenate(([0], cuts, [d])))
    return parts / d


def random_atom_measure(rng, max_atoms=8, spread=16):
    k = int(rng.integers(1, max_atoms + 1))
    values = np.sort(rng.choice(np.arange(-spread, spread + 1), size=k, replace=False)) / spread
    return DiscreteMeasure(values, rational_weights(rng, k))


def linprog_transport(mu, nu, cost_matrix):
    """Independent LP oracle (HiGHS) for the transportation problem."""
    from scipy.optimize import linprog
    m, n = cost_matrix.shape
    a_eq = np.zeros((m + n, m * n))
    for i in range(m):
        a_eq[i, i * n:(i + 1) * n] = 1.0
    for j in range(n):
        a_eq[m + j, j::n] = 1.0
    b_eq = np.concatenate([mu.weights, nu.weights])
    res = linprog(cost_matrix.ravel(), A_eq=a_eq, b_eq=b_eq,
                  bounds=(0, None), method="highs")
    assert res.status == 0
    return float(res.fun)


def brute_force_2x2(r, c, cost_matrix):
    """Exact optimum of a 2x2 transportation polytope by vertex enumeration.

    pi11 parametrizes the polytope segment; the optimum sits at an endpoint.
    """
    lo = max(0.0, r[0] + c[0] - 1.0)
    hi = min(r[0], c[0])
    best = np.inf
    for t in (lo, hi):
        pi = np.array([[t, r[0] - t], [c[0] - t, r[1] - (c[0] - t)]])
        best = min(best, float(np.sum(pi * cost_matrix)))
    return best


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
