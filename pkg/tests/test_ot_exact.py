import math

import numpy as np
import pytest

from transportlab import (Distribution1D, build_cost_matrix,
                          distance_to_gaussian, gaussian_quantile,
                          monotone_coupling, solve_kantorovich,
                          transport_cost_convex, wasserstein_p)
from transportlab.costs import make_cost
from transportlab.errors import PreconditionError, ValidationError
from conftest import brute_force_2x2, random_atom_measure

GAUSS = Distribution1D.standard_gaussian()
DIRAC0 = Distribution1D.from_atoms([0.0], [1.0])
DIRAC1 = Distribution1D.from_atoms([1.0], [1.0])
TWO_A = Distribution1D.from_atoms([0.0, 1.0], [0.5, 0.5])
TWO_B = Distribution1D.from_atoms([0.0, 2.0], [0.5, 0.5])

# Frozen expected values, computed from an independent quadrature oracle of
# the quantile-space integrand (see test_frozen_gaussian_values for the
# oracle itself).
RADEMACHER_W2_SQ = 0.4042308783942692   # 2 - 4*phi(0)
RADEMACHER_W1 = 0.5353773215478797


def test_wasserstein_unit_move():
    assert wasserstein_p(DIRAC0, DIRAC1, 1) == 1.0


def test_wasserstein_two_atom_vs_bruteforce():
    cost = np.abs(np.array([[0.0, 1.0], [2.0, 1.0]]))  # |x_i - y_j| for {0,1} x {0,2}
    cost = np.abs(np.array([0.0, 1.0])[:, None] - np.array([0.0, 2.0])[None, :])
    expected = brute_force_2x2([0.5, 0.5], [0.5, 0.5], cost)
    assert expected == 0.5
    assert wasserstein_p(TWO_A, TWO_B, 1) == pytest.approx(expected, abs=1e-15)


def test_wasserstein_identical_is_zero():
    assert wasserstein_p(TWO_A, TWO_A, 2) == 0.0
    assert wasserstein_p(GAUSS, GAUSS, 2) == 0.0


def test_wasserstein_order_validated():
    with pytest.raises(ValidationError):
        wasserstein_p(TWO_A, TWO_B, 0.5)


def test_transport_cost_examples():
    cost2 = np.abs(np.array([0.0, 1.0])[:, None] - np.array([0.0, 2.0])[None, :]) ** 2
    expected = brute_force_2x2([0.5, 0.5], [0.5, 0.5], cost2)
    got = transport_cost_convex(TWO_A, TWO_B, make_cost(("power", 2)))
    assert got == pytest.approx(expected, abs=1e-15)
    assert transport_cost_convex(TWO_A, TWO_A, make_cost("exp_minus_one")) == 0.0
    dirac3 = Distribution1D.from_atoms([3.0], [1.0])
    assert transport_cost_convex(DIRAC0, dirac3, make_cost(("power", 1))) == 3.0


def test_transport_cost_rejects_nonconvex():
    with pytest.raises(PreconditionError):
        transport_cost_convex(TWO_A, TWO_B, make_cost("tv_indicator"))


def test_monotone_coupling_structure():
    c = monotone_coupling(DIRAC0, DIRAC1)
    assert c.segments == [(0.0, 1.0, 0.0, 1.0)]
    c = monotone_coupling(TWO_A, TWO_B)
    assert c.segments == [(0.0, 0.5, 0.0, 0.0), (0.5, 1.0, 1.0, 2.0)]
    same = monotone_coupling(TWO_A, TWO_A)
    assert same.cost(make_cost(("power", 2))) == 0.0


def test_monotone_coupling_partitions_and_reconstructs(rng):
    for _ in range(20):
        f = random_atom_measure(rng).to_distribution()
        g = random_atom_measure(rng).to_distribution()
        c = monotone_coupling(f, g)
        assert c.levels[0] == 0.0 and c.levels[-1] == 1.0
        assert np.all(np.diff(c.levels) > 0)
        assert np.all(np.diff(c.x_values) >= 0)
        assert np.all(np.diff(c.y_values) >= 0)
        np.testing.assert_allclose(c.first_marginal_weights(f.values.size),
                                   f.weights, atol=1e-12)
        np.testing.assert_allclose(c.second_marginal_weights(g.values.size),
                                   g.weights, atol=1e-12)
        # coupling cost equals the closed-form transport cost
        for spec in (("power", 1), ("power", 2), "exp_minus_one"):
            cost = make_cost(spec)
            assert c.cost(cost) == pytest.approx(
                transport_cost_convex(f, g, cost), rel=1e-12, abs=1e-15)


def test_gaussian_quantile_examples():
    assert gaussian_quantile(0.5) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValidationError):
        gaussian_quantile(0.0)
    with pytest.raises(ValidationError):
        gaussian_quantile(1.0)


def test_gaussian_quantile_vs_bisection_oracle():
    # independent oracle: bisect the erfc-based CDF, itself accurate ~1e-16
    def phi(x):
        return 0.5 * math.erfc(-x / math.sqrt(2.0))

    def bisect(t):
        lo, hi = -10.0, 10.0
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if phi(mid) <= t:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    assert gaussian_quantile(0.975) == pytest.approx(bisect(0.975), abs=1e-6)
    assert gaussian_quantile(0.975) == pytest.approx(1.959964, abs=1e-6)
    for t in (1e-6, 1e-3, 0.31, 0.77, 1 - 1e-3, 1 - 1e-6):
        assert gaussian_quantile(t) == pytest.approx(bisect(t), abs=1e-9)


def test_gaussian_quantile_roundtrip():
    from transportlab._normal import norm_cdf
    ts = np.linspace(1e-6, 1 - 1e-6, 2001)
    zs = np.array([gaussian_quantile(t) for t in ts[:5]])  # scalar path
    assert np.max(np.abs(norm_cdf(zs) - ts[:5])) <= 1e-9
    from transportlab._normal import norm_quantile
    assert np.max(np.abs(norm_cdf(norm_quantile(ts)) - ts)) <= 1e-9


def test_frozen_gaussian_values():
    # oracle: scipy quadrature of the fixed quantile-space integrand
    from scipy import integrate
    from scipy.special import ndtri

    def oracle(p):
        val, _ = integrate.quad(
            lambda t: abs((1.0 if t > 0.5 else -1.0) - ndtri(t)) ** p,
            0, 1, points=[0.5], limit=400)
        return val

    rad = Distribution1D.from_atoms([-1.0, 1.0], [0.5, 0.5])
    assert oracle(2) == pytest.approx(RADEMACHER_W2_SQ, abs=1e-9)
    assert oracle(1) == pytest.approx(RADEMACHER_W1, abs=1e-7)
    got2 = distance_to_gaussian(rad, cost=make_cost(("power", 2)))
    assert got2 == pytest.approx(RADEMACHER_W2_SQ, abs=1e-4)
    got1 = distance_to_gaussian(rad, p=1)
    assert got1 == pytest.approx(RADEMACHER_W1, abs=1e-3)
    # closed forms are in fact much tighter than the spec tolerances
    assert got2 == pytest.approx(RADEMACHER_W2_SQ, abs=1e-12)
    assert got1 == pytest.approx(RADEMACHER_W1, abs=1e-12)


def test_distance_to_gaussian_self_and_shift():
    assert distance_to_gaussian(GAUSS, p=2) == 0.0
    assert distance_to_gaussian(GAUSS, cost=make_cost("exp_minus_one")) == 0.0
    from scipy.special import ndtri
    shift = 0.6
    grid = ndtri(np.linspace(0.5 / 4000, 1 - 0.5 / 4000, 4000)) + shift
    shifted = Distribution1D.from_samples(grid)
    assert distance_to_gaussian(shifted, p=2) ** 2 == pytest.approx(shift ** 2, abs=2e-3)


def test_distance_to_gaussian_argument_check():
    with pytest.raises(ValidationError):
        distance_to_gaussian(TWO_A)
    with pytest.raises(ValidationError):
        distance_to_gaussian(TWO_A, p=2, cost=make_cost(("power", 2)))


def test_general_cost_path_matches_quadrature():
    from scipy import integrate
    from scipy.special import ndtri
    rad = Distribution1D.from_atoms([-1.0, 1.0], [0.5, 0.5])
    got = transport_cost_convex(rad, GAUSS, make_cost("exp_minus_one"))
    oracle, _ = integrate.quad(
        lambda t: math.expm1(abs((1.0 if t > 0.5 else -1.0) - ndtri(t))),
        0, 1, points=[0.5], limit=400)
    assert got == pytest.approx(oracle, rel=1e-6)
    got3 = wasserstein_p(rad, GAUSS, 3) ** 3
    oracle3, _ = integrate.quad(
        lambda t: abs((1.0 if t > 0.5 else -1.0) - ndtri(t)) ** 3,
        0, 1, points=[0.5], limit=400)
    assert got3 == pytest.approx(oracle3, rel=1e-6)


def test_divergence_sentinel():
    far = Distribution1D.from_atoms([0.0, 1e6], [0.5, 0.5])
    assert transport_cost_convex(far, GAUSS, make_cost("exp_minus_one")) == math.inf


def test_lp_oracle_equivalence(rng):
    costs = [make_cost(("power", 1)), make_cost(("power", 2)),
             make_cost(("power", 3)), make_cost("exp_minus_one")]
    for _ in range(100):
        mu = random_atom_measure(rng)
        nu = random_atom_measure(rng)
        for cost in costs:
            lp = solve_kantorovich(mu, nu, build_cost_matrix(mu, nu, cost), method="simplex")
            exact = transport_cost_convex(mu.to_distribution(), nu.to_distribution(), cost)
            assert abs(lp.cost - exact) <= 1e-9


def test_metric_axioms_on_random_triples(rng):
    dists = [random_atom_measure(rng, max_atoms=5).to_distribution() for _ in range(5)]
    for p in (1.0, 2.0, 3.0):
        for a in dists:
            for b in dists:
                assert wasserstein_p(a, b, p) == wasserstein_p(b, a, p)
                for c in dists:
                    assert wasserstein_p(a, c, p) <= (
                        wasserstein_p(a, b, p) + wasserstein_p(b, c, p) + 1e-12)


@pytest.mark.parametrize("a", [2.0, 0.5])
def test_scaling_invariance(rng, a):
    for _ in range(10):
        f = random_atom_measure(rng, max_atoms=5).to_distribution()
        g = random_atom_measure(rng, max_atoms=5).to_distribution()
        fa = Distribution1D.from_atoms(a * f.values, f.weights)
        ga = Distribution1D.from_atoms(a * g.values, g.weights)
        for p in (1.0, 2.0):
            assert wasserstein_p(fa, ga, p) == pytest.approx(
                abs(a) * wasserstein_p(f, g, p), rel=1e-12)
