import math

import numpy as np
import pytest

from transportlab import clt_lab as cl
from transportlab.costs import make_cost
from transportlab.errors import PreconditionError, ValidationError

RAD = cl.SequenceModel.iid_rademacher()
GAUSS = cl.SequenceModel.iid_gaussian()
AR_HALF = cl.SequenceModel.ar1(0.5)


# ---------------------------------------------------------------------------
# models and sigma_n
# ---------------------------------------------------------------------------

def test_model_validation():
    with pytest.raises(ValidationError):
        cl.SequenceModel.ar1(1.0)
    with pytest.raises(ValidationError):
        cl.SequenceModel.ar1(0.0)
    with pytest.raises(ValidationError):
        cl.SequenceModel.iid_uniform(1.0, 1.0)
    with pytest.raises(ValidationError):
        cl.SequenceModel.iid_rademacher(0.0)


def test_config_rejects_small_m():
    with pytest.raises(ValidationError):
        cl.ExperimentConfig(RAD, [4], 999, seed=1)


def test_sigma_n_iid():
    assert cl.sigma_n(GAUSS, 100) == 10.0
    assert cl.sigma_n(cl.SequenceModel.iid_rademacher(2.0), 9) == 6.0


def test_sigma_n_ar1_closed_form_vs_double_sum():
    assert cl.sigma_n(AR_HALF, 2) == pytest.approx(math.sqrt(3.0), rel=1e-15)
    for phi in (0.2, 0.5, 0.9):
        model = cl.SequenceModel.ar1(phi)
        for n in (1, 2, 3, 10, 77):
            direct = sum(phi ** abs(i - j) for i in range(n) for j in range(n))
            assert cl.sigma_n(model, n) == pytest.approx(math.sqrt(direct), rel=1e-12)


def test_sigma_n_ar1_small_phi_near_iid():
    model = cl.SequenceModel.ar1(1e-9)
    assert cl.sigma_n(model, 50) == pytest.approx(cl.sigma_n(GAUSS, 50), rel=1e-8)


def test_abs_and_even_moments():
    assert RAD.abs_moment(3) == 1.0
    assert RAD.even_moment(4) == 1.0
    u = cl.SequenceModel.iid_uniform(-2.0, 2.0)
    assert u.abs_moment(2) == pytest.approx(4.0 / 3.0)
    assert u.even_moment(1) == pytest.approx(4.0 / 3.0)
    # gaussian double factorial: E Z^{2k} = (2k-1)!!
    assert GAUSS.even_moment(3) == 15.0
    assert GAUSS.abs_moment(4) == pytest.approx(3.0)
    assert GAUSS.abs_moment(2) == pytest.approx(1.0)


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

def test_rademacher_single_step_values():
    s = cl.sample_sums(RAD, 1, 4000, seed=3)
    assert set(np.unique(s)) == {-1.0, 1.0}
    assert abs(s.mean()) < 4 / math.sqrt(4000)


def test_reproducibility_and_thread_independence():
    base = cl.ExperimentConfig(AR_HALF, [8, 32], 6000, seed=99)
    threaded = cl.ExperimentConfig(AR_HALF, [8, 32], 6000, seed=99, threads=4)
    a = cl.sample_normalized_sums(base)
    b = cl.sample_normalized_sums(threaded)
    c = cl.sample_normalized_sums(base)
    for n in (8, 32):
        assert np.array_equal(a[n], b[n])
        assert np.array_equal(a[n], c[n])


def test_variance_normalization_all_models():
    m = 20000
    for model in (RAD, GAUSS, cl.SequenceModel.iid_uniform(-1, 3), AR_HALF,
                  cl.SequenceModel.ar1(0.8)):
        for n in (1, 4, 37):
            y = cl.sample_sums(model, n, m, seed=17) / cl.sigma_n(model, n)
            assert abs(np.var(y) - 1.0) < 4.0 / math.sqrt(m), (model.kind, n)


def test_uniform_model_is_centered():
    m = cl.SequenceModel.iid_uniform(0.0, 2.0)
    s = cl.sample_sums(m, 1, 20000, seed=4)
    assert abs(s.mean()) < 0.02
    assert s.min() >= -1.0 and s.max() <= 1.0


# ---------------------------------------------------------------------------
# Rosenthal and dependent moment checks
# ---------------------------------------------------------------------------

def test_rosenthal_p2_variance_additivity():
    m = 50000
    s = cl.sample_sums(RAD, 25, m, seed=21)
    ratio = np.mean(s ** 2) / 25.0
    assert abs(ratio - 1.0) < 5.0 / math.sqrt(m)


def test_rosenthal_eq35_rademacher_exact_fourth_moment():
    # E S_n^4 = 3n^2 - 2n: the explicit bound dominates it for every n
    for n in range(2, 101):
        exact = 3.0 * n * n - 2.0 * n
        assert exact <= cl.rosenthal_bound_explicit(4, n, RAD)
    # spec example at n = 10: bound term values
    assert cl.rosenthal_bound_explicit(4, 10, RAD) == pytest.approx(
        4.0 ** 4 * 10 + 4.0 * 4 ** 3 * 2.0 ** -4 * math.e ** 4 * 100, rel=1e-12)


def test_rosenthal_empirical_matches_formula():
    m = 100000
    s = cl.sample_sums(RAD, 10, m, seed=11)
    emp = np.mean(s ** 4)
    stderr = np.std(s ** 4) / math.sqrt(m)
    assert abs(emp - 280.0) <= 3 * stderr
    rep = cl.rosenthal_check(s, 4, RAD, 10, mode="eq35")
    assert rep.holds
    rep7 = cl.rosenthal_check(s, 4, RAD, 10, mode="eq7")
    assert rep7.holds
    labels = {r.label for r in rep.records}
    assert labels == {"raw:eq35", "normalized"}


def test_rosenthal_rejects_dependent_model():
    s = cl.sample_sums(AR_HALF, 8, 2000, seed=1)
    with pytest.raises(PreconditionError):
        cl.rosenthal_check(s, 3, AR_HALF, 8)


def test_dependent_moment_check_ar1_bounded():
    ns = [8, 16, 32, 64, 128]
    samples = {n: cl.sample_sums(AR_HALF, n, 20000, seed=5) for n in ns}
    rep = cl.dependent_moment_check(samples, 3.0)
    assert rep.holds
    assert rep.c_hat >= max(r["ratio"] for r in rep.per_n) * (1 - 1e-12)


def test_dependent_moment_p2_ratio_limit():
    # Var(S_n)/n converges to sigma^2 (1+phi)/(1-phi) = 3 for phi = 1/2
    n = 512
    var = cl.sigma_n(AR_HALF, n) ** 2
    assert var / n == pytest.approx(3.0, abs=0.02)


def test_mann_kendall_trends():
    up = cl.mann_kendall([1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0])
    assert up.upward
    down = cl.mann_kendall([8.0, 7.0, 6.0, 5.0, 4.0, 3.0, 2.0, 1.0])
    assert not down.upward
    flat = cl.mann_kendall([1.0, 1.0, 1.0, 1.0])
    assert not flat.upward


# ---------------------------------------------------------------------------
# decay conditions
# ---------------------------------------------------------------------------

def test_yokoyama_geometric_cases():
    r = cl.yokoyama_condition(4.0, 1.0, kappa=1.0, rho=math.exp(-1.0))
    assert r.converged
    assert "ratio test" in r.reason
    r2 = cl.yokoyama_condition(3.0, 2.0, kappa=2.0, rho=0.5)
    assert r2.converged and r2.tail_bound < 1e-6
    with pytest.raises(ValidationError):
        cl.yokoyama_condition(2.0, 1.0, rho=0.5)
    with pytest.raises(ValidationError):
        cl.yokoyama_condition(3.0, 1.0, rho=1.5)


def test_yokoyama_power_law_cases():
    diverging = cl.yokoyama_condition(3.0, 1.0, power_decay=1.0)
    assert not diverging.converged
    assert "do not vanish" in diverging.reason
    converging = cl.yokoyama_condition(3.0, 1.0, power_decay=8.0)
    assert converging.converged


def test_cox_grimmett_closed_form():
    assert cl.cox_grimmett(AR_HALF, 1) == pytest.approx(2.0 * 0.5 / 0.5, abs=1e-15)
    for n in range(0, 12):
        ratio = cl.cox_grimmett(AR_HALF, n + 1) / cl.cox_grimmett(AR_HALF, n)
        assert ratio == pytest.approx(0.5, rel=1e-14)
    assert cl.cox_grimmett(GAUSS, 3) == 0.0


def test_cox_grimmett_condition_satisfied_for_all_p():
    for p in (2.5, 3.0, 4.0, 6.0):
        rep = cl.cox_grimmett_condition(AR_HALF, p, 1.0, n_values=[1, 4, 16])
        assert rep.satisfied
        assert rep.b_min > 0
        # reported B really dominates the tail on a wide range
        beta = rep.exponent_required
        for n in range(1, 200):
            assert cl.cox_grimmett(AR_HALF, n) <= rep.b_min * n ** -beta + 1e-12


def test_series_condition_catalog():
    zero = cl.series_condition(lambda k: 0.0)
    assert zero["verdict"] == "converged_by_ratio"
    rad = cl.series_condition(lambda k: 1.0)
    assert rad["verdict"] == "diverged_by_terms"
    gauss = cl.series_condition(GAUSS.even_moment)
    assert gauss["verdict"] == "diverged_by_terms"
    geometric = cl.series_condition(lambda k: 4.0 ** -k * float(k) ** -k)
    assert geometric["verdict"] == "converged_by_ratio"
    # bounded nondegenerate variables cannot converge; a small uniform looks
    # convergent at the truncation point but must not be certified
    small = cl.SequenceModel.iid_uniform(-0.1, 0.1)
    assert cl.series_condition(small.even_moment)["verdict"] != "converged_by_ratio"


def test_exp_moment_check_exact_cases():
    zeros = cl.exp_moment_check(np.zeros(5000))
    assert zeros["mean"] == 1.0
    rad1 = cl.sample_sums(RAD, 1, 5000, seed=2)  # Y_1 = S_1, all +-1
    rep = cl.exp_moment_check(rad1)
    assert rep["mean"] == pytest.approx(math.exp(1.0 / 16.0), abs=1e-15)


def test_exp_moment_check_gaussian_target():
    z = cl.sample_sums(GAUSS, 1, 100000, seed=42)
    rep = cl.exp_moment_check(z)
    assert abs(rep["mean"] - math.sqrt(8.0 / 7.0)) <= 3 * rep["stderr"]
    assert rep["finite"]


# ---------------------------------------------------------------------------
# curves and orchestration
# ---------------------------------------------------------------------------

def test_gaussian_curve_sits_on_floor():
    cfg = cl.ExperimentConfig(GAUSS, [4, 64], 20000, seed=42)
    for pt in cl.clt_distance_curve(cfg):
        assert abs(pt.dist - pt.floor) <= 2 * pt.stderr


def test_curve_reproducible():
    cfg = cl.ExperimentConfig(RAD, [4, 16], 5000, seed=9)
    a = cl.clt_distance_curve(cfg)
    b = cl.clt_distance_curve(cfg)
    assert [pt.to_dict() for pt in a] == [pt.to_dict() for pt in b]


def test_run_experiment_iid_structure():
    cfg = cl.ExperimentConfig(RAD, [4, 16], 4000, seed=3)
    rep = cl.run_experiment(cfg)
    payload = rep.to_dict()
    assert payload["config"]["model"] == "iid:rademacher(scale=1)"
    assert len(payload["curve"]) == 2
    assert payload["moment_reports"]
    assert "series" in payload["conditions"]
    assert "exp_moment" in payload["conditions"]


def test_run_experiment_ar1_structure():
    cfg = cl.ExperimentConfig(AR_HALF, [8, 16], 4000, seed=3)
    rep = cl.run_experiment(cfg)
    conditions = rep.to_dict()["conditions"]
    assert {"dependent_moment", "yokoyama", "cox_grimmett", "series"} <= set(conditions)
    assert conditions["yokoyama"]["converged"]


def test_experiment_with_cost_instead_of_p():
    cfg = cl.ExperimentConfig(GAUSS, [4], 2000, seed=1, cost=make_cost(("power", 2)))
    assert cfg.p is None
    pts = cl.clt_distance_curve(cfg)
    assert pts[0].dist >= 0.0
