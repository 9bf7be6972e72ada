import math
from fractions import Fraction

import numpy as np
import pytest

from transportlab import convergence as cv
from transportlab.costs import make_cost
from transportlab.errors import PreconditionError, ValidationError
from transportlab.measures import DiscreteMeasure
from transportlab.ot_lp import total_variation

POWER1 = make_cost(("power", 1))
POWER2 = make_cost(("power", 2))
EXP = make_cost("exp_minus_one")


# ---------------------------------------------------------------------------
# mixture family construction
# ---------------------------------------------------------------------------

def test_example1_small_construction():
    m = cv.example1_measure(2, 2.0, grid_step=0.5)
    assert np.array_equal(m.support, [0.25, 0.75, 2.0])
    assert np.array_equal(m.weights, [0.25, 0.25, 0.5])


def test_example1_pow2_atom_location():
    m = cv.example1_measure(10, "pow2", grid_step=0.25)
    assert m.support[-1] == 1024.0
    assert m.weights[-1] == pytest.approx(0.1)


def test_example1_weights_sum_exactly_one():
    for n in (2, 7, 100):
        m = cv.example1_measure(n, 2.0, grid_step=1e-2)
        assert sum(m.exact_weights, Fraction(0)) == 1


def test_example1_rejects_atom_inside_unit_interval():
    with pytest.raises(ValidationError):
        cv.example1_measure(4, 0.5)
    # boundary points are allowed
    cv.example1_measure(4, 1.0, grid_step=0.25)
    cv.example1_measure(4, 0.0, grid_step=0.25)


def test_example1_grid_step_must_divide_one():
    with pytest.raises(ValidationError):
        cv.example1_measure(4, 2.0, grid_step=0.3)
    with pytest.raises(ValidationError):
        cv.example1_measure(4, 2.0, grid_step=0.7)


def test_example1_tv_closed_form():
    assert cv.example1_tv(10) == 0.2
    assert cv.example1_tv(2) == 1.0
    values = [cv.example1_tv(n) for n in range(1, 200)]
    assert all(a > b for a, b in zip(values, values[1:]))


@pytest.mark.parametrize("grid_step", [0.5, 0.125, 1e-2])
@pytest.mark.parametrize("n", [2, 3, 17, 256])
def test_example1_tv_matches_discrete_exactly(n, grid_step):
    mu_n = cv.example1_measure(n, 2.0, grid_step)
    limit = cv.example1_limit(grid_step)
    assert total_variation(mu_n, limit) == cv.example1_tv(n)


# ---------------------------------------------------------------------------
# moment divergence
# ---------------------------------------------------------------------------

def test_moment_divergence_exp_pow2():
    rep = cv.example1_moment_divergence([2, 3, 4, 5, 6], EXP, "pow2", grid_step=1 / 64)
    assert rep.verdict == "DIVERGES"
    # single-atom term dominates: C(2^5)/5 = (e^32 - 1)/5
    m5 = next(r for r in rep.per_n if r["n"] == 5)
    atom_term = (math.exp(32.0) - 1.0) / 5.0
    assert m5["moment"] == pytest.approx(atom_term, rel=1e-3)


def test_moment_divergence_power2_converges_to_third():
    k = 64
    ns = list(range(2, 1001, 100))
    rep = cv.example1_moment_divergence(ns, POWER2, 2.0, grid_step=1 / k)
    assert rep.verdict == "CONVERGES"
    for rec in rep.per_n:
        n = rec["n"]
        expected = (n - 1) / n * (1 / 3 - 1 / (12 * k * k)) + 4.0 / n
        assert rec["moment"] == pytest.approx(expected, abs=1e-14)


def test_moment_divergence_power1_closed_form():
    # midpoint grids integrate |x| over (0,1) exactly, for any k
    for k in (4, 50):
        rep = cv.example1_moment_divergence([2, 10, 50], POWER1, 2.0, grid_step=1 / k)
        for rec in rep.per_n:
            n = rec["n"]
            assert rec["moment"] == pytest.approx((n - 1) / (2 * n) + 2.0 / n, abs=1e-15)


def test_moment_divergence_overflow_goes_to_log_domain():
    rep = cv.example1_moment_divergence([2, 6, 10, 14], EXP, "pow2", grid_step=0.25)
    assert rep.verdict == "DIVERGES"
    assert math.isinf(rep.per_n[-1]["moment"])
    assert rep.per_n[-1]["log10_atom_term"] == pytest.approx(
        (2.0 ** 14) * math.log10(math.e) - math.log10(14), rel=1e-6)


# ---------------------------------------------------------------------------
# forward / converse diagnostics
# ---------------------------------------------------------------------------

def test_forward_delta_family():
    seq = cv.delta_sequence([2, 4, 8, 16, 32, 64, 128])
    rep = cv.theorem2_forward(seq, POWER2, a=0.0)
    v = rep.verdicts
    assert v["cond_a"] and v["cond_b"] and v["tc_to_zero"] and not v["violation"]
    for rec in rep.per_n:
        assert rec["tc"] == pytest.approx(1.0 / rec["n"] ** 2, rel=1e-12)


def test_forward_constant_sequence():
    m = DiscreteMeasure([0.0, 1.0], [0.5, 0.5])
    seq = cv.MeasureSequence(lambda n: m, m, [2, 4, 8])
    rep = cv.theorem2_forward(seq, POWER2)
    assert all(rec["weak"] == 0.0 and rec["tc"] == 0.0 for rec in rep.per_n)
    assert rep.verdicts["cond_a"] and rep.verdicts["cond_b"] and rep.verdicts["tc_to_zero"]


def test_forward_rejects_discontinuous_cost():
    seq = cv.delta_sequence([2, 4])
    with pytest.raises(PreconditionError):
        cv.theorem2_forward(seq, make_cost("tv_indicator"))


def test_converse_delta_family_power1():
    seq = cv.delta_sequence([2, 4, 8, 16, 32, 64, 128, 256])
    rep = cv.theorem2_converse(seq, POWER1)
    v = rep.verdicts
    assert v["tc_to_zero"] and v["weak_to_zero"] and not v["violation"]
    for rec in rep.per_n:
        assert rec["tc"] == pytest.approx(1.0 / rec["n"], rel=1e-12)


def test_converse_escaping_atom_not_converging():
    # the exp-cost moment blows up and T_c stays enormous; the converse
    # implication is vacuously consistent
    seq = cv.example1_sequence("pow2", [2, 3, 4, 5], grid_step=1 / 32)
    rep = cv.theorem2_converse(seq, EXP, tc_method="lp")
    assert not rep.verdicts["tc_to_zero"]
    assert not rep.verdicts["violation"]
    tcs = [rec["tc"] for rec in rep.per_n]
    assert all(tc >= (math.exp(2.0 ** n - 1.0) - 1.0) / n
               for tc, n in zip(tcs, [2, 3, 4, 5]))


def test_forward_example1_const_lp_route():
    seq = cv.example1_sequence(2.0, [2, 4, 8, 16, 32, 64, 128, 256, 512], grid_step=1 / 100)
    # the scale-2 moment gap closes like (16 - 4/3)/n, so its threshold is
    # matched to the n range; the defaults target slower-moving families
    thresholds = cv.Thresholds(weak=1e-2, moment=5e-2, tc=1e-2)
    rep = cv.theorem2_forward(seq, POWER2, thresholds=thresholds,
                              tc_method="lp", grid_step=1 / 100)
    v = rep.verdicts
    assert not v["violation"]
    assert v["tc_to_zero"] and v["cond_a"] and v["cond_b"]
    tcs = [rec["tc"] for rec in rep.per_n]
    assert tcs[-1] < 1e-2
    assert all(a >= b for a, b in zip(tcs[2:], tcs[3:]))  # decreasing beyond n=4


def test_lp_and_exact_routes_agree():
    seq = cv.example1_sequence(2.0, [2, 8, 32], grid_step=1 / 50)
    lp = cv.theorem2_forward(seq, POWER2, tc_method="lp")
    exact = cv.theorem2_forward(seq, POWER2, tc_method="exact")
    for a, b in zip(lp.per_n, exact.per_n):
        assert a["tc"] == pytest.approx(b["tc"], abs=1e-9)


def test_corollary1_equivalence_families():
    seq = cv.delta_sequence([2, 4, 8, 16, 32, 64, 128])
    rep = cv.corollary1_equivalence(seq, POWER2)
    v = rep.verdicts
    assert v["scale1_converges"] and v["scale2_converges"]
    assert v["verdicts_agree"] and v["finiteness_equivalent"]

    seq1 = cv.example1_sequence(2.0, [2, 4, 8, 16, 32, 64, 128, 256, 512, 1024],
                                grid_step=1 / 50)
    rep1 = cv.corollary1_equivalence(seq1, POWER1)
    assert rep1.verdicts["verdicts_agree"]


def test_corollary1_requires_doubling():
    seq = cv.delta_sequence([2, 4])
    with pytest.raises(PreconditionError):
        cv.corollary1_equivalence(seq, EXP)


def test_random_sequences_no_violation(rng):
    ns = [2, 4, 8, 16, 32, 64, 128, 256, 512, 1024]
    for seed in range(12):
        kind = ("weights", "shift", "both")[seed % 3]
        seq = cv.random_converging_sequence(seed, ns, kind=kind)
        for cost in (POWER1, POWER2):
            fwd = cv.theorem2_forward(seq, cost)
            cnv = cv.theorem2_converse(seq, cost)
            assert not fwd.verdicts["violation"], (seed, kind, cost.name)
            assert not cnv.verdicts["violation"], (seed, kind, cost.name)


def test_report_serialization():
    seq = cv.delta_sequence([2, 4, 8])
    rep = cv.theorem2_forward(seq, POWER2, grid_step=0.25)
    payload = rep.to_dict()
    assert set(payload) == {"per_n", "verdicts", "thresholds", "moment_limit",
                            "direction", "weak_proxy_kind", "grid_step"}
    assert payload["per_n"][0].keys() == {"n", "weak", "moment", "tc"}


def test_measure_sequence_validation():
    with pytest.raises(ValidationError):
        cv.MeasureSequence(lambda n: None, None, [])
    with pytest.raises(ValidationError):
        cv.random_converging_sequence(0, [2, 4], kind="nope")


def test_monotone_majority():
    assert cv.monotone_majority([5, 4, 3, 2, 1])
    assert not cv.monotone_majority([1, 2, 3, 4, 5])
    assert cv.monotone_majority([5, 4, 5, 3, 2, 1])  # one bump out of five steps
    assert cv.monotone_majority([1.0])
