import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from olg_forge.diagnostics import (Verdict, cass_partial_sums, check_prone_ces,
                                   check_prone_loglinear, classify, diagnose, geometric_growth_bound,
                                   savings_path, savings_recursion_residual,
                                   threshold_implication_holds)
from olg_forge.economy import (AssumptionBundle, EconomySpec, GenerationSpec, HouseholdSpec,
                               PriceSequence, StationaryRepeat, UtilityParams, theorem3_generation)
from olg_forge.example1 import example1_bundle, example1_economy, phi
from olg_forge.solver import forward_shoot
from olg_forge.tails import make_theorem3_tail

from conftest import loglinear_stationary

CONST = PriceSequence(tuple(np.ones((21, 1))))


def test_cass_sums_constant_path():
    s = cass_partial_sums(CONST, 1)
    np.testing.assert_array_equal(s, np.arange(1, 22))
    assert cass_partial_sums(CONST, 1, T=5)[-1] == 6.0
    with pytest.raises(ValueError):
        cass_partial_sums(CONST, 1, T=21)


def test_cass_sums_geometric_path():
    q = 1.5
    ps = PriceSequence(tuple(np.array([q ** t]) for t in range(30)))
    s = cass_partial_sums(ps, 2)
    ref = 0.5 * (1 - q ** -np.arange(1, 31)) / (1 - 1 / q)
    np.testing.assert_allclose(s, ref, rtol=1e-14)
    assert s[-1] < 0.5 / (1 - 1 / q)


def test_cass_sums_use_one_norm_and_population():
    ps = PriceSequence(([1.0, 2.0], [2.0, 2.0]))
    np.testing.assert_allclose(cass_partial_sums(ps, [1, 4]), [1 / 3, 1 / 3 + 1 / 16])


def test_savings_on_example1():
    e = example1_economy()
    ps = PriceSequence(([1.0], [1.0 / 0.9], [1.0 / 0.81]))
    s = savings_path(e, ps)
    np.testing.assert_allclose(s, [float(phi(0.9))] * 2, rtol=1e-14)


def test_savings_recursion_on_equilibria():
    e = example1_economy()
    c = forward_shoot(e, [1.0], [1.0 / 0.9], 20)
    r = savings_recursion_residual(e, c.prices)
    assert np.max(np.abs(r)) < 1e-8


def test_savings_recursion_detects_non_equilibria():
    """Negative control: a perturbed path breaks the identity."""
    e = example1_economy()
    c = forward_shoot(e, [1.0], [1.0 / 0.9], 10)
    bumped = [p.copy() for p in c.prices.prices]
    bumped[5] = bumped[5] * 1.01
    r = savings_recursion_residual(e, PriceSequence(tuple(bumped)))
    assert np.max(np.abs(r)) > 1e-3


def test_geometric_growth_bound_inefficient_path():
    e = example1_economy()
    c = forward_shoot(e, [1.0], [1.0 / 0.9], 30)
    t0, ok, slack = geometric_growth_bound(e, c.prices)
    s = savings_path(e, c.prices)
    assert t0 == int(np.nonzero(s <= 0.5)[0][0])
    assert ok and len(slack) == 31 - t0


def test_growth_bound_not_triggered_on_constant_path():
    assert geometric_growth_bound(example1_economy(), CONST) == (None, None, [])


def test_prone_margin_loglinear():
    e = loglinear_stationary()
    res = check_prone_loglinear(e)
    assert res.applicable and res.prone
    assert abs(res.margin - 1.6) < 1e-12


def test_prone_margin_scale_invariance():
    """Rescaling log-linear weights leaves the margin unchanged."""
    a = check_prone_loglinear(loglinear_stationary(0.5, 0.5)).margin
    b = check_prone_loglinear(loglinear_stationary(3.0, 3.0)).margin
    assert a == pytest.approx(b, abs=1e-14)


def test_prone_margin_zero_and_negative():
    # (1 - 1/2) * 1 - 1/2 * 1 = 0: not prone
    res = check_prone_loglinear(loglinear_stationary(endow=(1.0, 1.0)))
    assert res.margin == 0.0 and not res.prone
    assert check_prone_loglinear(loglinear_stationary(endow=(1.0, 3.0))).margin < 0


@settings(max_examples=50)
@given(st.floats(1.0, 4.0), st.floats(0.0, 4.0), st.floats(0.5, 2.0), st.floats(0.2, 2.0))
def test_prone_margin_linear_in_endowments(ey, eo, lam, mu):
    e1 = loglinear_stationary(lam, mu, (ey, eo))
    e2 = loglinear_stationary(lam, mu, (2 * ey, 2 * eo),
                              bundle=AssumptionBundle(0.5, 2.0, 8.0, 0.05, 0.3, 0.5))
    m1, m2 = check_prone_loglinear(e1).margin, check_prone_loglinear(e2).margin
    g = lam / (lam + mu)
    assert m1 == pytest.approx((1 - g) * ey - g * eo, abs=1e-12)
    assert m2 == pytest.approx(2 * m1, abs=1e-12)


def test_prone_margin_ces_decreases_with_wider_box():
    """A smaller sigma widens the price box, so the share bound rises and the margin falls."""
    h = HouseholdSpec([4.0], [0.8], UtilityParams.ces([1.0], [0.8], 0.5))
    g = GenerationSpec(0, 1, 1, ((h, 1),))
    margins = []
    for sigma in (0.9, 0.7, 0.5, 0.3):
        b = AssumptionBundle(0.5, 2.0, 4.0, sigma, 0.3, 0.5)
        margins.append(check_prone_ces(EconomySpec(b, (g,), StationaryRepeat(g))).margin)
    assert np.all(np.diff(margins) < 0)


def test_prone_mixed_utilities_not_applicable(two_good):
    res = check_prone_ces(two_good)
    assert not res.applicable and "mixes utilities" in res.notes[0]
    assert not check_prone_loglinear(two_good).applicable


def test_prone_without_tail_rule_notes_skip():
    e = loglinear_stationary()
    g = e.prefix[0]
    bare = EconomySpec(e.bundle, (g, g.shifted(1), g.shifted(2)))
    res = check_prone_loglinear(bare)
    assert len(res.per_t) == 2 and "prefix only" in res.notes[0]


def test_theorem3_tail_threshold_implication():
    b = AssumptionBundle(0.5, 2.0, 4.0, 0.05, 1.0, 0.5)
    e = loglinear_stationary(bundle=b)
    tail = make_theorem3_tail(e, 3)
    assert tail.e_min == 1.5
    rates = np.geomspace(0.01, 100.0, 2001)
    for t in (4, 5):
        assert threshold_implication_holds(theorem3_generation(tail, 4.0, t), b, 1.0, rates)


def test_threshold_implication_fails_for_large_epsilon():
    """With a huge epsilon the rate bound is too tight for the square-root economy."""
    b = example1_bundle(epsilon=5.0)
    g = example1_economy(b).generation(0)
    assert not threshold_implication_holds(g, b, 1.0, np.geomspace(0.1, 10, 500))
    assert threshold_implication_holds(g, example1_bundle(), 1.0, np.geomspace(0.1, 10, 500))


def test_classify_cases():
    e = example1_economy()
    assert classify(e, CONST) == Verdict.EFFICIENT
    ineff = forward_shoot(e, [1.0], [1.0 / 0.9], 30)
    assert classify(e, ineff) == Verdict.INEFFICIENT
    # savings above delta but growth at the end: no tail argument
    short = forward_shoot(e, [1.0], [1.0 / 0.99], 3)
    assert classify(e, short) == Verdict.UNDETERMINED


def test_classify_refuses_uncertified_paths():
    e = example1_economy()
    with pytest.raises(ValueError, match="not a certified"):
        classify(e, PriceSequence(([1.0], [1.5], [1.0], [2.0])))


def test_diagnose_report_round_trip():
    e = example1_economy()
    rep = diagnose(e, forward_shoot(e, [1.0], [1.0 / 0.9], 15))
    d = rep.to_dict()
    assert d["verdict"] == "Inefficient" and d["growth_bound_ok"] is True
    assert len(d["savings"]) == 15 and len(d["cass_partials"]) == 16
    assert rep.prone_margin is not None
