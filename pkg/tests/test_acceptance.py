"""Acceptance criteria, one test each. Every test records a PASS/FAIL line
that is printed in the terminal summary."""
import time

import numpy as np

from olg_forge.backward import approximate_hpo, gale_family, run_backward, theorem3_family
from olg_forge.classical import classical_excess, compute_transfers, select_zeta
from olg_forge.demand import ces_demand, gamma_bound, gamma_share, joint_excess
from olg_forge.diagnostics import (Verdict, cass_partial_sums, check_prone_loglinear, classify,
                                   geometric_growth_bound, threshold_implication_holds)
from olg_forge.economy import (AssumptionBundle, GaleTail, HouseholdSpec, PriceSequence,
                               UtilityParams, theorem3_generation)
from olg_forge.example1 import phi, psi
from olg_forge.solver import (CERT_TOL, box_induction_ok, consumption_bound_ok, forward_shoot,
                              solve_closed_loop, solve_j_sighted)
from olg_forge.tails import TailConstructionError, build_theorem3_tail, make_theorem3_tail

from conftest import (SQRT3_3, acceptance_line, bisect, classical_toy, example1_savings_oracle,
                      loglinear_stationary, two_good_economy)


def test_criterion_1_golden_rule_convergence(ex1):
    t0 = time.perf_counter()
    try:
        run_backward(ex1, GaleTail(0.5), 50)
        rejected = False
    except TailConstructionError:
        rejected = True
    gaps, limits = {}, {}
    converged = True
    for w in (0.7, 2.0, 3.0):
        runs = run_backward(ex1, GaleTail(w), 50)
        gaps[w] = abs(runs[0].rates[0] - 1.0) if len(runs) == 1 else np.inf
        res = approximate_hpo(ex1, gale_family(w), range(10, 101, 10))
        converged &= res.converged
        limits[w] = float(np.max(np.abs(res.prices.flat() - 1.0))) if res.converged else np.inf
    elapsed = time.perf_counter() - t0
    ok = (rejected and converged and max(gaps.values()) < 1e-6
          and max(limits.values()) < 1e-8 and elapsed < 1.0)
    acceptance_line(1, ok, f"w=0.5 rejected={rejected}; max |r0-1|={max(gaps.values()):.2e} "
                           f"(<1e-6); hpo converged={converged}, max |p-1|={max(limits.values()):.2e}; "
                           f"{elapsed:.2f}s (<1s)")
    assert ok


def test_criterion_2_closed_form_vs_root_finder():
    t0 = time.perf_counter()
    worst = 0.0
    for r in np.linspace(0.6, 3.0, 100):
        y = float(phi(r))
        ref = bisect(lambda x: x * example1_savings_oracle(x) - y, 1e-3, 100.0)
        worst = max(worst, abs(float(psi(y)) - ref))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-10 and elapsed < 1.0
    acceptance_line(2, ok, f"max |psi(phi(r)) - bisection| = {worst:.2e} (<1e-10) over 100 points; "
                           f"{elapsed:.2f}s (<1s)")
    assert ok


def test_criterion_3_anchor_values():
    a = abs(float(phi(SQRT3_3)))
    b = abs(float(psi(phi(1.0))) - 1.0)
    ok = a < 1e-12 and b < 1e-12
    acceptance_line(3, ok, f"|phi(sqrt3/3)| = {a:.1e}, |psi(phi(1)) - 1| = {b:.1e} (<1e-12)")
    assert ok


def _random_household(rng):
    L, L1 = rng.integers(1, 4, size=2)
    lam, mu = rng.uniform(0.01, 2.0, L), rng.uniform(0.01, 2.0, L1)
    ey, eo = rng.uniform(0.0, 4.0, L), rng.uniform(0.0, 4.0, L1)
    ey[0] += 0.1
    if rng.random() < 0.5:
        u = UtilityParams.ces(lam, mu, rng.uniform(0.05, 0.95))
    else:
        u = UtilityParams.loglinear(lam, mu)
    return HouseholdSpec(ey, eo, u)


def test_criterion_4_demand_properties():
    rng = np.random.default_rng(2024)
    sigma = 0.05
    n, walras, homog, gamma_ok, n_ces = 1500, 0.0, 0.0, True, 0
    for _ in range(n):
        h = _random_household(rng)
        L, L1 = h.dims
        py = np.exp(rng.uniform(np.log(sigma), -np.log(sigma), L))
        po = np.exp(rng.uniform(np.log(sigma), -np.log(sigma), L1))
        d = ces_demand(h, py, po)
        pe = py @ h.endow_young + po @ h.endow_old
        gap = abs(py @ (d.young - h.endow_young) + po @ (d.old - h.endow_old))
        walras = max(walras, gap / (1.0 + abs(pe)))
        c = np.exp(rng.uniform(-3, 3))
        d2 = ces_demand(h, c * py, c * po)
        x1, x2 = np.concatenate([d.young, d.old]), np.concatenate([d2.young, d2.old])
        homog = max(homog, float(np.max(np.abs(x1 - x2) / (1.0 + np.abs(x1)))))
        if h.utility.kind == "ces":
            n_ces += 1
            py0 = py / py[0]
            gamma_ok &= gamma_share(h.utility, py0, po) <= gamma_bound(h.utility, sigma) * (1 + 1e-12)
    ok = walras <= 1e-10 and homog <= 1e-10 and gamma_ok
    acceptance_line(4, ok, f"{n} households: max Walras gap {walras:.1e} (<=1e-10 scaled), "
                           f"homogeneity {homog:.1e}; gamma bound held on {n_ces} CES draws={gamma_ok}")
    assert ok


def test_criterion_5_solver_certification(ex1):
    two = two_good_economy()
    checked = []  # (economy, prices, t)
    for e in (ex1, two):
        checked += [(e, c.prices, None) for c in solve_j_sighted(e, 3)]
    fs = forward_shoot(ex1, [1.0], [1.0 / 0.9], 40)
    checked.append((ex1, fs.prices, None))
    fs2 = forward_shoot(two, *solve_j_sighted(two, 3)[0].prices.prices[:2], 3)
    checked.append((two, fs2.prices, None))
    star1 = UtilityParams.loglinear([1.0], [1.0])
    for k in (5, 10):
        c = solve_closed_loop(ex1, k, star1)
        checked.append((build_theorem3_tail(ex1, k)[1].economy, c.prices, k + 1))
    c2 = solve_closed_loop(two, 3, UtilityParams.loglinear([0.5, 0.5], [1.0]))
    anchor2 = build_theorem3_tail(two, 3, direction=c2.prices[4])[1]
    checked.append((anchor2.economy, c2.prices, 4))
    runs = [r for w in (0.7, 2.0, 3.0) for r in run_backward(ex1, GaleTail(w), 50)]
    runs += run_backward(ex1, make_theorem3_tail(ex1, 10), 10)
    runs += run_backward(two, anchor2, 3)
    checked += [(r.economy, r.candidate.prices, r.k + 1) for r in runs]

    worst, cons_ok, box_ok = 0.0, True, True
    for e, ps, t in checked:
        worst = max(worst, float(np.max(np.abs(joint_excess(e, ps, t)))))
        cons_ok &= consumption_bound_ok(e, ps, t)
        if ps[0][0] == 1.0 and all(np.all((p >= e.bundle.sigma) & (p <= 1 / e.bundle.sigma))
                                   for p in ps.prices[:2]):
            upto = len(ps) - 1 if t is None else t
            box_ok &= box_induction_ok(ps, e.bundle.sigma, upto=upto)
    ok = worst <= CERT_TOL and cons_ok and box_ok
    acceptance_line(5, ok, f"{len(checked)} paths from 4 methods: max residual {worst:.1e} (<=1e-8); "
                           f"consumption bound {cons_ok}; box induction {box_ok}")
    assert ok


def test_criterion_6_closed_loop_vs_backward(ex1):
    gaps = {}
    for k in (5, 10):
        c = solve_closed_loop(ex1, k, UtilityParams.loglinear([1.0], [1.0]))
        runs = run_backward(ex1, make_theorem3_tail(ex1, k), k)
        gaps[k] = min(max(float(np.max(np.abs(r.candidate.prices[t] - c.prices[t])))
                          for t in range(1, k + 1)) for r in runs) if runs and c.ok else np.inf
    ok = max(gaps.values()) < 1e-6
    acceptance_line(6, ok, "max price gap t=1..k: " +
                    ", ".join(f"k={k}: {g:.1e}" for k, g in gaps.items()) + " (<1e-6)")
    assert ok


def test_criterion_7_efficiency_classification(ex1):
    fs = forward_shoot(ex1, [1.0], [1.0 / 0.9], 40)
    v_ineff = classify(ex1, fs.prices)
    t0, growth_ok, slack = geometric_growth_bound(ex1, fs.prices)
    const = PriceSequence(tuple(np.ones((31, 1))))
    v_eff = classify(ex1, const)
    sums = cass_partial_sums(const, 1)
    exact = bool(np.all(sums == np.arange(1, 32)))
    ok = (fs.ok and v_ineff == Verdict.INEFFICIENT and t0 is not None and growth_ok
          and v_eff == Verdict.EFFICIENT and exact)
    acceptance_line(7, ok, f"r0=0.9 -> {v_ineff.value}, geometric growth bound held on {len(slack)} periods "
                           f"from t={t0}: {growth_ok}; constant path -> {v_eff.value}; "
                           f"Cass sums exactly T+1: {exact}")
    assert ok


def test_criterion_8_prone_to_savings():
    b = AssumptionBundle(0.5, 2.0, 4.0, 0.05, 1.0, 0.5)
    e = loglinear_stationary(0.5, 0.5, (4.0, 0.8), 1, b)
    margin = check_prone_loglinear(e).margin
    tail = make_theorem3_tail(e, 3)
    rates = np.geomspace(1e-3, 1e3, 4001)
    implied = all(threshold_implication_holds(theorem3_generation(tail, b.e_max, t), b, 1.0, rates)
                  for t in (4, 5, 6))
    tail_prone = check_prone_loglinear(e.truncated(3, tail)).prone
    ok = abs(margin - 1.6) < 1e-12 and tail.e_min == 1.5 and implied and tail_prone
    acceptance_line(8, ok, f"margin {margin!r} (=1.6 within 1e-12); e_min={tail.e_min}; "
                           f"threshold implication on tail generations: {implied}; "
                           f"truncated economy prone: {tail_prone}")
    assert ok


def test_criterion_9_classical_bridge():
    e2 = classical_toy()

    def solve(ext):
        res = approximate_hpo(ext, theorem3_family(ext), range(10, 101, 10))
        return res.prices if res.converged else None

    zeta, ps = select_zeta(e2, solve)
    tau = compute_transfers(e2, zeta, ps)
    money = np.array([h.money for h in e2.old]) + tau
    res = float(np.max(np.abs(classical_excess(e2, money, ps))))
    ok = res <= CERT_TOL
    acceptance_line(9, ok, f"zeta={zeta}, transfers={np.round(tau, 6).tolist()}, classical periods "
                           f"1..{len(ps) - 2} residual {res:.1e} (<=1e-8)")
    assert ok
