"""Backward calculation of Pareto-optimal equilibria.

A truncated economy agrees with the reference economy up to generation
``k`` and continues with a tail whose Pareto-optimal equilibria are known.
Starting from the tail prices at the seam, the market-clearing equations are
solved backward for ``p_k, p_{k-1}, ..., p_0``. Letting ``k`` grow along a
schedule and watching the leading prices settle approximates a
Pareto-optimal equilibrium of the reference economy.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .demand import (excess_demand_t, excess_demand_t_jacobian, generation_excess,
                     scalar_old_excess)
from .economy import (DomainError, EconomySpec, GaleTail, PriceSequence, Theorem3Tail)
from .solver import (CERT_TOL, CandidatePath, SolveOptions, certify, forward_shoot,
                     initial_boxes_ok, newton_root)
from .tails import TailAnchor, make_anchor, make_theorem3_tail

log = logging.getLogger(__name__)

GRID_POINTS = 48
_UNIT_GRID = np.linspace(0.0, 1.0, GRID_POINTS)


@dataclass(frozen=True)
class BackwardRun:
    """One completed branch of the backward recursion at horizon ``k``.

    ``candidate.prices`` runs from ``p_0`` to the anchor price ``p_{k+2}``;
    ``iterates`` holds the return rates ``|p_t| / |p_{t+1}|`` for ``t = 0..k``.
    """

    k: int
    candidate: CandidatePath
    tail_anchor: str
    converged: bool
    iterates: tuple[float, ...]
    economy: EconomySpec

    @property
    def rates(self) -> np.ndarray:
        return np.array(self.iterates)


# --------------------------------------------------------------------------
# one backward step
# --------------------------------------------------------------------------

def _scalar_roots(g: Callable, lo: float, hi: float) -> list[float]:
    xs = lo * (hi / lo) ** _UNIT_GRID
    vals = g(xs)
    roots = []
    for i in range(GRID_POINTS - 1):
        a, b = vals[i], vals[i + 1]
        if a == 0.0:
            roots.append(float(xs[i]))
        elif a * b < 0.0:
            roots.append(brentq(g, xs[i], xs[i + 1], xtol=1e-300, rtol=1e-15, maxiter=200))
    if vals[-1] == 0.0:
        roots.append(float(xs[-1]))
    return roots


def backward_step(e: EconomySpec, t: int, p_next, p_next2,
                  opts: SolveOptions = SolveOptions()) -> list[np.ndarray]:
    """Candidates for ``p_t`` solving ``z_{t+1}(p_t, p_next, p_next2) = 0``.

    Scalar steps scan a log grid over ``p_next * [sigma**2, sigma**-2]`` and
    refine every sign change; vector steps use multi-start Newton.
    """
    p_next = np.asarray(p_next, dtype=float)
    p_next2 = np.asarray(p_next2, dtype=float)
    L = e.dims(t)
    if L != p_next.size:
        raise ValueError(f"backward step at t={t} is not square "
                         f"({p_next.size} equations, {L} unknowns)")
    sigma = e.bundle.sigma
    gen_old = e.generation(t)
    gen_young = e.generation(t + 1)
    z_young, _ = generation_excess(gen_young, p_next, p_next2)
    scale = p_next.sum() / L

    if L == 1:
        old_excess = scalar_old_excess(gen_old, p_next[0])
        z0 = float(z_young[0])

        def g(x):
            return old_excess(x) + z0

        roots = _scalar_roots(g, scale * sigma ** 2, scale * sigma ** -2)
        return [np.array([r]) for r in roots]

    def F(x):
        return excess_demand_t(e, t + 1, x, p_next, p_next2)

    def J(x):
        return excess_demand_t_jacobian(e, t + 1, x, p_next, p_next2)[0]

    rng = np.random.default_rng([opts.seed, t])
    starts = [np.full(L, scale)] + [
        scale * np.exp(rng.uniform(np.log(sigma), -np.log(sigma), size=L))
        for _ in range(opts.n_starts - 1)]
    found = []
    for x0 in starts:
        try:
            r = newton_root(F, x0, opts, J)
        except DomainError:
            continue
        if r.converged and not any(np.max(np.abs(r.x - y)) <= opts.dedup_tol * np.max(np.abs(y))
                                   for y in found):
            found.append(r.x)
    return found


# --------------------------------------------------------------------------
# full backward run
# --------------------------------------------------------------------------

def run_backward(e: EconomySpec, tail, k: int, opts: SolveOptions = SolveOptions()) -> list[BackwardRun]:
    """All branches of the backward recursion from the tail anchor at ``k``.

    Branches are enumerated depth by depth, keeping at most
    ``opts.branch_budget`` of them; dropping branches is recorded in the
    notes. Each completed path is normalized so ``p_01 = 1``.
    """
    anchor = tail if isinstance(tail, TailAnchor) else make_anchor(e, tail, k)
    ek = anchor.economy
    branches: list[list[np.ndarray]] = [[anchor.p_seam, anchor.p_after]]
    truncated = False
    for t in range(k, -1, -1):
        nxt = []
        for br in branches:
            for cand in backward_step(ek, t, br[0], br[1], opts):
                nxt.append([cand] + br)
        if len(nxt) > opts.branch_budget:
            truncated = True
            nxt = nxt[:opts.branch_budget]
        branches = nxt
        if not branches:
            log.warning("backward recursion at k=%d: every branch died at t=%d "
                        "(with several seam goods, try the seam direction of solve_closed_loop)", k, t)
            return []
    runs = []
    sigma = e.bundle.sigma
    for br in branches:
        ref = br[0][0]
        ps = PriceSequence(tuple(p / ref for p in br))
        res = certify(ek, ps, k + 1)
        notes = ("branch budget reached; some branches dropped",) if truncated else ()
        cand = CandidatePath(ps, res, initial_boxes_ok(ps, sigma), None, notes)
        norms = ps.norms()
        rates = tuple(float(v) for v in norms[:k + 1] / norms[1:k + 2])
        runs.append(BackwardRun(k, cand, anchor.description, res <= CERT_TOL, rates, ek))
    return runs


# --------------------------------------------------------------------------
# tail families and the limit along k
# --------------------------------------------------------------------------

def theorem3_family(e: EconomySpec) -> Callable[[int], Theorem3Tail]:
    return lambda k: make_theorem3_tail(e, k)


def gale_family(w: float) -> Callable[[int], GaleTail]:
    return lambda k: GaleTail(w)


@dataclass(frozen=True)
class TraceEntry:
    k: int
    p1: tuple[float, ...]
    n_branches: int
    window: int
    diff: float | None


@dataclass
class HPOResult:
    """Outcome of ``approximate_hpo``.

    ``prices`` is the detected limit prefix (``None`` without convergence);
    ``forward_gap`` compares it with forward shooting from its first two
    prices over the first few periods, and is informational only because
    forward recursion amplifies rounding error.
    """

    converged: bool
    prices: PriceSequence | None
    converged_at: int | None
    trace: list[TraceEntry]
    residual: float | None = None
    forward_gap: float | None = None
    runs: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    diagnostics: object = None


def _pick(runs: list[BackwardRun], prev: PriceSequence | None, m: int) -> BackwardRun | None:
    good = [r for r in runs if r.converged and r.candidate.boxes_ok] or \
        [r for r in runs if r.converged]
    if not good:
        return None
    if prev is None:
        return good[0]
    return min(good, key=lambda r: _window_diff(r.candidate.prices, prev, m))


def _window_diff(a: PriceSequence, b: PriceSequence, m: int) -> float:
    return max(float(np.max(np.abs(a[t] - b[t]))) for t in range(m + 1))


def approximate_hpo(e: EconomySpec, tail_family: Callable[[int], object], k_schedule,
                    conv_tol: float = 1e-8, opts: SolveOptions = SolveOptions(),
                    forward_periods: int = 10) -> HPOResult:
    """Run the backward algorithm along ``k_schedule`` and detect a limit.

    Successive selected paths are compared on periods ``0..m`` with
    ``m = min(k_prev // 2, 50)``, ``k_prev`` being the earlier horizon of the
    pair. Convergence is declared when every comparison from some point of
    the schedule onward is below ``conv_tol``; ``converged_at`` is the first
    horizon of that stretch.
    """
    from .diagnostics import diagnose

    ks = list(k_schedule)
    if any(b <= a for a, b in zip(ks, ks[1:])) or not ks:
        raise ValueError("k_schedule must be a nonempty increasing sequence")
    trace: list[TraceEntry] = []
    selected: dict[int, BackwardRun] = {}
    notes: list[str] = []
    prev_k = None
    diffs: list[float] = []
    for k in ks:
        runs = run_backward(e, tail_family(k), k, opts)
        m = min(prev_k // 2, 50) if prev_k is not None else min(k // 2, 50)
        prev = selected[prev_k].candidate.prices if prev_k is not None else None
        pick = _pick(runs, prev, m)
        if pick is None:
            notes.append(f"k={k}: no certified branch")
            trace.append(TraceEntry(k, (), len(runs), m, None))
            diffs.append(np.inf)
            prev_k = None
            continue
        diff = _window_diff(pick.candidate.prices, prev, m) if prev is not None else None
        if diff is not None:
            diffs.append(diff)
        selected[k] = pick
        trace.append(TraceEntry(k, tuple(float(v) for v in pick.candidate.prices[1]),
                                len(runs), m, diff))
        prev_k = k

    # longest stretch of passing comparisons that reaches the end of the schedule
    tail_ok = 0
    for d in reversed(diffs):
        if d < conv_tol:
            tail_ok += 1
        else:
            break
    converged = tail_ok > 0 and len(diffs) == len(ks) - 1
    if not converged:
        notes.append("no convergence detected")
        return HPOResult(False, None, None, trace, runs=selected, notes=notes)

    first = ks[len(ks) - 1 - tail_ok]
    last = selected[ks[-1]]
    m = trace[-1].window
    limit = PriceSequence(last.candidate.prices.prices[:m + 1])
    res = certify(e, limit) if m >= 2 else 0.0
    n_fwd = min(forward_periods, m)
    fs = forward_shoot(e, limit[0], limit[1], n_fwd, opts)
    gap = max(float(np.max(np.abs(fs.prices[t] - limit[t]))) for t in range(len(fs.prices)))
    diag = diagnose(e, CandidatePath(limit, res, initial_boxes_ok(limit, e.bundle.sigma)))
    if res > CERT_TOL:
        notes.append(f"limit prefix residual {res:.3g} exceeds {CERT_TOL:g}")
    return HPOResult(res <= CERT_TOL, limit, first, trace, res, gap, selected, notes, diag)
