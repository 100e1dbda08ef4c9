"""Root finding and finite-horizon equilibrium computation."""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .demand import (generation_excess, joint_excess, joint_excess_jacobian,
                     excess_demand_t, excess_demand_t_jacobian, single_period_demand)
from .economy import (DomainError, EconomySpec, PriceSequence, UtilityParams,
                      box_membership, beta_of)
from .tails import build_theorem3_tail

log = logging.getLogger(__name__)

# residual threshold used when re-certifying any returned path
CERT_TOL = 1e-8


@dataclass(frozen=True)
class SolveOptions:
    tol_residual: float = 1e-10
    max_iter: int = 200
    n_starts: int = 8
    damping: float = 1.0
    seed: int = 0
    branch_budget: int = 64
    jobs: int = 1
    dedup_tol: float = 1e-6

    def __post_init__(self):
        if not (0.0 < self.tol_residual < 1.0):
            raise ValueError("tol_residual must lie in (0, 1)")
        if not (0.0 < self.damping <= 1.0):
            raise ValueError("damping must lie in (0, 1]")
        for name in ("max_iter", "n_starts", "branch_budget", "jobs"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class NewtonResult:
    x: np.ndarray
    residual: float
    converged: bool
    iterations: int

    def __bool__(self):
        return self.converged


@dataclass(frozen=True)
class CandidatePath:
    """A price path with its certification data.

    ``residual`` is the max-norm of the market-clearing equations the path
    was solved for; ``failed_at`` marks the period where a solve stopped.
    """

    prices: PriceSequence
    residual: float
    boxes_ok: bool
    failed_at: int | None = None
    notes: tuple[str, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return self.failed_at is None


def fd_jacobian(F: Callable, x: np.ndarray, f0: np.ndarray | None = None) -> np.ndarray:
    """Forward-difference Jacobian with step ``1e-7 * max(1, |x_i|)``."""
    if f0 is None:
        f0 = F(x)
    jac = np.empty((f0.size, x.size))
    for i in range(x.size):
        h = 1e-7 * max(1.0, abs(x[i]))
        xp = x.copy()
        xp[i] += h
        jac[:, i] = (F(xp) - f0) / h
    return jac


def newton_root(F: Callable, x0, opts: SolveOptions = SolveOptions(),
                jac: Callable | None = None) -> NewtonResult:
    """Damped Newton (least squares for non-square systems) on the positive orthant.

    Steps are cut to keep every coordinate positive (fraction to boundary
    0.9) and then backtracked on the squared residual. A non-finite value
    of ``F`` at the start raises ``DomainError``; non-convergence is
    reported through ``converged=False``.
    """
    x = np.array(x0, dtype=float).reshape(-1)
    if np.any(x <= 0):
        raise DomainError("newton_root needs a strictly positive start")
    f = np.atleast_1d(np.asarray(F(x), dtype=float))
    if not np.all(np.isfinite(f)):
        raise DomainError("F is not finite at the starting point")
    merit = float(f @ f)
    for it in range(opts.max_iter):
        res = float(np.max(np.abs(f))) if f.size else 0.0
        if res <= opts.tol_residual:
            return NewtonResult(x, res, True, it)
        J = jac(x) if jac is not None else fd_jacobian(F, x, f)
        step = np.linalg.lstsq(J, -f, rcond=None)[0]
        if not np.all(np.isfinite(step)):
            break
        a = opts.damping
        neg = step < 0
        if np.any(neg):
            a = min(a, 0.9 * float(np.min(-x[neg] / step[neg])))
        accepted = False
        while a > 1e-12:
            xt = x + a * step
            ft = np.atleast_1d(np.asarray(F(xt), dtype=float))
            if np.all(np.isfinite(ft)) and float(ft @ ft) < merit:
                accepted = True
                break
            a *= 0.5
        if not accepted:
            break
        x, f = xt, ft
        merit = float(f @ f)
    res = float(np.max(np.abs(f))) if f.size else 0.0
    return NewtonResult(x, res, res <= opts.tol_residual, opts.max_iter)


# --------------------------------------------------------------------------
# certification helpers
# --------------------------------------------------------------------------

def unit_box(p, sigma: float) -> bool:
    return box_membership(p, 0, sigma)


def initial_boxes_ok(path: PriceSequence, sigma: float) -> bool:
    """``p_01 = 1`` and both ``p_0`` and ``p_1`` in ``[sigma, 1/sigma]``."""
    return bool(abs(path[0][0] - 1.0) <= 1e-12 and unit_box(path[0], sigma)
                and unit_box(path[1], sigma))


def trailing_boxes_ok(path: PriceSequence, j: int, sigma: float) -> bool:
    """``p_j`` and ``p_{j+1}``, scaled by ``p_{j1}``, both in ``[sigma, 1/sigma]``."""
    ref = path[j][0]
    return unit_box(path[j] / ref, sigma) and unit_box(path[j + 1] / ref, sigma)


def box_induction_ok(path: PriceSequence, sigma: float, upto: int | None = None) -> bool:
    """``sigma**t <= p_ti <= sigma**-t`` for every period (``t = 0`` uses the unit box)."""
    n = len(path) if upto is None else upto + 1
    return all(box_membership(path[t], max(t, 1) - 1, sigma) for t in range(n))


def consumption_bound_ok(e: EconomySpec, path: PriceSequence, cleared: int | None = None) -> bool:
    """Average consumption per household is at most ``beta * e_max`` in every
    cleared period ``1..cleared``: young consumption of generations
    ``1..cleared`` and old consumption of generations ``0..cleared-1``."""
    bound = beta_of(e.bundle) * e.bundle.e_max
    last = len(path) - 2 if cleared is None else cleared
    for t in range(last + 1):
        gen = e.generation(t)
        zy, zo = generation_excess(gen, path[t], path[t + 1])
        ey, eo = gen.mean_endowment()
        if t >= 1 and (zy / gen.H + ey).max() > bound * (1 + 1e-12):
            return False
        if t + 1 <= last and (zo / gen.H + eo).max() > bound * (1 + 1e-12):
            return False
    return True


def certify(e: EconomySpec, path: PriceSequence, t: int | None = None) -> float:
    """Residual of ``z_1..z_t`` recomputed from scratch."""
    return float(np.max(np.abs(joint_excess(e, path, t))))


def _distinct(paths: list, tol: float) -> list:
    out = []
    for cand in paths:
        x = cand.prices.flat()
        if all(not (y.size == x.size and np.max(np.abs(x - y)) <= tol * max(np.max(np.abs(x)),
                                                                           np.max(np.abs(y))))
               for y in (c.prices.flat() for c in out)):
            out.append(cand)
    return out


# --------------------------------------------------------------------------
# j-sighted equilibria
# --------------------------------------------------------------------------

def _sample_start(rng: np.random.Generator, dims: list[int], sigma: float) -> np.ndarray:
    x = np.exp(rng.uniform(np.log(sigma), -np.log(sigma), size=sum(dims)))
    x[0] = 1.0
    return x


def solve_j_sighted(e: EconomySpec, j: int, opts: SolveOptions = SolveOptions()) -> list[CandidatePath]:
    """Roots of ``z_1..z_j = 0`` with ``p_01 = 1``, found by multi-start Newton.

    The first start is the all-ones path; the others are drawn log-uniformly
    in ``[sigma, 1/sigma]`` from ``opts.seed``. Returned paths are distinct
    up to ``opts.dedup_tol`` and carry the edge box checks.
    """
    if j < 1:
        raise ValueError("horizon j must be at least 1")
    dims = [e.dims(t) for t in range(j + 2)]
    sigma = e.bundle.sigma
    rng = np.random.default_rng(opts.seed)
    starts = [np.ones(sum(dims))] + [_sample_start(rng, dims, sigma) for _ in range(opts.n_starts - 1)]

    def full(y):
        return np.concatenate([[1.0], y])

    def F(y):
        return joint_excess(e, PriceSequence.from_flat(full(y), dims).prices, j)

    def J(y):
        return joint_excess_jacobian(e, PriceSequence.from_flat(full(y), dims).prices, j)[:, 1:]

    def run(x0):
        try:
            r = newton_root(F, x0[1:], opts, J)
        except DomainError:
            return None
        if not r.converged:
            return None
        prices = PriceSequence.from_flat(full(r.x), dims)
        ok = initial_boxes_ok(prices, sigma) and trailing_boxes_ok(prices, j, sigma)
        return CandidatePath(prices, r.residual, ok)

    if opts.jobs > 1:
        with ThreadPoolExecutor(max_workers=opts.jobs) as pool:
            found = list(pool.map(run, starts))
    else:
        found = [run(x0) for x0 in starts]
    out = _distinct([c for c in found if c is not None], opts.dedup_tol)
    if not out:
        log.warning("no %d-sighted equilibrium found from %d starts", j, len(starts))
    return out


# --------------------------------------------------------------------------
# forward shooting
# --------------------------------------------------------------------------

def forward_shoot(e: EconomySpec, p0, p1, T: int, opts: SolveOptions = SolveOptions()) -> CandidatePath:
    """Extend ``(p_0, p_1)`` to ``p_0..p_T`` by solving ``z_t = 0`` for ``p_{t+1}``.

    Each step must be square (as many goods at ``t+1`` as at ``t``). On a
    failed step the partial path is returned with ``failed_at`` set.
    """
    prices = [np.asarray(p0, dtype=float), np.asarray(p1, dtype=float)]
    sigma = e.bundle.sigma
    if T <= 1:
        ps = PriceSequence(tuple(prices))
        return CandidatePath(ps, 0.0, initial_boxes_ok(ps, sigma))
    notes = []
    failed = None
    for t in range(1, T):
        L_next = e.dims(t + 1)
        if L_next != e.dims(t):
            raise ValueError(f"forward step at t={t} is not square "
                             f"({e.dims(t)} equations, {L_next} unknowns)")
        prev, cur = prices[t - 1], prices[t]

        def F(q, prev=prev, cur=cur, t=t):
            return excess_demand_t(e, t, prev, cur, q)

        def J(q, prev=prev, cur=cur, t=t):
            return excess_demand_t_jacobian(e, t, prev, cur, q)[2]

        guesses = [cur * cur / prev if cur.size == prev.size else cur, cur.copy()]
        sol = None
        for g in guesses:
            try:
                r = newton_root(F, g, opts, J)
            except DomainError:
                continue
            if r.converged:
                sol = r.x
                break
        if sol is None:
            failed = t
            notes.append(f"step solving z_{t} for p_{t + 1} failed")
            break
        prices.append(sol)
    ps = PriceSequence(tuple(prices))
    res = certify(e, ps) if len(ps) >= 3 else 0.0
    return CandidatePath(ps, res, initial_boxes_ok(ps, sigma), failed, tuple(notes))


# --------------------------------------------------------------------------
# closed loop
# --------------------------------------------------------------------------

def star_demand(u: UtilityParams, p0: np.ndarray, wealth: float) -> np.ndarray:
    """Period-0 demand of a household valuing only period-0 goods with weights ``u.lam``."""
    only_young = UtilityParams("loglinear", u.lam, []) if u.kind == "loglinear" \
        else UtilityParams("ces", u.lam, [], u.rho)
    endow = np.zeros(p0.size)
    endow[0] = wealth / p0[0]
    return single_period_demand(only_young, endow, p0)


def solve_closed_loop(e: EconomySpec, k: int, star_utility: UtilityParams,
                      opts: SolveOptions = SolveOptions(), x0=None) -> CandidatePath:
    """Finite closed system tying the seam period back to period 0.

    Generation ``k+1`` belongs to the log-linear tail; tail prices after the
    seam equal ``|p_{k+1}|``. The value the tail generation saves at the seam
    is handed to ``H_{k+1}`` households who spend it on period-0 goods, which
    adds a period-0 market. Unknowns are ``p_0..p_{k+1}`` with ``p_01 = 1``;
    Walras' law makes one equation redundant and the system is solved in
    least squares. The returned path includes the anchor ``p_{k+2}``.
    """
    _, anchor = build_theorem3_tail(e, k)
    ek = anchor.economy
    tail = ek.tail_rule
    half_gap = (e.bundle.e_max - tail.e_min) / 2.0
    dims = [ek.dims(t) for t in range(k + 2)]
    gen0 = ek.generation(0)
    e0_total = sum(c * h.endow_young for h, c in gen0.members)
    H_star = tail.H_tail

    def split(y):
        ps = PriceSequence.from_flat(np.concatenate([[1.0], y]), dims).prices
        return list(ps) + [np.array([ps[-1].sum()])]

    def F(y):
        ps = split(y)
        zy0, _ = generation_excess(gen0, ps[0], ps[1])
        wealth = half_gap * ps[k + 1].sum()
        z0 = zy0 + H_star * star_demand(star_utility, ps[0], wealth)
        return np.concatenate([z0, joint_excess(ek, ps, k + 1)])

    y0 = np.ones(sum(dims) - 1) if x0 is None else np.asarray(x0, float)[1:]
    r = newton_root(F, y0, opts)
    ps = PriceSequence(tuple(split(r.x)))
    notes = () if r.converged else ("closed-loop solve did not converge",)
    return CandidatePath(ps, r.residual, initial_boxes_ok(ps, e.bundle.sigma),
                         None if r.converged else 0, notes)
