"""Closed-form Walrasian demand for CES and log-linear households.

All demand functions accept price arrays with arbitrary leading batch axes;
the last axis indexes goods. Aggregation over a generation multiplies each
distinct household by its count.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .economy import (DomainError, EconomySpec, GenerationSpec, HouseholdSpec,
                      PriceSequence, UtilityParams)


@dataclass(frozen=True)
class DemandResult:
    young: np.ndarray
    old: np.ndarray


def _check_prices(*ps):
    for p in ps:
        if np.any(~(p > 0.0)) or not np.all(np.isfinite(p)):
            raise DomainError("prices must be strictly positive and finite")


@lru_cache(maxsize=4096)
def _weights(u: UtilityParams) -> tuple[np.ndarray, float]:
    """Demand weights ``concat(lam, mu) ** eta`` and the elasticity."""
    w = np.concatenate([u.lam, u.mu])
    if u.kind == "loglinear":
        return w / w.sum(), 1.0
    eta = u.eta
    return w ** eta, eta


def single_period_demand(u: UtilityParams, endow: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Demand over the stacked (young, old) goods at stacked prices ``v``."""
    a, eta = _weights(u)
    wealth = v @ endow
    if eta == 1.0:
        return a * (wealth[..., None] / v)
    # scale prices by their max to keep the powers in range; demand is homogeneous
    scale = v.max(axis=-1, keepdims=True)
    vs = v / scale
    num = a * vs ** (-eta)
    denom = (a * vs ** (1.0 - eta)).sum(axis=-1, keepdims=True)
    return num * (wealth[..., None] / scale) / denom


def single_period_jacobian(u: UtilityParams, endow: np.ndarray, v: np.ndarray) -> np.ndarray:
    """d x_k / d v_j for one household, shape (..., n, n)."""
    x = single_period_demand(u, endow, v)
    eta = _weights(u)[1]
    wealth = (v @ endow)[..., None, None]
    n = v.shape[-1]
    jac = x[..., :, None] * endow[None, :] / wealth
    jac = jac - (1.0 - eta) * x[..., :, None] * x[..., None, :] / wealth
    diag = -eta * x / v
    idx = np.arange(n)
    jac[..., idx, idx] += diag
    return jac


def ces_demand(h: HouseholdSpec, p_young, p_old) -> DemandResult:
    """Utility-maximizing bundle of household ``h`` at prices (p_young, p_old)."""
    p_young = np.asarray(p_young, dtype=float)
    p_old = np.asarray(p_old, dtype=float)
    _check_prices(p_young, p_old)
    L = h.endow_young.size
    x = single_period_demand(h.utility, h.endowment, np.concatenate([p_young, p_old], axis=-1))
    return DemandResult(x[..., :L], x[..., L:])


def gamma_share(u: UtilityParams, p_young, p_old) -> float:
    """Share of lifetime wealth spent when young."""
    p_young = np.asarray(p_young, dtype=float)
    p_old = np.asarray(p_old, dtype=float)
    _check_prices(p_young, p_old)
    if u.kind == "loglinear":
        return float(u.lam.sum() / (u.lam.sum() + u.mu.sum()))
    eta = u.eta
    scale = max(p_young.max(), p_old.max())
    young = np.sum(u.lam ** eta * (p_young / scale) ** (1.0 - eta))
    old = np.sum(u.mu ** eta * (p_old / scale) ** (1.0 - eta))
    return float(young / (young + old))


def gamma_bound(u: UtilityParams, sigma: float) -> float:
    """Upper bound of ``gamma_share`` over prices whose normalized young and
    old vectors both lie in the unit box ``[sigma, 1/sigma]``."""
    eta = u.eta
    lam = np.sum(u.lam ** eta)
    mu = np.sum(u.mu ** eta)
    return float(lam / (lam + sigma ** (2.0 * (eta - 1.0)) * mu))


def real_savings(h: HouseholdSpec, p_young, p_old) -> float:
    """Young-period net supply valued at prices normalized by the all-ones basket."""
    d = ces_demand(h, p_young, p_old)
    p_young = np.asarray(p_young, dtype=float)
    return float(p_young @ (h.endow_young - d.young) / p_young.sum())


def avg_savings(gen: GenerationSpec, p_young, p_old) -> float:
    total = sum(c * real_savings(h, p_young, p_old) for h, c in gen.members)
    return total / gen.H


# --------------------------------------------------------------------------
# aggregate excess demand
# --------------------------------------------------------------------------

def generation_excess(gen: GenerationSpec, p_young, p_old) -> tuple[np.ndarray, np.ndarray]:
    """Aggregate (young, old) excess demand of a generation; batch-capable."""
    p_young = np.asarray(p_young, dtype=float)
    p_old = np.asarray(p_old, dtype=float)
    if p_young.ndim == 1 and p_old.ndim == 1:
        v = np.concatenate([p_young, p_old])
    else:
        batch = np.broadcast_shapes(p_young.shape[:-1], p_old.shape[:-1])
        v = np.concatenate([np.broadcast_to(p_young, batch + p_young.shape[-1:]),
                            np.broadcast_to(p_old, batch + p_old.shape[-1:])], axis=-1)
    L = gen.L
    total = np.zeros(v.shape)
    for h, c in gen.members:
        total += c * (single_period_demand(h.utility, h.endowment, v) - h.endowment)
    return total[..., :L], total[..., L:]


def scalar_old_excess(gen: GenerationSpec, p_old: float):
    """Old-age excess demand of a one-good generation as a function of its
    young-period price (float or array), for fast scalar root finding."""
    terms = []
    for h, c in gen.members:
        a, eta = _weights(h.utility)
        terms.append((float(a[0]), float(a[1]), eta, float(h.endow_young[0]),
                      float(h.endow_old[0]), c))
    q = float(p_old)

    def f(x):
        total = 0.0
        for a_y, a_o, eta, e_y, e_o, c in terms:
            wealth = x * e_y + q * e_o
            if eta == 1.0:
                old = a_o * wealth / q
            else:
                s = np.maximum(x, q)
                xs, qs = x / s, q / s
                old = a_o * qs ** (-eta) * (wealth / s) / (a_y * xs ** (1.0 - eta) + a_o * qs ** (1.0 - eta))
            total = total + c * (old - e_o)
        return total

    return f


def generation_excess_jacobian(gen: GenerationSpec, p_young, p_old) -> np.ndarray:
    """Jacobian of stacked generation excess demand w.r.t. stacked prices."""
    v = np.concatenate([np.asarray(p_young, float), np.asarray(p_old, float)])
    n = v.size
    jac = np.zeros((n, n))
    for h, c in gen.members:
        jac += c * single_period_jacobian(h.utility, h.endowment, v)
    return jac


def excess_demand_t(e: EconomySpec, t: int, p_prev, p_cur, p_next) -> np.ndarray:
    """Excess demand for period-``t`` goods: old generation ``t-1`` plus young generation ``t``."""
    if t < 1:
        raise ValueError("no market clearing equation is defined for period 0")
    p_prev = np.asarray(p_prev, dtype=float)
    p_cur = np.asarray(p_cur, dtype=float)
    p_next = np.asarray(p_next, dtype=float)
    _check_prices(p_prev, p_cur, p_next)
    return _period_excess(e, t, p_prev, p_cur, p_next)


def _period_excess(e: EconomySpec, t: int, p_prev, p_cur, p_next) -> np.ndarray:
    old_gen = e.generation(t - 1)
    young_gen = e.generation(t)
    _, z_old = generation_excess(old_gen, p_prev, p_cur)
    z_young, _ = generation_excess(young_gen, p_cur, p_next)
    return z_old + z_young


def excess_demand_t_jacobian(e: EconomySpec, t: int, p_prev, p_cur, p_next):
    """Blocks (d/dp_prev, d/dp_cur, d/dp_next) of the period-``t`` excess demand."""
    old_gen = e.generation(t - 1)
    young_gen = e.generation(t)
    Lp, Lc = old_gen.L, young_gen.L
    j_old = generation_excess_jacobian(old_gen, p_prev, p_cur)[Lp:]
    j_young = generation_excess_jacobian(young_gen, p_cur, p_next)[:Lc]
    return j_old[:, :Lp], j_old[:, Lp:] + j_young[:, :Lc], j_young[:, Lc:]


def _as_list(p):
    if isinstance(p, PriceSequence):
        return list(p.prices)
    return [np.asarray(x, dtype=float) for x in p]


def joint_excess(e: EconomySpec, p, t: int | None = None) -> np.ndarray:
    """Concatenated excess demand ``(z_1, ..., z_t)``; ``p`` must reach period ``t+1``."""
    ps = _as_list(p)
    if t is None:
        t = len(ps) - 2
    if t + 1 >= len(ps) or t < 1:
        raise ValueError(f"joint excess up to t={t} needs prices through period {t + 1}, "
                         f"got {len(ps)} periods")
    _check_prices(*ps[:t + 2])
    return np.concatenate([_period_excess(e, s, ps[s - 1], ps[s], ps[s + 1])
                           for s in range(1, t + 1)])


def joint_excess_jacobian(e: EconomySpec, p, t: int | None = None) -> np.ndarray:
    """Jacobian of ``joint_excess`` w.r.t. the flattened prices ``p_0..p_{t+1}``."""
    ps = _as_list(p)
    if t is None:
        t = len(ps) - 2
    dims = [x.size for x in ps[:t + 2]]
    offs = np.concatenate([[0], np.cumsum(dims)])
    jac = np.zeros((offs[t + 1] - offs[1], offs[t + 2]))
    row = 0
    for s in range(1, t + 1):
        blocks = excess_demand_t_jacobian(e, s, ps[s - 1], ps[s], ps[s + 1])
        n = blocks[0].shape[0]
        for b, col in zip(blocks, (s - 1, s, s + 1)):
            jac[row:row + n, offs[col]:offs[col + 1]] += b
        row += n
    return jac
