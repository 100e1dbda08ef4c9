"""Classical economies whose initial old generation holds money.

The initial old households only consume in period 1. To reach a
Pareto-optimal equilibrium, each of them is extended back to a synthetic
period 0 with one good: utility ``zeta * ln(c_0 / e_max) + u(c_1)`` and
endowment ``(e_max, e_old)``. An equilibrium of the extended economy, read
from period 1 on, is an equilibrium of the classical economy once each old
household's money holding is replaced by ``e_max - x_0``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .demand import excess_demand_t, generation_excess, joint_excess
from .economy import (AssumptionBundle, EconomySpec, GenerationSpec, HouseholdSpec,
                      PriceSequence, UtilityParams)
from .solver import CERT_TOL


@dataclass(frozen=True, eq=False)
class OldHousehold:
    """Initial old household: period-1 endowment, log-linear weights over
    period-1 goods and a money holding in period-0 units."""

    endow: np.ndarray
    mu: np.ndarray
    money: float
    count: int = 1

    def __post_init__(self):
        object.__setattr__(self, "endow", np.asarray(self.endow, dtype=float).reshape(-1))
        object.__setattr__(self, "mu", np.asarray(self.mu, dtype=float).reshape(-1))


@dataclass(frozen=True)
class ClassicalEconomy:
    """Initial old generation plus the generations born at ``t >= 1``.

    ``later`` holds generations ``1..T`` (their ``t`` fields start at 1);
    ``tail_rule`` continues them as in ``EconomySpec``.
    """

    bundle: AssumptionBundle
    old: tuple[OldHousehold, ...]
    later: tuple[GenerationSpec, ...]
    tail_rule: object = None
    resource_related: bool = True

    @property
    def H0(self) -> int:
        return sum(h.count for h in self.old)


def extend_classical(e2: ClassicalEconomy, zeta: float) -> EconomySpec:
    """Economy whose generation 0 is the old generation extended back to period 0."""
    if not zeta > 0:
        raise ValueError(f"zeta must be positive, got {zeta}")
    e_max = e2.bundle.e_max
    members = []
    L1 = e2.later[0].L if e2.later else None
    for h in e2.old:
        if np.any(h.mu <= 0):
            raise ValueError("old-age utility must be log-linear with positive weights")
        if L1 is not None and h.endow.size != L1:
            raise ValueError("old endowment does not match the number of period-1 goods")
        u = UtilityParams.loglinear([zeta], h.mu)
        members.append((HouseholdSpec([e_max], h.endow, u), h.count))
    gen0 = GenerationSpec(0, 1, members[0][0].endow_old.size, tuple(members))
    return EconomySpec(e2.bundle, (gen0,) + tuple(e2.later), e2.tail_rule, e2.resource_related)


def compute_transfers(e2: ClassicalEconomy, zeta: float, solved) -> np.ndarray:
    """Money transfers ``m' - m`` with ``m' = e_max - x_0(1, p_1)`` per old household."""
    ps = solved.prices if hasattr(solved, "prices") else solved
    ext = extend_classical(e2, zeta)
    if len(ps) >= 3:
        res = float(np.max(np.abs(joint_excess(ext, ps))))
        if res > CERT_TOL:
            raise ValueError(f"prices are not a certified equilibrium (residual {res:.3g})")
    if abs(ps[0][0] - 1.0) > 1e-12:
        raise ValueError("period-0 price must be normalized to one")
    return new_money(e2, zeta, ps) - np.array([h.money for h in e2.old])


def new_money(e2: ClassicalEconomy, zeta: float, ps) -> np.ndarray:
    """Money holdings ``e_max - x_0(1, p_1)`` replicating the extended demand."""
    e_max = e2.bundle.e_max
    p1 = np.asarray(ps[1], dtype=float)
    out = []
    for h in e2.old:
        wealth = e_max + p1 @ h.endow
        x0 = zeta / (zeta + h.mu.sum()) * wealth
        out.append(e_max - x0)
    return np.array(out)


def old_demand(h: OldHousehold, p1, money: float) -> np.ndarray:
    """Log-linear period-1 demand with budget ``p_1 . c <= p_1 . e + money``."""
    p1 = np.asarray(p1, dtype=float)
    budget = p1 @ h.endow + money
    return h.mu / h.mu.sum() * budget / p1


def classical_excess(e2: ClassicalEconomy, money, ps, T: int | None = None) -> np.ndarray:
    """Market-clearing residuals of periods ``1..T`` of the classical economy.

    ``ps`` is indexed from period 0 (the entry at 0 is ignored) so paths of
    the extended economy can be passed directly.
    """
    ps = ps.prices if hasattr(ps, "prices") else ps
    T = len(ps) - 2 if T is None else T
    ext = extend_classical(e2, 1.0)
    z1 = sum(h.count * (old_demand(h, ps[1], m) - h.endow) for h, m in zip(e2.old, money))
    z1 = z1 + generation_excess(ext.generation(1), ps[1], ps[2])[0]
    # from period 2 on the initial generation no longer trades
    rest = [excess_demand_t(ext, t, ps[t - 1], ps[t], ps[t + 1]) for t in range(2, T + 1)]
    return np.concatenate([z1] + rest)


def claim_holds(e2: ClassicalEconomy, zeta: float, ps) -> bool:
    """Savings of the extended old generation at or below ``delta`` must come with
    ``1 / |p_1| <= alpha_0 / (1 + epsilon)`` on the solved path."""
    b = e2.bundle
    x0 = e2.bundle.e_max - new_money(e2, zeta, ps)
    counts = np.array([h.count for h in e2.old])
    avg = float(np.sum(counts * (b.e_max - x0)) / counts.sum())
    alpha0 = e2.later[0].H / e2.H0
    if avg <= b.delta:
        return 1.0 / np.sum(ps[1]) <= alpha0 / (1.0 + b.epsilon)
    return True


def select_zeta(e2: ClassicalEconomy, solve, zeta0: float = 1.0, max_halvings: int = 30):
    """Halve ``zeta`` until ``claim_holds`` on the path returned by ``solve(economy)``.

    ``solve`` maps an extended economy to a price path (or ``None``).
    Returns ``(zeta, path)``.
    """
    zeta = zeta0
    for _ in range(max_halvings):
        path = solve(extend_classical(e2, zeta))
        if path is not None and claim_holds(e2, zeta, path):
            return zeta, path
        zeta /= 2.0
    raise RuntimeError("no admissible zeta found")
