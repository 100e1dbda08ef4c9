"""The scalar golden-rule economy.

One good per period, one household per generation, endowment (4, 0.8) and
utility ``sqrt(c_young) + sqrt(3 c_old / 5)``, i.e. CES with ``rho = 1/2``,
``lam = 1``, ``mu = sqrt(3/5)``.

With ``r_t = p_t / p_{t+1}`` the young generation saves ``phi(r_t)`` and
market clearing reads ``r_{t-1} phi(r_{t-1}) = phi(r_t)``; ``psi`` inverts
``r -> r phi(r)``, so the backward map is ``r_{t-1} = psi(phi(r_t))``.
"""
from __future__ import annotations

import math

import numpy as np

from .economy import (AssumptionBundle, EconomySpec, GenerationSpec, HouseholdSpec,
                      StationaryRepeat, UtilityParams)

ENDOWMENT = (4.0, 0.8)
MU = math.sqrt(3.0 / 5.0)
AUTARKY_RATE = math.sqrt(3.0) / 3.0


def phi(r):
    """Savings of a young household facing the gross rate ``r``."""
    r = np.asarray(r, dtype=float)
    return (12.0 * r * r - 4.0) / (3.0 * r * r + 5.0 * r)


def psi(y):
    """Inverse of ``r -> r * phi(r)`` on ``r > 0``."""
    y = np.asarray(y, dtype=float)
    return (3.0 * y + np.sqrt(9.0 * y * y + 240.0 * y + 192.0)) / 24.0


def backward_map(r):
    return psi(phi(r))


def closed_form_rates(w: float, k: int) -> np.ndarray:
    """Rates ``r_0..r_k`` of the backward recursion started from ``r_{k+1} = w``."""
    out = np.empty(k + 1)
    r = float(w)
    for t in range(k, -1, -1):
        r = float(backward_map(r))
        out[t] = r
    return out


def savings_threshold_rate(delta: float) -> float:
    """Largest rate at which savings do not exceed ``delta``: root of ``phi(r) = delta``."""
    a = 12.0 - 3.0 * delta
    return (5.0 * delta + math.sqrt(25.0 * delta * delta + 16.0 * a)) / (2.0 * a)


def example1_household() -> HouseholdSpec:
    u = UtilityParams.ces([1.0], [MU], 0.5)
    return HouseholdSpec([ENDOWMENT[0]], [ENDOWMENT[1]], u)


def example1_bundle(delta: float = 0.5, epsilon: float = 0.3) -> AssumptionBundle:
    """Constants compatible with the economy.

    ``sigma = 0.05`` keeps aggregate demand above the total endowment at
    border prices; the default ``epsilon`` satisfies
    ``1/(1+epsilon) >= savings_threshold_rate(delta)``.
    """
    return AssumptionBundle(alpha_min=0.5, alpha_max=2.0, e_max=4.0, sigma=0.05,
                            epsilon=epsilon, delta=delta)


def example1_economy(bundle: AssumptionBundle | None = None) -> EconomySpec:
    gen = GenerationSpec.identical(0, example1_household())
    return EconomySpec(bundle or example1_bundle(), (gen,), StationaryRepeat(gen), True)
