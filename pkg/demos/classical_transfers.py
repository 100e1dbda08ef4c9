"""
Money transfers that reach an efficient equilibrium
===================================================

A classical economy starts with an old generation holding money. Extending
each old household back to a synthetic period 0 gives an economy whose
efficient equilibrium can be computed by backward calculation. Reading that
equilibrium from period 1 on, and giving each old household the money it
would have carried out of period 0, yields transfers under which the
classical economy clears every market at efficient prices.
"""

import numpy as np

from olg_forge import (AssumptionBundle, ClassicalEconomy, GenerationSpec, HouseholdSpec,
                       OldHousehold, StationaryRepeat, UtilityParams, approximate_hpo,
                       classical_excess, compute_transfers, select_zeta, theorem3_family)

bundle = AssumptionBundle(0.5, 2.0, 4.0, 0.05, 0.3, 0.5)
young = HouseholdSpec([4.0], [0.8], UtilityParams.loglinear([0.5], [0.5]))
g = GenerationSpec(1, 1, 1, ((young, 2),))
old = (OldHousehold([1.0], [1.0], money=0.7), OldHousehold([0.5], [1.0], money=0.3))
e2 = ClassicalEconomy(bundle, old, (g,), StationaryRepeat(g))


def solve(extended):
    res = approximate_hpo(extended, theorem3_family(extended), range(10, 101, 10))
    return res.prices if res.converged else None


zeta, prices = select_zeta(e2, solve)
tau = compute_transfers(e2, zeta, prices)
money = np.array([h.money for h in old]) + tau
print(f"zeta = {zeta}")
print(f"money before: {[h.money for h in old]}, transfers: {np.round(tau, 6)}, "
      f"after: {np.round(money, 6)}")

before = np.max(np.abs(classical_excess(e2, [h.money for h in old], prices)))
after = np.max(np.abs(classical_excess(e2, money, prices)))
print(f"largest excess demand at the efficient prices: before {before:.3f}, after {after:.1e}")
