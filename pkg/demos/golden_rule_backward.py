"""
Backward calculation on the square-root economy
===============================================

Each generation lives two periods, is endowed with 4 units when young and
0.8 when old, and has utility sqrt(c_young) + sqrt(0.6) sqrt(c_old).
Closing the economy after period k with a tail that earns the return rate
w and solving the market-clearing equations backward gives return rates
r_0, ..., r_k. Whatever w is, r_0 approaches 1 as k grows, which is the
constant-price (golden-rule) equilibrium.
"""

import numpy as np

from olg_forge import (GaleTail, approximate_hpo, closed_form_rates, example1_economy,
                       gale_family, run_backward)

e = example1_economy()

# one backward run per tail rate; the first rate is driven towards 1
for w in (0.7, 2.0, 3.0):
    run = run_backward(e, GaleTail(w), 50)[0]
    r = run.rates
    print(f"w={w}: r_50={r[50]:.6f}  r_25={r[25]:.6f}  r_0={r[0]:.15f}")

    # the scalar recursion also has a closed form; the root finder agrees with it
    gap = np.max(np.abs(r - closed_form_rates(w, 50)))
    print(f"       root finder vs closed form: {gap:.1e}")

# letting k grow along a schedule detects the limit path
res = approximate_hpo(e, gale_family(2.0), range(10, 101, 10))
print()
print("horizon  window  change in leading prices")
for entry in res.trace:
    diff = "" if entry.diff is None else f"{entry.diff:.2e}"
    print(f"{entry.k:7d}  {entry.window:6d}  {diff}")
print(f"converged={res.converged} at k={res.converged_at}, "
      f"max |p_t - 1| = {np.max(np.abs(res.prices.flat() - 1)):.1e}")
print(f"verdict on the limit: {res.diagnostics.verdict.value}")
