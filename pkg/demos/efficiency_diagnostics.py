"""
Telling efficient from inefficient equilibria
=============================================

Forward shooting from a first return rate below 1 gives an equilibrium in
which real savings fall and prices grow geometrically, so the sum of
1 / |p_t| converges and the allocation is inefficient. The constant path
keeps savings at 1 and the sum diverges.
"""

import numpy as np

from olg_forge import (PriceSequence, cass_partial_sums, check_prone_ces, diagnose,
                       example1_economy, forward_shoot, savings_threshold_rate,
                       threshold_implication_holds)

e = example1_economy()
delta = e.bundle.delta

# the generic sufficient margin is conservative: with a wide price box it is negative here
prone = check_prone_ces(e)
print(f"sufficient margin: {prone.margin:.4f}")

# checking the implication directly: savings reach delta only at rates below
# r* ~ 0.7476, which is under 1 / (1 + epsilon), so the economy is prone to savings
r_star = savings_threshold_rate(delta)
rates = np.geomspace(0.1, 10, 2001)
holds = threshold_implication_holds(e.generation(0), e.bundle, 1.0, rates)
print(f"r* = {r_star:.4f}, 1/(1+epsilon) = {1 / (1 + e.bundle.epsilon):.4f}, implication holds: {holds}")

path = forward_shoot(e, [1.0], [1 / 0.9], 40)
rep = diagnose(e, path)
s = np.array(rep.savings)
print(f"\nr_0 = 0.9: residual {path.residual:.1e}")
print("t    savings    Cass partial sum")
for t in (0, 2, 4, 8, 16, 32, 39):
    print(f"{t:2d}  {s[t]:9.5f}  {rep.cass_partials[t]:10.6f}")
print(f"savings first drop to delta={delta} at t={rep.growth_trigger}; "
      f"geometric price growth bound holds afterwards: {rep.growth_bound_ok}")
print(f"verdict: {rep.verdict.value}")

# the savings recursion s_{t+1} = |p_t| / |p_{t+1}| s_t holds on any equilibrium
print(f"largest savings-recursion residual: {np.max(np.abs(rep.recursion_residual)):.1e}")

const = PriceSequence(tuple(np.ones((41, 1))))
rep = diagnose(e, const)
print(f"\nconstant path: savings {rep.savings[0]:.3f}, "
      f"S_40 = {cass_partial_sums(const, 1)[-1]:.0f}, verdict {rep.verdict.value}")
