"""Equilibria of nonstationary overlapping-generations exchange economies.

Build an economy, run the backward algorithm along growing horizons, and
check the efficiency of the limit path::

    from olg_forge import example1_economy, approximate_hpo, gale_family

    e = example1_economy()
    res = approximate_hpo(e, gale_family(0.7), range(10, 101, 10))
    res.prices[:3], res.diagnostics.verdict
"""
__version__ = "0.1.0"

from .backward import (BackwardRun, HPOResult, approximate_hpo, backward_step, gale_family,
                       run_backward, theorem3_family)
from .classical import (ClassicalEconomy, OldHousehold, classical_excess, compute_transfers,
                        extend_classical, select_zeta)
from .demand import (DemandResult, avg_savings, ces_demand, excess_demand_t, gamma_bound,
                     gamma_share, joint_excess, real_savings)
from .diagnostics import (DiagnosticsReport, Verdict, cass_partial_sums, check_prone_ces,
                          check_prone_loglinear, classify, diagnose, geometric_growth_bound,
                          savings_recursion_residual, threshold_implication_holds)
from .economy import (AssumptionBundle, DomainError, EconomySpec, GaleTail, GenerationSpec,
                      HouseholdSpec, PriceSequence, StationaryRepeat, Theorem3Tail,
                      UtilityParams, ValidationReport, beta_of, box_membership, validate_spec)
from .example1 import (closed_form_rates, example1_bundle, example1_economy, phi, psi,
                       savings_threshold_rate)
from .solver import (CandidatePath, SolveOptions, certify, forward_shoot, newton_root,
                     solve_closed_loop, solve_j_sighted)
from .tails import build_gale_tail, build_theorem3_tail
