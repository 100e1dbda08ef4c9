"""Efficiency diagnostics for computed equilibrium paths.

An equilibrium is efficient exactly when the sum of ``1 / (H_t |p_t|)``
diverges. In economies prone to savings this is decided by real savings:
average savings at or below ``delta`` in some period force prices to grow
geometrically from then on, so the path is inefficient. Finite data cannot
show divergence, so an efficient verdict also needs an analytic argument
about the tail.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .demand import avg_savings, excess_demand_t, gamma_bound
from .economy import (AssumptionBundle, EconomySpec, GenerationSpec, PriceSequence,
                      StationaryRepeat, Theorem3Tail)
from .solver import CERT_TOL, CandidatePath, certify


class Verdict(str, Enum):
    EFFICIENT = "Efficient"
    INEFFICIENT = "Inefficient"
    UNDETERMINED = "Undetermined"


@dataclass
class DiagnosticsReport:
    savings: list[float]
    cass_partials: list[float]
    verdict: Verdict
    prone_margin: float | None = None
    notes: list[str] = field(default_factory=list)
    recursion_residual: list[float] = field(default_factory=list)
    growth_trigger: int | None = None
    growth_bound_ok: bool | None = None

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "savings": [float(s) for s in self.savings],
            "cass_partials": [float(s) for s in self.cass_partials],
            "prone_margin": None if self.prone_margin is None else float(self.prone_margin),
            "recursion_residual": [float(r) for r in self.recursion_residual],
            "growth_trigger": self.growth_trigger,
            "growth_bound_ok": self.growth_bound_ok,
            "notes": list(self.notes),
        }


def _prices(path) -> PriceSequence:
    if isinstance(path, CandidatePath):
        return path.prices
    if isinstance(path, PriceSequence):
        return path
    return PriceSequence(tuple(path))


# --------------------------------------------------------------------------
# Cass sums and savings
# --------------------------------------------------------------------------

def cass_partial_sums(p, H, T: int | None = None) -> np.ndarray:
    """Partial sums ``S_T = sum_{t<=T} 1 / (H_t |p_t|_1)``."""
    ps = _prices(p)
    T = len(ps) - 1 if T is None else T
    if T >= len(ps):
        raise ValueError(f"horizon {T} exceeds the {len(ps)} available periods")
    H = np.broadcast_to(np.asarray(H, dtype=float), (len(ps),))[:T + 1]
    return np.cumsum(1.0 / (H * ps.norms()[:T + 1]))


def savings_path(e: EconomySpec, p) -> np.ndarray:
    """Average real savings of generations ``0..T-1`` on prices ``p_0..p_T``."""
    ps = _prices(p)
    return np.array([avg_savings(e.generation(t), ps[t], ps[t + 1]) for t in range(len(ps) - 1)])


def savings_recursion_residual(e: EconomySpec, p) -> np.ndarray:
    """Residuals of ``s_{t+1} = |p_t| / (alpha_t |p_{t+1}|) * s_t`` for ``t = 0..T-2``."""
    ps = _prices(p)
    s = savings_path(e, ps)
    norms = ps.norms()
    out = []
    for t in range(len(s) - 1):
        factor = norms[t] / (e.alpha(t) * norms[t + 1])
        out.append(s[t + 1] - factor * s[t])
    return np.array(out)


def geometric_growth_bound(e: EconomySpec, p, bundle: AssumptionBundle | None = None):
    """Geometric price growth after the first period with savings at most ``delta``.

    Returns ``(trigger, ok, slack)``: the first such period (or ``None``),
    whether ``1/(H_{t+i}|p_{t+i}|) <= (1+eps)**-i / (H_t |p_t|)`` holds on
    every computed period, and the per-period slack of that inequality.
    """
    b = bundle or e.bundle
    ps = _prices(p)
    s = savings_path(e, ps)
    below = np.nonzero(s <= b.delta)[0]
    if below.size == 0:
        return None, None, []
    t0 = int(below[0])
    base = e.H(t0) * ps.norms()[t0]
    slack = []
    for i in range(len(ps) - t0):
        t = t0 + i
        lhs = 1.0 / (e.H(t) * ps.norms()[t])
        rhs = (1.0 + b.epsilon) ** (-i) / base
        slack.append(rhs - lhs)
    ok = all(sl >= -1e-12 * (1.0 / base) for sl in slack)
    return t0, ok, slack


# --------------------------------------------------------------------------
# prone to savings
# --------------------------------------------------------------------------

@dataclass
class ProneResult:
    applicable: bool
    prone: bool
    margin: float | None
    per_t: list[float] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)


def _covered_generations(e: EconomySpec) -> tuple[list[GenerationSpec], list[float], list[str]]:
    """Generations whose margins determine the infimum, with their growth rates.

    The prefix plus one representative of a stationary tail, or the first two
    generations of a log-linear tail, cover every distinct term.
    """
    notes = []
    last = len(e.prefix) - 1
    rule = e.tail_rule
    if isinstance(rule, StationaryRepeat):
        upto = last + 1
    elif isinstance(rule, Theorem3Tail):
        upto = max(last, rule.k) + 2
    else:
        upto = last - 1
        if rule is not None:
            notes.append("tail rule does not generate generations; infimum over the prefix only")
        else:
            notes.append("no tail rule; infimum over the prefix only")
    gens, alphas = [], []
    for t in range(upto + 1):
        gens.append(e.generation(t))
        alphas.append(e.alpha(t))
    return gens, alphas, notes


def _margin_terms(e: EconomySpec):
    gens, alphas, notes = _covered_generations(e)
    sigma = e.bundle.sigma
    per_t = []
    for gen, a in zip(gens, alphas):
        utils = {h.utility for h in gen.households()}
        if len(utils) != 1:
            return None, [f"generation {gen.t} mixes utilities; the bound needs one per generation"]
        u = utils.pop()
        young, old = gen.mean_endowment()
        if u.kind == "loglinear":
            total = u.lam.sum() + u.mu.sum()
            gamma = u.lam.sum() / total
        else:
            gamma = gamma_bound(u, sigma)
        per_t.append((1.0 - gamma) * young.min() - gamma * np.max(np.abs(old)) / a)
    return per_t, notes


def check_prone_ces(e: EconomySpec) -> ProneResult:
    """Sufficient condition for being prone to savings, CES family.

    Log-linear generations enter with elasticity one, where the share bound
    no longer depends on ``sigma``.
    """
    per_t, notes = _margin_terms(e)
    if per_t is None:
        return ProneResult(False, False, None, [], notes)
    if not per_t:
        return ProneResult(False, False, None, [], notes + ["no generation covered"])
    margin = float(min(per_t))
    return ProneResult(True, margin > 0.0, margin, [float(v) for v in per_t], notes)


def check_prone_loglinear(e: EconomySpec) -> ProneResult:
    """Sufficient condition for log-linear economies, with weights rescaled to sum to one."""
    for t in range(len(e.prefix)):
        for h in e.generation(t).households():
            if h.utility.kind != "loglinear":
                return ProneResult(False, False, None, [],
                                   [f"generation {t} has a non-log-linear household"])
    return check_prone_ces(e)


def threshold_implication_holds(gen: GenerationSpec, bundle: AssumptionBundle, alpha: float,
                                rates) -> bool:
    """On each return rate ``r = |p_t| / |p_{t+1}|`` of the grid, savings at or
    below ``delta`` must come with ``r <= alpha / (1 + epsilon)``."""
    L, L_next = gen.L, gen.L_next
    bound = alpha / (1.0 + bundle.epsilon)
    for r in np.asarray(rates, dtype=float):
        s = avg_savings(gen, np.full(L, r / L), np.full(L_next, 1.0 / L_next))
        if s <= bundle.delta and r > bound * (1 + 1e-12):
            return False
    return True


# --------------------------------------------------------------------------
# classification
# --------------------------------------------------------------------------

def _tail_keeps_savings(e: EconomySpec, ps: PriceSequence, s_floor: float) -> tuple[bool, str]:
    rule = e.tail_rule
    T = len(ps) - 1
    if isinstance(rule, Theorem3Tail) and T >= rule.k + 2:
        tail_s = (e.bundle.e_max - rule.e_min) / 2.0
        if tail_s >= s_floor:
            return True, f"log-linear tail keeps savings at {tail_s:.6g}"
        return False, "log-linear tail savings below the threshold"
    if isinstance(rule, StationaryRepeat) and T >= 2 and T - 1 >= len(e.prefix):
        prev, last = ps[T - 1], ps[T]
        ratio = last / prev
        c = float(ratio[0])
        if np.max(np.abs(ratio - c)) > 1e-12 * c or prev.size != last.size:
            return False, "last two prices are not proportional"
        z = excess_demand_t(e, T, prev, last, c * last)
        s = avg_savings(e.generation(T), last, c * last)
        if np.max(np.abs(z)) <= CERT_TOL and s >= s_floor:
            return True, f"stationary continuation at growth {c:.12g} clears markets, savings {s:.6g}"
        return False, "stationary continuation does not clear markets with enough savings"
    return False, "no analytic tail argument available"


def classify(e: EconomySpec, path, bundle: AssumptionBundle | None = None,
             margin_guard: float = 1e-6, notes: list | None = None) -> Verdict:
    """Efficiency verdict for a certified path.

    Inefficient when average savings fall to ``delta`` in a computed period;
    efficient when they stay above ``delta + margin_guard`` and the tail
    provably keeps them there; undetermined otherwise.
    """
    b = bundle or e.bundle
    ps = _prices(path)
    if len(ps) >= 3:
        res = certify(e, ps)
        if res > CERT_TOL:
            raise ValueError(f"path is not a certified equilibrium (residual {res:.3g})")
    s = savings_path(e, ps)
    if np.any(s <= b.delta):
        return Verdict.INEFFICIENT
    if np.all(s >= b.delta + margin_guard):
        ok, why = _tail_keeps_savings(e, ps, b.delta + margin_guard)
        if notes is not None:
            notes.append(why)
        if ok:
            return Verdict.EFFICIENT
    return Verdict.UNDETERMINED


def diagnose(e: EconomySpec, path, bundle: AssumptionBundle | None = None,
             margin_guard: float = 1e-6) -> DiagnosticsReport:
    b = bundle or e.bundle
    ps = _prices(path)
    notes: list[str] = []
    verdict = classify(e, ps, b, margin_guard, notes)
    H = [e.H(t) for t in range(len(ps))]
    prone = check_prone_ces(e)
    notes.extend(prone.notes)
    if prone.applicable and not prone.prone:
        notes.append("prone-to-savings sufficient condition not certified")
    t0, ok, _ = geometric_growth_bound(e, ps, b)
    return DiagnosticsReport(
        savings=list(savings_path(e, ps)),
        cass_partials=list(cass_partial_sums(ps, H)),
        verdict=verdict,
        prone_margin=prone.margin if prone.applicable else None,
        notes=notes,
        recursion_residual=list(savings_recursion_residual(e, ps)),
        growth_trigger=t0,
        growth_bound_ok=ok,
    )
