"""Data model for two-period overlapping-generations exchange economies.

An economy is a finite list of explicit generations (the prefix) followed by
an optional rule that generates every later generation. Households carry CES
or log-linear utilities; identical households are stored once with a count.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np


class DomainError(ValueError):
    """A function was evaluated outside its domain (e.g. nonpositive prices)."""


def _frozen_array(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float).reshape(-1)
    arr.flags.writeable = False
    return arr


# --------------------------------------------------------------------------
# uniform constants
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class AssumptionBundle:
    """Uniform bounds shared by an economy and all of its truncations.

    ``alpha_min``/``alpha_max`` bound demographic growth, ``e_max`` bounds
    every endowment in max-norm, ``sigma`` fixes the price boxes and
    ``epsilon``/``delta`` are the savings-threshold constants.
    """

    alpha_min: float
    alpha_max: float
    e_max: float
    sigma: float
    epsilon: float
    delta: float

    @property
    def beta(self) -> float:
        return beta_of(self)

    def violations(self) -> list[str]:
        out = []
        if not (0.0 < self.alpha_min < 1.0 < self.alpha_max):
            out.append(f"bundle: need 0 < alpha_min < 1 < alpha_max, got "
                       f"alpha_min={self.alpha_min}, alpha_max={self.alpha_max}")
        if not (0.0 < self.sigma < 1.0):
            out.append(f"bundle: sigma must lie in (0, 1), got {self.sigma}")
        for name in ("e_max", "epsilon", "delta"):
            if not getattr(self, name) > 0.0:
                out.append(f"bundle: {name} must be positive, got {getattr(self, name)}")
        return out


def beta_of(bundle: AssumptionBundle) -> float:
    """Return ``max(1 + 1/alpha_min, 1 + alpha_max)``."""
    return max(1.0 + 1.0 / bundle.alpha_min, 1.0 + bundle.alpha_max)


def box_membership(p, n: int, sigma: float) -> bool:
    """True iff every coordinate of ``p`` lies in ``[sigma**(n+1), sigma**-(n+1)]``.

    The box does not depend on the period, only on the exponent level ``n``.
    """
    p = np.asarray(p, dtype=float)
    if np.any(p <= 0.0) or not np.all(np.isfinite(p)):
        raise DomainError("box membership is defined for strictly positive prices")
    lo = sigma ** (n + 1)
    hi = sigma ** (-(n + 1))
    return bool(np.all((p >= lo) & (p <= hi)))


# --------------------------------------------------------------------------
# households and generations
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class UtilityParams:
    """CES or log-linear utility over (young goods, old goods).

    CES: ``(sum lam_i c_i**rho + sum mu_j c_j**rho) ** (1/rho)`` with
    ``rho`` in (0, 1). Log-linear: ``sum lam_i ln c_i + sum mu_j ln c_j``.
    Demand is invariant to positive rescaling of the weights, so the
    ``|lam| + |mu| = 1`` normalization is reported rather than enforced.
    """

    kind: str
    lam: np.ndarray
    mu: np.ndarray
    rho: float | None = None

    def __post_init__(self):
        if self.kind not in ("ces", "loglinear"):
            raise ValueError(f"unknown utility kind {self.kind!r}")
        object.__setattr__(self, "lam", _frozen_array(self.lam, "lam"))
        object.__setattr__(self, "mu", _frozen_array(self.mu, "mu"))
        if self.kind == "ces":
            if self.rho is None:
                raise ValueError("CES utility needs rho")
            object.__setattr__(self, "rho", float(self.rho))
        elif self.rho is not None:
            raise ValueError("log-linear utility takes no rho")

    @classmethod
    def ces(cls, lam, mu, rho: float) -> "UtilityParams":
        return cls("ces", lam, mu, rho)

    @classmethod
    def loglinear(cls, lam, mu) -> "UtilityParams":
        return cls("loglinear", lam, mu)

    @property
    def eta(self) -> float:
        """Elasticity of substitution; 1 for the log-linear member."""
        if self.kind == "loglinear":
            return 1.0
        return 1.0 / (1.0 - self.rho)

    @property
    def is_normalized(self) -> bool:
        return bool(abs(self.lam.sum() + self.mu.sum() - 1.0) <= 1e-12)

    def violations(self) -> list[str]:
        out = []
        if np.any(self.lam <= 0) or np.any(self.mu <= 0):
            out.append("utility weights must be strictly positive")
        if self.kind == "ces" and not (0.0 < self.rho < 1.0):
            out.append(f"CES rho must lie in (0, 1), got {self.rho}")
        return out

    def key(self) -> tuple:
        return (self.kind, tuple(self.lam), tuple(self.mu), self.rho)

    def __eq__(self, other):
        return isinstance(other, UtilityParams) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())


@dataclass(frozen=True, eq=False)
class HouseholdSpec:
    endow_young: np.ndarray
    endow_old: np.ndarray
    utility: UtilityParams

    def __post_init__(self):
        object.__setattr__(self, "endow_young", _frozen_array(self.endow_young, "endow_young"))
        object.__setattr__(self, "endow_old", _frozen_array(self.endow_old, "endow_old"))

    @property
    def dims(self) -> tuple[int, int]:
        return self.endow_young.size, self.endow_old.size

    @property
    def endowment(self) -> np.ndarray:
        return np.concatenate([self.endow_young, self.endow_old])

    def key(self) -> tuple:
        return (tuple(self.endow_young), tuple(self.endow_old), self.utility.key())

    def __eq__(self, other):
        return isinstance(other, HouseholdSpec) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())


@dataclass(frozen=True)
class GenerationSpec:
    """Households born in period ``t``; ``members`` pairs each distinct
    household with its multiplicity."""

    t: int
    L: int
    L_next: int
    members: tuple[tuple[HouseholdSpec, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "members", tuple((h, int(c)) for h, c in self.members))

    @classmethod
    def identical(cls, t: int, household: HouseholdSpec, count: int = 1) -> "GenerationSpec":
        L, L_next = household.dims
        return cls(t, L, L_next, ((household, count),))

    @property
    def H(self) -> int:
        return sum(c for _, c in self.members)

    def households(self) -> list[HouseholdSpec]:
        return [h for h, _ in self.members]

    def mean_endowment(self) -> tuple[np.ndarray, np.ndarray]:
        H = self.H
        young = sum(c * h.endow_young for h, c in self.members) / H
        old = sum(c * h.endow_old for h, c in self.members) / H
        return young, old

    def shifted(self, t: int) -> "GenerationSpec":
        return GenerationSpec(t, self.L, self.L_next, self.members)


# --------------------------------------------------------------------------
# tail rules
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class StationaryRepeat:
    """Every generation after the prefix is a copy of ``generation``."""

    generation: GenerationSpec


@dataclass(frozen=True)
class Theorem3Tail:
    """Log-linear tail closing the economy after seam period ``k``.

    The first tail generation is born at ``k + 1`` with ``L_seam`` young goods
    and one old good; later ones have one good per period. All tail
    generations have ``H_tail`` identical households.
    """

    k: int
    L_seam: int
    H_tail: int
    e_min: float


@dataclass(frozen=True)
class GaleTail:
    """Scalar tail pinned down by the return rate ``w`` of its first generation."""

    w: float


TailRule = Union[StationaryRepeat, Theorem3Tail, GaleTail, None]


def theorem3_generation(tail: Theorem3Tail, e_max: float, t: int) -> GenerationSpec:
    """Generation born at ``t > tail.k`` in the log-linear tail economy."""
    if t <= tail.k:
        raise IndexError(f"period {t} is not in the tail (seam k={tail.k})")
    if t == tail.k + 1:
        L = tail.L_seam
        u = UtilityParams.loglinear(np.full(L, 1.0 / L), [1.0])
        h = HouseholdSpec(np.full(L, e_max), [tail.e_min], u)
        return GenerationSpec(t, L, 1, ((h, tail.H_tail),))
    u = UtilityParams.loglinear([1.0], [1.0])
    h = HouseholdSpec([e_max], [tail.e_min], u)
    return GenerationSpec(t, 1, 1, ((h, tail.H_tail),))


# --------------------------------------------------------------------------
# economy
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class EconomySpec:
    bundle: AssumptionBundle
    prefix: tuple[GenerationSpec, ...]
    tail_rule: TailRule = None
    resource_related: bool = True

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(self.prefix))

    @property
    def T_explicit(self) -> int:
        return len(self.prefix) - 1

    def generation(self, t: int) -> GenerationSpec:
        if t < 0:
            raise IndexError("generations start at t = 0")
        if t < len(self.prefix):
            return self.prefix[t]
        rule = self.tail_rule
        if isinstance(rule, StationaryRepeat):
            return rule.generation.shifted(t)
        if isinstance(rule, Theorem3Tail):
            if t <= rule.k:
                raise IndexError(f"prefix ends before the tail seam (t={t}, k={rule.k})")
            return theorem3_generation(rule, self.bundle.e_max, t)
        raise IndexError(f"generation {t} is beyond the prefix and there is no generating tail rule")

    def has_generation(self, t: int) -> bool:
        try:
            self.generation(t)
        except IndexError:
            return False
        return True

    def dims(self, t: int) -> int:
        """Number of goods traded in period ``t``."""
        if t == 0:
            return self.generation(0).L
        return self.generation(t - 1).L_next

    def H(self, t: int) -> int:
        return self.generation(t).H

    def alpha(self, t: int) -> float:
        return self.H(t + 1) / self.H(t)

    def truncated(self, k: int, tail: TailRule) -> "EconomySpec":
        """Economy agreeing with this one for generations ``0..k`` and
        continuing with ``tail`` afterwards."""
        gens = tuple(self.generation(t) for t in range(k + 1))
        return EconomySpec(self.bundle, gens, tail, self.resource_related)


# --------------------------------------------------------------------------
# price paths
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PriceSequence:
    """Truncated price path ``(p_0, ..., p_T)``; ``prices[t]`` has ``L_t`` entries."""

    prices: tuple[np.ndarray, ...]

    def __post_init__(self):
        ps = tuple(_frozen_array(p, "p") for p in self.prices)
        for t, p in enumerate(ps):
            if p.size == 0 or np.any(p <= 0.0) or not np.all(np.isfinite(p)):
                raise DomainError(f"prices at t={t} must be strictly positive and finite")
        object.__setattr__(self, "prices", ps)

    @classmethod
    def from_flat(cls, flat, dims: Sequence[int]) -> "PriceSequence":
        flat = np.asarray(flat, dtype=float)
        out, i = [], 0
        for L in dims:
            out.append(flat[i:i + L])
            i += L
        return cls(tuple(out))

    def __len__(self) -> int:
        return len(self.prices)

    def __getitem__(self, t):
        return self.prices[t]

    def __iter__(self):
        return iter(self.prices)

    @property
    def dims(self) -> list[int]:
        return [p.size for p in self.prices]

    @property
    def normalized(self) -> bool:
        return bool(self.prices[0][0] == 1.0)

    def normalize(self) -> "PriceSequence":
        s = self.prices[0][0]
        return PriceSequence(tuple(p / s for p in self.prices))

    def norms(self) -> np.ndarray:
        return np.array([p.sum() for p in self.prices])

    def flat(self) -> np.ndarray:
        return np.concatenate(self.prices)

    def to_lists(self) -> list[list[float]]:
        return [[float(v) for v in p] for p in self.prices]


# --------------------------------------------------------------------------
# validation
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    kind: str
    t: int | None
    message: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = field(default_factory=tuple)

    @property
    def valid(self) -> bool:
        return not self.violations

    def __len__(self) -> int:
        return len(self.violations)

    def kinds(self) -> list[str]:
        return [v.kind for v in self.violations]


def _generation_violations(gen: GenerationSpec, e_max: float) -> Iterable[Violation]:
    t = gen.t
    if gen.H <= 0 or any(c <= 0 for _, c in gen.members):
        yield Violation("household_count", t, f"generation {t}: household counts must be positive")
    for j, (h, _) in enumerate(gen.members):
        L, L_next = h.dims
        if (L, L_next) != (gen.L, gen.L_next):
            yield Violation("dimension", t, f"generation {t} household {j}: endowment dims "
                            f"{(L, L_next)} != declared {(gen.L, gen.L_next)}")
        u = h.utility
        if (u.lam.size, u.mu.size) != (gen.L, gen.L_next):
            yield Violation("dimension", t, f"generation {t} household {j}: utility dims "
                            f"{(u.lam.size, u.mu.size)} != declared {(gen.L, gen.L_next)}")
        for msg in u.violations():
            yield Violation("utility", t, f"generation {t} household {j}: {msg}")
        e = h.endowment
        if np.any(e < 0):
            yield Violation("endowment", t, f"generation {t} household {j}: negative endowment")
        if not np.any(e > 0):
            yield Violation("endowment", t, f"generation {t} household {j}: endowment is zero")
        norm = float(np.max(np.abs(e))) if e.size else 0.0
        if norm > e_max:
            yield Violation("endowment", t, f"generation {t} household {j}: "
                            f"max-norm {norm:g} exceeds e_max={e_max:g}")


def validate_spec(spec: EconomySpec) -> ValidationReport:
    """Collect every violated structural invariant; an empty report means valid."""
    out: list[Violation] = [Violation("bundle", None, m) for m in spec.bundle.violations()]
    b = spec.bundle
    gens = list(spec.prefix)
    # one generation past the prefix checks the seam with the tail rule
    if spec.has_generation(len(gens)):
        gens.append(spec.generation(len(gens)))
    for i, g in enumerate(gens):
        if i < len(spec.prefix) and g.t != i:
            out.append(Violation("index", i, f"prefix entry {i} declares t={g.t}"))
        out.extend(_generation_violations(g, b.e_max))
    for a, c in zip(gens, gens[1:]):
        if a.L_next != c.L:
            out.append(Violation("dimension", c.t, f"seam {a.t}->{c.t}: L_next={a.L_next} "
                                 f"but next generation has L={c.L}"))
        if a.H > 0 and c.H > 0:
            ratio = c.H / a.H
            if not (b.alpha_min <= ratio <= b.alpha_max):
                out.append(Violation("demography", a.t, f"alpha_{a.t} = {ratio:g} outside "
                                     f"[{b.alpha_min:g}, {b.alpha_max:g}]"))
    if isinstance(spec.tail_rule, Theorem3Tail) and spec.tail_rule.k != len(spec.prefix) - 1:
        out.append(Violation("tail", None, f"Theorem3Tail seam k={spec.tail_rule.k} does not "
                             f"match prefix length {len(spec.prefix)}"))
    if isinstance(spec.tail_rule, GaleTail):
        if any(g.L != 1 or g.L_next != 1 for g in spec.prefix):
            out.append(Violation("tail", None, "GaleTail requires one good per period"))
    return ValidationReport(tuple(out))
