import math

import numpy as np
import pytest

from olg_forge.economy import (AssumptionBundle, EconomySpec, GenerationSpec, HouseholdSpec,
                               StationaryRepeat, UtilityParams)
from olg_forge.example1 import example1_bundle, example1_economy


def bisect(f, lo, hi, tol=1e-15, max_iter=400):
    """Plain bisection, independent of the package's root finders."""
    flo = f(lo)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0 or (hi - lo) <= tol * max(1.0, abs(mid)):
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def example1_savings_oracle(r):
    """Savings 4 - c_young of the square-root household, from its first-order
    condition c_old = (3/5) r^2 c_young and the budget."""
    # c_young + c_old / r = 4 + 0.8 / r
    c_young = (4.0 + 0.8 / r) / (1.0 + 0.6 * r)
    return 4.0 - c_young


@pytest.fixture
def ex1():
    return example1_economy()


@pytest.fixture
def ex1_bundle():
    return example1_bundle()


def loglinear_stationary(lam=0.5, mu=0.5, endow=(4.0, 0.8), H=1, bundle=None):
    bundle = bundle or AssumptionBundle(0.5, 2.0, 4.0, 0.05, 0.3, 0.5)
    h = HouseholdSpec([endow[0]], [endow[1]], UtilityParams.loglinear([lam], [mu]))
    g = GenerationSpec(0, 1, 1, ((h, H),))
    return EconomySpec(bundle, (g,), StationaryRepeat(g))


def two_good_economy(bundle=None, T=4):
    """Stationary economy with two goods per period and two household types."""
    bundle = bundle or AssumptionBundle(0.5, 2.0, 4.0, 0.05, 0.3, 0.5)
    u1 = UtilityParams.ces([0.3, 0.2], [0.25, 0.25], 0.4)
    u2 = UtilityParams.loglinear([0.2, 0.3], [0.3, 0.2])
    h1 = HouseholdSpec([3.0, 2.5], [0.5, 0.7], u1)
    h2 = HouseholdSpec([2.0, 3.5], [0.6, 0.4], u2)
    g = GenerationSpec(0, 2, 2, ((h1, 1), (h2, 1)))
    return EconomySpec(bundle, tuple(g.shifted(t) for t in range(T)), StationaryRepeat(g))


@pytest.fixture
def two_good():
    return two_good_economy()


SQRT3_3 = math.sqrt(3.0) / 3.0


def classical_toy(bundle=None):
    """Two initial old households with log old-age utility and money, followed
    by a stationary log-linear economy."""
    from olg_forge.classical import ClassicalEconomy, OldHousehold
    e = loglinear_stationary(H=2, bundle=bundle)
    g = e.prefix[0]
    old = (OldHousehold([1.0], [1.0], 0.7), OldHousehold([0.5], [1.0], 0.3))
    return ClassicalEconomy(e.bundle, old, (g.shifted(1),), StationaryRepeat(g))


ACCEPTANCE_LINES: list[str] = []


def acceptance_line(n: int, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
