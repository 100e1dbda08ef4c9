"""Tail economies closing a truncated economy after a seam period ``k``.

A tail anchor fixes the prices of periods ``k+1`` and ``k+2`` so that the
market-clearing equations of periods ``1..k+1`` can be solved backward.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .demand import avg_savings
from .economy import (EconomySpec, GaleTail, GenerationSpec, Theorem3Tail,
                      theorem3_generation)


class TailConstructionError(ValueError):
    pass


@dataclass(frozen=True)
class TailAnchor:
    """Tail prices at the seam: ``p_{k+1}`` and ``p_{k+2}``, plus the
    economy on which the seam equation is evaluated."""

    economy: EconomySpec
    k: int
    p_seam: np.ndarray
    p_after: np.ndarray
    description: str
    savings_target: float


def theorem3_e_min(e_max: float, epsilon: float, delta: float) -> float:
    if e_max <= 2.0 * delta:
        raise TailConstructionError(
            f"log-linear tail needs e_max > 2*delta (e_max={e_max}, delta={delta})")
    return (e_max - 2.0 * delta) / (1.0 + epsilon)


def make_theorem3_tail(e: EconomySpec, k: int) -> Theorem3Tail:
    b = e.bundle
    e_min = theorem3_e_min(b.e_max, b.epsilon, b.delta)
    L_seam = e.generation(k).L_next
    H_tail = e.H(k + 1) if e.has_generation(k + 1) else e.H(k)
    return Theorem3Tail(k=k, L_seam=L_seam, H_tail=H_tail, e_min=e_min)


def build_theorem3_tail(e: EconomySpec, k: int, n_generations: int = 2, direction=None,
                        tail: Theorem3Tail | None = None) -> tuple[list[GenerationSpec], TailAnchor]:
    """Tail generations ``k+1 .. k+n_generations`` and the constant-price anchor.

    Tail prices after the seam equal the 1-norm of the seam prices; every
    such choice is an equilibrium of the tail. ``direction`` sets the seam
    price vector (all ones by default). With several seam goods the backward
    seam step need not be solvable for every direction; ``solve_closed_loop``
    determines one that is.
    """
    if tail is None:
        tail = make_theorem3_tail(e, k)
    elif tail.k != k:
        raise TailConstructionError(f"tail seam {tail.k} does not match k={k}")
    ek = e.truncated(k, tail)
    gens = [theorem3_generation(tail, e.bundle.e_max, t)
            for t in range(k + 1, k + 1 + n_generations)]
    p_seam = np.ones(tail.L_seam) if direction is None else np.asarray(direction, float)
    p_seam = p_seam / p_seam[0]
    p_after = np.array([p_seam.sum()])
    target = (e.bundle.e_max - tail.e_min) / 2.0
    anchor = TailAnchor(ek, k, p_seam, p_after,
                        f"log-linear tail, e_min={tail.e_min!r}, p_t = |p_{k + 1}| for t > {k + 1}",
                        target)
    return gens, anchor


def tail_consumption(tail: Theorem3Tail, e_max: float) -> float:
    """Per-period consumption of every tail household at the anchor."""
    return (e_max + tail.e_min) / 2.0


def build_gale_tail(e: EconomySpec, k: int, w: float) -> TailAnchor:
    """Scalar tail whose first generation faces the rate ``w``.

    The anchor is ``p_{k+1} = 1``, ``p_{k+2} = 1/w`` on the reference
    economy, so generation ``k+1`` saves its savings at rate ``w``.
    """
    if not w > 0:
        raise TailConstructionError(f"rate w must be positive, got {w}")
    for t in range(k + 2):
        g = e.generation(t)
        if g.L != 1 or g.L_next != 1:
            raise TailConstructionError("rate-pinned tail requires one good per period")
    p_seam = np.array([1.0])
    p_after = np.array([1.0 / w])
    target = avg_savings(e.generation(k + 1), p_seam, p_after)
    if not target > 0.0:
        raise TailConstructionError(
            f"tail savings at w={w} are {target:.6g} <= 0; the tail must save")
    return TailAnchor(e, k, p_seam, p_after, f"rate-pinned tail, r_{k + 1} = {w!r}", target)


def make_anchor(e: EconomySpec, tail, k: int) -> TailAnchor:
    if isinstance(tail, GaleTail):
        return build_gale_tail(e, k, tail.w)
    if isinstance(tail, Theorem3Tail):
        return build_theorem3_tail(e, k, tail=tail)[1]
    raise TypeError(f"unsupported tail {tail!r}")
