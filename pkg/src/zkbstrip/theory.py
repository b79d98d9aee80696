"""Closed-form decay constants and functional-inequality verifiers.

The decay analysis for the strip equation balances the weighted energy
production 4b + 10b**2 against the Poincare gain pi**2/B**2 through a
parameter gamma in (0, 1):

    4b + 10b**2 = gamma * pi**2 / B**2,
    16*||u0||**2 / 9 = (1 - gamma)**2 * pi**2 / B**2,
    decay rate chi = b * gamma * (1 - gamma) * pi**2 / B**2.

gamma = 1/2 maximizes gamma*(1-gamma) and yields the closed forms

    b*  = (1/5) * (-1 + sqrt(1 + 5*pi**2/(4*B**2))),
    chi = b* * pi**2 / (4*B**2),

with smallness thresholds 3*pi/(8*B) (regular solutions) and 3*pi/(16*B)
(weak solutions, where only the non-sharp energy bound is available).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, NamedTuple

import numpy as np

from .diagnostics import _weighted_quad, _x_weights, weighted_dy_sq

if TYPE_CHECKING:
    from .fields import Field

RELATIVE_SLACK = 1e-10


@dataclass(frozen=True)
class TheoremConstants:
    """Decay constants and smallness thresholds for a given strip width."""

    B: float
    b_star: float
    chi: float
    gamma: float
    reg_threshold: float
    weak_threshold: float


def constants_for_width(B: float) -> TheoremConstants:
    """Evaluate the optimal weight rate, decay rate, and thresholds."""
    if not B > 0:
        raise ValueError(f"strip width B must be positive, got {B}")
    root = math.sqrt(1.0 + 5.0 * math.pi**2 / (4.0 * B * B))
    b_star = (root - 1.0) / 5.0
    chi = b_star * math.pi**2 / (4.0 * B * B)
    chi_closed = (root - 1.0) / 20.0 * math.pi**2 / (B * B)
    if abs(chi - chi_closed) > 1e-14 * chi:
        raise AssertionError("decay-rate closed forms disagree")
    return TheoremConstants(
        B=B,
        b_star=b_star,
        chi=chi,
        gamma=0.5,
        reg_threshold=3.0 * math.pi / (8.0 * B),
        weak_threshold=3.0 * math.pi / (16.0 * B),
    )


class GammaPoint(NamedTuple):
    b: float
    u0_bound: float
    chi: float


def gamma_tradeoff(gamma: float, B: float) -> GammaPoint:
    """Weight rate, data bound, and decay rate at a given gamma in (0,1)."""
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
    if not B > 0:
        raise ValueError(f"strip width B must be positive, got {B}")
    target = gamma * math.pi**2 / (B * B)
    b = (-4.0 + math.sqrt(16.0 + 40.0 * target)) / 20.0
    u0_bound = 0.75 * (1.0 - gamma) * math.pi / B
    chi = b * gamma * (1.0 - gamma) * math.pi**2 / (B * B)
    return GammaPoint(b=b, u0_bound=u0_bound, chi=chi)


class SmallnessCheck(NamedTuple):
    ok: bool
    margin: float
    threshold: float


def check_smallness(u0_norm: float, B: float, regime: str = "regular") -> SmallnessCheck:
    """Whether the initial L2 norm satisfies the decay-theorem threshold."""
    if u0_norm < 0:
        raise ValueError(f"norm must be >= 0, got {u0_norm}")
    consts = constants_for_width(B)
    if regime == "regular":
        threshold = consts.reg_threshold
    elif regime == "weak":
        threshold = consts.weak_threshold
    else:
        raise ValueError(f"unknown regime {regime!r}; choose 'regular' or 'weak'")
    margin = threshold - u0_norm
    return SmallnessCheck(ok=u0_norm <= threshold, margin=margin, threshold=threshold)


class InequalityCheck(NamedTuple):
    lhs: float
    rhs: float
    holds: bool


def _holds(lhs: float, rhs: float) -> bool:
    return lhs <= rhs * (1.0 + RELATIVE_SLACK) + 1e-300


def verify_steklov(u: "Field", b: float) -> InequalityCheck:
    """Weighted Poincare bound (e^{2bx}, u^2) <= (B/pi)^2 (e^{2bx}, u_y^2).

    Equality is attained exactly on fields proportional to the first
    sine mode; mode j alone gives lhs = rhs / j**2.
    """
    geom = u.geometry
    lhs = _weighted_quad(geom, b, u.values, u.values)
    rhs = (geom.B / math.pi) ** 2 * weighted_dy_sq(u, b)
    return InequalityCheck(lhs=lhs, rhs=rhs, holds=_holds(lhs, rhs))


def verify_gn(u: "Field") -> InequalityCheck:
    """Plane interpolation bound ||u||_{L4}^2 <= 2 ||u|| ||grad u||.

    The field is treated as extended by zero outside the strip.  The L4
    norm is integrated on a 2x-refined grid so the quartic is alias-free
    for band-limited fields.
    """
    vals, fine = u.values_padded(2, 2)
    wx = _x_weights(fine, 0.0)
    l4sq = math.sqrt(fine.dy * float(np.sum(wx[:, None] * vals**4)))
    rhs = 2.0 * math.sqrt(u.l2sq()) * math.sqrt(u.gradsq())
    return InequalityCheck(lhs=l4sq, rhs=rhs, holds=_holds(l4sq, rhs))


def verify_sup_lemma(u: "Field", b: float, delta: float, delta1: float) -> InequalityCheck:
    """Weighted sup bound for fields vanishing at the channel walls:

    sup |e^{bx} u|^2 <= delta*(1+2b^2)*(e^{2bx},u_y^2) + 2*delta*(e^{2bx},u_xy^2)
                      + (2*delta1/delta)*(e^{2bx},u_x^2)
                      + (1/delta)*(1/delta1 + 2*delta1*b^2)*(e^{2bx},u^2),

    for arbitrary positive delta, delta1.
    """
    if delta <= 0 or delta1 <= 0:
        raise ValueError("delta and delta1 must be positive")
    geom = u.geometry
    vals = u.values
    ux = u.dx()

    sup = float(np.max(np.abs(np.exp(b * geom.x_grid())[:, None] * vals)))
    lhs = sup * sup
    rhs = (
        delta * (1.0 + 2.0 * b * b) * weighted_dy_sq(u, b)
        + 2.0 * delta * weighted_dy_sq(ux, b)
        + (2.0 * delta1 / delta) * _weighted_quad(geom, b, ux.values, ux.values)
        + (1.0 / delta) * (1.0 / delta1 + 2.0 * delta1 * b * b)
        * _weighted_quad(geom, b, vals, vals)
    )
    return InequalityCheck(lhs=lhs, rhs=rhs, holds=_holds(lhs, rhs))
