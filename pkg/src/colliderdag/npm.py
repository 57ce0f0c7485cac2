"""Percentage contributions and Negative Percentage Mapping (NPM).

A fit ``target = c0 * p0 + c1 * p1 + b`` decomposes the target's column sum
into three aggregate terms. Dividing by that sum gives signed shares that
add to one but may be negative or exceed one; NPM rescales their absolute
values onto the probability simplex.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateDenominatorError, UndefinedContributionError
from .regression import SingleFit

DENOM_RTOL = 1e-8


@dataclass(frozen=True)
class ContributionVector:
    raw: tuple[float, float, float]
    mapped: tuple[float, float, float]
    denom_sum: float


def denominator_floor(m: int, std: float) -> float:
    """Smallest usable ``|column sum|`` for a column of ``m`` rows."""
    return DENOM_RTOL * m * std


def percent_contributions(fit: SingleFit, eps_denom: float = 0.0) -> tuple[float, float, float]:
    """Signed shares ``(parent0, parent1, intercept)`` of the target's sum.

    Raises
    ------
    DegenerateDenominatorError
        If ``|sum_target| <= eps_denom``; the triple should be skipped.
    """
    s = fit.sum_target
    if not abs(s) > eps_denom:
        raise DegenerateDenominatorError(
            f"target {fit.target} has column sum {s!r}; percentage contributions undefined",
            target=fit.target,
        )
    return (
        fit.coeffs[0] * fit.sum_parents[0] / s,
        fit.coeffs[1] * fit.sum_parents[1] / s,
        fit.m * fit.intercept / s,
    )


def npm_map(raw) -> tuple[float, ...]:
    """Map signed shares to ``|r_t| / sum_u |r_u|``.

    Nonnegative shares that already sum to one come back unchanged.
    """
    mags = [abs(float(r)) for r in raw]
    total = math.fsum(mags)
    if not total > 0.0:
        raise UndefinedContributionError("all raw contributions are zero")
    return tuple(a / total for a in mags)


def contributions(fit: SingleFit, eps_denom: float = 0.0) -> ContributionVector:
    raw = percent_contributions(fit, eps_denom)
    return ContributionVector(raw=raw, mapped=npm_map(raw), denom_sum=fit.sum_target)
