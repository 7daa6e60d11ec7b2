"""Fidelity-based Schmidt-number witness.

A state whose fidelity with the maximally entangled d x d state exceeds
(g - 1)/d has Schmidt number at least g.  The certified lower bound is the
largest such g; g = 1 means nothing is certified.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .qstate import ensemble_fidelity


@dataclass(frozen=True)
class WitnessResult:
    d: int
    fidelity: float
    bound: int

    @property
    def certified(self) -> bool:
        return self.bound >= 2


def _holds(F: float, g: int, d: int) -> bool:
    return F > (g - 1) / d


def schmidt_lower_bound(F: float, d: int) -> WitnessResult:
    if not 0.0 <= F <= 1.0:
        raise ValueError(f"fidelity must lie in [0, 1], got {F}")
    if d < 2:
        raise ValueError(f"dimension must be >= 2, got {d}")
    # F > (g-1)/d  <=>  g < F*d + 1, so g = ceil(F*d) away from rounding edges.
    g = min(d, max(1, math.ceil(F * d)))
    while g < d and _holds(F, g + 1, d):
        g += 1
    while g > 1 and not _holds(F, g, d):
        g -= 1
    return WitnessResult(d, F, g)


def witness_sweep(pair_fidelity: float, N_max: int) -> list[WitnessResult]:
    """Bounds for d = 2 .. 2**N_max using F = pair_fidelity**N."""
    return [
        schmidt_lower_bound(ensemble_fidelity(pair_fidelity, N), 2**N)
        for N in range(1, N_max + 1)
    ]
