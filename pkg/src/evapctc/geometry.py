"""Schwarzschild metric components and Kretschmann scalar (G = c = 1).

Signature (+, -, -, -): ``g00 = 1 - 2m/r`` and ``grr = -(1 - 2m/r)^-1``.
The angular part is not evaluated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import HorizonSingularityError, ValidationError


@dataclass(frozen=True)
class SchwarzschildPoint:
    m: float
    r: float

    def __post_init__(self):
        if not (self.m > 0 and math.isfinite(self.m)):
            raise ValidationError(f"mass must be positive and finite, got {self.m}")
        if not (self.r > 0 and math.isfinite(self.r)):
            raise ValidationError(f"radius must be positive and finite, got {self.r}")


class ScanRow(NamedTuple):
    r: float
    g00: float
    grr: float
    K: float


def metric_components(p: SchwarzschildPoint) -> tuple[float, float]:
    if p.r == 2.0 * p.m:
        raise HorizonSingularityError(f"coordinate singularity at r = 2m = {p.r}")
    g00 = 1.0 - 2.0 * p.m / p.r
    return g00, -1.0 / g00


def kretschmann(p: SchwarzschildPoint) -> float:
    return 48.0 * p.m**2 / p.r**6


def horizon_kretschmann(m: float) -> float:
    """Kretschmann scalar on the horizon, ``3 / (4 m^4)``."""
    return kretschmann(SchwarzschildPoint(m, 2.0 * m))


def horizon_scan(m: float, deltas) -> list[ScanRow]:
    """Tabulate ``r = 2m + delta`` rows, largest delta first."""
    deltas = list(deltas)
    if any(not d > 0 for d in deltas):
        raise ValidationError("all deltas must be positive")
    rows = []
    for d in sorted(deltas, reverse=True):
        p = SchwarzschildPoint(m, 2.0 * m + d)
        g00, grr = metric_components(p)
        rows.append(ScanRow(p.r, g00, grr, kretschmann(p)))
    return rows


def horizon_limit_row(m: float) -> ScanRow:
    """The delta -> 0 row: ``g00 -> 0``, ``grr -> -inf``, K at the horizon."""
    return ScanRow(2.0 * m, 0.0, -math.inf, horizon_kretschmann(m))


def vanishing_mass_sequence(k_max: int) -> list[ScanRow]:
    """Rows for ``m_k = 1/k`` at ``r_k = 2 m_k + m_k^2``, k = 1..k_max.

    Shows ``g00 -> 0`` and ``|grr| -> inf`` as the mass drops to zero.
    """
    rows = []
    for k in range(1, k_max + 1):
        m = 1.0 / k
        p = SchwarzschildPoint(m, 2.0 * m + m * m)
        g00, grr = metric_components(p)
        rows.append(ScanRow(p.r, g00, grr, kretschmann(p)))
    return rows
