"""Ideal voltage-source inverter: zero-order hold plus a voltage-magnitude limit."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class InverterParams:
    vdc: float = 537.0
    control_period: float = 200e-6

    def __post_init__(self):
        if not self.vdc > 0:
            raise ValueError(f"vdc must be > 0, got {self.vdc!r}")
        if not self.control_period > 0:
            raise ValueError(f"control_period must be > 0, got {self.control_period!r}")

    @property
    def vmax(self) -> float:
        """Largest phase-voltage vector magnitude in the linear modulation range."""
        return self.vdc / math.sqrt(3.0)


def limit_voltage(vsd: float, vsq: float, p: InverterParams) -> tuple[float, float]:
    """Scale the (vsd, vsq) vector radially down to ``p.vmax`` if it is longer."""
    vmax = p.vmax
    mag = math.hypot(vsd, vsq)
    # the rounding slack keeps an already-limited vector a fixed point
    if mag <= vmax * (1.0 + 1e-15):
        return vsd, vsq
    scale = vmax / mag
    return vsd * scale, vsq * scale
