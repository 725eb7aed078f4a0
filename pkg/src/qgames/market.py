"""Risk-inclination oscillator of a quantum market player.

A trader's risk inclination is modelled by the oscillator
``H = (P - p0)^2 / 2m + m w^2 (Q - q0)^2 / 2`` with ``w = 2 pi / theta``,
``theta`` being the characteristic transaction time.  Its spectrum is the
usual ladder ``E_n = hbar (n + 1/2) w``.  A noncommutative position algebra
with parameter ``Theta`` replaces ``hbar`` by ``sqrt(hbar^2 + Theta^2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class RiskOscillator:
    m: float = 1.0
    theta: float = 2 * math.pi
    hbar_e: float = 1.0
    big_theta: float = 0.0

    def __post_init__(self):
        for name in ("m", "theta", "hbar_e"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0):
                raise ValueError(f"{name} must be positive and finite, got {val!r}")
        if not (math.isfinite(self.big_theta) and self.big_theta >= 0):
            raise ValueError(f"big_theta must be >= 0, got {self.big_theta!r}")


def omega(theta: float) -> float:
    if not (math.isfinite(theta) and theta > 0):
        raise ValueError(f"transaction time must be positive, got {theta!r}")
    return 2 * math.pi / theta


def hbar_eff(hbar_e: float, big_theta: float) -> float:
    if not (math.isfinite(hbar_e) and hbar_e > 0):
        raise ValueError(f"hbar_e must be positive, got {hbar_e!r}")
    if not (math.isfinite(big_theta) and big_theta >= 0):
        raise ValueError(f"big_theta must be >= 0, got {big_theta!r}")
    if big_theta == 0:
        return hbar_e
    return math.hypot(hbar_e, big_theta)


def risk_spectrum(o: RiskOscillator, n: int) -> float:
    """Level ``n`` of the risk-inclination ladder (independent of ``m``)."""
    if n < 0:
        raise ValueError(f"level index must be >= 0, got {n}")
    return hbar_eff(o.hbar_e, o.big_theta) * omega(o.theta) * (n + 0.5)


def min_risk_inclination(o: RiskOscillator) -> float:
    """``h_E``: ground level times the profit-measurement interval ``2 theta``.

    ``E_0 * 2 theta = hbar_eff * (pi / theta) * 2 theta = 2 pi hbar_eff``; the
    reduced form is returned so the result carries no rounding from theta.
    """
    return 2 * math.pi * hbar_eff(o.hbar_e, o.big_theta)
