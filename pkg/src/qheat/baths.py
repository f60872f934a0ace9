"""Thermal bath response spectra and Floquet sideband weights.

Units: hbar = k_B = 1; frequencies and temperatures share one unit.
Negative-frequency responses always go through detailed balance,
``G(-w) = exp(-w/T) G(w)``, never through the spectral model itself.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidConfig, NoCoupling, ZeroFrequency


@dataclass(frozen=True)
class BathSpec:
    """One bosonic heat bath.

    ``model`` is ``"flat"`` (``gamma0`` on the half-open band ``[lo, hi)``),
    ``"ohmic"`` (``kappa * w * exp(-w / cutoff)``) or ``"table"`` (linear
    interpolation of ``table`` rows ``(w, gamma)``, zero outside).
    """

    label: str
    temperature: float
    model: str = "flat"
    gamma0: float = 1.0
    band: tuple = (0.0, math.inf)
    kappa: float = 1.0
    cutoff: float = 10.0
    table: tuple = ()

    def __post_init__(self):
        if not self.temperature > 0:
            raise InvalidConfig(f"{self.label} bath temperature must be positive")
        if self.model not in ("flat", "ohmic", "table"):
            raise InvalidConfig(f"unknown bath model {self.model!r}")
        if self.model == "flat" and self.gamma0 < 0:
            raise InvalidConfig("gamma0 must be non-negative")
        if self.model == "table":
            t = np.asarray(self.table, dtype=float)
            if t.ndim != 2 or t.shape[1] != 2 or len(t) < 2:
                raise InvalidConfig("table model needs rows of (omega, gamma)")
            if np.any(np.diff(t[:, 0]) <= 0) or np.any(t[:, 1] < 0):
                raise InvalidConfig("table frequencies must increase and rates be non-negative")

    @property
    def beta(self) -> float:
        return 1.0 / self.temperature

    def rate(self, omega: float) -> float:
        """Transition rate gamma(w) for w > 0."""
        if self.model == "flat":
            lo, hi = self.band
            return self.gamma0 if lo <= omega < hi else 0.0
        if self.model == "ohmic":
            return self.kappa * omega * math.exp(-omega / self.cutoff)
        t = np.asarray(self.table, dtype=float)
        return float(np.interp(omega, t[:, 0], t[:, 1], left=0.0, right=0.0))

    def occupation(self, omega: float) -> float:
        """Bose occupation 1 / (exp(w/T) - 1)."""
        return 1.0 / math.expm1(self.beta * omega)


def response(bath: BathSpec, omega: float) -> float:
    """Response spectrum G(w) = gamma(w) (n(w) + 1), extended to w < 0 by KMS."""
    if omega == 0:
        raise ZeroFrequency("bath response is undefined at zero frequency")
    w = abs(omega)
    g = bath.rate(w)
    if g == 0.0:
        return 0.0
    x = bath.beta * w
    if omega > 0:
        return g / -math.expm1(-x)
    # exp(-x) / (1 - exp(-x)) without overflow for large x
    return g / math.expm1(x) if x < 700 else 0.0


def boltzmann(bath: BathSpec, omega: float) -> float:
    return math.exp(-bath.beta * omega)


@dataclass(frozen=True)
class ModulationSpec:
    """Floquet sideband weights ``P(q)`` at modulation rate ``rate``."""

    rate: float = 0.0
    weights: dict = field(default_factory=lambda: {0: 1.0})

    def __post_init__(self):
        if self.rate < 0:
            raise InvalidConfig("modulation rate must be non-negative")
        w = {int(q): float(p) for q, p in self.weights.items()}
        if any(p < 0 for p in w.values()):
            raise InvalidConfig("Floquet weights must be non-negative")
        total = sum(w.values())
        if abs(total - 1.0) > 1e-12:
            raise InvalidConfig(f"Floquet weights sum to {total!r}, expected 1")
        object.__setattr__(self, "weights", dict(sorted(w.items())))

    @classmethod
    def none(cls) -> "ModulationSpec":
        return cls(0.0, {0: 1.0})

    @classmethod
    def two_sideband(cls, rate: float) -> "ModulationSpec":
        return cls(rate, {-1: 0.5, 1: 0.5})

    @classmethod
    def from_pairs(cls, rate: float, pairs) -> "ModulationSpec":
        return cls(rate, {int(q): float(p) for q, p in pairs})

    def window(self) -> list:
        return [q for q, p in self.weights.items() if p > 0]

    def sideband(self, q: int, omega0: float) -> float:
        return omega0 + q * self.rate

    def check_positive(self, omega0: float) -> None:
        for q in self.window():
            if self.sideband(q, omega0) <= 0:
                raise InvalidConfig(f"sideband q={q} at {self.sideband(q, omega0)!r} is not above zero frequency")


def sideband_rates(baths, mod: ModulationSpec, omega0: float):
    """Summed emission and absorption rates over baths and sidebands."""
    mod.check_positive(omega0)
    down = up = 0.0
    for q in mod.window():
        w = mod.sideband(q, omega0)
        pq = mod.weights[q]
        for b in baths:
            down += pq * response(b, w)
            up += pq * response(b, -w)
    return down, up


def effective_boltzmann(baths, mod: ModulationSpec, omega0: float) -> float:
    """Boltzmann factor exp(-beta_eff w0) of the two-bath, multi-sideband steady state."""
    if not omega0 > 0:
        raise InvalidConfig("omega0 must be positive")
    down, up = sideband_rates(baths, mod, omega0)
    if down == 0.0:
        raise NoCoupling("system is decoupled from every bath at every sideband")
    return up / down


def effective_beta(baths, mod: ModulationSpec, omega0: float) -> float:
    return -math.log(effective_boltzmann(baths, mod, omega0)) / omega0
