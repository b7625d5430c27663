"""Linearised spectrum around the homogeneous state.

The growth rate of mode ``K`` at temperature ``T`` is

    beta_K(T) = H(ubar) * rho_K * (2*gamma - R*T/(ubar*(1-ubar)) - alpha*rho_K)

with ``rho_K`` the Neumann-Laplacian eigenvalue.  The modes whose growth
rate vanishes exactly at the critical temperature form the critical set;
its size (1, 2 or 3) follows the degeneracy of the box edges.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .params import DomainSpec, PhysicalParams, critical_temperature
from .spectral import Mode, laplacian_eigenvalue

__all__ = [
    "CriticalSet",
    "PESReport",
    "DegeneracyAmbiguityError",
    "growth_rate",
    "critical_set",
    "verify_pes",
    "critical_temperature_bisect",
]


class DegeneracyAmbiguityError(ValueError):
    """Edge lengths are nearly tied but not within the declared tolerance, so
    the critical set cannot be trusted."""


def growth_rate(K: Mode, T: float, p: PhysicalParams, d: DomainSpec) -> float:
    """Linear growth rate of mode ``K`` at temperature ``T``."""
    if T <= 0.0:
        raise ValueError("temperature must be positive")
    rho = laplacian_eigenvalue(K, d)
    u = p.ubar
    return p.mobility.h0 * rho * (2.0 * p.gamma - p.R * T / (u * (1.0 - u)) - p.alpha * rho)


def _mode_table(k_max: int) -> tuple[list[Mode], np.ndarray]:
    """All modes with indices up to ``k_max`` (zero mode excluded) and their
    squared-wavenumber triples for vectorised scans."""
    modes: list[Mode] = []
    for k1 in range(k_max + 1):
        for k2 in range(k_max + 1):
            for k3 in range(k_max + 1):
                if k1 == k2 == k3 == 0:
                    continue
                modes.append((k1, k2, k3))
    return modes, np.asarray(modes, dtype=float)


def _rho_values(karr: np.ndarray, d: DomainSpec) -> np.ndarray:
    lengths = np.asarray(d.lengths)
    return ((karr * math.pi / lengths) ** 2).sum(axis=1)


def _growth_rates_scan(T: float, p: PhysicalParams, d: DomainSpec, k_max: int):
    modes, karr = _mode_table(k_max)
    rho = _rho_values(karr, d)
    u = p.ubar
    beta = p.mobility.h0 * rho * (2.0 * p.gamma - p.R * T / (u * (1.0 - u)) - p.alpha * rho)
    return modes, beta


@dataclass(frozen=True)
class CriticalSet:
    """Ordered critical modes and their count ``m``."""

    modes: tuple[Mode, ...]

    @property
    def m(self) -> int:
        return len(self.modes)


def critical_set(p: PhysicalParams, d: DomainSpec) -> CriticalSet:
    """Modes with vanishing growth rate at the critical temperature.

    Raises ``DegeneracyAmbiguityError`` when edge lengths are suspiciously
    close (within 1000x the tie tolerance) without being tied, since the
    critical set then depends on digits below the declared accuracy.
    """
    critical_temperature(p, d)  # ensure the regime exists
    l1, l2, l3 = d.lengths
    tol = d.tie_tolerance
    for a, b in ((l1, l2), (l2, l3)):
        gap = abs(a - b) / max(a, b)
        if tol < gap <= 1e3 * tol:
            raise DegeneracyAmbiguityError(
                f"edge lengths {a!r} and {b!r} differ by relative {gap:.3g}, "
                f"too close to the tie tolerance {tol:.3g} to classify reliably"
            )
    modes = ((1, 0, 0), (0, 1, 0), (0, 0, 1))[: d.multiplicity]
    return CriticalSet(modes=modes)


@dataclass(frozen=True)
class PESReport:
    """Outcome of the exchange-of-stabilities verification.

    ``margin`` is the smallest ``|beta_K|`` at the critical temperature over
    the scanned non-critical modes; it quantifies the spectral gap.
    """

    tc: float
    critical_modes: tuple[Mode, ...]
    margin: float
    violations: tuple[str, ...]
    k_max: int
    scanned_temperatures: tuple[float, ...]

    @property
    def passed(self) -> bool:
        return not self.violations

    def as_dict(self) -> dict:
        return {
            "Tc": self.tc,
            "critical_modes": [list(m) for m in self.critical_modes],
            "margin": self.margin,
            "violations": list(self.violations),
            "k_max": self.k_max,
            "scanned_temperatures": list(self.scanned_temperatures),
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.as_dict(), **kwargs)


def verify_pes(
    p: PhysicalParams,
    d: DomainSpec,
    k_max: int = 8,
    t_grid: tuple[float, ...] | None = None,
) -> PESReport:
    """Check the sign pattern of the spectrum around the critical temperature.

    At the critical temperature the critical modes must have zero growth rate
    and every other scanned mode a strictly negative one; across the
    temperature grid the critical rates must be positive below and negative
    above.
    """
    tc = critical_temperature(p, d)
    cset = critical_set(p, d)
    if t_grid is None:
        t_grid = tuple(tc * (1.0 + r) for r in (-0.04, -0.01, 0.01, 0.04))
    if not (min(t_grid) < tc < max(t_grid)):
        raise ValueError("temperature grid must bracket the critical temperature")

    violations: list[str] = []
    modes, beta_c = _growth_rates_scan(tc, p, d, k_max)
    scale = float(np.abs(beta_c).max())
    crit = set(cset.modes)
    margin = math.inf
    for K, b in zip(modes, beta_c):
        if K in crit:
            if abs(b) > 1e-10 * scale:
                violations.append(f"beta{K} = {b:.3e} does not vanish at Tc")
        else:
            margin = min(margin, abs(b))
            if b >= 0.0:
                violations.append(f"beta{K} = {b:.3e} >= 0 at Tc")
    for T in t_grid:
        for K in cset.modes:
            b = growth_rate(K, T, p, d)
            if T < tc and b <= 0.0:
                violations.append(f"beta{K}({T:.6g}) = {b:.3e} <= 0 below Tc")
            if T > tc and b >= 0.0:
                violations.append(f"beta{K}({T:.6g}) = {b:.3e} >= 0 above Tc")
    return PESReport(
        tc=tc,
        critical_modes=cset.modes,
        margin=margin,
        violations=tuple(violations),
        k_max=k_max,
        scanned_temperatures=tuple(float(t) for t in t_grid),
    )


def critical_temperature_bisect(
    p: PhysicalParams,
    d: DomainSpec,
    bracket: tuple[float, float] | None = None,
    k_max: int = 8,
    tol: float = 1e-12,
) -> float:
    """Locate the root of ``max_K beta_K(T)`` by bisection.

    Serves as an independent check of the closed-form critical temperature.
    Raises ``ValueError`` when the bracket contains no sign change (in
    particular when no supercritical regime exists).
    """
    u = p.ubar
    if bracket is None:
        hi = 2.0 * p.gamma * u * (1.0 - u) / p.R  # all rates negative beyond this
        bracket = (1e-12 * hi, 1.01 * hi)
    lo, hi = bracket
    _, karr = _mode_table(k_max)
    rho = _rho_values(karr, d)
    h0 = p.mobility.h0

    def worst(T: float) -> float:
        beta = h0 * rho * (2.0 * p.gamma - p.R * T / (u * (1.0 - u)) - p.alpha * rho)
        return float(beta.max())

    f_lo, f_hi = worst(lo), worst(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if f_lo * f_hi > 0.0:
        raise ValueError(
            f"no sign change of the leading growth rate on [{lo:.6g}, {hi:.6g}]"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):  # float resolution reached
            break
        if f_lo * worst(mid) <= 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
