"""Transition classification: type, bifurcation side, equilibrium census.

The decision rests solely on the discriminants ``B1, B2, B3`` at the
critical temperature; the discriminant indexed by the critical-mode count
``m`` decides the type.  The mobility cancels out of every decision
quantity, so the classification is identical for any admissible mobility.

Continuous (Type I) transitions bifurcate below the critical temperature to
a local attractor carrying ``3^m - 1`` steady states; discontinuous
(Type II) ones produce the same number of saddles on, or split across, the
two sides.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum

from .manifold import (
    DegenerateCubicError,
    Equilibrium,
    EquilibriumKind,
    enumerate_equilibria,
)
from .params import (
    DomainSpec,
    PhysicalParams,
    critical_temperature,
    derive_coefficients,
    transition_discriminants,
)

__all__ = [
    "TransitionType",
    "Side",
    "SideCensus",
    "TransitionReport",
    "CensusCheck",
    "MarginalTransitionError",
    "classify_transition",
    "bifurcated_amplitude",
    "census_check",
]

SCHEMA_VERSION = 1


class MarginalTransitionError(ValueError):
    """The deciding discriminant is numerically zero; the cubic truncation
    cannot determine the transition."""


class TransitionType(Enum):
    TYPE_I = "I"
    TYPE_II = "II"


class Side(Enum):
    BELOW = "below"
    ABOVE = "above"
    BOTH = "both"


@dataclass(frozen=True)
class SideCensus:
    attractors: int = 0
    saddles: int = 0

    @property
    def total(self) -> int:
        return self.attractors + self.saddles

    def as_dict(self) -> dict:
        return {"attractors": self.attractors, "saddles": self.saddles, "total": self.total}


@dataclass(frozen=True)
class TransitionReport:
    """Complete classification record.

    ``census`` counts equilibria per side in full-system terms: every
    non-attracting bifurcated state is a saddle of the full dynamics (for
    ``m=1`` these appear as repellers of the one-dimensional reduced
    system).  ``amplitude_coefficient`` is the constant ``c`` of the
    square-root law ``|y*| = c*sqrt(|Tc - T|)`` for ``m=1``.
    """

    tc: float
    m: int
    B: tuple[float, float, float]
    transition_type: TransitionType
    side: Side
    census: dict[Side, SideCensus]
    amplitude_coefficient: float | None = None
    attractor_topology: str | None = None
    minimal_attractors: int | None = None
    notes: tuple[str, ...] = ()
    schema_version: int = SCHEMA_VERSION

    def as_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "Tc": self.tc,
            "m": self.m,
            "B": list(self.B),
            "type": self.transition_type.value,
            "side": self.side.value,
            "census": {s.value: c.as_dict() for s, c in self.census.items()},
            "amplitude_coefficient": self.amplitude_coefficient,
            "attractor_topology": self.attractor_topology,
            "minimal_attractors": self.minimal_attractors,
            "notes": list(self.notes),
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.as_dict(), **kwargs)

    def to_text(self) -> str:
        lines = [
            f"critical temperature Tc = {self.tc:.12g}",
            f"critical multiplicity m = {self.m}",
            "discriminants B1, B2, B3 = "
            + ", ".join(f"{b:.12g}" for b in self.B),
            f"transition type: {self.transition_type.value}"
            + (" (continuous)" if self.transition_type is TransitionType.TYPE_I else " (jump)"),
            f"bifurcated states on: T {'<' if self.side is Side.BELOW else '>' if self.side is Side.ABOVE else '<> (both sides of)'} Tc",
        ]
        for side in (Side.BELOW, Side.ABOVE):
            c = self.census.get(side)
            if c is not None and c.total:
                lines.append(
                    f"  {side.value} Tc: {c.total} equilibria "
                    f"({c.attractors} attractors, {c.saddles} saddles)"
                )
        if self.amplitude_coefficient is not None:
            lines.append(
                f"amplitude law: |y*| = {self.amplitude_coefficient:.12g} * sqrt(|Tc - T|)"
            )
        if self.attractor_topology is not None:
            lines.append(f"bifurcated attractor topology: {self.attractor_topology}")
        if self.minimal_attractors is not None:
            lines.append(f"minimal attractors: {self.minimal_attractors}")
        for note in self.notes:
            lines.append(f"note: {note}")
        return "\n".join(lines)


def _marginal_guard(value: float, scale: float, name: str) -> None:
    if abs(value) < 1e-12 * scale:
        raise MarginalTransitionError(
            f"{name} is marginal (|{name}| < 1e-12 * b3): "
            "undetermined by the cubic truncation"
        )


def classify_transition(p: PhysicalParams, d: DomainSpec) -> TransitionReport:
    """Classify the transition for the given physical setup.

    Raises ``MarginalTransitionError`` when the deciding discriminant
    vanishes to rounding, since the cubic truncation cannot then decide.
    """
    tc = critical_temperature(p, d)
    disc = transition_discriminants(p, d)
    b3 = derive_coefficients(p, tc).b3
    m = d.multiplicity
    bs = (disc.B1, disc.B2, disc.B3)
    _marginal_guard(bs[m - 1], b3, f"B{m}")

    notes: list[str] = []
    amplitude = None
    topology = None
    minimal = None

    if m == 1:
        if disc.B1 > 0:
            ttype, side = TransitionType.TYPE_I, Side.BELOW
            census = {Side.BELOW: SideCensus(attractors=2), Side.ABOVE: SideCensus()}
        else:
            ttype, side = TransitionType.TYPE_II, Side.ABOVE
            census = {Side.BELOW: SideCensus(), Side.ABOVE: SideCensus(saddles=2)}
            notes.append(
                "the two bifurcated states are saddles of the full dynamics; "
                "in the one-dimensional reduced system they appear as repellers"
            )
        amplitude = math.sqrt(
            4.0 * p.R / (3.0 * abs(disc.B1) * p.ubar * (1.0 - p.ubar))
        )
    elif m == 2:
        if disc.B2 > 0:
            ttype, side = TransitionType.TYPE_I, Side.BELOW
            census = {
                Side.BELOW: SideCensus(attractors=4, saddles=4),
                Side.ABOVE: SideCensus(),
            }
            topology = "S^1"
        else:
            ttype = TransitionType.TYPE_II
            _marginal_guard(disc.B1, b3, "B1")
            if disc.B1 > 0:
                side = Side.BOTH
                census = {
                    Side.BELOW: SideCensus(saddles=4),
                    Side.ABOVE: SideCensus(saddles=4),
                }
            else:
                side = Side.ABOVE
                census = {Side.BELOW: SideCensus(), Side.ABOVE: SideCensus(saddles=8)}
    else:
        if disc.B3 > 0:
            ttype, side = TransitionType.TYPE_I, Side.BELOW
            topology = "S^2"
            sigma_gap = disc.sigma1 - disc.sigma2
            if abs(sigma_gap) <= 1e-12 * (abs(disc.sigma1) + abs(disc.sigma2)):
                census = {Side.BELOW: SideCensus(), Side.ABOVE: SideCensus()}
                notes.append(
                    "equal cubic coefficients: the bifurcated attractor is a "
                    "continuum of steady states, census not enumerated"
                )
            else:
                # the eight diagonal states attract when the self-coupling
                # dominates, equivalently b3 < 22*L^2*b2^2/(9*alpha*pi^2)
                minimal = 8 if sigma_gap > 0 else 6
                census = {
                    Side.BELOW: SideCensus(attractors=minimal, saddles=26 - minimal),
                    Side.ABOVE: SideCensus(),
                }
            if p.alpha != 1.0:
                notes.append(
                    "the minimal-attractor threshold compares b3 against "
                    "22*L^2*b2^2/(9*alpha*pi^2), with the gradient coefficient "
                    "in the denominator"
                )
        else:
            ttype = TransitionType.TYPE_II
            _marginal_guard(disc.B1, b3, "B1")
            if disc.B1 < 0:
                side = Side.ABOVE
                census = {Side.BELOW: SideCensus(), Side.ABOVE: SideCensus(saddles=26)}
            else:
                _marginal_guard(disc.B2, b3, "B2")
                side = Side.BOTH
                if disc.B2 > 0:
                    census = {
                        Side.BELOW: SideCensus(saddles=18),
                        Side.ABOVE: SideCensus(saddles=8),
                    }
                else:
                    census = {
                        Side.BELOW: SideCensus(saddles=6),
                        Side.ABOVE: SideCensus(saddles=20),
                    }

    return TransitionReport(
        tc=tc,
        m=m,
        B=bs,
        transition_type=ttype,
        side=side,
        census=census,
        amplitude_coefficient=amplitude,
        attractor_topology=topology,
        minimal_attractors=minimal,
        notes=tuple(notes),
    )


def bifurcated_amplitude(p: PhysicalParams, d: DomainSpec, T: float) -> float:
    """Amplitude of the two bifurcated states for a single critical mode:
    ``sqrt(4*R*|Tc - T| / (3*|B1|*ubar*(1 - ubar)))``.

    Requires ``m = 1``, a nonzero deciding discriminant and ``T`` on the
    bifurcated side (below the critical temperature for a continuous
    transition, above for a jump).
    """
    if d.multiplicity != 1:
        raise ValueError("the closed-form amplitude law applies to a single critical mode")
    tc = critical_temperature(p, d)
    disc = transition_discriminants(p, d)
    b3 = derive_coefficients(p, tc).b3
    _marginal_guard(disc.B1, b3, "B1")
    if disc.B1 > 0 and T > tc:
        raise ValueError("continuous transition: bifurcated states exist below Tc only")
    if disc.B1 < 0 and T < tc:
        raise ValueError("jump transition: bifurcated states exist above Tc only")
    return math.sqrt(
        4.0 * p.R * abs(tc - T) / (3.0 * abs(disc.B1) * p.ubar * (1.0 - p.ubar))
    )


def _full_system_kind(e: Equilibrium) -> str:
    if e.kind is EquilibriumKind.ATTRACTOR:
        return "attractor"
    if e.kind is EquilibriumKind.DEGENERATE:
        return "degenerate"
    return "saddle"


@dataclass(frozen=True)
class CensusCheck:
    """Comparison of the theorem census against direct enumeration."""

    matches: bool
    expected: dict[Side, SideCensus]
    observed: dict[Side, SideCensus]
    mismatches: tuple[str, ...] = ()
    equilibria: dict[Side, tuple[Equilibrium, ...]] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "matches": self.matches,
            "expected": {s.value: c.as_dict() for s, c in self.expected.items()},
            "observed": {s.value: c.as_dict() for s, c in self.observed.items()},
            "mismatches": list(self.mismatches),
            "equilibria": {
                s.value: [e.as_dict() for e in es] for s, es in self.equilibria.items()
            },
        }


def census_check(
    report: TransitionReport,
    p: PhysicalParams,
    d: DomainSpec,
    offset: float = 0.02,
) -> CensusCheck:
    """Re-derive the equilibrium census by enumeration on both sides of the
    critical temperature (relative ``offset``) and compare with the report.

    A mismatch is recorded, not raised.
    """
    observed: dict[Side, SideCensus] = {}
    equilibria: dict[Side, tuple[Equilibrium, ...]] = {}
    mismatches: list[str] = []
    for side, T in (
        (Side.BELOW, report.tc * (1.0 - offset)),
        (Side.ABOVE, report.tc * (1.0 + offset)),
    ):
        try:
            eqs = enumerate_equilibria(p, d, T, sigma_at="critical")
        except DegenerateCubicError as exc:
            mismatches.append(f"{side.value}: enumeration degenerate ({exc})")
            observed[side] = SideCensus()
            equilibria[side] = ()
            continue
        kinds = [_full_system_kind(e) for e in eqs]
        observed[side] = SideCensus(
            attractors=kinds.count("attractor"), saddles=kinds.count("saddle")
        )
        equilibria[side] = tuple(eqs)
        if kinds.count("degenerate"):
            mismatches.append(f"{side.value}: {kinds.count('degenerate')} degenerate points")
    for side in (Side.BELOW, Side.ABOVE):
        exp = report.census.get(side, SideCensus())
        obs = observed[side]
        if (exp.attractors, exp.saddles) != (obs.attractors, obs.saddles):
            mismatches.append(
                f"{side.value}: expected {exp.as_dict()}, enumerated {obs.as_dict()}"
            )
    return CensusCheck(
        matches=not mismatches,
        expected=dict(report.census),
        observed=observed,
        mismatches=tuple(mismatches),
        equilibria=equilibria,
    )
