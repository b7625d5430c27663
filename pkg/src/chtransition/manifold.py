"""Center-manifold reduction near the critical temperature.

Close to the transition the stable-mode amplitudes are slaved to the
critical ones through a quadratic graph, and the dynamics collapses to a
cubic system for the critical amplitudes ``y`` with identical coefficients
in every component:

    dy_J/dt = beta(T)*y_J - (H0*pi^2/(2*L^2)) * y_J * (sigma1*y_J^2
              + sigma2*sum_{L != J} y_L^2)

The system is a gradient flow of a quartic potential, its steady states can
be enumerated in closed form (3^m - 1 nonzero ones in the generic case) and
its critical-parameter version is a homogeneous cubic whose straight-line
orbits organise the local flow.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum
from itertools import combinations_with_replacement, product

import numpy as np

from .linstab import critical_set, growth_rate
from .params import (
    DomainSpec,
    PhysicalParams,
    critical_temperature,
    derive_coefficients,
    transition_discriminants,
)
from .spectral import Mode, laplacian_eigenvalue, mode_l2_norm_sq, triple_product

__all__ = [
    "ReducedState",
    "ManifoldCoeffs",
    "Equilibrium",
    "EquilibriumKind",
    "ReducedTrajectory",
    "DegenerateCubicError",
    "cm_coefficients",
    "cubic_coefficients",
    "reduced_vector_field",
    "critical_vector_field",
    "reduced_potential",
    "enumerate_equilibria",
    "straight_line_orbits",
    "integrate_reduced",
]


class DegenerateCubicError(ValueError):
    """The cubic coefficients are degenerate (equal, or a family denominator
    vanishes); the steady states cannot be enumerated as isolated points."""


@dataclass(frozen=True)
class ReducedState:
    """Critical-mode amplitudes (ordered as the critical set) at temperature
    ``T``."""

    y: tuple[float, ...]
    T: float

    def __post_init__(self) -> None:
        y = tuple(float(v) for v in self.y)
        if len(y) not in (1, 2, 3):
            raise ValueError("reduced state must have 1, 2 or 3 components")
        object.__setattr__(self, "y", y)

    @property
    def m(self) -> int:
        return len(self.y)


@dataclass(frozen=True)
class ManifoldCoeffs:
    """Quadratic-slaving amplitudes of the stable modes, keyed by mode index.

    Supported on sums of pairs of critical modes; every amplitude is
    proportional to the quadratic free-energy coefficient and therefore
    vanishes at the symmetric mean fraction.
    """

    values: dict[Mode, float]

    def __getitem__(self, K: Mode) -> float:
        return self.values.get(tuple(K), 0.0)

    @property
    def support(self) -> tuple[Mode, ...]:
        return tuple(sorted(self.values))


def _critical_modes(p: PhysicalParams, d: DomainSpec, m: int) -> tuple[Mode, ...]:
    cset = critical_set(p, d)
    if cset.m != m:
        raise ValueError(
            f"state has {m} components but the domain carries {cset.m} critical modes"
        )
    return cset.modes


def cm_coefficients(
    state: ReducedState,
    p: PhysicalParams,
    d: DomainSpec,
    form: str = "leading",
) -> ManifoldCoeffs:
    """Slaved stable-mode amplitudes for critical amplitudes ``state.y``.

    ``form="leading"`` evaluates the closed-form leading order: the doubled
    mode ``2J`` carries ``-b2*y_J^2 / (6*alpha*rho_J)`` and the mixed mode
    ``J+L`` carries ``-2*b2*y_J*y_L / (alpha*rho_J)``.  ``form="quotient"``
    evaluates the unapproximated projection quotient (quadratic term
    projected on the stable mode, divided by its decay rate), which the
    leading order must reproduce at the critical temperature.
    """
    if form not in ("leading", "quotient"):
        raise ValueError(f"unknown form {form!r}")
    tc = critical_temperature(p, d)
    if abs(state.T - tc) > 0.1 * tc:
        warnings.warn(
            "manifold approximation requested far from the critical temperature "
            f"(T={state.T:.6g}, Tc={tc:.6g})",
            stacklevel=2,
        )
    modes = _critical_modes(p, d, state.m)
    y = dict(zip(modes, state.y))
    b2 = derive_coefficients(p, state.T).b2
    rho1 = laplacian_eigenvalue(modes[0], d)

    values: dict[Mode, float] = {}
    if form == "leading":
        for J, L in combinations_with_replacement(modes, 2):
            K = tuple(a + b for a, b in zip(J, L))
            if J == L:
                values[K] = -b2 * y[J] ** 2 / (6.0 * p.alpha * rho1)
            else:
                values[K] = -2.0 * b2 * y[J] * y[L] / (p.alpha * rho1)
        return ManifoldCoeffs(values=values)

    h0 = p.mobility.h0
    support = {tuple(a + b for a, b in zip(J, L)) for J, L in product(modes, repeat=2)}
    for K in sorted(support):
        rho_k = laplacian_eigenvalue(K, d)
        beta_k = growth_rate(K, state.T, p, d)
        acc = 0.0
        for J, L in product(modes, repeat=2):
            acc += y[J] * y[L] * triple_product(J, L, K, d)
        values[K] = h0 * b2 * rho_k * acc / (beta_k * mode_l2_norm_sq(K, d))
    return ManifoldCoeffs(values=values)


def cubic_coefficients(
    p: PhysicalParams, d: DomainSpec, T: float | None = None
) -> tuple[float, float]:
    """Coefficients ``(a1, a2)`` of the cubic terms of the reduced system,
    with the sigma pair evaluated at ``T`` (critical temperature when
    ``None``)."""
    disc = transition_discriminants(p, d, T=T)
    pref = p.mobility.h0 * math.pi**2 / (2.0 * d.L**2)
    return pref * disc.sigma1, pref * disc.sigma2


def _field(y: np.ndarray, beta: float, a1: float, a2: float) -> np.ndarray:
    s = float((y * y).sum())
    return beta * y - y * (a1 * y * y + a2 * (s - y * y))


def _jacobian(y: np.ndarray, beta: float, a1: float, a2: float) -> np.ndarray:
    s = float((y * y).sum())
    jac = -2.0 * a2 * np.outer(y, y)
    np.fill_diagonal(jac, beta - 3.0 * a1 * y * y - a2 * (s - y * y))
    return jac


def reduced_vector_field(
    state: ReducedState,
    p: PhysicalParams,
    d: DomainSpec,
    sigma_at: str = "ambient",
) -> np.ndarray:
    """Right-hand side of the reduced cubic system at ``state``.

    ``sigma_at`` selects where the cubic coefficients are evaluated:
    ``"ambient"`` (the state's temperature, the default) or ``"critical"``.
    """
    modes = _critical_modes(p, d, state.m)
    beta = growth_rate(modes[0], state.T, p, d)
    a1, a2 = cubic_coefficients(p, d, T=_sigma_temperature(sigma_at, state.T))
    return _field(np.asarray(state.y, dtype=float), beta, a1, a2)


def _sigma_temperature(sigma_at: str, T: float) -> float | None:
    if sigma_at == "ambient":
        return T
    if sigma_at == "critical":
        return None
    raise ValueError(f"sigma_at must be 'ambient' or 'critical', got {sigma_at!r}")


def critical_vector_field(
    y, p: PhysicalParams, d: DomainSpec
) -> np.ndarray:
    """Reduced field exactly at the transition: the linear term vanishes and
    the cubic coefficients are frozen at the critical temperature."""
    y = np.asarray(y, dtype=float)
    m = d.multiplicity
    if y.shape != (m,):
        raise ValueError(f"expected {m} components for this domain, got {y.shape}")
    a1, a2 = cubic_coefficients(p, d, T=None)
    return _field(y, 0.0, a1, a2)


def reduced_potential(
    state: ReducedState,
    p: PhysicalParams,
    d: DomainSpec,
    sigma_at: str = "ambient",
) -> float:
    """Quartic potential whose negative gradient is the reduced field; it
    decreases along trajectories."""
    modes = _critical_modes(p, d, state.m)
    beta = growth_rate(modes[0], state.T, p, d)
    a1, a2 = cubic_coefficients(p, d, T=_sigma_temperature(sigma_at, state.T))
    y = np.asarray(state.y, dtype=float)
    s = float((y * y).sum())
    quartic = float((y**4).sum())
    return -0.5 * beta * s + 0.25 * a1 * quartic + 0.25 * a2 * (s * s - quartic)


class EquilibriumKind(Enum):
    ATTRACTOR = "attractor"
    SADDLE = "saddle"
    REPELLER = "repeller"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class Equilibrium:
    """Steady state of the reduced system with its linearisation data.

    ``kind`` classifies the reduced-system Jacobian; because the discarded
    modes are all strongly damped, a non-attracting kind corresponds to a
    saddle of the full dynamics.
    """

    y: tuple[float, ...]
    jacobian_eigs: tuple[float, ...]
    kind: EquilibriumKind
    residual: float

    def as_dict(self) -> dict:
        return {
            "y": list(self.y),
            "jacobian_eigenvalues": list(self.jacobian_eigs),
            "kind": self.kind.value,
            "residual": self.residual,
        }


def _classify_eigs(eigs: np.ndarray, scale: float) -> EquilibriumKind:
    tol = 1e-10 * scale
    if np.any(np.abs(eigs) <= tol):
        return EquilibriumKind.DEGENERATE
    if np.all(eigs < 0.0):
        return EquilibriumKind.ATTRACTOR
    if np.all(eigs > 0.0):
        return EquilibriumKind.REPELLER
    return EquilibriumKind.SADDLE


def enumerate_equilibria(
    p: PhysicalParams,
    d: DomainSpec,
    T: float,
    sigma_at: str = "critical",
) -> list[Equilibrium]:
    """All nonzero steady states of the reduced system at temperature ``T``.

    Solutions are found in closed form by case analysis over which
    components vanish: on a support of size ``s`` every active component
    squares to ``beta / (a1 + (s-1)*a2)``.  Generic parameters give
    ``3^m - 1`` solutions in total across the two sides of the transition.

    The cubic coefficients are frozen at the critical temperature by default
    (``sigma_at="critical"``), matching the classification theory;
    ``sigma_at="ambient"`` uses the requested temperature instead.
    Degenerate cubic coefficients raise ``DegenerateCubicError``.
    """
    modes = _critical_modes(p, d, d.multiplicity)
    m = len(modes)
    beta = growth_rate(modes[0], T, p, d)
    a1, a2 = cubic_coefficients(p, d, T=_sigma_temperature(sigma_at, T))
    scale = abs(a1) + abs(a2)
    if scale == 0.0 or abs(a1 - a2) <= 1e-12 * scale:
        raise DegenerateCubicError(
            "equal cubic coefficients: the steady states form a continuum "
            "and cannot be enumerated as isolated points"
        )

    out: list[Equilibrium] = []
    for support_size in range(1, m + 1):
        denom = a1 + (support_size - 1) * a2
        if abs(denom) <= 1e-12 * scale:
            raise DegenerateCubicError(
                f"vanishing cubic denominator for support size {support_size}"
            )
        q = beta / denom
        if q <= 0.0:
            continue
        r = math.sqrt(q)
        for support in combinations_with_replacement(range(m), support_size):
            if len(set(support)) != support_size:
                continue
            for signs in product((1.0, -1.0), repeat=support_size):
                y = np.zeros(m)
                for idx, sg in zip(support, signs):
                    y[idx] = sg * r
                jac = _jacobian(y, beta, a1, a2)
                eigs = np.linalg.eigvalsh(jac)
                eig_scale = max(float(np.abs(eigs).max()), abs(beta), scale * q)
                residual = float(np.abs(_field(y, beta, a1, a2)).max())
                out.append(
                    Equilibrium(
                        y=tuple(float(v) for v in y),
                        jacobian_eigs=tuple(float(v) for v in eigs),
                        kind=_classify_eigs(eigs, eig_scale),
                        residual=residual,
                    )
                )
    return out


def straight_line_orbits(m: int) -> list[np.ndarray]:
    """Invariant line directions of the critical cubic system.

    One line for ``m=1``; the two axes plus the two diagonals for ``m=2``
    (four lines, eight orbits); the three axes, six in-plane diagonals and
    four space diagonals for ``m=3`` (thirteen lines, 26 orbits).  The
    counts are exact whenever the two cubic coefficients differ.
    """
    if m == 1:
        dirs = [np.array([1.0])]
    elif m == 2:
        dirs = [np.array(v, dtype=float) for v in ((1, 0), (0, 1), (1, 1), (1, -1))]
    elif m == 3:
        axes = [(1, 0, 0), (0, 1, 0), (0, 0, 1)]
        plane = [
            (1, 1, 0), (1, -1, 0),
            (1, 0, 1), (1, 0, -1),
            (0, 1, 1), (0, 1, -1),
        ]
        space = [(1, 1, 1), (1, 1, -1), (1, -1, 1), (1, -1, -1)]
        dirs = [np.array(v, dtype=float) for v in axes + plane + space]
    else:
        raise ValueError("m must be 1, 2 or 3")
    return [v / np.linalg.norm(v) for v in dirs]


@dataclass(frozen=True)
class ReducedTrajectory:
    """Fixed-step integration record; ``escaped`` flags a blow-up stop."""

    times: np.ndarray
    states: np.ndarray  # shape (n_records, m)
    escaped: bool

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def integrate_reduced(
    y0: ReducedState,
    p: PhysicalParams,
    d: DomainSpec,
    dt: float,
    steps: int,
    sigma_at: str = "ambient",
    record_every: int = 1,
    blowup_norm: float = 1e6,
) -> ReducedTrajectory:
    """Classical fourth-order Runge-Kutta integration of the reduced system.

    Escape beyond ``blowup_norm`` stops the integration and is reported via
    the trajectory flag rather than raised: on the discontinuous-transition
    side orbits legitimately leave the local neighbourhood.
    """
    if dt == 0.0:
        raise ValueError("dt must be nonzero (negative integrates backward)")
    modes = _critical_modes(p, d, y0.m)
    beta = growth_rate(modes[0], y0.T, p, d)
    if abs(dt) * abs(beta) > 0.1:
        warnings.warn(
            f"dt*|beta| = {dt * abs(beta):.3g} exceeds the stability heuristic 0.1",
            stacklevel=2,
        )
    a1, a2 = cubic_coefficients(p, d, T=_sigma_temperature(sigma_at, y0.T))

    def f(y: np.ndarray) -> np.ndarray:
        return _field(y, beta, a1, a2)

    y = np.asarray(y0.y, dtype=float)
    times = [0.0]
    states = [y.copy()]
    escaped = False
    for n in range(1, steps + 1):
        k1 = f(y)
        k2 = f(y + 0.5 * dt * k1)
        k3 = f(y + 0.5 * dt * k2)
        k4 = f(y + dt * k3)
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)) or float(np.abs(y).max()) > blowup_norm:
            escaped = True
            break
        if n % record_every == 0 or n == steps:
            times.append(n * dt)
            states.append(y.copy())
    return ReducedTrajectory(
        times=np.asarray(times), states=np.asarray(states), escaped=escaped
    )
