"""Pseudospectral time integration of the mixture dynamics on the box.

The stiff linear part (fourth-order diffusion plus the linearised potential
term) is diagonal in the cosine basis and treated implicitly; everything
else is evaluated pseudospectrally on a zero-padded grid (factor two, which
removes aliasing of the cubic products from the retained band) and treated
explicitly.  Two right-hand sides are available:

``taylor``
    The evolution model with the mobility expanded to second order about
    the mean fraction, the form used by the reduction analysis.

``divergence``
    The conservative form ``du/dt = div(H(ubar + u) grad(mu))`` with the
    full mobility profile and the quartic free energy.  This is an exact
    gradient flow: the free energy decreases along trajectories.

The zero mode is pinned to zero every step, so total mass is conserved to
rounding by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linstab import critical_set
from .params import DomainSpec, PhysicalParams, derive_coefficients
from .spectral import (
    Mode,
    SpectralField,
    _analyze,
    _divergence_coeffs,
    _gradient_grids,
    _pad_coeffs,
    _synthesize,
    _truncate_coeffs,
    integrate_grid,
)

__all__ = [
    "StepConfig",
    "SimState",
    "Diagnostics",
    "SimResult",
    "StepRejectedError",
    "Stepper",
    "step",
    "simulate",
    "free_energy",
    "chemical_potential",
    "dissipation",
    "random_initial_field",
    "field_from_modes",
]


class StepRejectedError(RuntimeError):
    """A time step produced a non-finite or exploding state."""


@dataclass(frozen=True)
class StepConfig:
    """Time-stepping configuration.

    ``scheme`` is ``imex1`` (implicit Euler on the linear part, explicit
    Euler on the rest) or ``imex2`` (implicit trapezoid plus second-order
    Adams-Bashforth).  ``stabilization`` adds ``s*Laplace^2`` implicitly and
    subtracts it explicitly, useful for stiff mobility profiles.
    """

    dt: float
    grid: tuple[int, int, int] = (32, 32, 32)
    scheme: str = "imex1"
    rhs: str = "taylor"
    stabilization: float = 0.0
    dealias: bool = True

    def __post_init__(self) -> None:
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.scheme not in ("imex1", "imex2"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.rhs not in ("taylor", "divergence"):
            raise ValueError(f"unknown rhs form {self.rhs!r}")
        if self.stabilization < 0.0:
            raise ValueError("stabilization must be nonnegative")
        grid = tuple(int(n) for n in self.grid)
        if len(grid) != 3 or any(n < 6 for n in grid):
            raise ValueError("grid needs three sizes of at least 6 (twice the "
                             "largest critical index plus two)")
        object.__setattr__(self, "grid", grid)


@dataclass(frozen=True)
class SimState:
    """Deviation field, time and temperature, with the physical setup."""

    u: SpectralField
    t: float
    T: float
    params: PhysicalParams

    @property
    def domain(self) -> DomainSpec:
        return self.u.domain

    @property
    def mass(self) -> float:
        return float(self.u.coeffs[0, 0, 0])

    def projection(self, K: Mode) -> float:
        return self.u.amplitude(K)


@dataclass(frozen=True)
class Diagnostics:
    mass: float
    energy: float
    dissipation: float
    mode_amplitudes: dict[Mode, float]


@dataclass(frozen=True)
class SimResult:
    times: np.ndarray
    mass: np.ndarray
    energy: np.ndarray
    dissipation: np.ndarray
    amplitudes: dict[Mode, np.ndarray]
    final_state: SimState
    converged: bool
    steps_taken: int

    def diagnostics(self, i: int) -> Diagnostics:
        return Diagnostics(
            mass=float(self.mass[i]),
            energy=float(self.energy[i]),
            dissipation=float(self.dissipation[i]),
            mode_amplitudes={K: float(v[i]) for K, v in self.amplitudes.items()},
        )


def _rho_array(shape: tuple[int, int, int], d: DomainSpec) -> np.ndarray:
    parts = [
        (np.arange(n, dtype=float) * math.pi / L) ** 2
        for n, L in zip(shape, d.lengths)
    ]
    return (
        parts[0][:, None, None] + parts[1][None, :, None] + parts[2][None, None, :]
    )


def _mobility_grid(p: PhysicalParams, u_grid: np.ndarray, rhs: str) -> np.ndarray:
    mob = p.mobility
    if rhs == "divergence" and mob.profile is not None:
        return mob.profile(p.ubar + u_grid)
    return mob.taylor_value(u_grid)


def _mean_mobility(p: PhysicalParams, rhs: str) -> float:
    mob = p.mobility
    if rhs == "divergence" and mob.profile is not None:
        return float(mob.profile(p.ubar))
    return mob.h0


class Stepper:
    """Reusable time stepper bound to one trajectory.

    Precomputes the diagonal implicit symbols; keeps the previous explicit
    term for the second-order scheme (its first step falls back to the
    first-order update).
    """

    def __init__(self, state: SimState, cfg: StepConfig) -> None:
        if state.u.grid_shape != cfg.grid:
            raise ValueError(
                f"state grid {state.u.grid_shape} does not match config {cfg.grid}"
            )
        self.cfg = cfg
        self.params = state.params
        self.domain = state.domain
        self.T = state.T
        self.coeffs_b = derive_coefficients(state.params, state.T)
        self.shape = cfg.grid
        self.pad_shape = tuple(2 * n for n in cfg.grid) if cfg.dealias else cfg.grid
        self.rho = _rho_array(self.shape, self.domain)
        h_bar = _mean_mobility(state.params, cfg.rhs)
        self.beta = -h_bar * (
            state.params.alpha * self.rho**2 + self.coeffs_b.b1 * self.rho
        )
        lam = self.beta - cfg.stabilization * self.rho**2
        dt = cfg.dt
        self._den1 = 1.0 - dt * lam
        self._den2 = 1.0 - 0.5 * dt * lam
        self._num2 = 1.0 + 0.5 * dt * lam
        self._stab = cfg.stabilization * self.rho**2
        self._prev_g: np.ndarray | None = None

    # -- explicit part -----------------------------------------------------

    def explicit_term(self, coeffs: np.ndarray) -> np.ndarray:
        """Coefficients of everything treated explicitly (without the
        stabilisation shift)."""
        if self.cfg.rhs == "taylor":
            return self._explicit_taylor(coeffs)
        return self._explicit_divergence(coeffs)

    def _grids(self, coeffs: np.ndarray):
        padded = _pad_coeffs(coeffs, self.pad_shape)
        u_grid = _synthesize(padded)
        return padded, u_grid

    def _explicit_taylor(self, coeffs: np.ndarray) -> np.ndarray:
        p, b = self.params, self.coeffs_b
        mob = p.mobility
        padded, u_grid = self._grids(coeffs)
        u2_hat_pad = _analyze(u_grid * u_grid)
        u3_hat = _truncate_coeffs(_analyze(u_grid * u_grid * u_grid), self.shape)
        u2_hat = _truncate_coeffs(u2_hat_pad, self.shape)

        out = -mob.h0 * self.rho * (b.b2 * u2_hat + b.b3 * u3_hat)

        if mob.h1 != 0.0:
            # flux u * grad(alpha*Lap(u) - b1*u - b2*u^2)
            v_pad = _pad_coeffs(
                (-p.alpha * self.rho - b.b1) * coeffs, self.pad_shape
            )
            v_pad -= b.b2 * u2_hat_pad
            grads = _gradient_grids(v_pad, self.domain, self.pad_shape)
            flux = [u_grid * g for g in grads]
            out -= mob.h1 * _divergence_coeffs(flux, self.domain, self.shape)

        if mob.h2 != 0.0:
            # flux u^2 * grad(alpha*Lap(u) - b1*u)
            w = (-p.alpha * self.rho - b.b1) * coeffs
            grads = _gradient_grids(
                _pad_coeffs(w, self.pad_shape), self.domain, self.pad_shape
            )
            u2_grid = u_grid * u_grid
            flux = [u2_grid * g for g in grads]
            out -= 0.5 * mob.h2 * _divergence_coeffs(flux, self.domain, self.shape)

        out[0, 0, 0] = 0.0
        return out

    def _explicit_divergence(self, coeffs: np.ndarray) -> np.ndarray:
        p, b = self.params, self.coeffs_b
        padded, u_grid = self._grids(coeffs)
        poly = b.b2 * u_grid * u_grid + b.b3 * u_grid * u_grid * u_grid
        mu_hat = (p.alpha * self.rho + b.b1) * coeffs + _truncate_coeffs(
            _analyze(poly), self.shape
        )
        grads = _gradient_grids(
            _pad_coeffs(mu_hat, self.pad_shape), self.domain, self.pad_shape
        )
        h_grid = _mobility_grid(p, u_grid, "divergence")
        flux = [h_grid * g for g in grads]
        rhs = _divergence_coeffs(flux, self.domain, self.shape)
        rhs[0, 0, 0] = 0.0
        return rhs - self.beta * coeffs

    # -- update ------------------------------------------------------------

    def step(self, state: SimState) -> SimState:
        c = state.u.coeffs
        dt = self.cfg.dt
        g = self.explicit_term(c)
        if self.cfg.scheme == "imex1" or self._prev_g is None:
            new = (c + dt * (g + self._stab * c)) / self._den1
        else:
            expl = 1.5 * (g + self._stab * c) - 0.5 * self._prev_g
            new = (self._num2 * c + dt * expl) / self._den2
        self._prev_g = g + self._stab * c
        new[0, 0, 0] = 0.0
        if not np.all(np.isfinite(new)):
            raise StepRejectedError(
                f"non-finite coefficients after step at t={state.t:.6g} "
                f"(dt={dt:.3g}); reduce dt or add stabilization"
            )
        norm = float(np.abs(new).max())
        if norm > 1e6:
            raise StepRejectedError(
                f"coefficient overflow ({norm:.3e}) at t={state.t:.6g}; "
                "reduce dt or add stabilization"
            )
        return SimState(
            u=SpectralField(new, state.domain),
            t=state.t + dt,
            T=state.T,
            params=state.params,
        )


def step(s: SimState, c: StepConfig) -> SimState:
    """Advance one step.  For repeated stepping build a ``Stepper`` once."""
    return Stepper(s, c).step(s)


def simulate(
    s0: SimState,
    cfg: StepConfig,
    t_end: float,
    record_every: int = 1,
    steady_tol: float = 1e-10,
    track_modes: tuple[Mode, ...] | None = None,
) -> SimResult:
    """Run to ``t_end``, recording diagnostics every ``record_every`` steps.

    Stops early when the coefficient-space rate of change falls below
    ``steady_tol * (1 + |u|)``.  Tracked mode amplitudes default to the
    critical set of the domain.
    """
    if track_modes is None:
        track_modes = critical_set(s0.params, s0.domain).modes
    stepper = Stepper(s0, cfg)
    n_steps = max(1, int(round((t_end - s0.t) / cfg.dt)))

    times = [s0.t]
    mass = [s0.mass]
    energy = [free_energy(s0)]
    dissip = [dissipation(s0, rhs=cfg.rhs)]
    amps: dict[Mode, list[float]] = {K: [s0.projection(K)] for K in track_modes}

    state = s0
    converged = False
    steps_taken = 0
    for n in range(1, n_steps + 1):
        prev = state.u.coeffs
        state = stepper.step(state)
        steps_taken = n
        if n % record_every == 0 or n == n_steps:
            times.append(state.t)
            mass.append(state.mass)
            energy.append(free_energy(state))
            dissip.append(dissipation(state, rhs=cfg.rhs))
            for K in track_modes:
                amps[K].append(state.projection(K))
        delta = float(np.linalg.norm(state.u.coeffs - prev)) / cfg.dt
        if delta < steady_tol * (1.0 + float(np.linalg.norm(state.u.coeffs))):
            converged = True
            if times[-1] != state.t:
                times.append(state.t)
                mass.append(state.mass)
                energy.append(free_energy(state))
                dissip.append(dissipation(state, rhs=cfg.rhs))
                for K in track_modes:
                    amps[K].append(state.projection(K))
            break
    return SimResult(
        times=np.asarray(times),
        mass=np.asarray(mass),
        energy=np.asarray(energy),
        dissipation=np.asarray(dissip),
        amplitudes={K: np.asarray(v) for K, v in amps.items()},
        final_state=state,
        converged=converged,
        steps_taken=steps_taken,
    )


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------


def _padded_grid(state: SimState) -> tuple[np.ndarray, np.ndarray, tuple[int, int, int]]:
    shape = state.u.grid_shape
    pad = tuple(2 * n for n in shape)
    padded = _pad_coeffs(state.u.coeffs, pad)
    return padded, _synthesize(padded), pad


def free_energy(s: SimState) -> float:
    """Quartic free energy of the deviation field at the state's
    temperature, by spectral differentiation and exact midpoint quadrature."""
    b = derive_coefficients(s.params, s.T)
    padded, u_grid, pad = _padded_grid(s)
    grads = _gradient_grids(padded, s.domain, pad)
    density = 0.5 * s.params.alpha * sum(g * g for g in grads)
    density += (
        0.5 * b.b1 * u_grid**2 + b.b2 / 3.0 * u_grid**3 + 0.25 * b.b3 * u_grid**4
    )
    return integrate_grid(density, s.domain)


def chemical_potential(s: SimState) -> SpectralField:
    """Variational derivative of the free energy, truncated to the field's
    band: ``-alpha*Lap(u) + b1*u + b2*u^2 + b3*u^3``."""
    b = derive_coefficients(s.params, s.T)
    shape = s.u.grid_shape
    rho = _rho_array(shape, s.domain)
    _, u_grid, _ = _padded_grid(s)
    poly = b.b2 * u_grid * u_grid + b.b3 * u_grid**3
    coeffs = (s.params.alpha * rho + b.b1) * s.u.coeffs + _truncate_coeffs(
        _analyze(poly), shape
    )
    # the polynomial part may carry a mean; the potential is defined up to a
    # constant, so drop it
    coeffs[0, 0, 0] = 0.0
    return SpectralField(coeffs, s.domain)


def dissipation(s: SimState, rhs: str = "taylor") -> float:
    """Free-energy production rate ``-integral(H |grad(mu)|^2)`` (never
    positive); equals the time derivative of the free energy along exact
    dynamics of the matching right-hand side."""
    mu = chemical_potential(s)
    pad = tuple(2 * n for n in mu.grid_shape)
    grads = _gradient_grids(_pad_coeffs(mu.coeffs, pad), s.domain, pad)
    _, u_grid, _ = _padded_grid(s)
    h_grid = _mobility_grid(s.params, u_grid, rhs)
    density = h_grid * sum(g * g for g in grads)
    return -integrate_grid(density, s.domain)


# ---------------------------------------------------------------------------
# initial data
# ---------------------------------------------------------------------------


def field_from_modes(
    amplitudes: dict[Mode, float], grid: tuple[int, int, int], d: DomainSpec
) -> SpectralField:
    return SpectralField.from_modes(amplitudes, grid, d)


def random_initial_field(
    d: DomainSpec,
    grid: tuple[int, int, int],
    amplitude: float,
    rng: np.random.Generator,
    band_limit: int = 4,
) -> SpectralField:
    """Seeded random coefficients, uniform in ``[-amplitude, amplitude]`` on
    all modes with indices up to ``band_limit``."""
    coeffs = np.zeros(grid)
    band = tuple(min(band_limit, n - 1) for n in grid)
    block = rng.uniform(
        -amplitude, amplitude, size=tuple(b + 1 for b in band)
    )
    coeffs[: band[0] + 1, : band[1] + 1, : band[2] + 1] = block
    coeffs[0, 0, 0] = 0.0
    return SpectralField(coeffs, d)
