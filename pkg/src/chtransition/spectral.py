"""Cosine eigenbasis of the Neumann Laplacian on a rectangular box.

Modes are indexed by triples ``K = (k1, k2, k3)`` of nonnegative integers,
not all zero (the constant mode is excluded by the zero-mean constraint).
The basis function of mode ``K`` is ``prod_i cos(k_i*pi*x_i/L_i)`` and the
collocation grid is the midpoint grid ``x = (n + 1/2)*L/N``, on which the
type-II discrete cosine transform diagonalises analysis and synthesis
exactly.

Coefficients follow the plain-amplitude convention: the coefficient of mode
``K`` is ``<u, e_K> / <e_K, e_K>``, so a field equal to one basis function
has a single unit coefficient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np
import scipy.fft

from .params import DomainSpec

__all__ = [
    "Mode",
    "SpectralField",
    "laplacian_eigenvalue",
    "eval_mode",
    "forward_transform",
    "inverse_transform",
    "triple_product",
    "grad_triple_product",
    "mode_l2_norm_sq",
    "collocation_points",
    "integrate_grid",
    "save_grid",
    "load_grid",
    "grid_to_csv",
]

Mode = tuple[int, int, int]

_WORKERS = -1  # let pocketfft use all cores


def _check_mode(K) -> Mode:
    k = tuple(int(v) for v in K)
    if len(k) != 3 or any(v < 0 for v in k) or any(v != float(w) for v, w in zip(k, K)):
        raise ValueError(f"mode index must be three nonnegative integers, got {K!r}")
    if k == (0, 0, 0):
        raise ValueError("the zero mode is excluded by the zero-mean constraint")
    return k


def laplacian_eigenvalue(K: Mode, d: DomainSpec) -> float:
    """Eigenvalue of ``-Laplace`` on mode ``K``: ``sum_i (k_i*pi/L_i)**2``."""
    k = _check_mode(K)
    return sum((ki * math.pi / li) ** 2 for ki, li in zip(k, d.lengths))


def eval_mode(K: Mode, x, d: DomainSpec):
    """Evaluate the basis function of mode ``K`` at points ``x``.

    ``x`` is an array of shape ``(..., 3)`` with coordinates inside the box.
    """
    k = _check_mode(K)
    x = np.asarray(x, dtype=float)
    out = np.ones(x.shape[:-1])
    for ax in range(3):
        out = out * np.cos(k[ax] * math.pi * x[..., ax] / d.lengths[ax])
    return out if out.shape else float(out)


def collocation_points(n: int, length: float) -> np.ndarray:
    """Midpoint collocation grid ``(j + 1/2) * length / n``."""
    return (np.arange(n) + 0.5) * (length / n)


# ---------------------------------------------------------------------------
# raw transforms between midpoint-grid samples and basis coefficients
#
# Coefficient arrays are indexed [k1, k2, k3].  A field may be represented in
# a mixed basis that is sine along one axis (slot j holds wavenumber j+1, as
# produced by differentiating a cosine series); `sine_axis` selects it.
# ---------------------------------------------------------------------------


def _analyze(grid: np.ndarray, sine_axis: int | None = None) -> np.ndarray:
    c = np.asarray(grid, dtype=float)
    cos_axes = [a for a in range(c.ndim) if a != sine_axis]
    if sine_axis is not None:
        c = scipy.fft.dst(c, type=2, axis=sine_axis, workers=_WORKERS)
    if cos_axes:
        c = scipy.fft.dctn(c, type=2, axes=cos_axes, workers=_WORKERS)
    for ax, n in enumerate(grid.shape):
        c = c / n
        edge = [slice(None)] * c.ndim
        edge[ax] = n - 1 if ax == sine_axis else 0
        c[tuple(edge)] /= 2.0
    return c


def _synthesize(coeffs: np.ndarray, sine_axis: int | None = None) -> np.ndarray:
    x = np.array(coeffs, dtype=float)
    for ax, n in enumerate(x.shape):
        x *= n
        edge = [slice(None)] * x.ndim
        edge[ax] = n - 1 if ax == sine_axis else 0
        x[tuple(edge)] *= 2.0
    cos_axes = [a for a in range(x.ndim) if a != sine_axis]
    if sine_axis is not None:
        x = scipy.fft.idst(x, type=2, axis=sine_axis, workers=_WORKERS)
    if cos_axes:
        x = scipy.fft.idctn(x, type=2, axes=cos_axes, workers=_WORKERS)
    return x


def _pad_coeffs(coeffs: np.ndarray, shape: tuple[int, int, int]) -> np.ndarray:
    out = np.zeros(shape)
    out[: coeffs.shape[0], : coeffs.shape[1], : coeffs.shape[2]] = coeffs
    return out


def _truncate_coeffs(coeffs: np.ndarray, shape: tuple[int, int, int]) -> np.ndarray:
    return coeffs[: shape[0], : shape[1], : shape[2]].copy()


def _gradient_grids(
    coeffs: np.ndarray, d: DomainSpec, shape: tuple[int, int, int]
) -> list[np.ndarray]:
    """Grids of the three partial derivatives, synthesised on a grid of the
    given shape (pad for products).  Each derivative is a sine series along
    its own axis."""
    grids = []
    for ax in range(3):
        s = np.zeros(shape)
        n_src = coeffs.shape[ax]
        src = [slice(None)] * 3
        src[ax] = slice(1, n_src)
        dst = [slice(0, coeffs.shape[0]), slice(0, coeffs.shape[1]), slice(0, coeffs.shape[2])]
        dst[ax] = slice(0, n_src - 1)
        k = np.arange(1, n_src, dtype=float) * math.pi / d.lengths[ax]
        k = k.reshape([-1 if a == ax else 1 for a in range(3)])
        s[tuple(dst)] = -k * coeffs[tuple(src)]
        grids.append(_synthesize(s, sine_axis=ax))
    return grids


def _divergence_coeffs(
    flux_grids: list[np.ndarray], d: DomainSpec, shape: tuple[int, int, int]
) -> np.ndarray:
    """Cosine coefficients of ``div(flux)``; flux component ``a`` is a sine
    series along axis ``a``.  The result has exactly zero mean."""
    total = np.zeros(shape)
    for ax, g in enumerate(flux_grids):
        s = _analyze(g, sine_axis=ax)
        n = s.shape[ax]
        c = np.zeros_like(s)
        dst = [slice(None)] * 3
        dst[ax] = slice(1, n)
        src = [slice(None)] * 3
        src[ax] = slice(0, n - 1)
        k = np.arange(1, n, dtype=float) * math.pi / d.lengths[ax]
        k = k.reshape([-1 if a == ax else 1 for a in range(3)])
        c[tuple(dst)] = k * s[tuple(src)]
        total += _truncate_coeffs(c, shape)
    return total


def integrate_grid(values: np.ndarray, d: DomainSpec) -> float:
    """Midpoint-rule integral over the box; exact for fields band-limited to
    the grid."""
    return float(values.sum() * (d.volume / values.size))


def _norm_weights(shape: tuple[int, int, int], d: DomainSpec) -> np.ndarray:
    """Per-mode values of ``<e_K, e_K>`` as a dense array."""
    out = np.ones(())
    for ax in range(3):
        w = np.full(shape[ax], d.lengths[ax] / 2.0)
        w[0] = d.lengths[ax]
        out = np.multiply.outer(out, w)
    return out


@dataclass
class SpectralField:
    """Zero-mean field represented by cosine-basis coefficients.

    ``coeffs[k1, k2, k3]`` is the amplitude of mode ``(k1, k2, k3)``; the
    array shape is the per-axis truncation.  The zero mode must vanish.
    The coefficient array is adopted, not copied (its zero-mode entry is
    pinned to exactly zero); pass a copy to keep the original untouched.
    """

    coeffs: np.ndarray
    domain: DomainSpec

    def __post_init__(self) -> None:
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.ndim != 3:
            raise ValueError("coefficient array must be three-dimensional")
        scale = float(np.abs(self.coeffs).max(initial=0.0))
        if abs(self.coeffs[0, 0, 0]) > 1e-9 * (1.0 + scale):
            raise ValueError("field must have zero mean (zero-mode coefficient present)")
        self.coeffs[0, 0, 0] = 0.0

    @property
    def grid_shape(self) -> tuple[int, int, int]:
        return self.coeffs.shape

    @classmethod
    def zeros(cls, shape: tuple[int, int, int], d: DomainSpec) -> "SpectralField":
        return cls(np.zeros(shape), d)

    @classmethod
    def from_modes(
        cls, amplitudes: dict[Mode, float], shape: tuple[int, int, int], d: DomainSpec
    ) -> "SpectralField":
        coeffs = np.zeros(shape)
        for K, a in amplitudes.items():
            k = _check_mode(K)
            if any(ki >= n for ki, n in zip(k, shape)):
                raise ValueError(f"mode {k} does not fit in grid shape {shape}")
            coeffs[k] = a
        return cls(coeffs, d)

    def amplitude(self, K: Mode) -> float:
        return float(self.coeffs[_check_mode(K)])

    def as_dict(self, threshold: float = 0.0) -> dict[Mode, float]:
        out: dict[Mode, float] = {}
        for idx in zip(*np.nonzero(np.abs(self.coeffs) > threshold)):
            out[tuple(int(i) for i in idx)] = float(self.coeffs[idx])
        return out

    def l2_norm_sq(self) -> float:
        """Squared L2 norm of the field (Parseval)."""
        return float((self.coeffs**2 * _norm_weights(self.grid_shape, self.domain)).sum())

    def copy(self) -> "SpectralField":
        return SpectralField(self.coeffs.copy(), self.domain)


def forward_transform(grid: np.ndarray, d: DomainSpec) -> SpectralField:
    """Analyse midpoint-grid samples into a coefficient field.

    The samples must have (numerically) zero mean.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 3:
        raise ValueError(f"expected a three-dimensional grid, got shape {grid.shape}")
    return SpectralField(_analyze(grid), d)


def inverse_transform(f: SpectralField) -> np.ndarray:
    """Synthesise the field on its midpoint collocation grid."""
    return _synthesize(f.coeffs)


# ---------------------------------------------------------------------------
# exact integrals of basis-function products
# ---------------------------------------------------------------------------


def _cos_line(m: int, length: float) -> float:
    # integral of cos(m*pi*x/L) over (0, L) for integer m
    return length if m == 0 else 0.0


def _cos_triple_1d(j: int, l: int, k: int, length: float) -> float:
    return 0.25 * sum(
        _cos_line(j + s1 * l + s2 * k, length) for s1 in (1, -1) for s2 in (1, -1)
    )


def _cos_sin_sin_1d(j: int, l: int, k: int, length: float) -> float:
    # integral of cos(j..) * sin(l..) * sin(k..) over (0, L)
    return 0.25 * (
        _cos_line(j + l - k, length)
        + _cos_line(j - l + k, length)
        - _cos_line(j + l + k, length)
        - _cos_line(j - l - k, length)
    )


def triple_product(J: Mode, L: Mode, K: Mode, d: DomainSpec) -> float:
    """Exact integral of ``e_J * e_L * e_K`` over the box.

    For single-axis ``J, L`` and ``K = J + L`` this equals ``V/4``; it
    vanishes unless the wavenumbers can cancel axis by axis.
    """
    j, l, k = _check_mode(J), _check_mode(L), _check_mode(K)
    out = 1.0
    for ax in range(3):
        out *= _cos_triple_1d(j[ax], l[ax], k[ax], d.lengths[ax])
        if out == 0.0:
            return 0.0
    return out


def grad_triple_product(J: Mode, L: Mode, K: Mode, d: DomainSpec) -> float:
    """Exact integral of ``e_J * grad(e_L) . grad(e_K)`` over the box."""
    j, l, k = _check_mode(J), _check_mode(L), _check_mode(K)
    total = 0.0
    for ax in range(3):
        if l[ax] == 0 or k[ax] == 0:
            continue
        term = (
            l[ax]
            * k[ax]
            * math.pi**2
            / d.lengths[ax] ** 2
            * _cos_sin_sin_1d(j[ax], l[ax], k[ax], d.lengths[ax])
        )
        for other in range(3):
            if other != ax:
                term *= _cos_triple_1d(j[other], l[other], k[other], d.lengths[other])
        total += term
    return total


def mode_l2_norm_sq(K: Mode, d: DomainSpec) -> float:
    """``<e_K, e_K>``: the volume halved once per nonzero index."""
    k = _check_mode(K)
    out = d.volume
    for ki in k:
        if ki > 0:
            out *= 0.5
    return out


# ---------------------------------------------------------------------------
# grid serialisation: flat binary with a dims header, CSV for small grids
# ---------------------------------------------------------------------------

_MAGIC = b"CHGRID1\x00"


def save_grid(path, grid: np.ndarray) -> None:
    grid = np.ascontiguousarray(grid, dtype=np.float64)
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        np.asarray(grid.shape, dtype=np.int64).tofile(fh)
        grid.tofile(fh)


def load_grid(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(len(_MAGIC))
        if magic != _MAGIC:
            raise ValueError(f"{path}: not a grid file")
        dims = np.fromfile(fh, dtype=np.int64, count=3)
        data = np.fromfile(fh, dtype=np.float64, count=int(np.prod(dims)))
    return data.reshape(tuple(dims))


def grid_to_csv(path, grid: np.ndarray) -> None:
    grid = np.asarray(grid, dtype=float)
    with open(path, "w") as fh:
        fh.write("# dims: {} {} {}\n".format(*grid.shape))
        fh.write("i1,i2,i3,value\n")
        for idx in product(*(range(n) for n in grid.shape)):
            fh.write("{},{},{},{:.17g}\n".format(*idx, grid[idx]))
