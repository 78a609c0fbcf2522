"""
Wave functions on periodic uniform grids.

Units are hbar = 1 throughout, so momenta and wavenumbers coincide.  All
spatial operators that involve momentum (translations, moments) are applied
spectrally, which keeps ``exp(-i p.l)`` exactly unitary on the grid.
"""
from __future__ import annotations

import csv
import logging
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import BoundaryError, GridMismatchError, ResolutionError

log = logging.getLogger(__name__)

#: tail/peak ratio a packet may show on the grid boundary
BOUNDARY_TOL = 1e-12


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid in one or two dimensions.

    ``origin`` is the coordinate of the first sample on every axis; by
    default the grid is centred on zero.
    """

    dim: int
    points: int
    spacing: float
    origin: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        n = int(self.points)
        if n < 8 or n & (n - 1):
            raise ValueError(f"points_per_axis must be a power of two >= 8, got {self.points}")
        if not self.spacing > 0:
            raise ValueError("spacing must be positive")
        object.__setattr__(self, "points", n)
        object.__setattr__(self, "spacing", float(self.spacing))
        if self.origin is None:
            origin = (-0.5 * n * self.spacing,) * self.dim
        else:
            origin = tuple(float(o) for o in np.atleast_1d(self.origin))
            if len(origin) != self.dim:
                raise ValueError("origin length must equal dim")
        object.__setattr__(self, "origin", origin)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points,) * self.dim

    @property
    def extent(self) -> float:
        return self.points * self.spacing

    @property
    def cell_volume(self) -> float:
        return self.spacing ** self.dim

    def axis(self, i: int = 0) -> np.ndarray:
        return self.origin[i] + self.spacing * np.arange(self.points)

    def coords(self) -> np.ndarray:
        """Sample positions, shape ``grid.shape + (dim,)``."""
        axes = np.meshgrid(*[self.axis(i) for i in range(self.dim)], indexing="ij")
        return np.stack(axes, axis=-1)

    def wavenumbers(self) -> np.ndarray:
        """Angular wavenumbers on the FFT layout, shape ``grid.shape + (dim,)``."""
        k = 2 * np.pi * np.fft.fftfreq(self.points, d=self.spacing)
        ks = np.meshgrid(*([k] * self.dim), indexing="ij")
        return np.stack(ks, axis=-1)

    def lower(self) -> np.ndarray:
        return np.asarray(self.origin)

    def upper(self) -> np.ndarray:
        return np.asarray(self.origin) + self.extent


@dataclass(frozen=True, eq=False)
class WaveFunction:
    """Complex amplitudes of shape ``grid.shape + (internal_dim,)``."""

    grid: GridSpec
    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex)
        if amp.shape == self.grid.shape:
            amp = amp[..., None]
        if amp.shape[:-1] != self.grid.shape:
            raise GridMismatchError(
                f"amplitude shape {amp.shape} does not fit grid {self.grid.shape}")
        amp = amp.copy()
        amp.flags.writeable = False
        object.__setattr__(self, "amplitudes", amp)

    @property
    def internal_dim(self) -> int:
        return self.amplitudes.shape[-1]

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2) * self.grid.cell_volume))

    def normalize(self) -> "WaveFunction":
        return WaveFunction(self.grid, self.amplitudes / self.norm())

    def density(self) -> np.ndarray:
        """Probability density summed over the internal index."""
        return np.sum(np.abs(self.amplitudes) ** 2, axis=-1)

    def support_mask(self, tol: float = 1e-12) -> np.ndarray:
        return np.max(np.abs(self.amplitudes), axis=-1) > tol

    def with_amplitudes(self, amplitudes: np.ndarray) -> "WaveFunction":
        return WaveFunction(self.grid, amplitudes)


def _check_compatible(a: WaveFunction, b: WaveFunction) -> None:
    if a.grid != b.grid:
        raise GridMismatchError("wave functions live on different grids")
    if a.internal_dim != b.internal_dim:
        raise GridMismatchError(
            f"internal dimensions differ: {a.internal_dim} vs {b.internal_dim}")


def _spatial_axes(grid: GridSpec) -> tuple[int, ...]:
    return tuple(range(grid.dim))


def gaussian_packet(grid: GridSpec, center, width: float, momentum=0.0,
                    phase: float = 0.0, spinor=None) -> WaveFunction:
    """Normalized Gaussian ``exp(-|x-c|^2/(4 w^2)) exp(i(k.x + phase))``.

    ``width`` is the standard deviation of the probability density.  For
    ``internal_dim > 1`` pass a ``spinor``; it is normalized and multiplies
    the spatial profile.
    """
    c = np.broadcast_to(np.asarray(center, dtype=float), (grid.dim,))
    k = np.broadcast_to(np.asarray(momentum, dtype=float), (grid.dim,))
    if width < 2 * grid.spacing:
        raise ResolutionError(
            f"width {width} is below twice the grid spacing {grid.spacing}")
    # closest approach of the packet centre to any face of the periodic box
    gap = np.min(np.minimum(c - grid.lower(), grid.upper() - grid.spacing - c))
    if gap <= 0 or np.exp(-gap ** 2 / (4 * width ** 2)) > BOUNDARY_TOL:
        raise BoundaryError(
            f"packet at {c.tolist()} with width {width} overflows the periodic boundary")
    x = grid.coords()
    r2 = np.sum((x - c) ** 2, axis=-1)
    norm = (2 * np.pi * width ** 2) ** (-grid.dim / 4)
    profile = norm * np.exp(-r2 / (4 * width ** 2) + 1j * (x @ k + phase))
    if spinor is None:
        spinor = np.ones(1)
    spinor = np.asarray(spinor, dtype=complex)
    spinor = spinor / np.linalg.norm(spinor)
    return WaveFunction(grid, profile[..., None] * spinor)


def superpose(a: WaveFunction, b: WaveFunction, coeff_a: complex = 1.0,
              coeff_b: complex = 1.0) -> WaveFunction:
    """Return ``coeff_a*a + coeff_b*b`` (no renormalization)."""
    _check_compatible(a, b)
    return WaveFunction(a.grid, coeff_a * a.amplitudes + coeff_b * b.amplitudes)


def translate(psi: WaveFunction, ell) -> WaveFunction:
    """Apply ``exp(-i p.l)``: the result is ``psi(x - l)`` on the periodic grid."""
    grid = psi.grid
    ell = np.broadcast_to(np.asarray(ell, dtype=float), (grid.dim,))
    if not np.any(ell):
        return psi
    axes = _spatial_axes(grid)
    phase = np.exp(-1j * (grid.wavenumbers() @ ell))
    spec = np.fft.fftn(psi.amplitudes, axes=axes) * phase[..., None]
    return psi.with_amplitudes(np.fft.ifftn(spec, axes=axes))


def inner_product(a: WaveFunction, b: WaveFunction) -> complex:
    """``<a|b>``, conjugate-linear in ``a``; the internal index is contracted."""
    _check_compatible(a, b)
    return complex(np.vdot(a.amplitudes, b.amplitudes) * a.grid.cell_volume)


def momentum_power(psi: WaveFunction, n: int, axis: int = 0) -> WaveFunction:
    """``p_axis^n psi`` by spectral differentiation."""
    grid = psi.grid
    axes = _spatial_axes(grid)
    k = grid.wavenumbers()[..., axis]
    spec = np.fft.fftn(psi.amplitudes, axes=axes) * (k ** n)[..., None]
    return psi.with_amplitudes(np.fft.ifftn(spec, axes=axes))


def momentum_moment(psi: WaveFunction, n: int, axis: int = 0) -> float:
    """Real part of ``<psi|p^n|psi>`` (hbar = 1)."""
    if not 1 <= n <= 8:
        raise ValueError(f"moment order must be in 1..8, got {n}")
    if not 0 <= axis < psi.grid.dim:
        raise ValueError(f"axis {axis} out of range for a {psi.grid.dim}D grid")
    value = inner_product(psi, momentum_power(psi, n, axis))
    if abs(value.imag) > 1e-8:
        warnings.warn(f"<p^{n}> has imaginary part {value.imag:.3e}", RuntimeWarning)
    log.debug("<p^%d> imaginary residue %.3e", n, value.imag)
    return value.real


Operator = Callable[[WaveFunction], WaveFunction]


@dataclass(frozen=True)
class DensityMatrix:
    """Finite ensemble ``rho = sum_i w_i |s_i><s_i|``."""

    components: tuple[tuple[float, WaveFunction], ...] = field(default_factory=tuple)

    def __post_init__(self):
        comps = tuple((float(w), s) for w, s in self.components)
        if not comps:
            raise ValueError("density matrix needs at least one component")
        if any(w < 0 for w, _ in comps):
            raise ValueError("weights must be nonnegative")
        if abs(sum(w for w, _ in comps) - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1")
        first = comps[0][1]
        for _, s in comps[1:]:
            _check_compatible(first, s)
        object.__setattr__(self, "components", comps)

    @classmethod
    def pure(cls, psi: WaveFunction) -> "DensityMatrix":
        return cls(((1.0, psi),))

    @classmethod
    def mixture(cls, states: Sequence[WaveFunction], weights=None) -> "DensityMatrix":
        if weights is None:
            weights = [1.0 / len(states)] * len(states)
        return cls(tuple(zip(weights, states)))

    @property
    def grid(self) -> GridSpec:
        return self.components[0][1].grid


def mixture_trace(rho: DensityMatrix, op: Operator) -> complex:
    """``tr(rho A) = sum_i w_i <s_i|A s_i>`` for an operator given as a callable."""
    return sum(w * inner_product(s, op(s)) for w, s in rho.components)


def identity_operator(psi: WaveFunction) -> WaveFunction:
    return psi


def translation_operator(ell) -> Operator:
    """The translation group element ``s = exp(-i p.l)`` as an operator handle."""
    def op(psi: WaveFunction) -> WaveFunction:
        return translate(psi, ell)
    return op


def multiplication_operator(f: Callable[[np.ndarray], np.ndarray]) -> Operator:
    """Local operator: multiply by ``f(x)`` evaluated on the grid coordinates."""
    def op(psi: WaveFunction) -> WaveFunction:
        values = np.asarray(f(psi.grid.coords()))
        return psi.with_amplitudes(psi.amplitudes * values[..., None])
    return op


def write_wavefunction_csv(psi: WaveFunction, path) -> None:
    """Dump ``index, x[, y], Re/Im`` per internal component, one row per sample."""
    grid = psi.grid
    names = ["x", "y"][: grid.dim]
    header = ["index", *names]
    for d in range(psi.internal_dim):
        header += [f"re_{d}", f"im_{d}"]
    x = grid.coords().reshape(-1, grid.dim)
    amp = psi.amplitudes.reshape(-1, psi.internal_dim)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i in range(x.shape[0]):
            row = [i, *(repr(float(v)) for v in x[i])]
            for d in range(psi.internal_dim):
                row += [repr(float(amp[i, d].real)), repr(float(amp[i, d].imag))]
            w.writerow(row)
