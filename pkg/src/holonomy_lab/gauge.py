"""
Gauge potentials and gauge transformations.

A potential is a sampler ``(positions, t) -> coefficients`` returning an array
of shape ``positions.shape[:-1] + (n_components, dim)``: the Lie-algebra
components ``A^k`` of each spatial vector component.  For U(1) there is a
single component and the "generator" is the number 1.

Sign conventions: the transport along a curve is ``P exp(+i g int T.A.dy)``
and a gauge transformation acts as ``psi -> U psi`` with
``A -> U A U^dag + (i/g) U grad U^dag`` (``A -> A + grad Lambda`` for U(1),
``U = exp(i q Lambda)``).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import _su2
from .grid import GridSpec, WaveFunction
from .errors import GridMismatchError

U1 = "U1"
SU2 = "SU2"


@dataclass(frozen=True)
class LieAlgebraBasis:
    group: str = U1
    coupling: float = 1.0

    def __post_init__(self):
        if self.group not in (U1, SU2):
            raise ValueError(f"unsupported gauge group {self.group!r}")

    @property
    def generators(self) -> np.ndarray:
        """Hermitian generators ``T_k``; empty for U(1)."""
        if self.group == U1:
            return np.zeros((0, 1, 1), dtype=complex)
        return _su2.PAULI / 2

    @property
    def rep_dim(self) -> int:
        return 1 if self.group == U1 else 2

    @property
    def n_components(self) -> int:
        return 1 if self.group == U1 else 3

    def algebra_matrix(self, coeffs: np.ndarray) -> np.ndarray:
        """``sum_k c_k T_k`` (the number ``c`` itself for U(1))."""
        coeffs = np.asarray(coeffs, dtype=float)
        if self.group == U1:
            return coeffs[..., :1, None].astype(complex)
        return np.einsum("...k,kab->...ab", coeffs, self.generators)

    def coefficients(self, matrix: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`algebra_matrix` using ``tr(T_j T_k) = delta_jk / 2``."""
        if self.group == U1:
            return np.real(matrix[..., 0, :1])
        return 2 * np.real(np.einsum("kab,...ba->...k", self.generators, matrix))

    def exp_i(self, coeffs: np.ndarray) -> np.ndarray:
        """``exp(i g sum_k c_k T_k)`` as (..., d, d) matrices."""
        coeffs = np.asarray(coeffs, dtype=float)
        if self.group == U1:
            return np.exp(1j * self.coupling * coeffs[..., :1])[..., None]
        return _su2.to_matrix(_su2.exp_i_sigma(0.5 * self.coupling * coeffs))


@dataclass(frozen=True)
class FluxDescriptor:
    """Idealized flux line: centre, enclosed flux (Lie vector for SU(2)), core."""

    center: tuple[float, ...]
    flux: float | tuple[float, float, float]
    core_radius: float = 0.0


Sampler = Callable[[np.ndarray, float], np.ndarray]


@dataclass(frozen=True)
class GaugePotential:
    basis: LieAlgebraBasis
    sampler: Sampler
    dim: int = 2
    flux_descriptors: tuple[FluxDescriptor, ...] = ()
    # (centre, radius) discs where wave functions must vanish
    excluded_regions: tuple[tuple[tuple[float, ...], float], ...] = ()
    label: str = ""
    # optional exact (starts, ends, t) -> (P, n_components) segment integrals,
    # valid for segments that avoid the excluded regions
    segment_integral: Callable | None = None

    def __call__(self, positions, t: float = 0.0) -> np.ndarray:
        positions = np.asarray(positions, dtype=float)
        if positions.shape[-1] != self.dim:
            raise GridMismatchError(
                f"potential is {self.dim}D but positions have dimension {positions.shape[-1]}")
        return self.sampler(positions, t)

    def __add__(self, other: "GaugePotential") -> "GaugePotential":
        if self.basis != other.basis or self.dim != other.dim:
            raise ValueError("cannot add potentials with different bases or dimensions")
        a, b = self.sampler, other.sampler
        ia, ib = self.segment_integral, other.segment_integral
        exact = None
        if ia is not None and ib is not None:
            def exact(p, q, t):
                return ia(p, q, t) + ib(p, q, t)
        return GaugePotential(
            self.basis, lambda x, t: a(x, t) + b(x, t), self.dim,
            self.flux_descriptors + other.flux_descriptors,
            self.excluded_regions + other.excluded_regions,
            "+".join(s for s in (self.label, other.label) if s), exact)


def zero_potential(basis: LieAlgebraBasis | None = None, dim: int = 2) -> GaugePotential:
    basis = basis or LieAlgebraBasis()
    nc = basis.n_components

    def sampler(x, t):
        return np.zeros(x.shape[:-1] + (nc, dim))

    def exact(p, q, t):
        return np.zeros(p.shape[:-1] + (nc,))
    return GaugePotential(basis, sampler, dim, label="zero", segment_integral=exact)


def uniform_potential(value, basis: LieAlgebraBasis | None = None) -> GaugePotential:
    """Constant potential; ``value`` has shape (n_components, dim) or (dim,) for U(1)."""
    basis = basis or LieAlgebraBasis()
    value = np.asarray(value, dtype=float)
    if value.ndim == 1:
        value = value[None, :]
    dim = value.shape[-1]

    def sampler(x, t):
        return np.broadcast_to(value, x.shape[:-1] + value.shape).copy()

    def exact(p, q, t):
        return (q - p) @ value.T
    return GaugePotential(basis, sampler, dim, label="uniform", segment_integral=exact)


def _circulating(x: np.ndarray, center: np.ndarray, core_radius: float) -> np.ndarray:
    """``(-dy, dx) / (2 pi r^2)`` outside the core, solid-body inside."""
    d = x - center
    r2 = np.sum(d * d, axis=-1)
    denom = np.where(r2 > core_radius ** 2, r2, core_radius ** 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(denom > 0, 1.0 / (2 * np.pi * denom), 0.0)
    return np.stack([-d[..., 1], d[..., 0]], axis=-1) * scale[..., None]


def _subtended_angle(starts: np.ndarray, ends: np.ndarray, center: np.ndarray) -> np.ndarray:
    """Signed angle swept about ``center`` along straight segments (|angle| < pi)."""
    a, b = starts - center, ends - center
    cross = a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]
    return np.arctan2(cross, np.sum(a * b, axis=-1))


def solenoid_potential(center, flux: float, core_radius: float = 0.0,
                       coupling: float = 1.0) -> GaugePotential:
    """Abelian flux line: ``A = flux (-(y-cy), x-cx) / (2 pi r^2)`` outside the core.

    Any loop winding once counterclockwise around ``center`` has
    ``oint A.dy = flux``; inside a finite core the field is uniform.
    """
    c = np.asarray(center, dtype=float)
    flux = float(flux)

    def sampler(x, t):
        return flux * _circulating(x, c, core_radius)[..., None, :]

    def exact(p, q, t):
        return (flux / (2 * np.pi)) * _subtended_angle(p, q, c)[..., None]
    return GaugePotential(
        LieAlgebraBasis(U1, coupling), sampler, 2,
        (FluxDescriptor(tuple(c), flux, core_radius),),
        ((tuple(c), float(core_radius)),), "solenoid", exact)


def nonabelian_flux_tube(center, flux_direction, flux_magnitude: float,
                         core_radius: float = 0.0, coupling: float = 1.0) -> GaugePotential:
    """SU(2) flux tube ``A^k = n^k flux (-y, x)/(2 pi r^2)`` along a fixed direction ``n``.

    A once-winding loop has holonomy ``exp(i g flux n.T)``.
    """
    c = np.asarray(center, dtype=float)
    n = np.asarray(flux_direction, dtype=float)
    n = n / np.linalg.norm(n)
    flux_magnitude = float(flux_magnitude)

    def sampler(x, t):
        return flux_magnitude * n[:, None] * _circulating(x, c, core_radius)[..., None, :]
    return GaugePotential(
        LieAlgebraBasis(SU2, coupling), sampler, 2,
        (FluxDescriptor(tuple(c), tuple(flux_magnitude * n), core_radius),),
        ((tuple(c), float(core_radius)),), "flux_tube")


class FourierField:
    """Real band-limited periodic fields with analytic gradients.

    ``n_fields`` independent fields, each a sum of ``band_limit`` cosine modes
    with integer wave vectors in ``[-band_limit, band_limit]^dim`` on a box of
    side ``period``.
    """

    def __init__(self, rng: np.random.Generator, dim: int, period: float,
                 band_limit: int, amplitude: float, n_fields: int = 1):
        n_modes = max(int(band_limit), 1)
        vecs = []
        while len(vecs) < n_fields * n_modes:
            v = rng.integers(-band_limit, band_limit + 1, size=dim)
            if np.any(v):
                vecs.append(v)
        self.k = 2 * np.pi / period * np.array(vecs, dtype=float).reshape(n_fields, n_modes, dim)
        self.coef = amplitude * rng.normal(size=(n_fields, n_modes)) / np.sqrt(n_modes)
        self.phase = rng.uniform(0, 2 * np.pi, size=(n_fields, n_modes))
        if band_limit == 0:
            self.coef = np.zeros_like(self.coef)

    def _arg(self, x):
        f, m, d = self.k.shape
        return (x @ self.k.reshape(f * m, d).T).reshape(x.shape[:-1] + (f, m)) + self.phase

    def value(self, x: np.ndarray) -> np.ndarray:
        """Shape ``x.shape[:-1] + (n_fields,)``."""
        return np.sum(self.coef * np.cos(self._arg(x)), axis=-1)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        """Shape ``x.shape[:-1] + (n_fields, dim)``."""
        s = -self.coef * np.sin(self._arg(x))
        return (s[..., None, :] @ self.k)[..., 0, :]

    def value_and_gradient(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Both at once, sharing the phase evaluation."""
        e = np.exp(1j * self._arg(x))
        val = np.sum(self.coef * e.real, axis=-1)
        grad = ((-self.coef * e.imag)[..., None, :] @ self.k)[..., 0, :]
        return val, grad


def random_band_limited_potential(seed: int, grid: GridSpec, basis: LieAlgebraBasis,
                                  band_limit: int = 3, amplitude: float = 1.0) -> GaugePotential:
    """Smooth periodic potential with random Fourier components (test input)."""
    rng = np.random.default_rng(seed)
    nc, dim = basis.n_components, grid.dim
    fld = FourierField(rng, dim, grid.extent, band_limit, amplitude, nc * dim)

    def sampler(x, t):
        return fld.value(x).reshape(x.shape[:-1] + (nc, dim))
    return GaugePotential(basis, sampler, dim, label=f"random[{seed}]")


@dataclass(frozen=True)
class GaugeTransformation:
    """Local gauge transformation.

    For U(1) ``value`` returns ``Lambda(x)`` and ``gradient`` its gradient,
    shape (..., dim).  For SU(2) ``value`` returns ``U(x)`` as (..., 2, 2)
    matrices and ``gradient`` returns ``d_mu U`` as (..., dim, 2, 2).
    """

    group: str
    value: Callable[[np.ndarray], np.ndarray]
    gradient: Callable[[np.ndarray], np.ndarray]
    label: str = ""

    def matrix(self, x: np.ndarray, basis: LieAlgebraBasis) -> np.ndarray:
        """``U(x)`` in the representation of ``basis``."""
        if self.group == U1:
            return np.exp(1j * basis.coupling * self.value(x))[..., None, None]
        return self.value(x)

    def inverse(self) -> "GaugeTransformation":
        if self.group == U1:
            v, g = self.value, self.gradient
            return GaugeTransformation(U1, lambda x: -v(x), lambda x: -g(x), self.label + "^-1")
        v, g = self.value, self.gradient
        return GaugeTransformation(
            SU2,
            lambda x: np.conj(np.swapaxes(v(x), -1, -2)),
            lambda x: np.conj(np.swapaxes(g(x), -1, -2)),
            self.label + "^-1")


def identity_gauge(group: str = U1) -> GaugeTransformation:
    if group == U1:
        return GaugeTransformation(U1, lambda x: np.zeros(x.shape[:-1]),
                                   lambda x: np.zeros(x.shape), "identity")
    return GaugeTransformation(
        SU2, lambda x: np.broadcast_to(_su2.IDENTITY, x.shape[:-1] + (2, 2)).copy(),
        lambda x: np.zeros(x.shape + (2, 2), dtype=complex), "identity")


def abelian_gauge(lam: Callable, grad: Callable, label: str = "") -> GaugeTransformation:
    return GaugeTransformation(U1, lam, grad, label)


def _su2_from_algebra(lam: np.ndarray, dlam: np.ndarray):
    """``U = exp(i lam.sigma/2)`` and ``d_mu U`` given ``lam`` (...,3), ``dlam`` (...,3,dim)."""
    theta = np.linalg.norm(lam, axis=-1)
    half = 0.5 * theta
    small = theta < 1e-4
    safe = np.where(small, 1.0, theta)
    # u = f(theta) lam with f = sin(theta/2)/theta
    f = np.where(small, 0.5 - theta ** 2 / 48, np.sin(half) / safe)
    # f'(theta)/theta, finite at 0
    fp_over_t = np.where(small, -1.0 / 24 + theta ** 2 / 960,
                         (0.5 * safe * np.cos(half) - np.sin(half)) / safe ** 3)
    # d theta = (lam . dlam) / theta ; d(cos(theta/2)) = -f/2 (lam . dlam)
    lam_dot = np.einsum("...k,...kd->...d", lam, dlam)
    dw = -0.5 * f[..., None] * lam_dot
    du = (f[..., None, None] * dlam
          + fp_over_t[..., None, None] * lam[..., :, None] * lam_dot[..., None, :])
    q = np.concatenate([np.cos(half)[..., None], f[..., None] * lam], axis=-1)
    U = _su2.to_matrix(q)
    dU = _su2.to_matrix(np.concatenate([dw[..., None, :], du], axis=-2).swapaxes(-1, -2))
    return U, dU


def random_smooth_gauge(seed: int, kind: str, band_limit: int, amplitude: float,
                        grid: GridSpec) -> GaugeTransformation:
    """Deterministic random gauge transformation, periodic on ``grid``.

    U(1): ``Lambda`` is a sum of ``band_limit`` random Fourier modes.
    SU(2): ``U = exp(i lambda_k(x) T_k)`` with band-limited ``lambda_k``.
    """
    if band_limit > grid.points // 4:
        raise ValueError("band_limit must not exceed points_per_axis/4")
    rng = np.random.default_rng(seed)
    if kind == U1:
        fld = FourierField(rng, grid.dim, grid.extent, band_limit, amplitude, 1)
        return GaugeTransformation(U1, lambda x: fld.value(x)[..., 0],
                                   lambda x: fld.gradient(x)[..., 0, :], f"random-U1[{seed}]")
    if kind != SU2:
        raise ValueError(f"unsupported gauge group {kind!r}")
    fld = FourierField(rng, grid.dim, grid.extent, band_limit, amplitude, 3)
    # samplers ask for U and dU at the same points back to back
    memo: list = [None, None]

    def both(x):
        if memo[0] is not x:
            memo[0], memo[1] = x, _su2_from_algebra(*fld.value_and_gradient(x))
        return memo[1]
    return GaugeTransformation(SU2, lambda x: both(x)[0], lambda x: both(x)[1],
                               f"random-SU2[{seed}]")


def _su2_quaternion(U: np.ndarray) -> np.ndarray:
    """Real chart ``(w, v)`` of ``U = w I + i v.sigma`` read off a (..., 2, 2) array.

    Linear in ``U``, so it also maps ``d_mu U`` to ``(d_mu w, d_mu v)``.
    """
    u00, u01 = U[..., 0, 0], U[..., 0, 1]
    return np.stack([u00.real, u01.imag, u01.real, u00.imag], axis=-1)


def _su2_rotation(w: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Adjoint action of ``w I + i v.sigma`` on Pauli coefficients, (..., 3, 3)."""
    x, y, z = v[..., 0], v[..., 1], v[..., 2]
    # rotation of the unit quaternion (w, -v)
    R = np.empty(w.shape + (3, 3))
    R[..., 0, 0] = 1 - 2 * (y * y + z * z)
    R[..., 0, 1] = 2 * (x * y + w * z)
    R[..., 0, 2] = 2 * (x * z - w * y)
    R[..., 1, 0] = 2 * (x * y - w * z)
    R[..., 1, 1] = 1 - 2 * (x * x + z * z)
    R[..., 1, 2] = 2 * (y * z + w * x)
    R[..., 2, 0] = 2 * (x * z + w * y)
    R[..., 2, 1] = 2 * (y * z - w * x)
    R[..., 2, 2] = 1 - 2 * (x * x + y * y)
    return R


def apply_gauge_to_potential(A: GaugePotential, g: GaugeTransformation) -> GaugePotential:
    """Gauge-transformed potential ``A'``."""
    if g.group != A.basis.group:
        raise ValueError(f"gauge transformation of kind {g.group} applied to {A.basis.group} potential")
    base = A.sampler
    if g.group == U1:
        def sampler(x, t):
            return base(x, t) + g.gradient(x)[..., None, :]
    else:
        basis = A.basis
        coupling = basis.coupling

        def sampler(x, t):
            q = _su2_quaternion(g.value(x))                  # (..., 4)
            dq = np.swapaxes(_su2_quaternion(g.gradient(x)), -1, -2)  # (..., 4, dim)
            a = base(x, t)                                   # (..., 3, dim)
            w, v = q[..., 0], q[..., 1:]
            dw, dv = dq[..., 0, :], dq[..., 1:, :]
            # U (a.T) U^dag = (R a).T
            conj = _su2_rotation(w, v) @ a
            # (i/g) U d(U^dag) = -(1/g) (dw v - w dv + v x dv).sigma
            cross = np.cross(v[..., :, None], dv, axisa=-2, axisb=-2, axisc=-2)
            inhom = -(2.0 / coupling) * (dw[..., None, :] * v[..., :, None]
                                         - w[..., None, None] * dv + cross)
            return conj + inhom
    # the transformed sampler is integrated by quadrature, not in closed form
    return replace(A, sampler=sampler, label=f"{A.label}^{g.label}", segment_integral=None)


def apply_gauge_to_wavefunction(psi: WaveFunction, g: GaugeTransformation,
                                basis: LieAlgebraBasis) -> WaveFunction:
    """Pointwise ``psi -> exp(i q Lambda) psi`` or ``psi -> U psi``."""
    if psi.internal_dim != basis.rep_dim or g.group != basis.group:
        raise GridMismatchError(
            f"{g.group} transformation cannot act on internal dimension {psi.internal_dim}")
    U = g.matrix(psi.grid.coords(), basis)
    return psi.with_amplitudes(np.einsum("...ab,...b->...a", U, psi.amplitudes))
