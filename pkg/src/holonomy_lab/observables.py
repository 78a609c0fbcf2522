"""
Gauge-covariant non-local observables.

``g_gamma`` acts on a wave function by first multiplying ``psi(x)`` with the
Wilson line ``W(x)`` along the template curve rigidly translated to start at
``x``, and then translating the product by ``l = end - start`` of the curve:

    (g_gamma psi)(x + l) = W(x) psi(x).

For a straight template this is the operator ``f_l``; with ``A = 0`` it is
the modular-momentum translation ``exp(-i p.l)``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import GridMismatchError, OverlapError, TopologyError
from .gauge import GaugePotential, U1, zero_potential
from .grid import WaveFunction, inner_product, translate, BOUNDARY_TOL
from .transport import (Curve, GroupElement, blocked_segments, curve_transports,
                        holonomy, segment, segment_transports)

#: the 1/2 from psi = (psi1 + psi2)/sqrt(2) multiplying the cross term
CROSS_TERM_FACTOR = 0.5

#: amplitudes above this count as the support of a wave function
SUPPORT_TOL = 1e-12

#: relative amplitude down to which build_ab_packets applies the dressing
DRESS_FLOOR = 1e-16


@dataclass(frozen=True)
class NonlocalOperatorSpec:
    """Template curve and potential defining ``g_gamma``."""

    curve: Curve
    potential: GaugePotential

    def __post_init__(self):
        if self.curve.closed:
            raise ValueError("g_gamma needs an open curve")
        if self.curve.dim != self.potential.dim:
            raise GridMismatchError("curve and potential dimensions differ")

    @property
    def displacement(self) -> np.ndarray:
        return self.curve.displacement

    @property
    def is_straight(self) -> bool:
        pts = self.curve.points
        if pts.shape[0] == 2:
            return True
        d = pts[1:] - pts[0]
        ell = self.displacement
        if pts.shape[1] == 1:
            return bool(np.all(d[:, 0] * ell[0] >= 0) and np.all(np.abs(d[:, 0]) <= abs(ell[0])))
        cross = d[:, 0] * ell[1] - d[:, 1] * ell[0]
        return bool(np.allclose(cross, 0, atol=1e-12)) and bool(np.all(d @ ell >= 0))


def straight_spec(ell, potential: GaugePotential | None = None, start=None) -> NonlocalOperatorSpec:
    """Spec of ``f_l`` for displacement ``ell``."""
    ell = np.atleast_1d(np.asarray(ell, dtype=float))
    potential = potential or zero_potential(dim=ell.size)
    a = np.zeros_like(ell) if start is None else np.asarray(start, dtype=float)
    return NonlocalOperatorSpec(segment(a, a + ell), potential)


def _support_points(psi: WaveFunction, support_tol: float):
    mask = psi.support_mask(support_tol)
    return mask, psi.grid.coords()[mask]


def _check_sweep(spec: NonlocalOperatorSpec, base: np.ndarray) -> None:
    """Raise if the template, translated to any base point, hits an excluded disc."""
    A = spec.potential
    if not A.excluded_regions or base.size == 0:
        return
    a, b = spec.curve.segments()
    off = base - spec.curve.start
    starts = (a[None] + off[:, None]).reshape(-1, a.shape[-1])
    ends = (b[None] + off[:, None]).reshape(-1, a.shape[-1])
    if np.any(blocked_segments(A, starts, ends)):
        raise TopologyError(
            "the curve swept over the support of psi crosses an excluded core; "
            "g_gamma is ill-defined there")


def wilson_field(spec: NonlocalOperatorSpec, psi: WaveFunction, t: float = 0.0,
                 support_tol: float = SUPPORT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Support mask and Wilson-line matrices ``W(x)`` at the support points."""
    A = spec.potential
    if psi.internal_dim != A.basis.rep_dim:
        raise GridMismatchError(
            f"{A.basis.group} potential needs internal dimension {A.basis.rep_dim}")
    if psi.grid.dim != A.dim:
        raise GridMismatchError("wave function and potential dimensions differ")
    mask, base = _support_points(psi, support_tol)
    _check_sweep(spec, base)
    W = curve_transports(A, spec.curve, base - spec.curve.start, t)
    return mask, W


def apply_g_gamma(spec: NonlocalOperatorSpec, psi: WaveFunction, t: float = 0.0,
                  support_tol: float = SUPPORT_TOL) -> WaveFunction:
    """``g_gamma psi``: Wilson line along the translated curve, then ``exp(-i p.l)``."""
    mask, W = wilson_field(spec, psi, t, support_tol)
    amp = np.array(psi.amplitudes)
    amp[mask] = np.einsum("pab,pb->pa", W, amp[mask])
    return translate(psi.with_amplitudes(amp), spec.displacement)


def apply_f_ell(spec: NonlocalOperatorSpec, psi: WaveFunction, t: float = 0.0,
                support_tol: float = SUPPORT_TOL) -> WaveFunction:
    """``f_l psi`` for a straight-line spec and an Abelian potential."""
    if not spec.is_straight:
        raise ValueError("f_l needs a straight-line curve; use apply_g_gamma")
    if spec.potential.basis.group != U1:
        raise ValueError("f_l is defined for Abelian potentials")
    return apply_g_gamma(spec, psi, t, support_tol)


def _boundary_warning(psi: WaveFunction) -> None:
    amp = np.max(np.abs(psi.amplitudes), axis=-1)
    peak = amp.max()
    edge = max(np.max(np.take(amp, [0, -1], axis=ax)) for ax in range(psi.grid.dim))
    if peak > 0 and edge > BOUNDARY_TOL * peak:
        warnings.warn("wave function does not decay at the grid boundary; "
                      "expectations may be inaccurate", RuntimeWarning)


def g_gamma_expectation(spec: NonlocalOperatorSpec, psi: WaveFunction, t: float = 0.0,
                        support_tol: float = SUPPORT_TOL) -> complex:
    """``<psi|g_gamma|psi>``."""
    _boundary_warning(psi)
    return inner_product(psi, apply_g_gamma(spec, psi, t, support_tol))


def g_gamma_operator(spec: NonlocalOperatorSpec, t: float = 0.0,
                     support_tol: float = SUPPORT_TOL):
    """Operator handle usable with :func:`holonomy_lab.grid.mixture_trace`."""
    def op(psi: WaveFunction) -> WaveFunction:
        return apply_g_gamma(spec, psi, t, support_tol)
    return op


def kinetic_momentum_exponential(psi: WaveFunction, ell, potential: GaugePotential,
                                 t: float = 0.0, steps: int = 200) -> WaveFunction:
    """``exp(i (-p + g T.A) . l) psi`` as an interleaved product of small steps.

    Fourth-order (Yoshida) composition of symmetric steps
    ``exp(i g T.A.dl/2) exp(-i p.dl) exp(i g T.A.dl/2)``; the potential is
    only sampled on the grid, so this is independent of the line-integral
    machinery and serves as a cross-check of :func:`apply_f_ell`.
    """
    ell = np.broadcast_to(np.asarray(ell, dtype=float), (psi.grid.dim,))
    basis = potential.basis
    a_par = np.einsum("...kd,d->...k", potential(psi.grid.coords(), t), ell)
    w1 = 1.0 / (2 - 2 ** (1 / 3))
    w0 = 1 - 2 * w1
    h = 1.0 / steps
    kicks = {w: basis.exp_i(a_par * (w * h / 2)) for w in (w0, w1)}

    def strang(phi, w):
        amp = np.einsum("...ab,...b->...a", kicks[w], phi.amplitudes)
        phi = translate(phi.with_amplitudes(amp), w * h * ell)
        amp = np.einsum("...ab,...b->...a", kicks[w], phi.amplitudes)
        return phi.with_amplitudes(amp)

    phi = psi
    for _ in range(steps):
        phi = strang(strang(strang(phi, w1), w0), w1)
    return phi


def _connector(A: GaugePotential, starts: np.ndarray, ends: np.ndarray, t: float) -> np.ndarray:
    """Transports along straight segments, identity where the segment is degenerate."""
    d = A.basis.rep_dim
    W = np.broadcast_to(np.eye(d, dtype=complex), (starts.shape[0], d, d)).copy()
    moving = np.linalg.norm(ends - starts, axis=-1) > 1e-14
    if np.any(moving):
        W[moving] = segment_transports(A, starts[moving], ends[moving], t)
    return W


def build_ab_packets(psi10: WaveFunction, psi20: WaveFunction, gamma1: Curve,
                     gamma2: Curve, A: GaugePotential, base=None, t: float = 0.0,
                     support_tol: float = SUPPORT_TOL) -> tuple[WaveFunction, WaveFunction]:
    """Dress unperturbed packets with transports from a common base point.

    ``psi_i(x) = W(end(gamma_i) -> x) W(gamma_i) psi_i0(x)``: the path to each
    grid point follows ``gamma_i`` and then a straight segment to ``x``.

    Dressing extends well past the support, to every point where the packet
    exceeds ``DRESS_FLOOR`` of its peak and the straight segment avoids the
    excluded discs.  A cut-off at ``support_tol`` would leave a phase jump at
    small but nonzero amplitude, which seeds broadband noise under time
    evolution.  A support point whose segment is blocked is an error.
    """
    base = gamma1.start if base is None else np.asarray(base, dtype=float)
    for gam in (gamma1, gamma2):
        if not np.allclose(gam.start, base, rtol=0, atol=1e-12):
            raise ValueError("gamma1 and gamma2 must start at the base point")
    out = []
    for psi0, gam in ((psi10, gamma1), (psi20, gamma2)):
        if psi0.internal_dim != A.basis.rep_dim:
            raise GridMismatchError("packet internal dimension does not match the potential")
        support = psi0.support_mask(support_tol)
        amp0 = np.max(np.abs(psi0.amplitudes), axis=-1)
        mask = amp0 > DRESS_FLOOR * amp0.max()
        x = psi0.grid.coords()[mask]
        if A.excluded_regions:
            blocked = blocked_segments(A, np.broadcast_to(gam.end, x.shape), x)
            if np.any(blocked & support[mask]):
                raise TopologyError("straight extension from the curve end crosses an "
                                    "excluded core inside the packet support")
            idx = np.nonzero(mask)
            mask[tuple(i[blocked] for i in idx)] = False
            x = x[~blocked]
        head = curve_transports(A, gam, None, t)[0]
        ends = np.broadcast_to(gam.end, x.shape)
        W = _connector(A, ends, x, t) @ head
        amp = np.array(psi0.amplitudes)
        amp[mask] = np.einsum("pab,pb->pa", W, psi0.amplitudes[mask])
        out.append(psi0.with_amplitudes(amp))
    return out[0], out[1]


def closed_loop(gamma1: Curve, gamma2: Curve, gamma: Curve) -> Curve:
    """``gamma_0``: along gamma2, then gamma (translated to gamma2's end), back along gamma1."""
    g = gamma.translated(gamma2.end - gamma.start)
    path = gamma2.then(g)
    if not np.allclose(path.end, gamma1.end, rtol=0, atol=1e-12):
        path = path.then(segment(path.end, gamma1.end))
    return path.then(gamma1.reversed()).close()


def closed_loop_reduction_check(psi1_0: WaveFunction, psi2_0: WaveFunction, gamma1: Curve,
                                gamma2: Curve, gamma: Curve, A: GaugePotential,
                                t: float = 0.0, overlap_tol: float = 1e-8,
                                support_tol: float = SUPPORT_TOL) -> tuple[complex, complex]:
    """Compare the cross term of ``<g_gamma>`` with its closed-loop form.

    lhs = 1/2 <psi1| g_gamma |psi2> for the dressed packets,
    rhs = 1/2 int psi10^dag(x + l) H psi20(x) dx, H the holonomy of gamma_0.
    """
    if abs(inner_product(psi1_0, psi2_0)) > overlap_tol:
        raise OverlapError("unperturbed packets overlap; the reduction does not apply")
    psi1, psi2 = build_ab_packets(psi1_0, psi2_0, gamma1, gamma2, A, None, t, support_tol)
    spec = NonlocalOperatorSpec(gamma, A)
    lhs = CROSS_TERM_FACTOR * inner_product(psi1, apply_g_gamma(spec, psi2, t, support_tol))
    H = holonomy(A, closed_loop(gamma1, gamma2, gamma), t).matrix
    moved = translate(psi1_0, -spec.displacement)
    rhs_state = psi2_0.with_amplitudes(np.einsum("ab,...b->...a", H, psi2_0.amplitudes))
    rhs = CROSS_TERM_FACTOR * inner_product(moved, rhs_state)
    return lhs, rhs


def loop_holonomy(gamma1: Curve, gamma2: Curve, gamma: Curve, A: GaugePotential,
                  t: float = 0.0) -> GroupElement:
    return holonomy(A, closed_loop(gamma1, gamma2, gamma), t)
