"""
Transport around a straight cosmic string, restricted to the plane
orthogonal to the string.

The exterior is a flat cone.  A chart point ``(r, phi)`` about the apex,
``phi`` unwrapped along a curve, develops onto the plane at

    D = apex + r (cos Psi, sin Psi),   Psi = phi0 + beta (phi - phi0),

with ``beta = 1 - deficit/2pi``.  Transport along a curve is a rigid motion:
its rotation is ``deficit * (net change of phi) / 2pi`` (kept unwrapped) and
its translation is the developed chord, rotated into the final frame.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import map_coordinates

from .errors import GridMismatchError, OverlapError, TopologyError
from .grid import WaveFunction, inner_product, translate
from .observables import CROSS_TERM_FACTOR, closed_loop
from .transport import Curve, segment_distance, winding_number


def rot(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class ConeGeometry:
    """Flat cone with deficit angle ``deficit_angle`` about ``apex``.

    ``seam_angle`` is the direction of the cut along which the cone is
    opened to represent wave functions on the plane.
    """

    apex: tuple[float, float] = (0.0, 0.0)
    deficit_angle: float = 0.0
    core_radius: float = 0.0
    seam_angle: float = np.pi

    def __post_init__(self):
        if not -2 * np.pi < self.deficit_angle < 2 * np.pi:
            raise ValueError("deficit angle must lie in (-2pi, 2pi)")
        if self.core_radius < 0:
            raise ValueError("core radius must be nonnegative")
        object.__setattr__(self, "apex", tuple(float(a) for a in self.apex))

    @property
    def beta(self) -> float:
        return 1.0 - self.deficit_angle / (2 * np.pi)

    def seam_distance(self, points) -> np.ndarray:
        """Distance from each point to the seam ray."""
        p = np.atleast_2d(np.asarray(points, dtype=float))
        return _ray_distance(np.asarray(self.apex), self.seam_angle, p)

    def check_seam_clearance(self, centers, width: float, widths: float = 5.0) -> None:
        """Require packet centres at least ``widths`` packet widths from the seam."""
        d = self.seam_distance(centers)
        if np.any(d < widths * width):
            raise ValueError(
                f"packet within {widths:g} widths of the seam (distance {d.min():.3g})")


def _ray_distance(origin: np.ndarray, angle: float, p: np.ndarray) -> np.ndarray:
    u = np.array([np.cos(angle), np.sin(angle)])
    rel = p - origin
    s = np.clip(rel @ u, 0.0, None)
    return np.linalg.norm(rel - s[:, None] * u, axis=-1)


@dataclass(frozen=True)
class PoincareElement:
    """Rigid motion ``y -> rot(rotation) y + translation`` of the plane.

    ``rotation`` is kept unwrapped; compare mod 2pi with :meth:`distance`.
    """

    rotation: float
    translation: tuple[float, float]

    def __post_init__(self):
        object.__setattr__(self, "rotation", float(self.rotation))
        object.__setattr__(self, "translation", tuple(float(v) for v in self.translation))

    @classmethod
    def identity(cls) -> "PoincareElement":
        return cls(0.0, (0.0, 0.0))

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.translation)

    def compose(self, other: "PoincareElement") -> "PoincareElement":
        """``self o other``: ``other`` acts first."""
        t = self.vector + rot(self.rotation) @ other.vector
        return PoincareElement(self.rotation + other.rotation, t)

    def inverse(self) -> "PoincareElement":
        return PoincareElement(-self.rotation, -rot(-self.rotation) @ self.vector)

    def apply(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        return y @ rot(self.rotation).T + self.vector

    def distance(self, other: "PoincareElement") -> float:
        """Max of the rotation gap (mod 2pi) and the translation gap."""
        dr = (self.rotation - other.rotation + np.pi) % (2 * np.pi) - np.pi
        return float(max(abs(dr), np.linalg.norm(self.vector - other.vector)))


def _check_off_core(geom: ConeGeometry, curve: Curve) -> None:
    a, b = curve.segments()
    if np.any(segment_distance(a, b, geom.apex) <= max(geom.core_radius, 1e-12)):
        raise TopologyError("curve intersects the string core")


def _subtended(a: np.ndarray, b: np.ndarray, apex: np.ndarray) -> np.ndarray:
    u, v = a - apex, b - apex
    cross = u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]
    return np.arctan2(cross, np.sum(u * v, axis=-1))


def _segment_element(geom: ConeGeometry, a: np.ndarray, b: np.ndarray) -> PoincareElement:
    """Transport along one chart segment, developed with its start aligned."""
    apex = np.asarray(geom.apex)
    dphi = float(_subtended(a, b, apex))
    rho = geom.deficit_angle * dphi / (2 * np.pi)
    ra, rb = np.linalg.norm(a - apex), np.linalg.norm(b - apex)
    phi_a = np.arctan2(*(a - apex)[::-1])
    psi_b = phi_a + geom.beta * dphi
    chord = rb * np.array([np.cos(psi_b), np.sin(psi_b)]) - ra * np.array([np.cos(phi_a), np.sin(phi_a)])
    return PoincareElement(rho, rot(rho) @ chord)


def poincare_transport(geom: ConeGeometry, curve: Curve) -> PoincareElement:
    """Rigid-motion transport along ``curve`` (product over segments, later on the left)."""
    if curve.dim != 2:
        raise GridMismatchError("cone transport needs planar curves")
    _check_off_core(geom, curve)
    a, b = curve.segments()
    g = PoincareElement.identity()
    for p, q in zip(a, b):
        g = _segment_element(geom, p, q).compose(g)
    return g


def sampled_connection_transport(geom: ConeGeometry, curve: Curve,
                                 steps_per_segment: int = 4000) -> PoincareElement:
    """Cross-check of :func:`poincare_transport` from sampled frame fields.

    Integrates the connection ``omega = (deficit/2pi) dphi`` and the
    soldering form ``theta = (dr, beta r dphi)`` (polar orthonormal frame)
    with the midpoint rule along finely subdivided segments.
    """
    _check_off_core(geom, curve)
    apex = np.asarray(geom.apex)
    a, b = curve.segments()
    s = np.linspace(0.0, 1.0, steps_per_segment + 1)
    pts = np.concatenate([p + s[:-1, None] * (q - p) for p, q in zip(a, b)] + [b[-1:]])
    rel = pts - apex
    r = np.linalg.norm(rel, axis=-1)
    dphi = _subtended(pts[:-1], pts[1:], apex)
    phi = np.arctan2(rel[0, 1], rel[0, 0]) + np.concatenate([[0.0], np.cumsum(dphi)])
    dr = np.diff(r)
    r_mid = 0.5 * (r[1:] + r[:-1])
    phi_mid = 0.5 * (phi[1:] + phi[:-1])
    omega = geom.deficit_angle / (2 * np.pi) * dphi
    # frame angle of e_r relative to the parallel frame, in the development
    ang = phi[0] + geom.beta * (phi_mid - phi[0])
    theta_r, theta_p = dr, geom.beta * r_mid * dphi
    disp = np.stack([theta_r * np.cos(ang) - theta_p * np.sin(ang),
                     theta_r * np.sin(ang) + theta_p * np.cos(ang)], axis=-1).sum(axis=0)
    rho = float(omega.sum())
    return PoincareElement(rho, rot(rho) @ disp)


def enclosing_translation(geom: ConeGeometry, base) -> np.ndarray:
    """``(I - rot(deficit)) (base - apex)``: translation of a once-enclosing loop."""
    d = np.asarray(base, dtype=float) - np.asarray(geom.apex)
    return (np.eye(2) - rot(geom.deficit_angle)) @ d


def _apex_motion(geom: ConeGeometry, element: PoincareElement, base: np.ndarray):
    """Inverse of the map ``x -> base + rot(R)(x - base) - t``.

    For loop elements this is a rotation about the apex, so the action does
    not depend on where the coordinate origin sits.
    """
    R = rot(element.rotation)
    t = element.vector

    def inverse_map(x):
        return base + (x - base + t) @ R

    return inverse_map


def gravitational_ab_expectation(psi10: WaveFunction, psi20: WaveFunction, gamma1: Curve,
                                 gamma2: Curve, gamma: Curve, geom: ConeGeometry, *,
                                 overlap_tol: float = 1e-8,
                                 packet_width: float | None = None) -> complex:
    """``1/2 int psi10*(x + l) (g psi20)(x) dx`` with ``g`` the loop's rigid motion.

    The loop ``gamma_0`` runs along gamma2, then gamma, then back along
    gamma1; ``g`` moves wave functions by the rotation about the apex that
    the loop element represents.  Scalar wave functions on a 2D grid only.
    With ``packet_width`` set, packet centres must keep five widths from
    the seam.
    """
    grid = psi10.grid
    if grid.dim != 2 or psi10.internal_dim != 1 or psi20.grid != grid:
        raise GridMismatchError("scalar wave functions on a common 2D grid required")
    if abs(inner_product(psi10, psi20)) > overlap_tol:
        raise OverlapError("unperturbed packets overlap; the reduction does not apply")
    if packet_width is not None:
        geom.check_seam_clearance([gamma1.end, gamma2.end], packet_width)
    loop = closed_loop(gamma1, gamma2, gamma)
    element = poincare_transport(geom, loop)
    moved = _act(psi20, element, geom, loop.start)
    return CROSS_TERM_FACTOR * inner_product(translate(psi10, -gamma.displacement), moved)


def _act(psi: WaveFunction, element: PoincareElement, geom: ConeGeometry,
         base: np.ndarray) -> WaveFunction:
    if element.distance(PoincareElement.identity()) == 0.0:
        return psi
    grid = psi.grid
    src = _apex_motion(geom, element, np.asarray(base))(grid.coords())
    idx = (src - grid.lower()) / grid.spacing
    idx = np.moveaxis(idx, -1, 0)
    amp = psi.amplitudes[..., 0]
    out = (map_coordinates(amp.real, idx, order=5, mode="grid-wrap")
           + 1j * map_coordinates(amp.imag, idx, order=5, mode="grid-wrap"))
    return psi.with_amplitudes(out[..., None])


def loop_encloses_apex(geom: ConeGeometry, loop: Curve) -> bool:
    return round(winding_number(loop, geom.apex)) != 0


@dataclass(frozen=True)
class FrameReport:
    """Angles between the transported frame and the loop tangent.

    ``tangent_angles[k]`` is the unwrapped angle of the k-th developed edge
    relative to the (constant) transported frame; ``unwrapped_total`` is the
    net turning of the tangent against the frame over one circuit.
    """

    tangent_angles: np.ndarray
    unwrapped_total: float
    holonomy_mod_2pi: float
    winding: int


def _developed_polygon(geom: ConeGeometry, loop: Curve) -> np.ndarray:
    apex = np.asarray(geom.apex)
    a, b = loop.segments()
    beta = abs(geom.beta)
    pts = []
    for p, q in zip(a, b):
        span = abs(float(_subtended(p, q, apex)))
        n = max(2, int(np.ceil(beta * span / (np.pi / 8))) + 1)
        s = np.linspace(0.0, 1.0, n)[:-1]
        pts.append(p + s[:, None] * (q - p))
    pts = np.concatenate(pts + [a[:1]])
    rel = pts - apex
    r = np.linalg.norm(rel, axis=-1)
    phi0 = np.arctan2(rel[0, 1], rel[0, 0])
    phi = phi0 + np.concatenate([[0.0], np.cumsum(_subtended(pts[:-1], pts[1:], apex))])
    psi = phi0 + geom.beta * (phi - phi0)
    return apex + r[:, None] * np.stack([np.cos(psi), np.sin(psi)], axis=-1)


def _wrap(a):
    return (np.asarray(a) + np.pi) % (2 * np.pi) - np.pi


def tangent_frame_distinguishability(geom: ConeGeometry, loop: Curve) -> tuple[float, FrameReport]:
    """Rotation holonomy of ``loop`` and the frame-versus-tangent record.

    The rotation holonomy only fixes the deficit angle mod 2pi; the net
    turning of the tangent against the transported frame, ``2pi beta w`` for
    a loop winding ``w`` times round the apex (plus the flat turning
    number), separates ``deficit`` from ``deficit + 2pi``.
    """
    if not loop.closed:
        raise ValueError("tangent-frame comparison needs a closed loop")
    element = poincare_transport(geom, loop)
    w = int(round(winding_number(loop, geom.apex)))
    D = _developed_polygon(geom, loop)
    edges = np.diff(D, axis=0)
    tau = np.arctan2(edges[:, 1], edges[:, 0])
    turns = _wrap(np.diff(tau))
    # the first edge, developed once more round the loop, points along tau0 - deficit*w
    closing = _wrap(tau[0] - geom.deficit_angle * w - tau[-1])
    angles = tau[0] + np.concatenate([[0.0], np.cumsum(turns)])
    total = float(np.sum(turns) + closing)
    hol = float(_wrap(element.rotation))
    return element.rotation, FrameReport(angles, total, hol, w)
