"""
Line integrals, Wilson lines and holonomies along polyline curves.

The transport along a curve from its start to its end is

    W = P exp( i g int T_k A^k . dy )

with the factor belonging to the END of the curve leftmost in the matrix
product.  Abelian integrals use vectorized Romberg integration per segment;
SU(2) products use a sixth-order Magnus step per sub-segment; the
sub-segment count is refined adaptively from a Richardson error estimate.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _su2
from .errors import ConvergenceError, TopologyError
from .gauge import GaugePotential, LieAlgebraBasis, U1

#: number of base points integrated together (bounds peak memory)
_CHUNK = 2048


@dataclass(frozen=True, eq=False)
class Curve:
    """Ordered polyline; if ``closed`` the segment last -> first is implicit."""

    points: np.ndarray
    closed: bool = False
    label: str = ""

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.shape[0] < 2:
            raise ValueError("a curve needs at least two points")
        if np.any(np.all(np.diff(pts, axis=0) == 0, axis=-1)):
            raise ValueError("consecutive curve points must be distinct")
        if self.closed and np.allclose(pts[0], pts[-1], rtol=0, atol=1e-14):
            raise ValueError("closed curves store the first point only once")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)
        if self.length <= 0:
            raise ValueError("curve has zero length")

    def __eq__(self, other):
        if not isinstance(other, Curve):
            return NotImplemented
        return (self.closed == other.closed and self.label == other.label
                and self.points.shape == other.points.shape
                and bool(np.all(self.points == other.points)))

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def start(self) -> np.ndarray:
        return self.points[0]

    @property
    def end(self) -> np.ndarray:
        return self.points[0] if self.closed else self.points[-1]

    @property
    def displacement(self) -> np.ndarray:
        return self.end - self.start

    def segments(self) -> tuple[np.ndarray, np.ndarray]:
        pts = self.points
        if self.closed:
            return pts, np.roll(pts, -1, axis=0)
        return pts[:-1], pts[1:]

    @property
    def length(self) -> float:
        a, b = self.segments()
        return float(np.sum(np.linalg.norm(b - a, axis=-1)))

    def reversed(self) -> "Curve":
        if self.closed:
            return Curve(np.concatenate([self.points[:1], self.points[:0:-1]]), True, self.label)
        return Curve(self.points[::-1], False, self.label)

    def translated(self, v) -> "Curve":
        return Curve(self.points + np.asarray(v, dtype=float), self.closed, self.label)

    def then(self, other: "Curve", atol: float = 1e-9) -> "Curve":
        """Open curve running along ``self`` and then ``other``."""
        if self.closed or other.closed:
            raise ValueError("only open curves can be concatenated")
        if not np.allclose(self.end, other.start, rtol=0, atol=atol):
            raise ValueError("curves do not join: end != start")
        return Curve(np.concatenate([self.points, other.points[1:]]), False)

    def close(self, atol: float = 1e-9) -> "Curve":
        """Closed curve from an open one whose end returns to its start."""
        if not np.allclose(self.start, self.end, rtol=0, atol=atol):
            raise ValueError("curve does not return to its start")
        return Curve(self.points[:-1], True, self.label)


def segment(a, b, label: str = "") -> Curve:
    return Curve(np.array([a, b], dtype=float), False, label)


def polyline(points, closed: bool = False, label: str = "") -> Curve:
    return Curve(np.asarray(points, dtype=float), closed, label)


def circle(center, radius: float, n: int = 64, winding: int = 1,
           start_angle: float = 0.0, label: str = "") -> Curve:
    """Closed regular polygon winding ``winding`` times (negative: clockwise)."""
    if winding == 0:
        raise ValueError("winding must be nonzero")
    m = n * abs(winding)
    theta = start_angle + np.sign(winding) * 2 * np.pi * np.arange(m) / n
    pts = np.asarray(center, dtype=float) + radius * np.stack([np.cos(theta), np.sin(theta)], -1)
    return Curve(pts, True, label)


def arc(center, radius: float, start_angle: float, end_angle: float,
        n: int = 32, label: str = "") -> Curve:
    theta = np.linspace(start_angle, end_angle, n + 1)
    pts = np.asarray(center, dtype=float) + radius * np.stack([np.cos(theta), np.sin(theta)], -1)
    return Curve(pts, False, label)


def winding_number(curve: Curve, center) -> float:
    """Total signed angle swept around ``center`` divided by 2 pi."""
    a, b = curve.segments()
    c = np.asarray(center, dtype=float)
    u, v = a - c, b - c
    cross = u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0]
    dot = np.sum(u * v, axis=-1)
    return float(np.sum(np.arctan2(cross, dot)) / (2 * np.pi))


# --- excluded regions ------------------------------------------------------

def segment_distance(starts: np.ndarray, ends: np.ndarray, center) -> np.ndarray:
    """Distance from ``center`` to each segment ``[starts, ends]``."""
    c = np.asarray(center, dtype=float)
    d = ends - starts
    dd = np.sum(d * d, axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(dd > 0, np.sum((c - starts) * d, axis=-1) / np.where(dd > 0, dd, 1), 0.0)
    s = np.clip(s, 0.0, 1.0)
    return np.linalg.norm(starts + s[..., None] * d - c, axis=-1)


def blocked_segments(A: GaugePotential, starts: np.ndarray, ends: np.ndarray) -> np.ndarray:
    """Boolean mask of segments touching any excluded disc of ``A``."""
    hit = np.zeros(starts.shape[:-1], dtype=bool)
    if starts.shape[-1] != 2:
        return hit
    for center, radius in A.excluded_regions:
        hit |= segment_distance(starts, ends, center) <= max(radius, 1e-9)
    return hit


def check_clear(A: GaugePotential, starts: np.ndarray, ends: np.ndarray) -> None:
    if np.any(blocked_segments(A, starts, ends)):
        raise TopologyError("curve intersects an excluded region of the potential")


# --- Abelian / component-wise line integrals ------------------------------

def _romberg_chunk(A, starts, ends, t, rtol, max_level, min_level):
    d = ends - starts                               # (P, dim)

    def f(s):                                       # s: (m,) -> (P, m, nc)
        y = starts[:, None, :] + s[None, :, None] * d[:, None, :]
        return np.einsum("pmkd,pd->pmk", A(y, t), d)

    ends_val = f(np.array([0.0, 1.0]))
    T = 0.5 * (ends_val[:, 0] + ends_val[:, 1])
    rows = [[T]]
    for k in range(1, max_level + 1):
        h = 2.0 ** -k
        s = (2 * np.arange(2 ** (k - 1)) + 1) * h
        T = 0.5 * T + h * f(s).sum(axis=1)
        row = [T]
        for j in range(1, k + 1):
            prev = row[j - 1]
            row.append(prev + (prev - rows[k - 1][j - 1]) / (4 ** j - 1))
        if k >= min_level:
            err = np.abs(row[-1] - rows[-1][-1])
            if np.all(err <= rtol * np.maximum(1.0, np.abs(row[-1]))):
                return row[-1]
        rows.append(row)
    raise ConvergenceError(f"line integral did not converge after {max_level} halvings")


def segment_integrals(A: GaugePotential, starts, ends, t: float = 0.0,
                      rtol: float = 1e-9, max_level: int = 12, min_level: int = 4) -> np.ndarray:
    """``int_seg A^k . dy`` for each segment; returns (P, n_components)."""
    starts = np.atleast_2d(np.asarray(starts, dtype=float))
    ends = np.atleast_2d(np.asarray(ends, dtype=float))
    check_clear(A, starts, ends)
    if A.basis.group == U1 and A.segment_integral is not None:
        return np.asarray(A.segment_integral(starts, ends, t), dtype=float)
    out = np.empty((starts.shape[0], A.basis.n_components))
    for i in range(0, starts.shape[0], _CHUNK):
        sl = slice(i, i + _CHUNK)
        out[sl] = _romberg_chunk(A, starts[sl], ends[sl], t, rtol, max_level, min_level)
    return out


def line_integral(A: GaugePotential, curve: Curve, t: float = 0.0,
                  rtol: float = 1e-9) -> np.ndarray:
    """Component-wise ``int_curve A^k . dy`` (shape (n_components,))."""
    a, b = curve.segments()
    return segment_integrals(A, a, b, t, rtol).sum(axis=0)


# --- SU(2) path-ordered products --------------------------------------------

_GAUSS = np.array([0.5 - np.sqrt(15) / 10, 0.5, 0.5 + np.sqrt(15) / 10])


def _bracket(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Commutator of ``i x.sigma/2`` and ``i y.sigma/2`` as a vector."""
    return np.cross(y, x)


def _magnus_product(A, starts, d, n, t, g):
    """Quaternion of the ordered product over ``n`` equal sub-segments.

    Sixth-order Magnus step on three Gauss-Legendre nodes per sub-segment.
    """
    h = 1.0 / n
    s = (np.arange(n)[:, None] + _GAUSS[None, :]) * h          # (n, 3)
    y = starts[:, None, None, :] + s[None, :, :, None] * d[:, None, None, :]
    a = np.einsum("pngkd,pd->pngk", A(y, t), d) * (h * g)       # (P, n, 3, 3)
    a1, a2, a3 = a[:, :, 0], a[:, :, 1], a[:, :, 2]
    b1 = a2
    b2 = (np.sqrt(15) / 3) * (a3 - a1)
    b3 = (10 / 3) * (a3 - 2 * a2 + a1)
    c1 = _bracket(b1, b2)
    c2 = -_bracket(b1, 2 * b3 + c1) / 60
    omega = b1 + b3 / 12 + _bracket(-20 * b1 - b3 + c1, b2 + c2) / 240
    return _su2.ordered_product(_su2.exp_i_sigma(0.5 * omega))


def _su2_segment_chunk(A, starts, ends, t, tol, n0, max_doublings):
    """Refine only the segments whose product is still changing.

    The scheme is sixth order, so between levels ``n`` and ``r n`` the
    error of the finer product is about ``|fine - coarse| / (r^6 - 1)``.
    After two levels each segment jumps to the level this predicts; products
    are accepted once the estimate is below ``tol``, then get one Richardson
    step and renormalization.
    """
    d = ends - starts
    g = A.basis.coupling
    P = starts.shape[0]
    coarse = _magnus_product(A, starts, d, n0, t, g)
    level = np.full(P, n0)
    target = np.full(P, 2 * n0, dtype=int)
    out = np.empty_like(coarse)
    done = np.zeros(P, dtype=bool)
    n_max = n0 * 2 ** max_doublings
    while not done.all():
        for n in np.unique(target[~done]):
            sel = np.nonzero(~done & (target == n))[0]
            fine = _magnus_product(A, starts[sel], d[sel], int(n), t, g)
            diff = fine - coarse[sel]
            denom = (n / level[sel]) ** 6 - 1
            err = np.linalg.norm(diff, axis=-1) / denom
            ok = err <= tol
            q = fine[ok] + diff[ok] / denom[ok, None]
            out[sel[ok]] = q / np.linalg.norm(q, axis=-1, keepdims=True)
            done[sel[ok]] = True
            rest = sel[~ok]
            coarse[rest], level[rest] = fine[~ok], n
            # predicted level with some margin, at least one doubling
            need = n * (err[~ok] / (0.5 * tol)) ** (1 / 6)
            target[rest] = np.minimum(np.maximum(2 * n, 2 ** np.ceil(np.log2(need))), n_max)
            if rest.size and n >= n_max:
                raise ConvergenceError(
                    f"path-ordered product did not converge with {n_max} sub-segments")
    return out


def segment_transports(A: GaugePotential, starts, ends, t: float = 0.0,
                       tol: float = 1e-9) -> np.ndarray:
    """Transport matrices along each straight segment; shape (P, d, d)."""
    starts = np.atleast_2d(np.asarray(starts, dtype=float))
    ends = np.atleast_2d(np.asarray(ends, dtype=float))
    basis = A.basis
    if basis.group == U1:
        return basis.exp_i(segment_integrals(A, starts, ends, t, rtol=tol))
    check_clear(A, starts, ends)
    P = starts.shape[0]
    q = np.empty((P, 4))
    chunk = 1024
    for i in range(0, P, chunk):
        sl = slice(i, i + chunk)
        q[sl] = _su2_segment_chunk(A, starts[sl], ends[sl], t, tol, n0=8, max_doublings=10)
    return _su2.to_matrix(q)


def curve_transports(A: GaugePotential, curve: Curve, offsets=None, t: float = 0.0,
                     tol: float = 1e-9) -> np.ndarray:
    """Transport along ``curve`` rigidly shifted by each offset; shape (P, d, d)."""
    if offsets is None:
        offsets = np.zeros((1, curve.dim))
    offsets = np.atleast_2d(np.asarray(offsets, dtype=float))
    a, b = curve.segments()
    P, m = offsets.shape[0], a.shape[0]
    starts = (a[None, :, :] + offsets[:, None, :]).reshape(P * m, -1)
    ends = (b[None, :, :] + offsets[:, None, :]).reshape(P * m, -1)
    basis = A.basis
    if basis.group == U1:
        total = segment_integrals(A, starts, ends, t, rtol=tol).reshape(P, m, -1).sum(axis=1)
        return basis.exp_i(total)
    mats = segment_transports(A, starts, ends, t, tol).reshape(P, m, 2, 2)
    W = mats[:, 0]
    for j in range(1, m):
        W = mats[:, j] @ W
    return W


# --- group elements -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GroupElement:
    matrix: np.ndarray
    basis: LieAlgebraBasis

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim == 0:
            m = m.reshape(1, 1)
        d = self.basis.rep_dim
        if m.shape != (d, d):
            raise ValueError(f"group element must be {d}x{d}, got {m.shape}")
        if np.max(np.abs(m.conj().T @ m - np.eye(d))) > 1e-10:
            raise ValueError("group element is not unitary within 1e-10")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @classmethod
    def identity(cls, basis: LieAlgebraBasis) -> "GroupElement":
        return cls(np.eye(basis.rep_dim), basis)

    @property
    def phase(self) -> float:
        """Argument of the U(1) phase (or of the determinant for SU(2))."""
        return float(np.angle(np.linalg.det(self.matrix)))

    def distance(self, other: "GroupElement") -> float:
        return float(np.linalg.norm(self.matrix - other.matrix, 2))


def compose(a: GroupElement, b: GroupElement) -> GroupElement:
    """Matrix product ``a b`` (``b`` acts first)."""
    if a.basis.group != b.basis.group:
        raise ValueError("cannot compose elements of different groups")
    return GroupElement(a.matrix @ b.matrix, a.basis)


def inverse(a: GroupElement) -> GroupElement:
    return GroupElement(a.matrix.conj().T, a.basis)


def path_ordered_exponential(A: GaugePotential, curve: Curve, t: float = 0.0,
                             tol: float = 1e-9) -> GroupElement:
    """``P exp(i g int_curve T.A.dy)`` with the end of the curve leftmost."""
    return GroupElement(curve_transports(A, curve, None, t, tol)[0], A.basis)


def holonomy(A: GaugePotential, closed_curve: Curve, t: float = 0.0,
             tol: float = 1e-9, minus_sign: bool = False) -> GroupElement:
    """Transport around a closed curve based at its first point.

    By default the transport convention ``exp(+i q oint A.dy)`` is used.
    ``minus_sign=True`` returns ``exp(-i q oint A.dy)`` instead, i.e. the
    transport of the reversed loop.
    """
    if not closed_curve.closed:
        raise ValueError("holonomy needs a closed curve")
    u = path_ordered_exponential(A, closed_curve, t, tol)
    return inverse(u) if minus_sign else u
