"""Path ordering for SU(2) potentials.

Transports along a curve are path-ordered products; the holonomy of an
SU(2) flux tube does not depend on the loop radius outside the core, and
the cross term of <g_gamma> reduces to the closed-loop holonomy.

Run: python3 demos/nonabelian_transport.py
"""
import math

import numpy as np

from holonomy_lab.gauge import LieAlgebraBasis, SU2, nonabelian_flux_tube, random_band_limited_potential
from holonomy_lab.grid import GridSpec, gaussian_packet
from holonomy_lab.observables import closed_loop_reduction_check
from holonomy_lab.transport import arc, circle, path_ordered_exponential, polyline, segment

grid = GridSpec(2, 64, 0.25)
A = random_band_limited_potential(7, grid, LieAlgebraBasis(SU2), 3, 0.8)
c1 = polyline([(-2.0, -1.0), (1.0, 0.5)])
c2 = polyline([(1.0, 0.5), (0.0, 2.5)])
W1, W2 = path_ordered_exponential(A, c1).matrix, path_ordered_exponential(A, c2).matrix
W = path_ordered_exponential(A, c1.then(c2)).matrix
print(f"|W(c1 then c2) - W(c2) W(c1)| = {np.abs(W - W2 @ W1).max():.2e}")
print(f"|W(c1 then c2) - W(c1) W(c2)| = {np.abs(W - W1 @ W2).max():.2e}  (order matters)")

tube = nonabelian_flux_tube((0.0, 0.0), (0.3, -0.5, 0.8), 2.1, 0.5)
for r in (1.0, 2.0, 5.0):
    H = path_ordered_exponential(tube, circle((0.0, 0.0), r, 64)).matrix
    print(f"flux-tube holonomy, radius {r}: trace = {np.trace(H).real:+.10f}")

grid2 = GridSpec(2, 128, 0.25)
upper = gaussian_packet(grid2, (0.0, 7.0), 0.5, spinor=[1.0, 0.0])
lower = gaussian_packet(grid2, (0.0, -7.0), 0.5, spinor=[0.6, 0.8j])
base = np.array([-13.0, 0.0])
gamma = arc((0.0, 0.0), 7.0, -math.pi / 2, math.pi / 2, 16)
lhs, rhs = closed_loop_reduction_check(upper, lower, segment(base, (0.0, 7.0)),
                                       segment(base, (0.0, -7.0)), gamma, tube)
print(f"cross term {lhs:.8f}, closed-loop form {rhs:.8f}")
