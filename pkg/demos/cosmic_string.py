"""Transport around a cosmic string.

Loops enclosing the apex of a flat cone come back rotated by the deficit
angle and translated; loops that miss it return to the identity.  The
rotation alone cannot tell delta from delta + 2pi, but the turning of the
tangent against the transported frame can.

Run: python3 demos/cosmic_string.py
"""
import math

from holonomy_lab.gravity import (ConeGeometry, enclosing_translation, gravitational_ab_expectation,
                                  poincare_transport, tangent_frame_distinguishability)
from holonomy_lab.grid import GridSpec, gaussian_packet
from holonomy_lab.transport import arc, circle, polyline, segment

loop = polyline([(2.0, -1.0), (1.5, 2.0), (-2.0, 1.0), (-1.0, -2.5)], closed=True)
for delta in (math.pi / 6, 1.0, -0.4):
    geom = ConeGeometry((0.0, 0.0), delta)
    g = poincare_transport(geom, loop)
    print(f"delta={delta:+.4f}: rotation {g.rotation:+.10f}, translation {g.vector}, "
          f"expected {enclosing_translation(geom, loop.start)}")
    far = poincare_transport(geom, circle((4.0, 1.0), 1.5, 40))
    print(f"               loop missing the apex: rotation {far.rotation:+.1e}")

for delta in (-0.4, 2 * math.pi - 0.4):
    _, rep = tangent_frame_distinguishability(ConeGeometry((0.0, 0.0), delta), loop)
    print(f"delta={delta:+.4f}: holonomy mod 2pi {rep.holonomy_mod_2pi:+.6f}, "
          f"tangent turning {rep.unwrapped_total:+.6f}")

grid = GridSpec(2, 128, 0.2)
up, lo = gaussian_packet(grid, (0.0, 5.0), 0.7), gaussian_packet(grid, (0.0, -5.0), 0.7)
base = (-9.0, 0.0)
gamma = arc((0.0, 0.0), 5.0, -math.pi / 2, math.pi / 2, 32)
for delta in (0.0, 0.05, math.pi / 6):
    v = gravitational_ab_expectation(up, lo, segment(base, (0.0, 5.0)), segment(base, (0.0, -5.0)),
                                     gamma, ConeGeometry((0.0, 0.0), delta), packet_width=0.7)
    print(f"two-packet expectation, delta={delta:.4f}: {v.real:.6f}")
