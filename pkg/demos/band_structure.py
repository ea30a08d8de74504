"""Energy bands of the simple-step walk as the step index grows.

Prints the gap-closing angles for T = 1..8, showing that their spacing
shrinks as 2 pi / T, and the flat-band angles where the dispersion vanishes.
"""

import math

import numpy as np

from topowalk import ProtocolSpec, dispersion, locate_gap_closings
from topowalk.topology import Sector, analytic_gap_angles

spec = ProtocolSpec.simple1d(0.0)

print("T  closings in [0, 2pi]                         spacing")
for T in range(1, 9):
    angles = [c.angle for c in locate_gap_closings(spec, T, (0, 2 * math.pi))]
    spacing = np.diff(angles).mean() if len(angles) > 1 else float("nan")
    shown = " ".join(f"{a:.3f}" for a in angles)
    print(f"{T}  {shown:<44} {spacing:.4f}")

print()
print("flat-band angles (E = pi/2 for every k)")
for T in (2, 4, 8):
    flats = [c.angle for c in analytic_gap_angles("simple1d", T, Sector.PI, 0.0, flat=True)]
    theta = flats[0]
    es = [dispersion(spec.with_angle(theta), T, k).e_plus for k in np.linspace(-3, 3, 7)]
    print(f"T={T}: theta = {theta:.4f}, E(k) spread = {np.ptp(es):.1e}")
