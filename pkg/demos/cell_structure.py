"""Cell-like arrangement of boundary states in the split-step walk.

With beta = (alpha + pi) / 3 the T = 6 walk shows flat bands at both ends
of alpha in [-pi/2, pi/2] enclosing two Fermi arcs and a Dirac cone.  The
script classifies each closing, prints the chiral operator there, and counts
E = 0 and E = pi closings along a path through the cell.
"""

import math

import numpy as np

from topowalk import AngleRelation, ProtocolSpec, enumerate_cells, path_invariants
from topowalk.kspace import chiral_data

rel = AngleRelation(1 / 3, math.pi / 3)
spec = ProtocolSpec.split1d(0.0, relation=rel)

for T in (2, 6):
    report = enumerate_cells(T, rel, (-math.pi / 2, math.pi / 2))
    print(f"T={T}: cell present = {report.has_cell}")
    for angle, kind, sector in report.ordered_boundaries:
        gamma = chiral_data(spec.with_angle(angle), T).gamma_op.real
        print(f"  alpha={angle:+.4f}  {sector.value:<4}  {kind.value:<9}  "
              f"Gamma = {np.round(gamma, 3).tolist()}")

d = 0.1
counts = path_invariants(spec, 6, -math.pi / 2 - d, math.pi / 2 + d)
print(f"path through the T=6 cell: q0={counts.q0}, qpi={counts.qpi} "
      f"(closings touching each gap: {counts.q0_all}, {counts.qpi_all})")
