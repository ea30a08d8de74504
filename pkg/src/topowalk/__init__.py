"""Discrete-time quantum walks whose coin angle grows with the step index.

Modules
-------
core
    Protocol specifications, Pauli algebra, tolerances.
kspace
    Momentum-space step operators, bands, Bloch vectors, symmetries.
topology
    Gap closings, boundary-state classification, winding/Zak/Chern invariants.
realspace
    Position-space evolution, including the inhomogeneous interface walk.
sweep
    Parameter grids with CSV and SVG export.
cli
    The ``topowalk`` command.
"""

from ._version import __version__
from .core import (
    AngleRelation,
    Family,
    InhomogeneousProfile,
    Momentum,
    ProtocolSpec,
    Tolerances,
)
from .kspace import (
    band_structure,
    bloch_vector,
    build_step_unitary,
    dispersion,
    group_velocity,
    symmetry_report,
)
from .topology import (
    BoundaryKind,
    GapClosing,
    GaplessError,
    Sector,
    analytic_gap_angles,
    chern_number,
    classify_boundary,
    enumerate_cells,
    locate_gap_closings,
    path_invariants,
    position_resolved_invariant,
    winding_number,
    zak_phase,
)
from .realspace import (
    LatticeGeometry,
    apply_inhomogeneous_step,
    apply_step,
    evolve,
    interface_localization,
    new_state,
    plane_wave_eigencheck,
    position_distribution,
)
from .sweep import Quantity, SweepRequest, export_csv, export_svg_heatmap, read_csv, run_sweep

__all__ = [
    "__version__",
    "AngleRelation",
    "Family",
    "InhomogeneousProfile",
    "Momentum",
    "ProtocolSpec",
    "Tolerances",
    "band_structure",
    "bloch_vector",
    "build_step_unitary",
    "dispersion",
    "group_velocity",
    "symmetry_report",
    "BoundaryKind",
    "GapClosing",
    "GaplessError",
    "Sector",
    "analytic_gap_angles",
    "chern_number",
    "classify_boundary",
    "enumerate_cells",
    "locate_gap_closings",
    "path_invariants",
    "position_resolved_invariant",
    "winding_number",
    "zak_phase",
    "LatticeGeometry",
    "apply_inhomogeneous_step",
    "apply_step",
    "evolve",
    "interface_localization",
    "new_state",
    "plane_wave_eigencheck",
    "position_distribution",
    "Quantity",
    "SweepRequest",
    "export_csv",
    "export_svg_heatmap",
    "read_csv",
    "run_sweep",
]
