"""Write CSV grids and SVG heat maps for the main phase diagrams.

Outputs land in demos/output/ (created if missing).
"""

import math
from pathlib import Path

from topowalk import AngleRelation, ProtocolSpec
from topowalk.sweep import Quantity, SweepRequest, export_csv, export_svg_heatmap, run_sweep

out = Path(__file__).with_name("output")
out.mkdir(exist_ok=True)
pi = math.pi

jobs = {
    "simple1d_energy_T4": SweepRequest(ProtocolSpec.simple1d(0), (4,), Quantity.ENERGY_PLUS,
                                       ("theta", 0, 2 * pi, 201)),
    "simple1d_velocity_T4": SweepRequest(ProtocolSpec.simple1d(0), (4,), Quantity.VELOCITY_PLUS,
                                         ("theta", 0, 2 * pi, 201)),
    "split1d_zak_beta_pi3": SweepRequest(ProtocolSpec.split1d(0, beta=pi / 3), range(2, 9),
                                         Quantity.ZAK_ABSOLUTE, ("alpha", -pi, pi, 401)),
    "split1d_winding_cell": SweepRequest(ProtocolSpec.split1d(0, relation=AngleRelation(1 / 3, pi / 3)),
                                         range(2, 9), Quantity.WINDING, ("alpha", -pi, pi, 129)),
    "simple2d_energy_T8": SweepRequest(ProtocolSpec.simple2d(pi / 5), (8,), Quantity.ENERGY_PLUS,
                                       momentum_axis=(-pi, pi, 101)),
}

for name, req in jobs.items():
    result = run_sweep(req)
    export_csv(result, out / f"{name}.csv")
    export_svg_heatmap(result, out / f"{name}.svg")
    print(f"{name}: {result.values.shape} grid {result.metadata['grid_hash']}")
