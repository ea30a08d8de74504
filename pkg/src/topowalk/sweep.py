"""Parameter sweeps over angle, momentum, step index and position.

Grid layouts by quantity:

* ``energy_plus``, ``velocity_plus``: one block per ``T``.  For 1D
  families the block is (angle x k); for 2D families it is the momentum
  plane (kx x ky) at the angle of ``spec``.
* ``zak_absolute``, ``zak_signed``, ``winding``, ``chern``,
  ``gap_indicator``: a single (angle x T) block.
* ``position_invariant``: one (alpha1 x position) block per ``T``; the
  momentum axis is read as the position axis.

Ill-defined cells hold NaN with the gapless flag set; divergent Zak ratios
hold ``inf``.  Rows are filled by index into a preallocated array, so the
result does not depend on the number of worker threads.
"""

from __future__ import annotations

import enum
import hashlib
import math
import os
import xml.etree.ElementTree as ET
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _csvio
from ._version import __version__
from .core import AngleRelation, Family, InhomogeneousProfile, ProtocolSpec, Tolerances, check_step, momentum_grid
from .kspace import band_structure, band_coefficients, velocity_closed_form
from .topology import (
    GaplessError,
    chern_number,
    minimum_gap,
    position_resolved_invariant,
    winding_number,
    zak_phase,
)

__all__ = [
    "Quantity",
    "SweepRequest",
    "SweepResult",
    "run_sweep",
    "export_csv",
    "csv_lines",
    "read_csv",
    "export_svg_heatmap",
    "PALETTES",
]


class Quantity(str, enum.Enum):
    ENERGY_PLUS = "energy_plus"
    VELOCITY_PLUS = "velocity_plus"
    ZAK_ABSOLUTE = "zak_absolute"
    ZAK_SIGNED = "zak_signed"
    WINDING = "winding"
    CHERN = "chern"
    GAP_INDICATOR = "gap_indicator"
    POSITION_INVARIANT = "position_invariant"

    @property
    def per_step(self) -> bool:
        return self in (Quantity.ENERGY_PLUS, Quantity.VELOCITY_PLUS, Quantity.POSITION_INVARIANT)


def _axis(spec, name):
    axis = tuple(spec)
    if len(axis) != 3:
        raise ValueError(f"{name} axis must be (min, max, samples)")
    lo, hi, n = float(axis[0]), float(axis[1]), axis[2]
    if int(n) != n or n < 8:
        raise ValueError(f"{name} axis needs at least 8 samples")
    if not (math.isfinite(lo) and math.isfinite(hi)) or not hi > lo:
        raise ValueError(f"{name} axis must satisfy min < max")
    return lo, hi, int(n)


@dataclass(frozen=True)
class SweepRequest:
    """What to evaluate and on which grid.

    ``angle_axis`` is ``(name, min, max, samples)``; ``momentum_axis`` is
    ``(min, max, samples)`` or, for the 2D momentum plane, a pair of them.
    """

    spec: ProtocolSpec
    T_list: tuple
    quantity: Quantity
    angle_axis: tuple | None = None
    momentum_axis: tuple = (-math.pi, math.pi, 201)
    tolerances: Tolerances = Tolerances()
    invariant_resolution: int = 256
    velocity_component: str = "x"

    def __post_init__(self):
        object.__setattr__(self, "quantity", Quantity(self.quantity))
        T_list = tuple(check_step(T) for T in np.atleast_1d(self.T_list))
        if not T_list:
            raise ValueError("T_list is empty")
        object.__setattr__(self, "T_list", T_list)
        if self.velocity_component not in ("x", "y"):
            raise ValueError("velocity_component must be 'x' or 'y'")
        q, fam = self.quantity, self.spec.family
        if q in (Quantity.ZAK_ABSOLUTE, Quantity.ZAK_SIGNED, Quantity.POSITION_INVARIANT) \
                and fam is not Family.SPLIT_1D:
            raise ValueError(f"{q.value} needs the split1d family")
        if q is Quantity.WINDING and fam.dim != 1:
            raise ValueError("winding needs a 1D family")
        if q is Quantity.CHERN and fam.dim != 2:
            raise ValueError("chern needs a 2D family")
        if self.needs_angle_axis:
            if self.angle_axis is None:
                raise ValueError(f"{q.value} needs an angle axis")
            name, *rest = self.angle_axis
            object.__setattr__(self, "angle_axis", (str(name),) + _axis(rest, "angle"))
        if self.needs_momentum_axis:
            if self.momentum_plane:
                m = self.momentum_axis
                if len(m) == 3 and not isinstance(m[0], (tuple, list)):
                    m = (m, m)
                object.__setattr__(self, "momentum_axis", (_axis(m[0], "kx"), _axis(m[1], "ky")))
            else:
                object.__setattr__(self, "momentum_axis", _axis(self.momentum_axis, "momentum"))

    @property
    def momentum_plane(self) -> bool:
        return self.quantity in (Quantity.ENERGY_PLUS, Quantity.VELOCITY_PLUS) and self.spec.family.dim == 2

    @property
    def needs_angle_axis(self) -> bool:
        return not self.momentum_plane

    @property
    def needs_momentum_axis(self) -> bool:
        return self.quantity.per_step

    def canonical(self) -> str:
        """Stable textual form used for hashing."""
        s = self.spec
        rel = None if s.relation is None else (repr(s.relation.s1), repr(s.relation.s2))
        tol = self.tolerances
        return repr((
            s.family.value, repr(s.theta), repr(s.alpha), repr(s.beta), rel,
            self.T_list, self.quantity.value, self.angle_axis, self.momentum_axis,
            (tol.gap_eps, tol.flat_eps, tol.unitarity_eps, tol.invariant_eps),
            self.invariant_resolution, self.velocity_component,
        ))


@dataclass
class SweepResult:
    """Row-major grids, one per block.

    ``values`` and ``gapless`` have shape ``(blocks, len(axis1), len(axis2))``.
    ``block_T`` holds the step index of each block, or ``None`` for a block
    whose second axis is ``T`` itself.
    """

    request: SweepRequest
    axis1_name: str
    axis2_name: str
    axis1: np.ndarray
    axis2: np.ndarray
    values: np.ndarray
    gapless: np.ndarray
    block_T: tuple
    metadata: dict = field(default_factory=dict)


# -- cell evaluation --------------------------------------------------------

def _row_energy_1d(spec, T, angle, k, tol):
    s = spec.with_angle(angle)
    e, sin_e, _ = band_structure(s, T, k)
    return e, sin_e < tol.gap_eps


def _row_velocity_1d(spec, T, angle, k, tol):
    s = spec.with_angle(angle)
    _, sin_e, _ = band_structure(s, T, k)
    P, _ = band_coefficients(s, T)
    if abs(P) < tol.flat_eps:
        return np.zeros_like(k), sin_e < tol.gap_eps
    v = velocity_closed_form(s, T, k)[0]
    bad = sin_e < tol.gap_eps
    return np.where(bad, np.nan, v), bad


def _row_plane(spec, T, kx, ky, tol, velocity, component):
    kxx = np.full_like(ky, kx)
    e, sin_e, _ = band_structure(spec, T, kxx, ky)
    bad = sin_e < tol.gap_eps
    if not velocity:
        return e, bad
    P, S = band_coefficients(spec, T)
    flat = abs(P) < tol.flat_eps and (spec.family is not Family.SPLIT_2D or abs(S) < tol.flat_eps)
    if flat:
        return np.zeros_like(ky), bad
    v = velocity_closed_form(spec, T, kxx, ky)[0 if component == "x" else 1]
    return np.where(bad, np.nan, v), bad


def _cell_invariant(req, angle, T):
    spec = req.spec.with_angle(angle)
    tol = req.tolerances
    q = req.quantity
    if q in (Quantity.ZAK_ABSOLUTE, Quantity.ZAK_SIGNED):
        mode = "absolute" if q is Quantity.ZAK_ABSOLUTE else "signed"
        return zak_phase(T, spec.alpha, spec.beta, mode), False
    if q is Quantity.GAP_INDICATOR:
        g = minimum_gap(spec, T)
        return g, g < tol.gap_eps
    try:
        if q is Quantity.WINDING:
            return winding_number(spec, T, max(req.invariant_resolution, 256), tol).value, False
        return chern_number(spec, T, max(req.invariant_resolution, 64), tol).value, False
    except GaplessError:
        return math.nan, True


def _resolve_threads(threads):
    if threads is None:
        env = os.environ.get("TOPOWALK_THREADS")
        threads = int(env) if env else (os.cpu_count() or 1)
    threads = int(threads)
    if threads < 1:
        raise ValueError("threads must be at least 1")
    return threads


def _fill(rows, n_rows, threads):
    # rows(i) -> (values, gapless); results land by index, never by completion order
    out = [None] * n_rows
    if threads == 1:
        for i in range(n_rows):
            out[i] = rows(i)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for i, r in zip(range(n_rows), pool.map(rows, range(n_rows))):
                out[i] = r
    vals = np.array([np.asarray(r[0], dtype=float) for r in out])
    bad = np.array([np.asarray(r[1], dtype=bool) for r in out])
    return vals, bad


def run_sweep(req: SweepRequest, threads: int | None = None) -> SweepResult:
    """Evaluate ``req.quantity`` on every grid cell.

    ``threads`` caps worker threads (default ``TOPOWALK_THREADS`` or the CPU
    count); the output is identical for any value.
    """
    threads = _resolve_threads(threads)
    tol = req.tolerances
    q = req.quantity
    blocks_v, blocks_g = [], []

    if req.momentum_plane:
        (x0, x1, nx), (y0, y1, ny) = req.momentum_axis
        axis1, axis2 = momentum_grid(nx, x0, x1), momentum_grid(ny, y0, y1)
        names = ("kx", "ky")
        block_T = req.T_list
        velocity = q is Quantity.VELOCITY_PLUS
        for T in req.T_list:
            v, g = _fill(lambda i: _row_plane(req.spec, T, axis1[i], axis2, tol, velocity,
                                              req.velocity_component), nx, threads)
            blocks_v.append(v)
            blocks_g.append(g)
    elif q.per_step:
        name, a0, a1, na = req.angle_axis
        m0, m1, nm = req.momentum_axis
        axis1, axis2 = momentum_grid(na, a0, a1), momentum_grid(nm, m0, m1)
        block_T = req.T_list
        if q is Quantity.POSITION_INVARIANT:
            names = (name, "x")
            rel = req.spec.relation or AngleRelation(1.0 / 3.0, math.pi / 3.0)
            for T in req.T_list:
                def row(i, T=T):
                    prof = InhomogeneousProfile(axis1[i], beta_relation=rel)
                    cells = [position_resolved_invariant(prof, T, x, max(req.invariant_resolution, 256), tol)
                             for x in axis2]
                    return [c.value for c in cells], [c.gapless for c in cells]
                v, g = _fill(row, na, threads)
                blocks_v.append(v)
                blocks_g.append(g)
        else:
            names = (name, "k")
            fn = _row_energy_1d if q is Quantity.ENERGY_PLUS else _row_velocity_1d
            for T in req.T_list:
                v, g = _fill(lambda i, T=T: fn(req.spec, T, axis1[i], axis2, tol), na, threads)
                blocks_v.append(v)
                blocks_g.append(g)
    else:
        name, a0, a1, na = req.angle_axis
        axis1 = momentum_grid(na, a0, a1)
        axis2 = np.array(req.T_list, dtype=float)
        names = (name, "T")
        block_T = (None,)

        def row(i):
            cells = [_cell_invariant(req, axis1[i], T) for T in req.T_list]
            return [c[0] for c in cells], [c[1] for c in cells]

        v, g = _fill(row, na, threads)
        blocks_v.append(v)
        blocks_g.append(g)

    values = np.stack(blocks_v)
    gapless = np.stack(blocks_g)
    digest = hashlib.sha256()
    digest.update(req.canonical().encode())
    digest.update(axis1.tobytes())
    digest.update(axis2.tobytes())
    metadata = {
        "version": __version__,
        "grid_hash": digest.hexdigest()[:16],
        "values_hash": hashlib.sha256(values.tobytes() + gapless.tobytes()).hexdigest()[:16],
    }
    return SweepResult(req, names[0], names[1], axis1, axis2, values, gapless, tuple(block_T), metadata)


# -- CSV --------------------------------------------------------------------

def _block_header(result, b):
    T = result.block_T[b]
    T_field = str(T) if T is not None else ";".join(str(t) for t in result.request.T_list)
    return _csvio.header(
        family=result.request.spec.family.value,
        T=T_field,
        quantity=result.request.quantity.value,
        axis1=result.axis1_name,
        axis2=result.axis2_name,
    )


def export_csv(result: SweepResult, path) -> None:
    """Write every block in row-major order (axis2 varies fastest)."""
    _csvio.write_lines(path, csv_lines(result))


def csv_lines(result: SweepResult) -> list:
    lines = []
    a1, a2 = np.meshgrid(result.axis1, result.axis2, indexing="ij")
    for b in range(len(result.block_T)):
        lines += _csvio.block_lines(
            _block_header(result, b), a1.ravel(), a2.ravel(),
            result.values[b].ravel(), result.gapless[b].ravel(),
        )
    return lines


def read_csv(path) -> list:
    """Parse an exported sweep back into grids.

    Returns a list of dicts with ``fields``, ``axis1``, ``axis2``,
    ``values`` and ``gapless`` (2D arrays).
    """
    out = []
    for fields, rows in _csvio.read_blocks(path):
        axis1 = np.unique(rows[:, 0])
        axis2 = np.unique(rows[:, 1])
        shape = (len(axis1), len(axis2))
        if rows.shape[0] != shape[0] * shape[1]:
            raise ValueError("block is not a full rectangular grid")
        out.append({
            "fields": fields,
            "axis1": rows[:: shape[1], 0].copy(),
            "axis2": rows[: shape[1], 1].copy(),
            "values": rows[:, 2].reshape(shape),
            "gapless": rows[:, 3].reshape(shape).astype(bool),
        })
    return out


# -- SVG --------------------------------------------------------------------

PALETTES = {
    # (low, mid, high) stops in RGB
    "diverging": ((33, 102, 172), (247, 247, 247), (178, 24, 43)),
    "sequential": ((255, 255, 229), (65, 171, 93), (0, 69, 41)),
}
GAPLESS_COLOR = "#000000"
UNDEFINED_COLOR = "#9e9e9e"


def _lerp(c0, c1, t):
    return tuple(int(round(a + (b - a) * t)) for a, b in zip(c0, c1))


def _color(t, palette):
    lo, mid, hi = PALETTES[palette]
    t = min(max(t, 0.0), 1.0)
    rgb = _lerp(lo, mid, 2 * t) if t < 0.5 else _lerp(mid, hi, 2 * t - 1)
    return "#%02x%02x%02x" % rgb


def _num(x):
    return f"{x:.6g}"


def export_svg_heatmap(result: SweepResult, path, palette: str = "diverging", block: int = 0,
                       cell: int = 4) -> None:
    """Standalone SVG heat map of one block.

    One rectangle per cell; gapless cells are black and other non-finite
    cells grey.  The diverging palette is centred on zero.
    """
    if palette not in PALETTES:
        raise ValueError(f"palette must be one of {sorted(PALETTES)}")
    vals = result.values[block]
    bad = result.gapless[block]
    n1, n2 = vals.shape
    finite = vals[np.isfinite(vals) & ~bad]
    if palette == "diverging":
        span = float(np.max(np.abs(finite))) if finite.size else 1.0
        lo, hi = -span, span
    else:
        lo, hi = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 1.0)
    width = hi - lo if hi > lo else 1.0

    ml, mt, mb, mr = 60, 30, 40, 10
    w, h = n1 * cell, n2 * cell
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{ml + w + mr}" height="{mt + h + mb}" '
        f'viewBox="0 0 {ml + w + mr} {mt + h + mb}">',
        f'<title>{result.request.quantity.value} {_block_header(result, block)[2:]}</title>',
        f'<g id="cells" transform="translate({ml},{mt})" shape-rendering="crispEdges">',
    ]
    for i in range(n1):
        for j in range(n2):
            v = vals[i, j]
            if bad[i, j]:
                fill = GAPLESS_COLOR
            elif not np.isfinite(v):
                fill = UNDEFINED_COLOR
            else:
                fill = _color((v - lo) / width, palette)
            # axis1 runs left to right, axis2 bottom to top
            parts.append(f'<rect x="{i * cell}" y="{(n2 - 1 - j) * cell}" width="{cell}" '
                         f'height="{cell}" fill="{fill}"/>')
    parts.append("</g>")
    x0, y0 = ml, mt + h
    parts += [
        f'<g id="axes" stroke="#000000" fill="none">',
        f'<line x1="{x0}" y1="{y0}" x2="{x0 + w}" y2="{y0}"/>',
        f'<line x1="{x0}" y1="{mt}" x2="{x0}" y2="{y0}"/>',
        "</g>",
        '<g id="labels" font-family="sans-serif" font-size="10" fill="#000000">',
        f'<text x="{x0}" y="{y0 + 12}">{_num(result.axis1[0])}</text>',
        f'<text x="{x0 + w}" y="{y0 + 12}" text-anchor="end">{_num(result.axis1[-1])}</text>',
        f'<text x="{x0 + w / 2}" y="{y0 + 28}" text-anchor="middle">{result.axis1_name}</text>',
        f'<text x="{x0 - 4}" y="{y0}" text-anchor="end">{_num(result.axis2[0])}</text>',
        f'<text x="{x0 - 4}" y="{mt + 8}" text-anchor="end">{_num(result.axis2[-1])}</text>',
        f'<text x="12" y="{mt + h / 2}" text-anchor="middle" '
        f'transform="rotate(-90 12 {mt + h / 2})">{result.axis2_name}</text>',
        f'<text x="{x0}" y="{mt - 10}">{result.request.quantity.value} [{_num(lo)}, {_num(hi)}]</text>',
        "</g>",
        "</svg>",
    ]
    doc = "\n".join(parts) + "\n"
    ET.fromstring(doc.encode("utf-8"))  # self-validate before touching the file
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(doc)
