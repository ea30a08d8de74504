"""Gap closings, boundary-state classification and topological invariants.

Gap closings are found on a line in angle space.  Every protocol here has
its band extrema at a handful of high-symmetry momenta where ``U(k)`` is a
pure ``sigma_y`` rotation, ``U = a0 I - i ay sigma_y``.  The gap closes
exactly where the signed component ``ay`` crosses zero, which gives a clean
sign change to bisect on (the band maximum ``max_k cos E`` only touches 1
and never crosses it).  The sign of ``a0`` at the root tells whether the
gap closed at ``E = 0`` or at ``E = pi``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .core import (
    AngleRelation,
    Family,
    InhomogeneousProfile,
    Momentum,
    ProtocolSpec,
    Tolerances,
    as_momentum,
    check_step,
    periodic_grid,
)
from .kspace import (
    band_coefficients,
    band_structure,
    chiral_data,
    half_angles,
    su2_components,
    unitary_for_angles,
)

__all__ = [
    "Sector",
    "BoundaryKind",
    "GaplessError",
    "ClassificationConflict",
    "GapClosing",
    "InvariantValue",
    "PathInvariants",
    "CellReport",
    "CELL_PATTERN",
    "high_symmetry_momenta",
    "minimum_gap",
    "analytic_gap_angles",
    "locate_gap_closings",
    "classify_boundary",
    "winding_number",
    "winding_closed_form",
    "zak_phase",
    "is_divergent",
    "chern_number",
    "path_invariants",
    "enumerate_cells",
    "position_resolved_invariant",
]


class Sector(str, enum.Enum):
    ZERO = "zero"
    PI = "pi"


class BoundaryKind(str, enum.Enum):
    DIRAC_CONE = "dirac"
    FERMI_ARC = "fermi-arc"
    FLAT_BAND = "flat"


CELL_PATTERN = (
    BoundaryKind.FLAT_BAND,
    BoundaryKind.FERMI_ARC,
    BoundaryKind.DIRAC_CONE,
    BoundaryKind.FERMI_ARC,
    BoundaryKind.FLAT_BAND,
)


class GaplessError(ValueError):
    """Raised when a gapped phase is required but the bands touch."""


class ClassificationConflict(RuntimeError):
    """Analytic and numeric boundary classification disagree."""


@dataclass(frozen=True)
class GapClosing:
    """A point on the angle axis where the two bands touch.

    ``energy_sector`` is the primary sector (``ZERO`` wins when both gaps
    close at the same angle) and ``sectors`` lists every sector that closes.
    Flat-band entries that do not close a gap carry ``flat=True`` and an
    empty ``sectors`` tuple.
    """

    angle: float
    momentum: Momentum
    energy_sector: Sector
    solution_index: int | None = None
    sectors: tuple | None = None
    flat: bool = False

    def __post_init__(self):
        object.__setattr__(self, "energy_sector", Sector(self.energy_sector))
        if self.sectors is None:
            object.__setattr__(self, "sectors", (self.energy_sector,))

    @property
    def closes_gap(self) -> bool:
        return bool(self.sectors)


@dataclass(frozen=True)
class InvariantValue:
    value: float
    quantized: int | None
    resolution: int
    gapless: bool = False

    def __post_init__(self):
        if self.resolution < 64:
            raise ValueError("invariant resolution must be at least 64")

    @classmethod
    def from_value(cls, value, resolution, eps):
        value = float(value)
        q = round(value)
        quantized = int(q) if abs(value - q) < eps else None
        return cls(value, quantized, int(resolution))


@dataclass(frozen=True)
class PathInvariants:
    """Gap closings met along a path; ``q0``/``qpi`` count primary sectors.

    ``q0_all``/``qpi_all`` count every closing sector, so an angle where
    both gaps close adds one to each.
    """

    q0: int
    qpi: int
    q0_all: int
    qpi_all: int
    closings: tuple = ()


@dataclass(frozen=True)
class CellReport:
    alpha_range: tuple
    ordered_boundaries: list
    cells: list

    @property
    def has_cell(self) -> bool:
        return bool(self.cells)

    @property
    def kinds(self) -> list:
        return [b[1] for b in self.ordered_boundaries]


def high_symmetry_momenta(family: Family) -> list:
    """Momenta where ``U(k)`` is a ``sigma_y`` rotation and the bands reach their extrema."""
    family = Family(family)
    if family.dim == 1:
        return [Momentum(0.0), Momentum(math.pi)]
    if family is Family.SIMPLE_2D:
        return [Momentum(0.0, 0.0), Momentum(math.pi, 0.0)]
    h = 0.5 * math.pi
    return [Momentum(0.0, 0.0), Momentum(math.pi, 0.0), Momentum(h, h), Momentum(h, -h)]


def minimum_gap(spec: ProtocolSpec, T: int) -> float:
    """``min_k |sin E(k)|``, exact because the extrema sit at high-symmetry momenta."""
    out = math.inf
    for k in high_symmetry_momenta(spec.family):
        _, sin_e, _ = band_structure(spec, T, k.kx, k.ky)
        out = min(out, float(sin_e))
    return out


def _is_gapless(spec, T, k, tol):
    _, sin_e, _ = band_structure(spec, T, k.kx, k.ky)
    return bool(float(sin_e) < tol.gap_eps)


def _is_flat(spec, T, tol):
    P, S = band_coefficients(spec, T)
    if spec.family is Family.SPLIT_2D:
        return bool(abs(P) < tol.flat_eps and abs(S) < tol.flat_eps)
    return bool(abs(P) < tol.flat_eps)


# -- analytic solutions (simple-step families) --------------------------------

def analytic_gap_angles(family, T: int, sector, k, flat: bool = False,
                        tol: Tolerances = Tolerances()) -> list:
    """All ``theta`` in ``[0, 2 pi]`` closing the gap of a simple-step walk at ``k``.

    With ``cos E = cos(T theta / 2) cos(q)`` (``q = k`` or ``kx + ky``) the
    gap closes at ``E = pi`` for ``theta = (+-2 arccos(-sec q) + 4 pi c) / T``
    and at ``E = 0`` for ``theta = (+-2 arccos(sec q) + 4 pi c) / T``.
    A flat-band request (``flat=True``, ``sector=PI``) returns the angles
    ``(4 pi c +- pi) / T`` where the band is dispersionless at ``E = pi/2``.

    Parameters
    ----------
    family : Family
        ``simple1d`` or ``simple2d``.
    T : int
        Step index.
    sector : Sector
    k : Momentum or float or tuple
        For 1D only ``k`` in ``{-pi, 0, pi}`` admits solutions.

    Returns
    -------
    list of GapClosing
        Sorted by angle, each checked against the band structure.
    """
    family = Family(family)
    if family not in (Family.SIMPLE_1D, Family.SIMPLE_2D):
        raise ValueError("analytic gap angles exist only for simple-step families; "
                         "use locate_gap_closings")
    T = check_step(T)
    sector = Sector(sector)
    k = as_momentum(k)
    if k.dim != family.dim:
        raise ValueError("momentum dimension does not match the family")

    if flat:
        if sector is not Sector.PI:
            raise ValueError("flat-band requests use the pi sector")
        base = math.pi
    else:
        if family is Family.SIMPLE_1D:
            if min(abs(k.kx - v) for v in (-math.pi, 0.0, math.pi)) > 1e-12:
                raise ValueError("1D gap closings only occur at k in {-pi, 0, pi}")
            q = k.kx
        else:
            q = k.kx + k.ky
        x = 1.0 / math.cos(q) if abs(math.cos(q)) > 1e-300 else math.inf
        if sector is Sector.PI:
            x = -x
        if abs(x) > 1 + 1e-12:
            return []
        base = 2.0 * math.acos(min(1.0, max(-1.0, x)))

    two_pi = 2 * math.pi
    found = {}
    for c in range(-1, T // 2 + 3):
        for sign in (1, -1):
            theta = (sign * base + 4 * math.pi * c) / T
            if -1e-12 <= theta <= two_pi + 1e-12:
                theta = min(max(theta, 0.0), two_pi)
                if not any(abs(theta - t) < 1e-12 for t in found):
                    found[theta] = c

    out = []
    for theta in sorted(found):
        spec = ProtocolSpec(family, theta=theta)
        ok = _is_flat(spec, T, tol) if flat else _is_gapless(spec, T, k, tol)
        if not ok:
            raise ArithmeticError(f"analytic solution theta={theta!r} failed verification")
        out.append(GapClosing(theta, k, sector, solution_index=found[theta],
                              sectors=() if flat else None, flat=flat))
    return out


# -- numeric location -------------------------------------------------------

def _sample_roots(func, lo, hi, samples, zero_tol=1e-12):
    xs = np.linspace(lo, hi, samples)
    fs = np.asarray(func(xs), dtype=float)
    zero = np.abs(fs) <= zero_tol
    roots = []
    i = 0
    n = len(xs)
    while i < n:
        if zero[i]:
            j = i
            while j + 1 < n and zero[j + 1]:
                j += 1
            # a run of vanishing samples is one root (an interval collapses to its middle)
            roots.append(float(xs[(i + j) // 2]))
            i = j + 1
            continue
        if i + 1 < n and not zero[i + 1] and np.sign(fs[i]) != np.sign(fs[i + 1]):
            roots.append(_bisect(func, xs[i], xs[i + 1], fs[i]))
        i += 1
    return roots


def _bisect(func, a, b, fa):
    a, b = float(a), float(b)
    for _ in range(200):
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            break
        fm = float(func(m))
        if fm == 0.0:
            return m
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def _components_along(spec, T, k):
    def comps(angles):
        return su2_components(unitary_for_angles(spec, T, angles, k.kx, k.ky))
    return comps


def locate_gap_closings(spec: ProtocolSpec, T: int, alpha_range, samples: int = 512,
                        tol: Tolerances = Tolerances(), include_flat: bool = False,
                        merge_eps: float = 1e-8) -> list:
    """Gap closings along the primary angle (``theta`` or ``alpha``).

    The angle is scanned on ``samples`` uniform points; sign changes of the
    signed rotation component at each high-symmetry momentum are bisected
    to full double precision.  Closings closer than ``merge_eps`` are one
    record.  With ``include_flat`` the angles where the band turns
    dispersionless (without closing) are reported as flat entries too.

    Returns
    -------
    list of GapClosing
        Sorted by angle.  Empty for an empty range.
    """
    T = check_step(T)
    if samples < 64:
        raise ValueError("samples must be at least 64")
    lo, hi = sorted(float(v) for v in alpha_range)
    if hi - lo <= 0:
        return []

    candidates = []  # (angle, sector or None, momentum)
    for k in high_symmetry_momenta(spec.family):
        comps = _components_along(spec, T, k)
        for root in _sample_roots(lambda x: comps(x)[1][..., 1], lo, hi, samples):
            a0, a = comps(root)
            s = spec.with_angle(root)
            if not _is_gapless(s, T, k, tol):
                continue
            candidates.append((root, Sector.ZERO if a0 > 0 else Sector.PI, k))

    if include_flat and spec.family is not Family.SPLIT_2D:
        k0, kpi = high_symmetry_momenta(spec.family)[:2]
        c0, cpi = _components_along(spec, T, k0), _components_along(spec, T, kpi)
        for root in _sample_roots(lambda x: c0(x)[0] - cpi(x)[0], lo, hi, samples):
            if _is_flat(spec.with_angle(root), T, tol):
                candidates.append((root, None, k0))

    candidates.sort(key=lambda c: c[0])
    groups = []
    for cand in candidates:
        if groups and cand[0] - groups[-1][-1][0] < merge_eps:
            groups[-1].append(cand)
        else:
            groups.append([cand])

    out = []
    for g in groups:
        sectors = sorted({c[1] for c in g if c[1] is not None}, key=lambda s: s is Sector.PI)
        primary = [c for c in g if c[1] is sectors[0]] if sectors else g
        angle, _, k = primary[0]
        flat = _is_flat(spec.with_angle(angle), T, tol)
        out.append(GapClosing(angle, k, sectors[0] if sectors else Sector.PI,
                              sectors=tuple(sectors), flat=flat or not sectors))
    return out


# -- classification ---------------------------------------------------------

def _analytic_kind(spec, T, tol):
    ang = half_angles(spec, T)
    if len(ang) == 1:
        return BoundaryKind.FLAT_BAND if abs(math.cos(ang[0])) < tol.flat_eps else BoundaryKind.DIRAC_CONE
    a, b = ang
    if abs(math.cos(a) * math.cos(b)) < tol.flat_eps:
        return BoundaryKind.FLAT_BAND
    if abs(math.sin(a) * math.sin(b)) < tol.flat_eps:
        return BoundaryKind.DIRAC_CONE
    return BoundaryKind.FERMI_ARC


def _numeric_kind(spec, T, k, tol, samples=1024, linear_eps=1e-6):
    # 1D cut through k; in 2D along kx + ky with kx - ky held fixed
    t = periodic_grid(samples)
    if spec.family.dim == 1:
        e, sin_e, _ = band_structure(spec, T, k.kx + t)
        a0, _ = su2_components(unitary_for_angles(spec, T, spec.angle, k.kx + t))
    else:
        kx, ky = k.kx + 0.5 * t, k.ky + 0.5 * t
        e, sin_e, _ = band_structure(spec, T, kx, ky)
        a0, _ = su2_components(unitary_for_angles(spec, T, spec.angle, kx, ky))
    if np.ptp(a0) < tol.flat_eps:
        return BoundaryKind.FLAT_BAND
    dt = t[1] - t[0]
    v = (np.roll(e, -1) - np.roll(e, 1)) / (2 * dt)
    smooth = sin_e > 1e-6
    if np.max(np.abs(np.abs(v[smooth]) - 1.0)) < linear_eps:
        return BoundaryKind.DIRAC_CONE
    return BoundaryKind.FERMI_ARC


def classify_boundary(spec: ProtocolSpec, T: int, closing: GapClosing,
                      tol: Tolerances = Tolerances()) -> BoundaryKind:
    """Dirac cone, Fermi arc or flat band at a gap closing.

    The analytic rule reads the coin half-angles ``a, b`` at the closing:
    ``cos a cos b = 0`` gives a flat band, ``sin a sin b = 0`` a Dirac cone
    and anything else a Fermi arc (simple-step walks only have Dirac cones
    or flat bands).  A numeric probe of ``E`` along a momentum cut must
    agree: constant ``cos E`` is flat, ``|dE/dk| = 1`` everywhere is a cone.
    """
    s = spec.with_angle(closing.angle)
    k = closing.momentum
    if closing.flat:
        if not _is_flat(s, T, tol) and not _is_gapless(s, T, k, tol):
            raise ValueError("closing is neither flat nor gapless")
    elif not _is_gapless(s, T, k, tol):
        raise ValueError(f"no gap closing at angle {closing.angle!r}, k={k}")
    analytic = _analytic_kind(s, T, tol)
    numeric = _numeric_kind(s, T, k, tol)
    if analytic is not numeric:
        raise ClassificationConflict(
            f"analytic verdict {analytic.value} but numeric probe says {numeric.value}"
        )
    return analytic


# -- invariants -------------------------------------------------------------

def _check_gapped_at_symmetry_points(spec, T, tol):
    if minimum_gap(spec, T) < tol.gap_eps:
        raise GaplessError("bands touch; move the parameters off the gap closing")


def winding_number(spec: ProtocolSpec, T: int, resolution: int = 2048,
                   tol: Tolerances = Tolerances()) -> InvariantValue:
    """Winding of ``n(k)`` about the chiral axis, ``int (n x dn/dk).A dk / 2 pi``.

    Periodic trapezoid rule with centred differences.  The error scales
    with ``(2 pi / resolution / gap)^2``, so small gaps need fine grids.
    """
    if spec.family.dim != 1:
        raise ValueError("winding number is defined for 1D families")
    if resolution < 256:
        raise ValueError("winding resolution must be at least 256")
    _check_gapped_at_symmetry_points(spec, T, tol)
    k = periodic_grid(resolution)
    _, sin_e, a = band_structure(spec, T, k)
    if np.any(sin_e < tol.gap_eps):
        raise GaplessError("bands touch on the integration grid")
    n = a / sin_e[:, None]
    dk = 2 * np.pi / resolution
    dn = (np.roll(n, -1, axis=0) - np.roll(n, 1, axis=0)) / (2 * dk)
    axis = chiral_data(spec, T).axis
    value = np.sum(np.cross(n, dn) @ axis) * dk / (2 * np.pi)
    return InvariantValue.from_value(value, resolution, tol.invariant_eps)


def winding_closed_form(T: int, theta: float) -> float:
    """``-sin(T theta/2) * sqrt(csc(T theta/2))``, a reference value only.

    It is not an integer in general; use :func:`winding_number` for the
    invariant.
    """
    s = math.sin(0.5 * check_step(T) * theta)
    if s <= 0:
        raise ValueError("closed form needs sin(T theta / 2) > 0")
    return -s * math.sqrt(1.0 / s)


def zak_phase(T: int, alpha: float, beta: float, mode: str = "signed") -> float:
    """Ratio ``tan(T alpha/2) / tan(T beta/2)``, signed or absolute.

    Returns ``math.inf`` as a divergence marker when the expression is
    undefined: a vanishing denominator or a pole of either tangent.
    """
    if mode not in ("signed", "absolute"):
        raise ValueError("mode must be 'signed' or 'absolute'")
    T = check_step(T)
    a, b = 0.5 * T * alpha, 0.5 * T * beta
    if abs(math.cos(a)) < 1e-12 or abs(math.cos(b)) < 1e-12 or abs(math.tan(b)) < 1e-12:
        return math.inf
    c = math.tan(a) / math.tan(b)
    return abs(c) if mode == "absolute" else c


def is_divergent(value) -> bool:
    return math.isinf(value)


def chern_number(spec: ProtocolSpec, T: int, resolution: int = 128,
                 tol: Tolerances = Tolerances()) -> InvariantValue:
    """``int (dn/dkx x dn/dky).n d^2k / 4 pi`` on a periodic grid."""
    if spec.family.dim != 2:
        raise ValueError("Chern number is defined for 2D families")
    if resolution < 64:
        raise ValueError("Chern resolution must be at least 64 per axis")
    _check_gapped_at_symmetry_points(spec, T, tol)
    k = periodic_grid(resolution)
    kx, ky = np.meshgrid(k, k, indexing="ij")
    _, sin_e, a = band_structure(spec, T, kx, ky)
    if np.any(sin_e < tol.gap_eps):
        raise GaplessError("bands touch on the integration grid")
    n = a / sin_e[..., None]
    dk = 2 * np.pi / resolution
    dx = (np.roll(n, -1, axis=0) - np.roll(n, 1, axis=0)) / (2 * dk)
    dy = (np.roll(n, -1, axis=1) - np.roll(n, 1, axis=1)) / (2 * dk)
    value = np.sum(np.cross(dx, dy) * n) * dk * dk / (4 * np.pi)
    return InvariantValue.from_value(value, resolution, tol.invariant_eps)


def path_invariants(spec: ProtocolSpec, T: int, start_alpha: float, end_alpha: float,
                    samples: int = 512, tol: Tolerances = Tolerances()) -> PathInvariants:
    """Count gap closings at ``E = 0`` and ``E = pi`` between two gapped phases."""
    if samples < 128:
        raise ValueError("samples must be at least 128")
    for end in (start_alpha, end_alpha):
        if minimum_gap(spec.with_angle(end), T) < tol.gap_eps:
            raise GaplessError(f"path endpoint {end!r} is gapless")
    closings = [c for c in locate_gap_closings(spec, T, (start_alpha, end_alpha), samples, tol)
                if c.closes_gap]
    return PathInvariants(
        q0=sum(c.energy_sector is Sector.ZERO for c in closings),
        qpi=sum(c.energy_sector is Sector.PI for c in closings),
        q0_all=sum(Sector.ZERO in c.sectors for c in closings),
        qpi_all=sum(Sector.PI in c.sectors for c in closings),
        closings=tuple(closings),
    )


def enumerate_cells(T: int, relation: AngleRelation, alpha_range, samples: int = 1024,
                    tol: Tolerances = Tolerances()) -> CellReport:
    """Ordered boundary states of a split-step walk with linearly related angles.

    A cell is a run of boundaries reading flat band, Fermi arc, Dirac cone,
    Fermi arc, flat band; ``cells`` holds the angle span of each.
    """
    if relation is None:
        raise ValueError("cells are only defined for linearly related angles")
    lo, hi = sorted(float(v) for v in alpha_range)
    spec = ProtocolSpec.split1d(lo, relation=relation)
    closings = locate_gap_closings(spec, T, (lo, hi), samples, tol)
    bounds = [(c.angle, classify_boundary(spec, T, c, tol), c.energy_sector) for c in closings]
    kinds = tuple(b[1] for b in bounds)
    n = len(CELL_PATTERN)
    cells = [(bounds[i][0], bounds[i + n - 1][0])
             for i in range(len(bounds) - n + 1) if kinds[i:i + n] == CELL_PATTERN]
    return CellReport(alpha_range=(lo, hi), ordered_boundaries=bounds, cells=cells)


def position_resolved_invariant(profile: InhomogeneousProfile, T: int, x, resolution: int = 2048,
                                tol: Tolerances = Tolerances()) -> InvariantValue:
    """Winding number of the homogeneous walk with the angles frozen at site ``x``.

    Gapless sites return a value of NaN with ``gapless=True``.
    """
    spec = profile.local_spec(x)
    try:
        return winding_number(spec, T, resolution, tol)
    except GaplessError:
        return InvariantValue(float("nan"), None, resolution, gapless=True)
