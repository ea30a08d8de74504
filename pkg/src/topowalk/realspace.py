"""Position-space evolution on a periodic ring or torus.

Amplitudes are stored as ``(N, 2)`` (1D) or ``(Nx, Ny, 2)`` (2D) complex
arrays, spin up first.  Sites carry centred coordinates; the array index
of coordinate ``x`` is ``x mod N``.

A step with index ``m`` uses the coin angle ``m * theta / 2`` (or
``m * alpha / 2`` and ``m * beta / 2``), so a walk started at step 0 sees
its coin change every step.  Passing ``frozen_step=T`` keeps the coin of
step ``T`` instead, which is the walk whose single-step operator is the
momentum-space ``U(k)`` at that ``T``.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _csvio
from .core import (
    Family,
    InhomogeneousProfile,
    ProtocolSpec,
    as_momentum,
    check_step,
    mat2_eig,
    normalize_spinor,
    rotation_y,
)
from .kspace import build_step_unitary, dispersion

__all__ = [
    "Boundary",
    "LatticeGeometry",
    "WalkState",
    "InhomogeneousProfile",
    "Trajectory",
    "OBSERVABLES",
    "new_state",
    "apply_step",
    "apply_inhomogeneous_step",
    "evolve",
    "position_distribution",
    "interface_localization",
    "plane_wave_eigencheck",
]

OBSERVABLES = ("norm", "mean_x", "variance", "window")


class Boundary(str, enum.Enum):
    PERIODIC = "periodic"


@dataclass(frozen=True)
class LatticeGeometry:
    extent: tuple
    boundary: Boundary = Boundary.PERIODIC

    def __post_init__(self):
        ext = (self.extent,) if np.isscalar(self.extent) else tuple(self.extent)
        if len(ext) not in (1, 2):
            raise ValueError("lattice must be one- or two-dimensional")
        if any(int(n) != n or n < 4 for n in ext):
            raise ValueError("every extent must be an integer >= 4")
        object.__setattr__(self, "extent", tuple(int(n) for n in ext))
        object.__setattr__(self, "boundary", Boundary(self.boundary))

    @classmethod
    def ring(cls, n):
        return cls((n,))

    @classmethod
    def torus(cls, nx, ny):
        return cls((nx, ny))

    @property
    def dim(self) -> int:
        return len(self.extent)

    @property
    def shape(self) -> tuple:
        return self.extent + (2,)

    def coords(self, axis: int = 0) -> np.ndarray:
        """Centred coordinate of each array index along ``axis``."""
        n = self.extent[axis]
        i = np.arange(n)
        return np.where(i >= (n + 1) // 2, i - n, i)

    def index(self, position) -> tuple:
        pos = (position,) if np.isscalar(position) else tuple(position)
        if len(pos) != self.dim:
            raise ValueError("position dimension does not match the lattice")
        out = []
        for x, n in zip(pos, self.extent):
            if int(x) != x or not -(n // 2) <= x <= (n - 1) // 2:
                raise ValueError(f"position {x!r} outside the lattice of extent {n}")
            out.append(int(x) % n)
        return tuple(out)


@dataclass
class WalkState:
    geometry: LatticeGeometry
    amplitudes: np.ndarray
    step: int = 0

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != self.geometry.shape:
            raise ValueError(f"amplitudes must have shape {self.geometry.shape}")
        if self.step < 0:
            raise ValueError("step counter must be non-negative")

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def copy(self) -> "WalkState":
        return WalkState(self.geometry, self.amplitudes.copy(), self.step)


@dataclass
class Trajectory:
    """Observables recorded after every step, the initial state included."""

    records: dict
    final: WalkState
    steps: int
    label: dict = field(default_factory=dict)

    def __len__(self):
        return self.steps + 1

    def to_csv(self, path) -> None:
        """One block per observable; ``axis1`` is the step counter."""
        _csvio.write_lines(path, self.csv_lines())

    def csv_lines(self) -> list:
        lines = []
        step0 = self.final.step - self.steps
        for name, values in self.records.items():
            head = _csvio.header(**self.label, quantity=name)
            steps = np.arange(step0, step0 + len(values))
            lines += _csvio.block_lines(head, steps, np.zeros(len(values)), values,
                                        np.zeros(len(values), dtype=bool))
        return lines


def new_state(geometry: LatticeGeometry, position, spinor) -> WalkState:
    """Walker localised at ``position`` with internal state ``spinor``."""
    spinor = normalize_spinor(spinor)
    amps = np.zeros(geometry.shape, dtype=complex)
    amps[geometry.index(position)] = spinor
    return WalkState(geometry, amps, 0)


# -- step kernels -----------------------------------------------------------

def _coin(psi, c):
    # c has shape (2, 2) or (..sites.., 2, 2)
    return np.einsum("...ij,...j->...i", c, psi)


def _move_both(psi, axis):
    out = np.empty_like(psi)
    out[..., 0] = np.roll(psi[..., 0], 1, axis=axis)
    out[..., 1] = np.roll(psi[..., 1], -1, axis=axis)
    return out


def _move_up(psi, axis):
    out = psi.copy()
    out[..., 0] = np.roll(psi[..., 0], 1, axis=axis)
    return out


def _move_down(psi, axis):
    out = psi.copy()
    out[..., 1] = np.roll(psi[..., 1], -1, axis=axis)
    return out


def _step_kernel(family, psi, ang):
    # ang entries are coin half-angles, scalars or per-site arrays
    if family is Family.SIMPLE_1D:
        return _move_both(_coin(psi, rotation_y(ang[0])), 0)
    if family is Family.SPLIT_1D:
        psi = _move_up(_coin(psi, rotation_y(ang[1])), 0)
        return _move_down(_coin(psi, rotation_y(ang[0])), 0)
    if family is Family.SIMPLE_2D:
        psi = _move_both(_coin(psi, rotation_y(ang[0])), 0)
        return _move_both(psi, 1)
    psi = _move_both(_coin(psi, rotation_y(ang[1])), 0)
    return _move_both(_coin(psi, rotation_y(ang[0])), 1)


def _check_norm(state, before):
    dev = abs(state.norm - before)
    if dev > 1e-10:
        raise ArithmeticError(f"norm drifted by {dev:.3e} in one step")


def apply_step(state: WalkState, spec: ProtocolSpec, frozen_step: int | None = None) -> WalkState:
    """One step of a homogeneous walk; returns a new state.

    The coin uses step index ``m = state.step + 1`` unless ``frozen_step``
    is given.
    """
    if state.geometry.dim != spec.family.dim:
        raise ValueError(f"{spec.family.value} walk on a {state.geometry.dim}D lattice")
    m = check_step(state.step + 1 if frozen_step is None else frozen_step)
    if spec.family.is_split:
        ang = (0.5 * m * spec.alpha, 0.5 * m * spec.beta)
    else:
        ang = (0.5 * m * spec.theta,)
    out = WalkState(state.geometry, _step_kernel(spec.family, state.amplitudes, ang), state.step + 1)
    _check_norm(out, state.norm)
    return out


def apply_inhomogeneous_step(state: WalkState, profile: InhomogeneousProfile,
                             family=Family.SPLIT_1D, frozen_step: int | None = None) -> WalkState:
    """Split-step walk with site-dependent angles ``alpha(x)``, ``beta(x)``."""
    if Family(family) is not Family.SPLIT_1D:
        raise ValueError("inhomogeneous walks are implemented for split1d only")
    if state.geometry.dim != 1:
        raise ValueError("inhomogeneous walk needs a 1D lattice")
    m = check_step(state.step + 1 if frozen_step is None else frozen_step)
    x = state.geometry.coords()
    ang = (0.5 * m * profile.alpha(x), 0.5 * m * profile.beta(x))
    out = WalkState(state.geometry, _step_kernel(Family.SPLIT_1D, state.amplitudes, ang), state.step + 1)
    _check_norm(out, state.norm)
    return out


# -- observables ------------------------------------------------------------

def position_distribution(state: WalkState) -> np.ndarray:
    """Probability per site, indexed like the amplitude array."""
    return np.sum(np.abs(state.amplitudes) ** 2, axis=-1)


def _observe(state, name, window):
    p = position_distribution(state)
    x = state.geometry.coords(0)
    if state.geometry.dim == 2:
        px = p.sum(axis=1)
    else:
        px = p
    if name == "norm":
        return float(p.sum())
    if name == "mean_x":
        return float(px @ x)
    if name == "variance":
        mean = px @ x
        return float(px @ (x - mean) ** 2)
    if name == "window":
        if window is None:
            raise ValueError("the window observable needs a window size")
        inside = np.abs(x) <= window
        if state.geometry.dim == 2:
            y = state.geometry.coords(1)
            return float(p[np.ix_(inside, np.abs(y) <= window)].sum())
        return float(px[inside].sum())
    raise ValueError(f"unknown observable {name!r}")


def evolve(state: WalkState, stepper, steps: int, observables=("norm", "mean_x", "variance"),
           window: int | None = None, frozen_step: int | None = None) -> Trajectory:
    """Apply ``steps`` steps and record observables after each.

    Parameters
    ----------
    stepper : ProtocolSpec or InhomogeneousProfile
    observables : sequence of str
        Any of ``norm``, ``mean_x``, ``variance``, ``window``.
    window : int, optional
        Half-width for the ``window`` observable (``|x| <= window``).
    frozen_step : int, optional
        Use this step index for every coin instead of the running counter.
    """
    if int(steps) != steps or steps < 1:
        raise ValueError("steps must be a positive integer")
    for name in observables:
        if name not in OBSERVABLES:
            raise ValueError(f"unknown observable {name!r}")
    reach = state.step + steps if frozen_step is None else steps
    if min(state.geometry.extent) <= 2 * reach + 2:
        warnings.warn(
            f"lattice extent {min(state.geometry.extent)} allows wrap-around within {reach} steps",
            RuntimeWarning,
            stacklevel=2,
        )
    if isinstance(stepper, InhomogeneousProfile):
        def advance(s):
            return apply_inhomogeneous_step(s, stepper, frozen_step=frozen_step)
    elif isinstance(stepper, ProtocolSpec):
        def advance(s):
            return apply_step(s, stepper, frozen_step=frozen_step)
    else:
        raise TypeError("stepper must be a ProtocolSpec or an InhomogeneousProfile")

    records = {name: [_observe(state, name, window)] for name in observables}
    for _ in range(int(steps)):
        state = advance(state)
        for name in observables:
            records[name].append(_observe(state, name, window))
    return Trajectory({k: np.array(v) for k, v in records.items()}, state, int(steps))


def interface_localization(profile: InhomogeneousProfile, T: int, window: int, extent: int,
                           steps: int | None = None, spinor=(1 / math.sqrt(2), 1j / math.sqrt(2)),
                           frozen: bool = True) -> float:
    """Time-averaged probability of staying within ``|x| <= window`` of the interface.

    A walker starts at ``x = 0``.  By default the coin of step ``T`` is
    applied ``steps`` times (``steps`` defaults to ``T``); with
    ``frozen=False`` the coin follows the running step counter instead.
    Compare against a run with ``alpha1 = 0`` for a baseline.
    """
    T = check_step(T)
    if not window < extent / 2:
        raise ValueError("window must be smaller than half the extent")
    steps = T if steps is None else steps
    state = new_state(LatticeGeometry.ring(extent), 0, spinor)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        traj = evolve(state, profile, steps, ("window",), window=window,
                      frozen_step=T if frozen else None)
    return float(np.mean(traj.records["window"]))


def plane_wave_eigencheck(spec: ProtocolSpec, T: int, k, extent: int) -> float:
    """Deviation of one real-space step on a plane-wave eigenstate from ``exp(-i E)``.

    The plane wave ``exp(-i k.x) chi`` with ``chi`` an eigenvector of
    ``U(k)`` is stepped once with coin index ``T``.  Returns the larger of
    the residual orthogonal to the initial state and the mismatch of the
    acquired phase against the closed-form energy.
    """
    T = check_step(T)
    k = as_momentum(k)
    geo = LatticeGeometry((extent,) * spec.family.dim)
    comps = (k.kx,) if k.ky is None else (k.kx, k.ky)
    if len(comps) != spec.family.dim:
        raise ValueError("momentum dimension does not match the family")
    for kc in comps:
        n = kc * extent / (2 * np.pi)
        if abs(n - round(n)) > 1e-9:
            raise ValueError(f"momentum {kc!r} is not commensurate with extent {extent}")

    eig = mat2_eig(build_step_unitary(spec, T, k))
    chi = eig.vectors[0] / np.linalg.norm(eig.vectors[0])
    phase = np.ones(geo.extent, dtype=complex)
    for axis, kc in enumerate(comps):
        x = geo.coords(axis)
        shape = [1] * geo.dim
        shape[axis] = -1
        phase = phase * np.exp(-1j * kc * x).reshape(shape)
    psi = phase[..., None] * chi / math.sqrt(phase.size)
    state = WalkState(geo, psi, T - 1)
    out = apply_step(state, spec).amplitudes

    # the first eigenvector carries the lower band, exp(-i E-) = exp(+i E+)
    expected = np.exp(1j * dispersion(spec, T, k).e_plus)
    acquired = np.vdot(psi, out)
    residual = np.linalg.norm(out - acquired * psi)
    return float(max(abs(acquired - expected), residual))
