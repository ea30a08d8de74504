"""Shared types, 2x2 complex algebra and tolerances.

Matrices are plain ``numpy`` arrays of shape ``(2, 2)`` (or stacks
``(..., 2, 2)``), spinors are arrays of shape ``(2,)``.  Pauli matrices are
exported as read-only constants.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "IDENTITY",
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "PAULI",
    "DEGENERACY_EPS",
    "Family",
    "AngleRelation",
    "ProtocolSpec",
    "InhomogeneousProfile",
    "Momentum",
    "Tolerances",
    "Eigen",
    "as_momentum",
    "check_step",
    "mat2_mul",
    "mat2_eig",
    "is_unitary",
    "is_hermitian",
    "is_traceless",
    "rotation_y",
    "momentum_grid",
    "periodic_grid",
    "normalize_spinor",
]


def _frozen(a):
    a = np.asarray(a, dtype=complex)
    a.setflags(write=False)
    return a


IDENTITY = _frozen([[1, 0], [0, 1]])
SIGMA_X = _frozen([[0, 1], [1, 0]])
SIGMA_Y = _frozen([[0, -1j], [1j, 0]])
SIGMA_Z = _frozen([[1, 0], [0, -1]])
PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)

# eigenvalue pairs closer than this are reported as degenerate (gapless)
DEGENERACY_EPS = 1e-12


class Family(str, enum.Enum):
    SIMPLE_1D = "simple1d"
    SPLIT_1D = "split1d"
    SIMPLE_2D = "simple2d"
    SPLIT_2D = "split2d"

    @property
    def dim(self) -> int:
        return 2 if self in (Family.SIMPLE_2D, Family.SPLIT_2D) else 1

    @property
    def is_split(self) -> bool:
        return self in (Family.SPLIT_1D, Family.SPLIT_2D)


@dataclass(frozen=True)
class AngleRelation:
    """Linear constraint ``beta = s1 * alpha + s2``."""

    s1: float
    s2: float

    def __post_init__(self):
        if not (math.isfinite(self.s1) and math.isfinite(self.s2)):
            raise ValueError("relation coefficients must be finite")

    def __call__(self, alpha):
        return self.s1 * alpha + self.s2


@dataclass(frozen=True)
class ProtocolSpec:
    """Walk protocol and its rotation angles.

    Simple-step families use ``theta``; split-step families use ``alpha`` and
    ``beta``.  With a ``relation`` the stored ``beta`` is always
    ``relation(alpha)``, whatever value was passed in.
    """

    family: Family
    theta: float = 0.0
    alpha: float = 0.0
    beta: float = 0.0
    relation: AngleRelation | None = None

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if self.relation is not None:
            object.__setattr__(self, "beta", float(self.relation(self.alpha)))
        for name in ("theta", "alpha", "beta"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @classmethod
    def simple1d(cls, theta):
        return cls(Family.SIMPLE_1D, theta=theta)

    @classmethod
    def simple2d(cls, theta):
        return cls(Family.SIMPLE_2D, theta=theta)

    @classmethod
    def split1d(cls, alpha, beta=0.0, relation=None):
        return cls(Family.SPLIT_1D, alpha=alpha, beta=beta, relation=relation)

    @classmethod
    def split2d(cls, alpha, beta=0.0, relation=None):
        return cls(Family.SPLIT_2D, alpha=alpha, beta=beta, relation=relation)

    @property
    def angle_name(self) -> str:
        """Name of the scanned angle: ``theta`` or ``alpha``."""
        return "alpha" if self.family.is_split else "theta"

    @property
    def angle(self) -> float:
        return self.alpha if self.family.is_split else self.theta

    def with_angle(self, value: float) -> "ProtocolSpec":
        """Copy with the primary angle replaced (beta follows any relation)."""
        return replace(self, **{self.angle_name: float(value)})


@dataclass(frozen=True)
class InhomogeneousProfile:
    """Split-step angles varying in space: ``alpha(x) = alpha1 * tanh(x / width)``.

    ``beta(x)`` follows ``beta_relation``; the default pins the walk to
    ``beta = (alpha + pi) / 3``.
    """

    alpha1: float
    width: float = 3.0
    beta_relation: AngleRelation = AngleRelation(1.0 / 3.0, math.pi / 3.0)

    def __post_init__(self):
        if not math.isfinite(self.alpha1):
            raise ValueError("alpha1 must be finite")
        if not self.width > 0:
            raise ValueError("profile width must be positive")

    def alpha(self, x):
        return self.alpha1 * np.tanh(np.asarray(x, dtype=float) / self.width)

    def beta(self, x):
        return self.beta_relation(self.alpha(x))

    def local_spec(self, x) -> ProtocolSpec:
        """Homogeneous split-step protocol with the angles frozen at site ``x``."""
        return ProtocolSpec.split1d(float(self.alpha(x)), relation=self.beta_relation)


@dataclass(frozen=True)
class Momentum:
    kx: float
    ky: float | None = None

    def __post_init__(self):
        for v in (self.kx, self.ky):
            if v is None:
                continue
            if not math.isfinite(v) or abs(v) > math.pi + 1e-12:
                raise ValueError(f"momentum component {v!r} outside [-pi, pi]")

    @property
    def dim(self) -> int:
        return 1 if self.ky is None else 2


def as_momentum(k) -> Momentum:
    if isinstance(k, Momentum):
        return k
    if isinstance(k, (tuple, list)):
        if len(k) == 1:
            return Momentum(float(k[0]))
        kx, ky = k
        return Momentum(float(kx), float(ky))
    return Momentum(float(k))


def check_step(T) -> int:
    if isinstance(T, bool) or int(T) != T or T < 1:
        raise ValueError(f"step index must be a positive integer, got {T!r}")
    return int(T)


@dataclass(frozen=True)
class Tolerances:
    gap_eps: float = 1e-9
    flat_eps: float = 1e-9
    unitarity_eps: float = 1e-12
    invariant_eps: float = 1e-3

    def __post_init__(self):
        for name in ("gap_eps", "flat_eps", "unitarity_eps", "invariant_eps"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")


def mat2_mul(a, b):
    return np.matmul(a, b)


def is_unitary(m, tol: float = 1e-12) -> bool:
    m = np.asarray(m)
    return bool(np.max(np.abs(m @ np.conj(np.swapaxes(m, -1, -2)) - IDENTITY)) < tol)


def is_hermitian(m, tol: float = 1e-12) -> bool:
    m = np.asarray(m)
    return bool(np.max(np.abs(m - np.conj(np.swapaxes(m, -1, -2)))) < tol)


def is_traceless(m, tol: float = 1e-12) -> bool:
    return bool(np.max(np.abs(np.trace(m, axis1=-2, axis2=-1))) < tol)


@dataclass(frozen=True)
class Eigen:
    values: np.ndarray  # shape (2,)
    vectors: tuple  # two spinors, vectors[i] pairs with values[i]
    degenerate: bool


def mat2_eig(u) -> Eigen:
    """Eigenpairs of a 2x2 matrix.

    The first eigenvalue is the one whose phase lies in ``[0, pi]``; at a
    degenerate pair the order is irrelevant and ``degenerate`` is set.
    """
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise ValueError("mat2_eig expects a 2x2 matrix")
    vals, vecs = np.linalg.eig(u)
    phases = np.angle(vals)
    # -1 may come out with phase -pi; fold it onto +pi
    phases = np.where(np.isclose(phases, -np.pi, atol=1e-15, rtol=0), np.pi, phases)
    order = [0, 1] if phases[0] >= phases[1] else [1, 0]
    vals = vals[order]
    vecs = vecs[:, order]
    degenerate = bool(abs(vals[0] - vals[1]) < DEGENERACY_EPS)
    return Eigen(values=vals, vectors=(vecs[:, 0], vecs[:, 1]), degenerate=degenerate)


def rotation_y(phi):
    """``exp(-i phi sigma_y)`` for scalar or array ``phi``; shape ``(..., 2, 2)``."""
    phi = np.asarray(phi, dtype=float)
    c, s = np.cos(phi), np.sin(phi)
    out = np.empty(phi.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = c
    out[..., 0, 1] = -s
    out[..., 1, 0] = s
    out[..., 1, 1] = c
    return out


def momentum_grid(samples: int, lo: float = -np.pi, hi: float = np.pi) -> np.ndarray:
    """Endpoint-inclusive uniform grid, as used for sweeps and plots."""
    if samples < 2:
        raise ValueError("grid needs at least two samples")
    # j / (n - 1) is the same double for refined grids, so nested points agree bitwise
    g = lo + (hi - lo) * (np.arange(samples) / (samples - 1))
    g[-1] = hi
    return g


def periodic_grid(samples: int) -> np.ndarray:
    """``samples`` points on ``[-pi, pi)``; the right endpoint is the left one."""
    if samples < 2:
        raise ValueError("grid needs at least two samples")
    return -np.pi + 2 * np.pi * np.arange(samples) / samples


def normalize_spinor(spinor, tol: float = 1e-12) -> np.ndarray:
    """Validate a normalized 2-component spinor and return it as an array."""
    v = np.asarray(spinor, dtype=complex).reshape(-1)
    if v.shape != (2,):
        raise ValueError("spinor must have two components")
    if not np.all(np.isfinite(v)):
        raise ValueError("spinor components must be finite")
    if abs(np.vdot(v, v).real - 1.0) > tol:
        raise ValueError("spinor is not normalized")
    return v

