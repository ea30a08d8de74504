"""Momentum-space step operators and band data.

Every protocol step is a product of real ``sigma_y`` rotations (coins) and
diagonal ``sigma_z`` phases (shifts), so ``U(k)`` lies in SU(2)::

    U(k) = cos E(k) * I - i sin E(k) * n(k).sigma

The scalar part ``cos E`` and the vector part ``sin E * n`` are read off
``U(k)`` directly (see :func:`su2_components`); this is the reference route
for energies and Bloch vectors.  Closed forms are kept alongside for
cross-checks and for the group velocity.

Functions whose names do not start with ``build_``/``dispersion``/... accept
``numpy`` arrays of momenta and broadcast.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core import (
    PAULI,
    SIGMA_X,
    SIGMA_Z,
    Family,
    ProtocolSpec,
    Tolerances,
    as_momentum,
    check_step,
    momentum_grid,
    rotation_y,
)

__all__ = [
    "Status",
    "BandPair",
    "BlochVector",
    "VelocityValue",
    "ChiralData",
    "SymmetryReport",
    "half_angles",
    "band_coefficients",
    "step_unitary",
    "unitary_for_angles",
    "build_step_unitary",
    "su2_components",
    "band_structure",
    "gamma_closed_form",
    "energy_closed_form",
    "dispersion",
    "bloch_vector",
    "reference_bloch_vector",
    "velocity_closed_form",
    "group_velocity",
    "chiral_data",
    "fit_chiral_axis",
    "symmetry_report",
]


class Status(str, enum.Enum):
    DEFINED = "defined"
    ILL_DEFINED = "ill-defined"


@dataclass(frozen=True)
class BandPair:
    e_plus: float
    e_minus: float


@dataclass(frozen=True)
class BlochVector:
    status: Status
    nx: float = float("nan")
    ny: float = float("nan")
    nz: float = float("nan")

    @property
    def defined(self) -> bool:
        return self.status is Status.DEFINED

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.nx, self.ny, self.nz])


@dataclass(frozen=True)
class VelocityValue:
    status: Status
    vx: float = float("nan")
    vy: float | None = None

    @property
    def defined(self) -> bool:
        return self.status is Status.DEFINED


@dataclass(frozen=True)
class ChiralData:
    axis: np.ndarray
    gamma_op: np.ndarray


@dataclass(frozen=True)
class SymmetryReport:
    max_chiral_residual: float
    max_ph_residual: float
    max_tr_residual: float
    max_even_E_residual: float
    max_det_deviation: float
    max_trace_residual: float
    max_hamiltonian_residual: float
    chiral_axis: np.ndarray
    points_used: int
    points_skipped: int

    def residuals(self) -> dict:
        return {
            "chiral": self.max_chiral_residual,
            "particle_hole": self.max_ph_residual,
            "time_reversal": self.max_tr_residual,
            "even_energy": self.max_even_E_residual,
            "det_u": self.max_det_deviation,
            "trace_h": self.max_trace_residual,
            "log_u": self.max_hamiltonian_residual,
        }

    def passes(self, tol: float) -> bool:
        return all(v < tol for v in self.residuals().values())


def half_angles(spec: ProtocolSpec, T: int):
    """Coin half-angles at step index ``T``: ``(T*theta/2,)`` or ``(T*alpha/2, T*beta/2)``."""
    T = check_step(T)
    if spec.family.is_split:
        return 0.5 * T * spec.alpha, 0.5 * T * spec.beta
    return (0.5 * T * spec.theta,)


def band_coefficients(spec: ProtocolSpec, T: int):
    """``(P, S)`` with ``cos E = P cos(q) - S [cos(m)]``.

    ``q`` is ``k`` (1D) or ``kx + ky`` (2D); the split 2D term carries
    ``cos(kx - ky)``.  Simple-step protocols have ``S = 0``.
    """
    ang = half_angles(spec, T)
    if len(ang) == 1:
        return np.cos(ang[0]), 0.0
    a, b = ang
    return np.cos(a) * np.cos(b), np.sin(a) * np.sin(b)


def _phase_diag(d0, d1):
    d0, d1 = np.broadcast_arrays(np.asarray(d0, dtype=complex), np.asarray(d1, dtype=complex))
    out = np.zeros(d0.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = d0
    out[..., 1, 1] = d1
    return out


def _shift_both(k):
    # exp(i k sigma_z)
    return _phase_diag(np.exp(1j * k), np.exp(-1j * k))


def _shift_up(k):
    # exp(i k (sigma_z - 1) / 2)
    return _phase_diag(np.ones_like(k), np.exp(-1j * k))


def _shift_down(k):
    # exp(i k (sigma_z + 1) / 2)
    return _phase_diag(np.exp(1j * k), np.ones_like(k))


def _coerce_k(spec, kx, ky):
    if spec.family.dim == 1:
        if ky is not None:
            raise ValueError(f"{spec.family.value} takes a single momentum component")
        return np.asarray(kx, dtype=float), None
    if ky is None:
        raise ValueError(f"{spec.family.value} needs both kx and ky")
    kx, ky = np.broadcast_arrays(np.asarray(kx, dtype=float), np.asarray(ky, dtype=float))
    return kx, ky


def _compose(family, ang, kx, ky):
    if family is Family.SIMPLE_1D:
        return _shift_both(kx) @ rotation_y(ang[0])
    if family is Family.SPLIT_1D:
        a, b = ang
        return _shift_up(kx) @ rotation_y(a) @ _shift_down(kx) @ rotation_y(b)
    if family is Family.SIMPLE_2D:
        return _shift_both(ky) @ _shift_both(kx) @ rotation_y(ang[0])
    a, b = ang
    return _shift_both(ky) @ rotation_y(a) @ _shift_both(kx) @ rotation_y(b)


def step_unitary(spec: ProtocolSpec, T: int, kx, ky=None) -> np.ndarray:
    """Vectorised ``U(k)``; the rightmost factor of each protocol acts first."""
    kx, ky = _coerce_k(spec, kx, ky)
    return _compose(spec.family, half_angles(spec, T), kx, ky)


def unitary_for_angles(spec: ProtocolSpec, T: int, angles, kx, ky=None) -> np.ndarray:
    """``U(k)`` over an array of primary angles (theta or alpha).

    ``beta`` follows ``spec.relation`` when present and is held fixed
    otherwise.  ``angles`` broadcasts against the momenta.
    """
    T = check_step(T)
    kx, ky = _coerce_k(spec, kx, ky)
    angles = np.asarray(angles, dtype=float)
    if spec.family.is_split:
        beta = spec.relation(angles) if spec.relation is not None else np.full_like(angles, spec.beta)
        ang = (0.5 * T * angles, 0.5 * T * beta)
    else:
        ang = (0.5 * T * angles,)
    return _compose(spec.family, ang, kx, ky)


def build_step_unitary(spec: ProtocolSpec, T: int, k) -> np.ndarray:
    """``U(k)`` at a single momentum, as a ``(2, 2)`` array."""
    k = as_momentum(k)
    if (k.dim == 2) != (spec.family.dim == 2):
        raise ValueError(
            f"momentum dimension {k.dim} does not match family {spec.family.value}"
        )
    return step_unitary(spec, T, k.kx, k.ky)


def su2_components(u):
    """Split ``u = a0 I - i a.sigma``; returns ``(a0, a)`` with ``a`` of shape ``(..., 3)``."""
    u = np.asarray(u)
    a0 = 0.5 * np.real(u[..., 0, 0] + u[..., 1, 1])
    ax = np.real(0.5j * (u[..., 0, 1] + u[..., 1, 0]))
    ay = np.real(0.5 * (u[..., 1, 0] - u[..., 0, 1]))
    az = np.real(0.5j * (u[..., 0, 0] - u[..., 1, 1]))
    return a0, np.stack([ax, ay, az], axis=-1)


def band_structure(spec: ProtocolSpec, T: int, kx, ky=None):
    """Positive-branch energy, ``sin E`` and the (unnormalised) vector part of ``U``.

    Returns ``(energy, sin_e, a)`` where ``a = sin E * n``; ``energy`` is in
    ``[0, pi]`` and accurate near the band touchings at 0 and pi.
    """
    a0, a = su2_components(step_unitary(spec, T, kx, ky))
    sin_e = np.linalg.norm(a, axis=-1)
    return np.arctan2(sin_e, a0), sin_e, a


def gamma_closed_form(spec: ProtocolSpec, T: int, kx, ky=None):
    """``cos E(k)`` from the closed-form band expressions."""
    kx, ky = _coerce_k(spec, kx, ky)
    P, S = band_coefficients(spec, T)
    if spec.family is Family.SIMPLE_1D:
        return P * np.cos(kx)
    if spec.family is Family.SPLIT_1D:
        return P * np.cos(kx) - S
    if spec.family is Family.SIMPLE_2D:
        return P * np.cos(kx + ky)
    return P * np.cos(kx + ky) - S * np.cos(kx - ky)


def energy_closed_form(spec: ProtocolSpec, T: int, kx, ky=None):
    g = np.asarray(gamma_closed_form(spec, T, kx, ky), dtype=float)
    if np.any(np.abs(g) > 1 + 1e-12):
        raise ArithmeticError("band argument outside [-1, 1]; step operator is not unitary")
    return np.arccos(np.clip(g, -1.0, 1.0))


def dispersion(spec: ProtocolSpec, T: int, k) -> BandPair:
    k = as_momentum(k)
    e = float(energy_closed_form(spec, T, k.kx, k.ky))
    return BandPair(e_plus=e, e_minus=-e)


def bloch_vector(spec: ProtocolSpec, T: int, k, tol: Tolerances = Tolerances()) -> BlochVector:
    """Unit vector ``n(k)`` of the effective Hamiltonian, from ``U(k)`` itself."""
    u = build_step_unitary(spec, T, k)
    _, a = su2_components(u)
    sin_e = float(np.linalg.norm(a))
    if sin_e < tol.gap_eps:
        return BlochVector(Status.ILL_DEFINED)
    nx, ny, nz = a / sin_e
    return BlochVector(Status.DEFINED, float(nx), float(ny), float(nz))


def reference_bloch_vector(spec: ProtocolSpec, T: int, kx, ky=None):
    """Closed-form ``n(k)`` in its commonly quoted form (reference only).

    Some entries are reproduced as published and do not agree with
    :func:`bloch_vector`: the simple-step ``nx`` (1D and 2D) carries
    ``cos(T theta/2)`` where the protocol gives ``sin(T theta/2)``, and both
    2D ``nz`` entries have a sign/term slip.  Use the difference as a diagnostic, never as data.
    """
    kx, ky = _coerce_k(spec, kx, ky)
    g = gamma_closed_form(spec, T, kx, ky)
    sin_e = np.sqrt(np.clip(1 - g * g, 0, None))
    ang = half_angles(spec, T)
    if spec.family in (Family.SIMPLE_1D, Family.SIMPLE_2D):
        c, s = np.cos(ang[0]), np.sin(ang[0])
        q = kx if ky is None else kx + ky
        if spec.family is Family.SIMPLE_1D:
            comps = (c * np.sin(q), s * np.cos(q), -c * np.sin(q))
        else:
            comps = (c * np.sin(q), s * np.cos(q), c * np.sin(q))
    elif spec.family is Family.SPLIT_1D:
        a, b = ang
        ca, sa, cb, sb = np.cos(a), np.sin(a), np.cos(b), np.sin(b)
        comps = (ca * sb * np.sin(kx), sa * cb + np.cos(kx) * ca * sb, -ca * cb * np.sin(kx))
    else:
        a, b = ang
        ca, sa, cb, sb = np.cos(a), np.sin(a), np.cos(b), np.sin(b)
        p, m = kx + ky, kx - ky
        comps = (
            np.sin(p) * ca * sb - np.sin(m) * sa * cb,
            np.cos(p) * ca * sb + np.cos(m) * sa * cb,
            -(np.sin(p) * ca * cb - np.sin(m) * sa * sb),
        )
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.stack([np.broadcast_to(c, np.shape(g)) / sin_e for c in comps], axis=-1)


def _is_flat(spec, T, tol):
    P, S = band_coefficients(spec, T)
    if spec.family is Family.SPLIT_2D:
        return abs(P) < tol.flat_eps and abs(S) < tol.flat_eps
    return abs(P) < tol.flat_eps


def velocity_closed_form(spec: ProtocolSpec, T: int, kx, ky=None):
    """``dE+/dk`` from the closed forms; ``(vx,)`` or ``(vx, vy)``, NaN where gapless."""
    kx, ky = _coerce_k(spec, kx, ky)
    g = gamma_closed_form(spec, T, kx, ky)
    sin_e = np.sqrt(np.clip((1 - g) * (1 + g), 0, None))
    P, S = band_coefficients(spec, T)
    with np.errstate(divide="ignore", invalid="ignore"):
        if spec.family.dim == 1:
            return (P * np.sin(kx) / sin_e,)
        p, m = kx + ky, kx - ky
        if spec.family is Family.SIMPLE_2D:
            v = P * np.sin(p) / sin_e
            return v, v
        return (P * np.sin(p) - S * np.sin(m)) / sin_e, (P * np.sin(p) + S * np.sin(m)) / sin_e


def group_velocity(spec: ProtocolSpec, T: int, k, tol: Tolerances = Tolerances()) -> VelocityValue:
    """Positive-branch group velocity; zero on flat bands, ill-defined at other touchings."""
    k = as_momentum(k)
    two_d = spec.family.dim == 2
    if _is_flat(spec, T, tol):
        return VelocityValue(Status.DEFINED, 0.0, 0.0 if two_d else None)
    g = float(gamma_closed_form(spec, T, k.kx, k.ky))
    if np.sqrt(max((1 - g) * (1 + g), 0.0)) < tol.gap_eps:
        return VelocityValue(Status.ILL_DEFINED)
    v = velocity_closed_form(spec, T, k.kx, k.ky)
    if two_d:
        return VelocityValue(Status.DEFINED, float(v[0]), float(v[1]))
    return VelocityValue(Status.DEFINED, float(v[0]))


def chiral_data(spec: ProtocolSpec, T: int) -> ChiralData:
    """Chiral axis ``A`` and ``Gamma = A.sigma`` for the 1D families.

    ``A`` lies in the x-z plane at the angle of the coin applied first.
    """
    if spec.family.dim != 1:
        raise ValueError("analytic chiral data is only available for 1D families")
    ang = half_angles(spec, T)
    x = ang[0] if len(ang) == 1 else ang[1]
    axis = np.array([np.cos(x), 0.0, np.sin(x)])
    return ChiralData(axis=axis, gamma_op=np.cos(x) * SIGMA_X + np.sin(x) * SIGMA_Z)


def fit_chiral_axis(spec: ProtocolSpec, T: int, samples: int = 64, tol: Tolerances = Tolerances()):
    """Best-fit axis orthogonal to every sampled ``n(k)``.

    Returns ``(axis, misfit)`` where ``misfit = max |A.n|``; a chiral symmetry
    of the form ``A.sigma`` exists only when the misfit is at roundoff level.
    Raises ``ValueError`` when every sampled momentum is gapless.
    """
    _, _, n = _sampled_bloch(spec, T, samples, tol)
    if len(n) == 0:
        raise ValueError("no gapped momenta to fit a chiral axis")
    _, _, vt = np.linalg.svd(n, full_matrices=False)
    axis = vt[-1]
    axis = axis * np.sign(axis[np.argmax(np.abs(axis))])
    return axis, float(np.max(np.abs(n @ axis)))


def _grid(spec, samples):
    k = momentum_grid(samples)
    if spec.family.dim == 1:
        return k, None
    kx, ky = np.meshgrid(k, k, indexing="ij")
    return kx, ky


def _sampled_bloch(spec, T, samples, tol):
    kx, ky = _grid(spec, samples)
    energy, sin_e, a = band_structure(spec, T, kx, ky)
    keep = sin_e >= tol.gap_eps
    return energy[keep], sin_e[keep], a[keep] / sin_e[keep][:, None]


def _hamiltonian(energy, n):
    return energy[..., None, None] * np.einsum("...i,ijk->...jk", n, np.asarray(PAULI))


def _fro(m):
    return np.sqrt(np.sum(np.abs(m) ** 2, axis=(-2, -1)))


def symmetry_report(
    spec: ProtocolSpec, T: int, grid_size: int = 256, tol: Tolerances = Tolerances()
) -> SymmetryReport:
    """Residuals of the chiral, particle-hole and time-reversal identities.

    ``H(k) = E(k) n(k).sigma`` is sampled on an endpoint-inclusive grid
    (``grid_size`` points per axis); points where ``k`` or ``-k`` is gapless
    are skipped.  Complex conjugation in position space maps ``k`` to ``-k``,
    so particle-hole symmetry reads ``H*(-k) = -H(k)`` and time reversal
    ``Gamma H*(-k) Gamma = H(k)``.  For 1D families ``Gamma`` is the analytic
    chiral operator; for 2D families the best-fit axis is used.
    """
    if grid_size < 2:
        raise ValueError("grid_size must be at least 2")
    kx, ky = _grid(spec, grid_size)
    mkx = -kx
    mky = None if ky is None else -ky
    u = step_unitary(spec, T, kx, ky)
    e, sin_e, a = band_structure(spec, T, kx, ky)
    em, sin_em, am = band_structure(spec, T, mkx, mky)
    keep = (sin_e >= tol.gap_eps) & (sin_em >= tol.gap_eps)

    e, em = e[keep], em[keep]
    n = a[keep] / sin_e[keep][:, None]
    nm = am[keep] / sin_em[keep][:, None]
    h = _hamiltonian(e, n)
    hm = _hamiltonian(em, nm)

    if spec.family.dim == 1:
        axis = chiral_data(spec, T).axis
    else:
        axis, _ = fit_chiral_axis(spec, T, min(grid_size, 64), tol)
    gamma = np.einsum("i,ijk->jk", axis, np.asarray(PAULI))

    chiral = _fro(gamma @ h @ gamma + h)
    ph = _fro(np.conj(hm) + h)
    tr = _fro(gamma @ np.conj(hm) @ gamma - h)
    even = np.abs(e - em)
    det = np.abs(np.linalg.det(u) - 1)

    # independent route: H = i log U through the eigendecomposition
    vals, vecs = np.linalg.eig(u[keep])
    logs = 1j * np.log(vals)
    h_eig = vecs @ (logs[..., None] * np.linalg.inv(vecs))
    trace = np.abs(np.trace(h_eig, axis1=-2, axis2=-1))
    h_err = _fro(h_eig - h)

    def mx(x):
        return float(np.max(x)) if np.size(x) else 0.0

    return SymmetryReport(
        max_chiral_residual=mx(chiral),
        max_ph_residual=mx(ph),
        max_tr_residual=mx(tr),
        max_even_E_residual=mx(even),
        max_det_deviation=mx(det),
        max_trace_residual=mx(trace),
        max_hamiltonian_residual=mx(h_err),
        chiral_axis=axis,
        points_used=int(np.count_nonzero(keep)),
        points_skipped=int(keep.size - np.count_nonzero(keep)),
    )

