"""Independent reference implementations used as test oracles.

Everything here is built from Pauli exponentials written out from scratch,
without touching the package's own matrix helpers.
"""

import numpy as np

S0 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def expm_herm(h, t):
    """exp(-i t h) for a Hermitian 2x2 ``h``."""
    w, v = np.linalg.eigh(h)
    return v @ np.diag(np.exp(-1j * t * w)) @ v.conj().T


def coin(phi):
    return expm_herm(SY, phi)


def shift(k):
    return expm_herm(SZ, -k)


def shift_up(k):
    return expm_herm((S0 - SZ) / 2, k)


def shift_down(k):
    return expm_herm((S0 + SZ) / 2, -k)


def direct_unitary(family, T, angles, k):
    """Step operator multiplied out factor by factor."""
    if family == "simple1d":
        (th,) = angles
        return shift(k) @ coin(T * th / 2)
    if family == "split1d":
        a, b = angles
        return shift_up(k) @ coin(T * a / 2) @ shift_down(k) @ coin(T * b / 2)
    kx, ky = k
    if family == "simple2d":
        (th,) = angles
        return shift(ky) @ shift(kx) @ coin(T * th / 2)
    a, b = angles
    return shift(ky) @ coin(T * a / 2) @ shift(kx) @ coin(T * b / 2)


def eigenphase_energy(u):
    """Positive quasi-energy from the eigenvalues ``exp(-/+ i E)``."""
    ph = np.angle(np.linalg.eigvals(u))
    return float(np.mean(np.abs(ph)))


def numeric_derivative(f, x, h=1e-5):
    return (f(x + h) - f(x - h)) / (2 * h)
