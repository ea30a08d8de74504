import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from topowalk.core import (
    IDENTITY,
    PAULI,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    AngleRelation,
    Family,
    InhomogeneousProfile,
    Momentum,
    ProtocolSpec,
    Tolerances,
    as_momentum,
    check_step,
    is_hermitian,
    is_traceless,
    is_unitary,
    mat2_eig,
    momentum_grid,
    normalize_spinor,
    periodic_grid,
    rotation_y,
)


def test_pauli_algebra():
    for s in PAULI:
        assert np.allclose(s @ s, IDENTITY)
        assert is_hermitian(s) and is_traceless(s) and is_unitary(s)
    assert np.allclose(SIGMA_X @ SIGMA_Y, 1j * SIGMA_Z)


def test_pauli_constants_are_read_only():
    with pytest.raises(ValueError):
        SIGMA_X[0, 0] = 5


def test_relation_overrides_beta():
    rel = AngleRelation(1 / 3, math.pi / 3)
    spec = ProtocolSpec.split1d(0.6, beta=99.0, relation=rel)
    assert spec.beta == pytest.approx((0.6 + math.pi) / 3)
    moved = spec.with_angle(-0.3)
    assert moved.alpha == -0.3
    assert moved.beta == pytest.approx((-0.3 + math.pi) / 3)


def test_spec_angle_names():
    assert ProtocolSpec.simple1d(0.2).angle_name == "theta"
    assert ProtocolSpec.split2d(0.2, 0.1).angle == 0.2
    assert Family("split2d").dim == 2 and Family("split2d").is_split


def test_spec_rejects_non_finite():
    with pytest.raises(ValueError):
        ProtocolSpec.simple1d(float("nan"))
    with pytest.raises(ValueError):
        AngleRelation(float("inf"), 0)


def test_momentum_validation():
    assert as_momentum(0.3) == Momentum(0.3)
    assert as_momentum((0.1, 0.2)).dim == 2
    with pytest.raises(ValueError):
        Momentum(4.0)


@pytest.mark.parametrize("bad", [0, -1, 1.5, True])
def test_check_step_rejects(bad):
    with pytest.raises(ValueError):
        check_step(bad)


def test_tolerances_positive():
    with pytest.raises(ValueError):
        Tolerances(gap_eps=0)


def test_rotation_y_matches_matrix_exponential():
    phi = 0.37
    # exp(-i phi sigma_y) via its eigen-decomposition
    w, v = np.linalg.eigh(SIGMA_Y)
    ref = v @ np.diag(np.exp(-1j * phi * w)) @ v.conj().T
    assert np.allclose(rotation_y(phi), ref, atol=1e-15)
    assert rotation_y(np.zeros((3, 4))).shape == (3, 4, 2, 2)


@settings(max_examples=50, deadline=None)
@given(st.floats(-3.1, 3.1), st.floats(-3.1, 3.1))
def test_mat2_eig_orders_by_phase(a, b):
    u = rotation_y(a) @ np.diag([np.exp(1j * b), np.exp(-1j * b)])
    eig = mat2_eig(u)
    ph = np.angle(eig.values)
    assert 0 <= ph[0] + 1e-15 and ph[0] <= math.pi + 1e-15
    for lam, vec in zip(eig.values, eig.vectors):
        assert np.allclose(u @ vec, lam * vec, atol=1e-12)


def test_mat2_eig_degenerate_flag():
    assert mat2_eig(-IDENTITY).degenerate
    assert not mat2_eig(SIGMA_Z).degenerate


def test_grids():
    g = momentum_grid(5)
    assert g[0] == -math.pi and g[-1] == math.pi
    fine = momentum_grid(9)
    assert np.array_equal(fine[::2], g)
    p = periodic_grid(8)
    assert p[0] == -math.pi and 0.0 in p and math.pi not in p


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 300))
def test_refined_grids_nest_exactly(n):
    assert np.array_equal(momentum_grid(2 * n - 1, -1.3, 2.9)[::2], momentum_grid(n, -1.3, 2.9))


def test_normalize_spinor():
    v = normalize_spinor(np.array([1, 1j]) / math.sqrt(2))
    assert v.shape == (2,)
    with pytest.raises(ValueError):
        normalize_spinor([1, 1])
    with pytest.raises(ValueError):
        normalize_spinor([1, 0, 0])


def test_profile():
    prof = InhomogeneousProfile(1.2)
    assert prof.alpha(0) == 0
    assert prof.beta(0) == pytest.approx(math.pi / 3)
    assert abs(prof.alpha(60) - 1.2) < 1e-6
    assert prof.local_spec(60).relation == prof.beta_relation
    with pytest.raises(ValueError):
        InhomogeneousProfile(1.0, width=0)
