import math
import warnings

import numpy as np
import pytest

from topowalk.core import AngleRelation, Family, InhomogeneousProfile, ProtocolSpec
from topowalk.kspace import dispersion
from topowalk.realspace import (
    LatticeGeometry,
    WalkState,
    apply_inhomogeneous_step,
    apply_step,
    evolve,
    interface_localization,
    new_state,
    plane_wave_eigencheck,
    position_distribution,
)
from topowalk.topology import position_resolved_invariant

PI = math.pi
UP = (1, 0)


def ring(n=64):
    return LatticeGeometry.ring(n)


def quiet_evolve(*args, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return evolve(*args, **kw)


def test_new_state():
    s = new_state(ring(), 0, UP)
    p = position_distribution(s)
    assert s.norm == 1.0 and s.step == 0
    assert np.count_nonzero(p) == 1 and p[0] == 1.0
    assert new_state(ring(), 3, np.array([1, 1]) / math.sqrt(2)).norm == pytest.approx(1)
    with pytest.raises(ValueError):
        new_state(ring(), 0, (1, 1))
    with pytest.raises(ValueError):
        new_state(ring(), 32, UP)
    with pytest.raises(ValueError):
        LatticeGeometry.ring(3)


def test_geometry_indexing():
    g = ring(8)
    assert g.index(-1) == (7,) and g.index(3) == (3,)
    assert list(g.coords()[[0, 7]]) == [0, -1]
    t = LatticeGeometry.torus(6, 8)
    assert t.dim == 2 and t.shape == (6, 8, 2)


def test_balanced_first_step():
    g = ring()
    s = apply_step(new_state(g, 0, UP), ProtocolSpec.simple1d(PI / 2))
    assert s.step == 1
    assert s.amplitudes[g.index(1)][0] == pytest.approx(math.cos(PI / 4), abs=1e-15)
    assert s.amplitudes[g.index(-1)][1] == pytest.approx(math.sin(PI / 4), abs=1e-15)
    p = position_distribution(s)
    assert p[g.index(1)] == pytest.approx(0.5) and p[g.index(-1)] == pytest.approx(0.5)
    assert abs(s.norm - 1) < 1e-13


def test_identity_coin_drifts():
    tr = evolve(new_state(ring(), 0, UP), ProtocolSpec.simple1d(0.0), 10)
    assert list(tr.records["mean_x"]) == list(range(11))
    assert len(tr) == 11 and tr.final.step == 10


def test_family_mismatch():
    with pytest.raises(ValueError):
        apply_step(new_state(ring(), 0, UP), ProtocolSpec.simple2d(0.3))
    with pytest.raises(ValueError):
        evolve(new_state(ring(), 0, UP), ProtocolSpec.simple1d(0.3), 0)
    with pytest.raises(TypeError):
        evolve(new_state(ring(), 0, UP), "simple1d", 1)


@pytest.mark.parametrize("family", list(Family))
def test_norm_after_100_steps(family, rng):
    a, b = rng.uniform(-PI, PI, 2)
    spec = ProtocolSpec(family, theta=a, alpha=a, beta=b)
    geo = LatticeGeometry((256,) * family.dim)
    s = new_state(geo, (0,) * family.dim, np.array([1, 1j]) / math.sqrt(2))
    tr = evolve(s, spec, 100)
    assert np.max(np.abs(tr.records["norm"] - 1)) < 1e-12


def test_inhomogeneous_norm_after_100_steps():
    s = new_state(ring(256), 0, np.array([1, 1j]) / math.sqrt(2))
    tr = evolve(s, InhomogeneousProfile(1.2), 100)
    assert np.max(np.abs(tr.records["norm"] - 1)) < 1e-12


def test_inhomogeneous_reduces_to_homogeneous():
    a = b = new_state(ring(128), 0, np.array([1, 1j]) / math.sqrt(2))
    prof = InhomogeneousProfile(0.0)
    spec = ProtocolSpec.split1d(0.0, PI / 3)
    for _ in range(50):
        a = apply_inhomogeneous_step(a, prof)
        b = apply_step(b, spec)
    assert np.max(np.abs(a.amplitudes - b.amplitudes)) < 1e-14


def test_inhomogeneous_saturates_far_from_interface():
    # deep inside each bulk, one step matches the homogeneous walk at alpha = +-alpha1
    geo = ring(256)
    prof = InhomogeneousProfile(0.9)
    rel = AngleRelation(1 / 3, PI / 3)
    for x0, sign in [(100, 1), (-100, -1)]:
        s = new_state(geo, x0, UP)
        inh = apply_inhomogeneous_step(s, prof)
        hom = apply_step(s, ProtocolSpec.split1d(sign * 0.9, relation=rel))
        assert np.max(np.abs(inh.amplitudes - hom.amplitudes)) < 1e-6


def test_inhomogeneous_rejects_other_families():
    with pytest.raises(ValueError):
        apply_inhomogeneous_step(new_state(ring(), 0, UP), InhomogeneousProfile(1), Family.SIMPLE_1D)
    with pytest.raises(ValueError):
        apply_inhomogeneous_step(new_state(LatticeGeometry.torus(8, 8), (0, 0), UP), InhomogeneousProfile(1))


@pytest.mark.parametrize("family", list(Family))
def test_translation_covariance(family, rng):
    a, b = rng.uniform(-PI, PI, 2)
    spec = ProtocolSpec(family, theta=a, alpha=a, beta=b)
    geo = LatticeGeometry((32,) * family.dim)
    spinor = np.array([0.6, 0.8j])
    d = (3,) * family.dim
    s0 = quiet_evolve(new_state(geo, (0,) * family.dim, spinor), spec, 20).final
    s1 = quiet_evolve(new_state(geo, d, spinor), spec, 20).final
    shifted = np.roll(position_distribution(s0), d, axis=tuple(range(family.dim)))
    assert np.array_equal(shifted, position_distribution(s1))


def test_plane_wave_example():
    assert plane_wave_eigencheck(ProtocolSpec.simple1d(0.7), 3, 2 * PI * 5 / 64, 64) < 1e-10


def test_plane_wave_random(rng):
    worst = 0.0
    for _ in range(100):
        family = list(Family)[rng.integers(4)]
        a, b = rng.uniform(-PI, PI, 2)
        spec = ProtocolSpec(family, theta=a, alpha=a, beta=b)
        T = int(rng.integers(1, 9))
        n = 32
        k = tuple(2 * PI * rng.integers(-n // 2 + 1, n // 2, size=family.dim) / n)
        worst = max(worst, plane_wave_eigencheck(spec, T, k[0] if family.dim == 1 else k, n))
    assert worst < 1e-10


def test_plane_wave_identity_coin():
    k = 2 * PI * 3 / 16
    spec = ProtocolSpec.simple1d(0.0)
    assert plane_wave_eigencheck(spec, 1, k, 16) < 1e-12
    assert dispersion(spec, 1, k).e_plus == pytest.approx(k)


def test_plane_wave_flat_band_phase():
    spec = ProtocolSpec.simple1d(PI / 4)
    for n in (-5, 0, 7):
        k = 2 * PI * n / 32
        assert dispersion(spec, 4, k).e_plus == pytest.approx(PI / 2)
        assert plane_wave_eigencheck(spec, 4, k, 32) < 1e-12


def test_plane_wave_rejects_incommensurate():
    with pytest.raises(ValueError):
        plane_wave_eigencheck(ProtocolSpec.simple1d(0.7), 3, 0.1, 64)


def test_flat_band_spread_stays_bounded():
    T = 4
    spinor = np.array([1, 1]) / math.sqrt(2)
    flat = quiet_evolve(new_state(ring(256), 0, spinor), ProtocolSpec.simple1d(PI / T), 100, frozen_step=T)
    drift = quiet_evolve(new_state(ring(256), 0, spinor), ProtocolSpec.simple1d(0.0), 100, frozen_step=T)
    assert flat.records["variance"].max() < 2
    assert drift.records["variance"][-1] > 1000


def test_evolve_wrap_warning():
    with pytest.warns(RuntimeWarning):
        evolve(new_state(ring(16), 0, UP), ProtocolSpec.simple1d(0.3), 10)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        evolve(new_state(ring(64), 0, UP), ProtocolSpec.simple1d(0.3), 10)


def test_window_observable_needs_window():
    with pytest.raises(ValueError):
        evolve(new_state(ring(), 0, UP), ProtocolSpec.simple1d(0.3), 2, ("window",))
    with pytest.raises(ValueError):
        evolve(new_state(ring(), 0, UP), ProtocolSpec.simple1d(0.3), 2, ("speed",))


def test_trajectory_csv(tmp_path):
    tr = evolve(new_state(ring(), 0, UP), ProtocolSpec.simple1d(0.0), 3, ("mean_x",))
    tr.label = {"family": "simple1d"}
    path = tmp_path / "t.csv"
    tr.to_csv(path)
    text = path.read_text().splitlines()
    assert text[0].startswith("# topowalk v1") and "quantity=mean_x" in text[0]
    assert text[1] == "axis1,axis2,value,gapless"
    assert [float(r.split(",")[2]) for r in text[2:6]] == [0, 1, 2, 3]


def test_interface_localization_ordering():
    T, window, extent = 2, 4, 256
    base = interface_localization(InhomogeneousProfile(0.0), T, window, extent, steps=100)
    shared = interface_localization(InhomogeneousProfile(0.3), T, window, extent, steps=100)
    crossing = interface_localization(InhomogeneousProfile(1.2), T, window, extent, steps=100)

    def bulks(a1):
        p = InhomogeneousProfile(a1)
        return (position_resolved_invariant(p, T, -60).quantized,
                position_resolved_invariant(p, T, 60).quantized)

    left, right = bulks(0.3)
    assert left == right
    left, right = bulks(1.2)
    assert left != right
    assert crossing > base + 0.3
    assert abs(shared - base) < 0.1


def test_interface_localization_validation():
    with pytest.raises(ValueError):
        interface_localization(InhomogeneousProfile(0.5), 2, 40, 64)
    assert isinstance(WalkState(ring(8), np.zeros((8, 2))).norm, float)
