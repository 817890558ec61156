import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from neardicke import geometry


def test_linear_chain_parallel_eta_one():
    cfg = geometry.linear_chain(4, 0.3, axis_parallel_to_dipole=True)
    xi, eta = geometry.all_pair_geometries(cfg)
    for n in range(4):
        for m in range(n + 1, 4):
            assert xi[n, m] == pytest.approx(0.3 * (m - n), rel=1e-14)
            assert eta[n, m] == pytest.approx(1.0, abs=1e-14)


def test_linear_chain_perpendicular_eta_zero():
    cfg = geometry.linear_chain(5, 0.2, axis_parallel_to_dipole=False)
    _, eta = geometry.all_pair_geometries(cfg)
    off = ~np.eye(5, dtype=bool)
    assert np.abs(eta[off]).max() < 1e-14


def test_equilateral_triangle_all_pairs_identical():
    cfg = geometry.equilateral_triangle(0.7)
    xi, eta = geometry.all_pair_geometries(cfg)
    off = ~np.eye(3, dtype=bool)
    assert np.allclose(xi[off], 0.7, rtol=1e-13)
    assert np.abs(eta[off]).max() < 1e-14


def test_pair_geometry_symmetric_under_swap():
    cfg = geometry.AtomConfig(
        positions=[[0.0, 0.0, 0.0], [0.3, 0.4, 0.1]],
        dipole_direction=[0.0, 0.0, 1.0],
    )
    a = geometry.pair_geometry(cfg, 0, 1)
    b = geometry.pair_geometry(cfg, 1, 0)
    assert a.xi == pytest.approx(b.xi, rel=1e-15)
    assert a.eta == pytest.approx(b.eta, rel=1e-15)


def test_eta_bounds_and_orientation():
    # dipole along the pair axis -> eta = 1; perpendicular -> 0
    cfg = geometry.AtomConfig(positions=[[0, 0, 0], [0, 0, 0.5]], dipole_direction=[0, 0, 1])
    assert geometry.pair_geometry(cfg, 0, 1).eta == pytest.approx(1.0)
    cfg = geometry.AtomConfig(positions=[[0, 0, 0], [0.5, 0, 0]], dipole_direction=[0, 0, 1])
    assert geometry.pair_geometry(cfg, 0, 1).eta == pytest.approx(0.0, abs=1e-14)


def test_chain_axis_detection():
    cfg = geometry.linear_chain(4, 0.1, axis_parallel_to_dipole=False)
    axis = geometry.chain_axis(cfg)
    assert axis is not None
    assert np.allclose(np.abs(axis), [1.0, 0.0, 0.0])
    tri = geometry.equilateral_triangle(0.1)
    assert geometry.chain_axis(tri) is None


def test_invalid_inputs_rejected():
    with pytest.raises(ValueError):
        geometry.AtomConfig(positions=[[0, 0, 0], [0, 0, 0]], dipole_direction=[0, 0, 1])
    with pytest.raises(ValueError):
        geometry.AtomConfig(positions=[[0, 0, 0]], dipole_direction=[0, 0, 2.0])
    with pytest.raises(ValueError):
        geometry.linear_chain(0, 0.1, True)
    with pytest.raises(ValueError):
        geometry.linear_chain(2, -0.1, True)
    cfg = geometry.linear_chain(2, 0.1, True)
    with pytest.raises(ValueError):
        geometry.pair_geometry(cfg, 0, 0)
    with pytest.raises(ValueError):
        geometry.pair_geometry(cfg, 0, 5)


@settings(max_examples=50, deadline=None)
@given(
    p=st.lists(st.floats(-5, 5, allow_nan=False), min_size=3, max_size=3),
    q=st.lists(st.floats(-5, 5, allow_nan=False), min_size=3, max_size=3),
)
def test_pair_geometry_translation_invariant(p, q):
    p, q = np.array(p), np.array(q)
    if np.linalg.norm(p - q) < 1e-6:
        return
    shift = np.array([1.7, -0.3, 2.2])
    a = geometry.AtomConfig(positions=[p, q], dipole_direction=[0, 1, 0])
    b = geometry.AtomConfig(positions=[p + shift, q + shift], dipole_direction=[0, 1, 0])
    ga, gb = geometry.pair_geometry(a, 0, 1), geometry.pair_geometry(b, 0, 1)
    assert ga.xi == pytest.approx(gb.xi, rel=1e-12)
    assert ga.eta == pytest.approx(gb.eta, abs=1e-12)
