import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracwave.assembly import apply_operator, assemble_mass, assemble_stiffness, rows_csv
from fracwave.errors import ShapeMismatch
from fracwave.model import PhysicalParams, SpatialGrid


def dense_from_blocks(p: PhysicalParams, g: SpatialGrid):
    """Block matrices assembled entry by entry: rho/k blocks, D^2, interface row."""
    J = g.J
    I = np.eye(J)
    O = np.zeros((J, J))
    z = np.zeros((J, 1))
    M = np.block([
        [p.rho1 * I, z, O],
        [z.T, np.array([[(p.rho1 + p.rho2) / 2]]), z.T],
        [O, z, p.rho2 * I],
    ])
    D2 = -2 * np.eye(J) + np.eye(J, k=1) + np.eye(J, k=-1)
    left_col = np.zeros((J, 1))
    left_col[-1] = -p.k1
    right_col = np.zeros((J, 1))
    right_col[0] = -p.k2
    K = np.block([
        [-p.k1 * D2, left_col, O],
        [left_col.T, np.array([[p.k1 + p.k2]]), right_col.T],
        [O, right_col, -p.k2 * D2],
    ]) / g.dx**2
    return M, K


def test_mass_unit_densities():
    m = assemble_mass(PhysicalParams(rho1=1, rho2=1), SpatialGrid(3, 1.0))
    np.testing.assert_array_equal(m.diag, np.ones(7))


def test_mass_two_materials():
    m = assemble_mass(PhysicalParams(rho1=2, rho2=4), SpatialGrid(2, 1.0))
    np.testing.assert_array_equal(m.diag, [2, 2, 3, 4, 4])
    assert len(m) == 5


def test_stiffness_homogeneous():
    K = assemble_stiffness(PhysicalParams(k1=1, k2=1, L=2.0), SpatialGrid(2, 2.0))
    np.testing.assert_array_equal(K.main, [2, 2, 2, 2, 2])
    np.testing.assert_array_equal(K.off, [-1, -1, -1, -1])


def test_stiffness_interface_row():
    K = assemble_stiffness(PhysicalParams(k1=10, k2=2, L=1.0), SpatialGrid(2, 1.0))
    row0 = K.dense()[2]
    np.testing.assert_array_equal(row0, [0, -40, 48, -8, 0])
    np.testing.assert_array_equal(K.off, [-40, -40, -8, -8])


@pytest.mark.parametrize("J", [2, 3, 5, 10])
def test_matches_block_form(J):
    p = PhysicalParams(rho1=1.3, rho2=0.7, k1=10.0, k2=2.0, L=1.0)
    g = SpatialGrid(J, 1.0)
    M_ref, K_ref = dense_from_blocks(p, g)
    assert np.array_equal(assemble_mass(p, g).dense(), M_ref)
    assert np.array_equal(assemble_stiffness(p, g).dense(), K_ref)


@settings(max_examples=40, deadline=None)
@given(k1=st.floats(0.01, 100), k2=st.floats(0.01, 100), J=st.integers(2, 30))
def test_stiffness_is_spd(k1, k2, J):
    K = assemble_stiffness(PhysicalParams(k1=k1, k2=k2), SpatialGrid(J, 1.0)).dense()
    np.linalg.cholesky(K)
    assert np.array_equal(K, K.T)


def test_apply_zero_and_constants():
    K = assemble_stiffness(PhysicalParams(k1=1, k2=1, L=2.0), SpatialGrid(2, 2.0))
    np.testing.assert_array_equal(apply_operator(K, np.zeros(5)), np.zeros(5))
    np.testing.assert_array_equal(apply_operator(K, np.ones(5)), [1, 0, 0, 0, 1])


def test_apply_interface_column():
    K = assemble_stiffness(PhysicalParams(k1=10, k2=2), SpatialGrid(2, 1.0))
    e0 = np.zeros(5)
    e0[2] = 1.0
    np.testing.assert_array_equal(apply_operator(K, e0), [0, -40, 48, -8, 0])


def test_apply_shape_mismatch():
    K = assemble_stiffness(PhysicalParams(), SpatialGrid(2, 1.0))
    with pytest.raises(ShapeMismatch):
        apply_operator(K, np.ones(4))


def test_apply_matches_dense_and_is_symmetric():
    rng = np.random.default_rng(0)
    K = assemble_stiffness(PhysicalParams(k1=3.0, k2=0.5), SpatialGrid(40, 1.0))
    x, y = rng.standard_normal((2, 81))
    np.testing.assert_allclose(apply_operator(K, x), K.dense() @ x, rtol=1e-13, atol=1e-9)
    lhs = apply_operator(K, x) @ y
    rhs = x @ apply_operator(K, y)
    assert abs(lhs - rhs) <= 1e-12 * abs(lhs)


def test_second_order_consistency_away_from_interface():
    # interior rows of K w / rho against -(k/rho) w'' for w = sin(pi (x + L) / (2L))
    p = PhysicalParams(rho1=1.0, rho2=1.0, k1=1.0, k2=1.0, L=1.0)
    errs = []
    for J in (20, 40, 80, 160):
        g = SpatialGrid(J, 1.0)
        x = g.x
        kappa = np.pi / 2.0
        w = np.sin(kappa * (x + 1.0))
        Kw = apply_operator(assemble_stiffness(p, g), w)
        exact = kappa**2 * w
        inner = (np.abs(x) > 0.2) & (np.abs(x) < 0.8)
        errs.append(np.max(np.abs(Kw[inner] - exact[inner])))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders >= 1.9)


def test_rows_csv_parses_back():
    K = assemble_stiffness(PhysicalParams(k1=10, k2=2), SpatialGrid(2, 1.0))
    rows = np.loadtxt(rows_csv(K).splitlines(), delimiter=",")
    np.testing.assert_array_equal(rows, K.dense())
