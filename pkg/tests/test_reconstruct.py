import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fourier_edges.frames import Grid
from fourier_edges.harness import ExperimentConfig, reconstruct_from, run_detection
from fourier_edges.reconstruct import (
    SingularSystemError,
    build_mask,
    edge_adaptive_l2,
    masked_regularizer,
    measurement_matrix,
    pa_operator,
    row_weights,
    write_recon_csv,
)
from fourier_edges.sampling import FourierData, ModeSet


def test_first_and_second_difference_rows():
    L1 = pa_operator(1, 4)
    assert L1.shape == (8, 9)
    np.testing.assert_array_equal(L1[0, :2], [-1, 1])
    L2 = pa_operator(2, 4)
    assert L2.shape == (7, 9)
    np.testing.assert_array_equal(L2[3, 3:6], [1, -2, 1])
    assert np.all(L2.sum(axis=1) == 0)


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_annihilates_polynomials(m):
    J = 20
    x = np.linspace(-1, 1, 2 * J + 1)
    L = pa_operator(m, J)
    rng = np.random.default_rng(m)
    for deg in range(m):
        p = np.polyval(rng.standard_normal(deg + 1), x)
        assert np.abs(L @ p).max() <= 1e-10
    # degree m is not annihilated
    assert np.abs(L @ x**m).max() > 1e-6


def test_order_range():
    with pytest.raises(ValueError):
        pa_operator(0, 10)
    with pytest.raises(ValueError):
        pa_operator(7, 10)


def test_mask_no_edges():
    assert np.all(build_mask(np.zeros(21), 2, 1 / 21) == 1)


@pytest.mark.parametrize("j0", [0, 7, 20])
def test_mask_spike(j0):
    J = 10
    g = np.zeros(2 * J + 1)
    g[j0] = 1.0
    mask = build_mask(g, 1, 1 / (2 * J + 1))
    expect = {j0 - 1, j0, j0 + 1} & set(range(2 * J + 1))
    assert set(np.nonzero(mask == 0)[0]) == expect


def test_mask_infinite_threshold():
    g = np.random.default_rng(0).standard_normal(21)
    assert np.all(build_mask(g, 3, np.inf) == 1)
    with pytest.raises(ValueError):
        build_mask(g, 3, 0.0)


def test_default_tau():
    r = masked_regularizer(np.zeros(41), 2)
    assert r.tau == 1 / 41
    assert r.L.shape == (39, 41)
    assert set(np.unique(r.mask_diag)) <= {0.0, 1.0}


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 4))
def test_masked_points_carry_no_penalty(seed, m):
    rng = np.random.default_rng(seed)
    J = 12
    g = np.zeros(2 * J + 1)
    g[rng.choice(2 * J + 1, 2, replace=False)] = rng.choice([-1.0, 1.0], 2)
    reg = masked_regularizer(g, m)
    f = rng.standard_normal(2 * J + 1)
    f2 = f.copy()
    off = reg.mask_diag == 0
    f2[off] *= rng.uniform(-5, 5)
    f2[off] += rng.standard_normal(off.sum())
    assert abs(reg.penalty(f) - reg.penalty(f2)) <= 1e-10 * max(1.0, reg.penalty(f))


def test_row_weights():
    mask = np.array([1, 1, 0, 1, 1, 1.0])
    np.testing.assert_array_equal(row_weights(mask, 1), [1, 0, 0, 1, 1])
    np.testing.assert_array_equal(row_weights(mask, 2), [0, 0, 0, 1])


def test_measurement_matrix_quadrature():
    # F applied to a smooth periodic function approximates (1/2) int f e^{-i pi lam x}
    grid = Grid(64)
    lam = np.array([0.0, 1.0, 2.0])
    F = measurement_matrix(lam, grid)
    x = grid.points
    f = np.cos(np.pi * x)
    w = np.ones_like(x)
    w[[0, -1]] = 0.5  # trapezoid end weights; here f(-1) = f(1)
    np.testing.assert_allclose((F * w) @ f, [0.0, 0.5, 0.0], atol=1e-12)


def test_small_lambda_is_least_squares():
    J = 8
    grid = Grid(J)
    lam = 0.9 * np.arange(-J, J + 1)
    rng = np.random.default_rng(2)
    vals = rng.standard_normal(2 * J + 1) + 1j * rng.standard_normal(2 * J + 1)
    data = FourierData(vals, ModeSet(lam, "jittered", J))
    F = measurement_matrix(lam, grid)
    Fr = np.vstack([F.real, F.imag])
    ls = np.linalg.lstsq(Fr, np.concatenate([vals.real, vals.imag]), rcond=None)[0]
    f = edge_adaptive_l2(data, grid, np.ones(2 * J + 1), pa_operator(2, J), lam=1e-12)
    np.testing.assert_allclose(f, ls, rtol=1e-6, atol=1e-6 * np.abs(ls).max())


def test_singular_and_bad_lambda():
    J = 8
    grid = Grid(J)
    data = FourierData(np.ones(3, complex), ModeSet(np.array([-1.0, 0.0, 1.0]), "jittered", 1))
    with pytest.raises(SingularSystemError):
        edge_adaptive_l2(data, grid, np.zeros(2 * J + 1), pa_operator(1, J), lam=0.1)
    f = edge_adaptive_l2(data, grid, np.zeros(2 * J + 1), pa_operator(1, J), lam=0.1, ridge=1e-8)
    assert f.shape == (2 * J + 1,)
    with pytest.raises(ValueError):
        edge_adaptive_l2(data, grid, np.ones(2 * J + 1), pa_operator(1, J), lam=0.0)


def test_recon_csv(tmp_path):
    x = np.linspace(-1, 1, 5)
    p = tmp_path / "r.csv"
    write_recon_csv(p, x, x + 0.1, x, ["seed=1"])
    rows = list(csv.reader(p.read_text().splitlines()[1:]))
    assert rows[0] == ["x", "f_reconstructed", "f_true", "abs_error"]
    assert abs(float(rows[3][3]) - 0.1) < 1e-12


@pytest.fixture(scope="module")
def noisy_default():
    return run_detection(ExperimentConfig(noise_std=0.02))


@pytest.mark.slow
def test_moderate_lambda_not_worse(noisy_default):
    e_mid = reconstruct_from(noisy_default, "sbl", lam=0.1)[1]
    e_small = reconstruct_from(noisy_default, "sbl", lam=1e-4)[1]
    assert e_mid <= e_small


@pytest.mark.slow
def test_noisy_f1_logarithmic():
    det = run_detection(ExperimentConfig(function="f1", pattern="logarithmic", noise_std=0.02))
    assert reconstruct_from(det, "sbl", m_order=2)[1] <= 0.15


@pytest.mark.slow
def test_noisy_f2_quadratic():
    det = run_detection(ExperimentConfig(function="f2", pattern="quadratic", noise_std=0.02))
    assert reconstruct_from(det, "sbl", m_order=3)[1] <= 0.18
