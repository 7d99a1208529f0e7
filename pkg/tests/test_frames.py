import warnings

import numpy as np
import pytest

from fourier_edges.frames import (
    Grid,
    RankDeficiencyWarning,
    build_frame_system,
    dual_coefficients,
    dual_eval_matrix,
    frame_reconstruct,
    gram_matrix,
)
from fourier_edges.sampling import FourierData, ModeSet, catalog, fourier_samples, jittered_modes, quadratic_modes


def uniform(M):
    return ModeSet(np.arange(-M, M + 1, dtype=float), "jittered", M)


def test_grid():
    g = Grid(4)
    np.testing.assert_allclose(g.points, np.arange(-4, 5) / 4)
    assert g.points[0] == -1 and g.points[-1] == 1 and len(g) == 9


def test_gram_entries():
    Psi = gram_matrix(np.array([0.0, 0.5, 2.0]), 1)
    assert Psi[0, 1] == 2.0
    assert abs(Psi[1, 1] - 4 / np.pi) < 1e-15  # lam - l = 1/2
    assert abs(Psi[0, 0]) < 1e-15 and abs(Psi[2, 2]) < 1e-15


def test_gram_continuity():
    Psi = gram_matrix(np.array([1 + 1e-9]), 2)
    assert abs(Psi[0, 3] - 2) < 1e-6


def test_uniform_modes_pinv():
    Psi = gram_matrix(uniform(6), 6)
    dc = dual_coefficients(Psi)
    np.testing.assert_allclose(dc.B, Psi.T / 4, atol=1e-14)
    assert dc.rank == 13 and abs(dc.cond - 1) < 1e-12


def test_jittered_left_inverse():
    ms = jittered_modes(32, 4)
    Psi = gram_matrix(ms, 32)
    B = dual_coefficients(Psi).B
    np.testing.assert_allclose(B @ Psi, np.eye(65), atol=1e-8)


def test_zero_gram():
    B = dual_coefficients(np.zeros((5, 3))).B
    assert B.shape == (3, 5) and not B.any()


def test_rank_warning():
    Psi = gram_matrix(quadratic_modes(64), 64)
    with pytest.warns(RankDeficiencyWarning):
        dual_coefficients(Psi)


def test_dual_eval_uniform():
    M, J = 5, 8
    ms = uniform(M)
    B = dual_coefficients(gram_matrix(ms, M)).B
    D = dual_eval_matrix(B, Grid(J))
    x = Grid(J).points
    assert D.shape == (2 * J + 1, 2 * M + 1)
    for k in range(-M, M + 1):
        np.testing.assert_allclose(D[:, k + M], np.exp(1j * np.pi * k * x) / 2, atol=1e-14)
    np.testing.assert_allclose(D[J], B.sum(axis=0), atol=1e-14)


def test_reconstruct_cosine():
    ms = uniform(8)
    sysm = build_frame_system(ms, 8, 16)
    vals = np.zeros(17, complex)
    vals[8 - 1] = vals[8 + 1] = 0.5  # cos(pi x) samples
    f = frame_reconstruct(FourierData(vals, ms), sysm)
    np.testing.assert_allclose(f[1:-1], np.cos(np.pi * sysm.x[1:-1]), atol=1e-10)


def test_reconstruct_zero_and_linearity():
    ms = jittered_modes(10, 1)
    sysm = build_frame_system(ms, 10, 12)
    zero = frame_reconstruct(FourierData(np.zeros(21), ms), sysm)
    assert not np.any(zero)
    rng = np.random.default_rng(0)
    a, b = rng.standard_normal(21) + 1j * rng.standard_normal(21), rng.standard_normal(21) + 0j
    lhs = frame_reconstruct(FourierData(2 * a - 3 * b, ms), sysm)
    rhs = 2 * frame_reconstruct(FourierData(a, ms), sysm) - 3 * frame_reconstruct(FourierData(b, ms), sysm)
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_reconstruct_f1_jittered():
    ms = jittered_modes(32, 0)
    sysm = build_frame_system(ms, 32, 32)
    f = catalog("f1")
    rec = frame_reconstruct(fourier_samples(f, ms), sysm).real
    x = sysm.x
    far = np.all(np.abs(x[:, None] - np.array([-0.5, 0.0, 0.5])[None, :]) > 4 / 32, axis=1)
    err = np.linalg.norm(rec[far] - f(x[far])) / np.linalg.norm(f(x[far]))
    assert err < 0.15


def test_cache_roundtrip(tmp_path):
    ms = jittered_modes(6, 2)
    a = build_frame_system(ms, 6, 8, cache_dir=tmp_path)
    assert len(list(tmp_path.glob("*.npz"))) == 1
    b = build_frame_system(ms, 6, 8, cache_dir=tmp_path)
    assert np.array_equal(a.B, b.B) and a.rank == b.rank


def test_conditioning_order():
    conds = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for ms in (jittered_modes(32, 0), quadratic_modes(32)):
            conds.append(build_frame_system(ms, 32, 8).cond)
    assert conds[0] <= conds[1]
