import numpy as np
import pytest
import scipy.linalg as la

from helpers import jordan_block, random_similarity, taylor_expm
from wfs_lab.errors import (
    IllConditionedStructureError,
    InvalidInputError,
    RangeOverflowError,
)
from wfs_lab.models import PRESETS, build_nh_jc
from wfs_lab.operator import Operator
from wfs_lab.spectral import matrix_exp, propagate_rk4, spectral_decompose


# ---------------------------------------------------------------------------
# matrix_exp


def test_exp_zero_is_identity():
    assert np.allclose(matrix_exp(np.zeros((3, 3)), 5.0).entries, np.eye(3))


def test_exp_jordan_block_analytic():
    lam = 0.3 - 0.7j
    got = matrix_exp(jordan_block(lam, 2), 1.0).entries
    want = np.exp(lam) * np.array([[1.0, 1.0], [0.0, 1.0]])
    assert np.allclose(got, want, rtol=1e-13, atol=1e-13)


def test_exp_matches_taylor_oracle():
    rng = np.random.default_rng(11)
    A = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    got = matrix_exp(A, 0.7).entries
    want = taylor_expm(A, 0.7)
    assert la.norm(got - want) <= 1e-12 * la.norm(want)


def test_exp_semigroup_property():
    rng = np.random.default_rng(3)
    A = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    A /= la.norm(A, 2)  # ||A|| = 1 so ||A||(s+t) <= 10
    s, t = 2.5, 4.0
    whole = matrix_exp(A, s + t).entries
    split = matrix_exp(A, s).entries @ matrix_exp(A, t).entries
    assert la.norm(whole - split) <= 1e-10 * la.norm(whole)


def test_exp_rejects_non_finite():
    with pytest.raises(InvalidInputError):
        matrix_exp(np.array([[np.inf, 0], [0, 0]]), 1.0)


def test_exp_overflow_reports_norm():
    with pytest.raises(RangeOverflowError) as exc:
        matrix_exp(np.diag([1e6, 1e6]), 1e6)
    assert exc.value.norm is not None


# ---------------------------------------------------------------------------
# propagate_rk4


def test_rk4_scalar_decay():
    out = propagate_rk4(np.array([[-1.0]]), np.array([1.0]), [0.0, 1.0], tol=1e-12)
    assert abs(out[-1][0] - np.exp(-1.0)) < 1e-10


def test_rk4_nilpotent_flow():
    A = np.array([[0.0, 1.0], [0.0, 0.0]])
    out = propagate_rk4(A, np.array([0.0, 1.0]), [0.0, 2.0], tol=1e-12)
    assert np.allclose(out[-1], [2.0, 1.0], atol=1e-10)


def test_rk4_matches_matrix_exp_on_nh_jc():
    H = build_nh_jc().entries
    A = -1j * H
    v0 = np.array([1.0, 0.0], dtype=complex)
    t_grid = np.linspace(0.0, 1.0, 11)
    states = propagate_rk4(A, v0, t_grid, tol=1e-12)
    for t, v in zip(t_grid, states):
        want = matrix_exp(A, t).entries @ v0
        assert np.max(np.abs(v - want)) <= 1e-8


def test_rk4_requires_increasing_grid():
    with pytest.raises(InvalidInputError):
        propagate_rk4(np.eye(2), np.ones(2), [0.0, 0.5, 0.4])


# ---------------------------------------------------------------------------
# spectral_decompose


def test_diagonal_case():
    dec = spectral_decompose(np.diag([1.0, 2.0j, -3.0]))
    assert len(dec.clusters) == 3
    assert all(c.block_sizes == (1,) for c in dec.clusters)
    assert la.norm(dec.nilpotent.entries) < 1e-12


def test_canonical_nilpotent():
    A = np.array([[0.0, 1.0], [0.0, 0.0]])
    dec = spectral_decompose(A)
    assert len(dec.clusters) == 1
    assert dec.clusters[0].block_sizes == (2,)
    assert np.allclose(dec.nilpotent.entries, A, atol=1e-12)


def test_nh_jc_ep_block():
    # analytic oracle: lambda_pm = omega - i(gc+gx)/2 +- sqrt(g^2 - ((gx-gc)/2)^2)
    # coalesce exactly at g = (gx - gc)/2
    p = PRESETS["nh_jaynes_cummings"]
    g_ep = (p["gamma_x_mev"] - p["gamma_c_mev"]) / 2
    H = build_nh_jc({"g_mev": g_ep})
    dec = spectral_decompose(H, cluster_tol=1e-3)
    assert len(dec.clusters) == 1
    assert dec.clusters[0].block_sizes == (2,)
    # nearby couplings split into two simple eigenvalues
    for g in (g_ep - 0.5, g_ep + 0.5):
        dec2 = spectral_decompose(build_nh_jc({"g_mev": g}), cluster_tol=1e-3)
        assert sorted(b for c in dec2.clusters for b in c.block_sizes) == [1, 1]


def _random_with_jordan(seed):
    blocks = [jordan_block(1.0 + 0.5j, 2), jordan_block(-2.0, 1), jordan_block(3.0j, 3)]
    J = la.block_diag(*blocks)
    S = random_similarity(J.shape[0], seed)
    return S @ J @ la.inv(S)


def test_reconstruction_commutation_nilpotency():
    A = _random_with_jordan(5)
    dec = spectral_decompose(A, cluster_tol=1e-4)
    Lam, N = dec.semisimple.entries, dec.nilpotent.entries
    scale = la.norm(A)
    assert la.norm(A - (Lam + N)) <= 1e-10 * scale
    assert la.norm(Lam @ N - N @ Lam) <= 1e-10 * scale
    assert la.norm(np.linalg.matrix_power(N, A.shape[0])) <= 1e-10 * scale
    sizes = sorted(b for c in dec.clusters for b in c.block_sizes)
    assert sizes == [1, 2, 3]


def test_similarity_invariance_of_block_sizes():
    A = _random_with_jordan(17)
    sizes_a = sorted(
        b
        for c in spectral_decompose(A, cluster_tol=1e-4).clusters
        for b in c.block_sizes
    )
    P = random_similarity(A.shape[0], 23)
    B = P @ A @ la.inv(P)
    sizes_b = sorted(
        b
        for c in spectral_decompose(B, cluster_tol=1e-4).clusters
        for b in c.block_sizes
    )
    assert sizes_a == sizes_b


def test_hermitian_degeneration_exact_diagonalizability():
    rng = np.random.default_rng(29)
    X = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    H = X + X.conj().T
    dec = spectral_decompose(-1j * H, cluster_tol=1e-6)
    assert all(b == 1 for c in dec.clusters for b in c.block_sizes)
    assert la.norm(dec.nilpotent.entries) <= 1e-10 * la.norm(H)


def test_multiplicities_sum_to_dim():
    A = _random_with_jordan(41)
    dec = spectral_decompose(A, cluster_tol=1e-4)
    assert sum(c.algebraic_multiplicity for c in dec.clusters) == A.shape[0]


def test_chain_structure():
    # N maps each chain vector down one step and kills the kernel vector
    A = _random_with_jordan(9)
    dec = spectral_decompose(A, cluster_tol=1e-4)
    N = dec.nilpotent.entries
    for cl in dec.clusters:
        for chain in cl.chain_basis:
            assert la.norm(N @ chain[0]) < 1e-6 * la.norm(A)
            for lower, upper in zip(chain, chain[1:]):
                assert la.norm(N @ upper - lower) < 1e-6 * la.norm(A)


def test_ambiguous_rank_raises_with_gap():
    # a Jordan coupling sitting exactly at the rank threshold is ambiguous
    eps = np.finfo(float).eps
    A = np.array([[1.0, 2 * eps * 1e3], [0.0, 1.0]])
    with pytest.raises(IllConditionedStructureError) as exc:
        spectral_decompose(A, cluster_tol=1e-6)
    assert exc.value.gap is not None


def test_invalid_cluster_tol():
    with pytest.raises(InvalidInputError):
        spectral_decompose(np.eye(2), cluster_tol=0.0)
