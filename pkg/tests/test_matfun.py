import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from generators import random_stable_matrix
from oracles import expm_taylor, gramian_simpson, lyap_ct_kron, scalar_gramian
from timescale_lift.exceptions import (
    IllConditionedError,
    NotPsdError,
    NotSymmetricError,
    SingularMatrixError,
    SpectrumOnBranchCut,
    UnstableError,
)
from timescale_lift.matfun import (
    expm,
    logm_principal,
    lyap_ct,
    lyap_dt,
    noise_gramian,
    numerical_rank,
    psd_check,
    psd_rank_factor,
    rootq_principal,
    sqrtm_psd,
)
from timescale_lift.reference_models import example1_matrices


# -- expm --------------------------------------------------------------------

def test_expm_zero():
    assert expm([[0.0]], 1.0) == pytest.approx(np.eye(1))


def test_expm_scalar_closed_form():
    assert expm([[-1.0]], math.log(2))[0, 0] == pytest.approx(0.5, abs=1e-15)


def test_expm_t_zero_is_exact_identity(ex1):
    assert np.array_equal(expm(ex1.F, 0.0), np.eye(4))


def test_expm_companion_matches_series(ex1):
    np.testing.assert_allclose(expm(ex1.F, 0.5), expm_taylor(ex1.F, 0.5), atol=1e-12, rtol=0)


def test_expm_rejects_non_square():
    with pytest.raises(ValueError):
        expm(np.ones((2, 3)))


@pytest.mark.parametrize("scale", [1e-6, 0.3, 4.0, 60.0])
def test_expm_against_scipy_across_norms(rng, scale):
    X = rng.standard_normal((6, 6)) * scale
    ref = scipy.linalg.expm(X)
    np.testing.assert_allclose(expm(X), ref, rtol=1e-11, atol=1e-13 * np.linalg.norm(ref))


# -- logm / rootq -------------------------------------------------------------

def test_logm_identity():
    np.testing.assert_array_equal(logm_principal(np.eye(3)), np.zeros((3, 3)))


def test_logm_scalar():
    assert logm_principal([[0.5]])[0, 0] == pytest.approx(-math.log(2), abs=1e-15)


def test_logm_rotation():
    A = np.array([[0.0, 1.0], [-1.0, 0.0]])
    L = logm_principal(A)
    np.testing.assert_allclose(L, [[0, math.pi / 2], [-math.pi / 2, 0]], atol=1e-13)
    np.testing.assert_allclose(expm(L), A, atol=1e-13)


@pytest.mark.parametrize("A", [[[-0.5]], [[-1.0, 0.0], [0.0, 0.3]], np.diag([2.0, -3.0, 1.0])])
def test_logm_rejects_negative_real_eigenvalue(A):
    with pytest.raises(SpectrumOnBranchCut):
        logm_principal(A)


def test_logm_rejects_singular():
    with pytest.raises(SingularMatrixError):
        logm_principal(np.diag([1.0, 0.0]))


def test_logm_spectrum_in_strip(rng):
    for _ in range(20):
        A = expm(random_stable_matrix(rng, 5, im=(0.2, 3.0)))
        eig = np.linalg.eigvals(logm_principal(A))
        assert np.all(np.abs(eig.imag) < math.pi)


def test_rootq_identity():
    np.testing.assert_allclose(rootq_principal(np.eye(4), 7), np.eye(4), atol=1e-15)


def test_rootq_scalar():
    assert rootq_principal([[0.25]], 2)[0, 0] == pytest.approx(0.5, abs=1e-15)


def test_rootq_recovers_example2_fine_matrix(ex2_fine):
    A = np.linalg.matrix_power(ex2_fine.F, 5)
    np.testing.assert_allclose(rootq_principal(A, 5), ex2_fine.F, atol=1e-8)


def test_rootq_power_identity(rng):
    A = expm(random_stable_matrix(rng, 6))
    for q in (2, 3, 7):
        R = rootq_principal(A, q)
        np.testing.assert_allclose(np.linalg.matrix_power(R, q), A, atol=1e-11)


@pytest.mark.parametrize("q", [0, -1, 1.5])
def test_rootq_rejects_bad_q(q):
    with pytest.raises(ValueError):
        rootq_principal(np.eye(2), q)


# -- Lyapunov -------------------------------------------------------------------

def test_lyap_ct_scalar():
    assert lyap_ct([[-1.0]], [[1.0]])[0, 0] == pytest.approx(0.5)


def test_lyap_ct_zero_rhs(ex1):
    np.testing.assert_array_equal(lyap_ct(ex1.F, np.zeros((4, 4))), np.zeros((4, 4)))


def test_lyap_ct_example1_residual(ex1):
    W = ex1.G @ ex1.G.T
    P = lyap_ct(ex1.F, W)
    assert np.linalg.norm(ex1.F @ P + P @ ex1.F.T + W) < 1e-10
    np.testing.assert_allclose(P, lyap_ct_kron(ex1.F, W), atol=1e-12)


def test_lyap_ct_unstable():
    with pytest.raises(UnstableError):
        lyap_ct([[0.1]], [[1.0]])


def test_lyap_ct_ill_conditioned():
    with pytest.raises((IllConditionedError, UnstableError)):
        lyap_ct(np.diag([-1e-14, -1.0]), np.eye(2))


def test_lyap_ct_rejects_asymmetric_rhs():
    with pytest.raises(NotSymmetricError):
        lyap_ct(-np.eye(2), [[1.0, 1.0], [0.0, 1.0]])


@pytest.mark.parametrize("a, w, expected", [(0.5, 0.75, 1.0), (0.25, 1.25, 4 / 3)])
def test_lyap_dt_scalar(a, w, expected):
    assert lyap_dt([[a]], [[w]])[0, 0] == pytest.approx(expected, rel=1e-14)


def test_lyap_dt_zero_rhs():
    np.testing.assert_array_equal(lyap_dt(0.5 * np.eye(2), np.zeros((2, 2))), np.zeros((2, 2)))


def test_lyap_dt_unstable():
    with pytest.raises(UnstableError):
        lyap_dt([[1.0]], [[1.0]])


def test_dual_lyapunov_identity(ex1):
    """The stationary covariance solves both the continuous and sampled equations."""
    h = 0.7
    P = lyap_ct(ex1.F, ex1.G @ ex1.G.T)
    A = expm(ex1.F, h)
    Q = noise_gramian(ex1.F, ex1.G, h)
    np.testing.assert_allclose(lyap_dt(A, Q), P, atol=1e-12)


# -- noise Gramian -------------------------------------------------------------

def test_noise_gramian_scalar():
    Q = noise_gramian([[-1.0]], [[1.0]], math.log(2))
    assert Q[0, 0] == pytest.approx(0.375, abs=1e-15)
    assert Q[0, 0] == pytest.approx(scalar_gramian(-1.0, 1.0, math.log(2)))


def test_noise_gramian_first_order(ex1):
    h = 1e-6
    Q = noise_gramian(ex1.F, ex1.G, h)
    W = ex1.G @ ex1.G.T
    assert np.linalg.norm(Q / h - W) < 1e-4 * np.linalg.norm(W)


def test_noise_gramian_matches_quadrature(ex1):
    np.testing.assert_allclose(
        noise_gramian(ex1.F, ex1.G, 1.0), gramian_simpson(ex1.F, ex1.G, 1.0), atol=1e-9, rtol=0
    )


def test_noise_gramian_dimension_mismatch(ex1):
    with pytest.raises(ValueError):
        noise_gramian(ex1.F, np.ones((3, 2)), 1.0)


def test_noise_gramian_rejects_nonpositive_h(ex1):
    with pytest.raises(ValueError):
        noise_gramian(ex1.F, ex1.G, 0.0)


# -- PSD tests and factors ----------------------------------------------------

def test_psd_check_zero():
    v = psd_check(np.zeros((3, 3)))
    assert v.is_psd and v.min_eig == 0


def test_psd_check_negative_signature():
    v = psd_check(np.diag([1.0, -1e-3]), tol=1e-10)
    assert not v.is_psd
    assert v.min_eig == pytest.approx(-1e-3)
    assert v.tolerance_used == 1e-10


def test_psd_check_default_tolerance_scales_with_norm():
    v = psd_check(np.diag([1e6, -1e-6]))
    assert v.is_psd
    assert v.tolerance_used == pytest.approx(2 * 1e6 * 1e-10)


def test_psd_rank_factor_identity():
    f = psd_rank_factor(np.eye(3))
    assert f.rank == 3
    np.testing.assert_allclose(f.factor @ f.factor.T, np.eye(3), atol=1e-15)
    np.testing.assert_allclose(np.abs(f.factor), np.eye(3), atol=1e-15)


def test_psd_rank_factor_gram():
    M = np.array([[4.0, -2.0], [-2.0, 4.0]])
    f = psd_rank_factor(M)
    assert f.rank == 2
    np.testing.assert_allclose(f.factor @ f.factor.T, M, atol=1e-12)
    # columns ordered by decreasing eigenvalue (6 then 2)
    np.testing.assert_allclose(np.sum(f.factor**2, axis=0), [6.0, 2.0], atol=1e-12)


def test_psd_rank_factor_example1(ex1):
    P = lyap_ct(ex1.F, ex1.G @ ex1.G.T)
    S = -(ex1.F @ P + P @ ex1.F.T)
    f = psd_rank_factor(S)
    assert f.rank == 2
    np.testing.assert_allclose(f.factor @ f.factor.T, ex1.G @ ex1.G.T, atol=1e-10)


def test_psd_rank_factor_sign_convention(rng):
    X = rng.standard_normal((5, 3))
    L = psd_rank_factor(X @ X.T).factor
    for col in L.T:
        first = col[np.flatnonzero(np.abs(col) > 1e-12)[0]]
        assert first > 0


def test_psd_rank_factor_not_psd():
    with pytest.raises(NotPsdError):
        psd_rank_factor(np.diag([1.0, -0.5]))


def test_psd_rank_factor_warns_near_threshold():
    with pytest.warns(UserWarning):
        psd_rank_factor(np.diag([1.0, 1.02e-8]), rank_tol=1e-8)


def test_numerical_rank():
    F, G, H = example1_matrices()
    assert numerical_rank(np.zeros((3, 3))) == 0
    assert numerical_rank(np.eye(4)) == 4
    assert numerical_rank(G) == 2


def test_sqrtm_psd(rng):
    X = rng.standard_normal((4, 2))
    M = X @ X.T
    S = sqrtm_psd(M)
    np.testing.assert_allclose(S, S.T, atol=1e-15)
    np.testing.assert_allclose(S @ S, M, atol=1e-12)


# -- properties ----------------------------------------------------------------

seeds = st.integers(min_value=0, max_value=2**32 - 1)


@settings(max_examples=40, deadline=None)
@given(seed=seeds, n=st.integers(1, 8))
def test_prop_log_exp_inverse(seed, n):
    rng = np.random.default_rng(seed)
    F = random_stable_matrix(rng, n)
    A = expm(F)
    L = logm_principal(A)
    np.testing.assert_allclose(expm(L), A, atol=1e-10 * max(1, np.linalg.norm(A)))
    np.testing.assert_allclose(L, F, atol=1e-9 * max(1, np.linalg.norm(F)))


@settings(max_examples=40, deadline=None)
@given(seed=seeds, n=st.integers(1, 6), h=st.sampled_from([0.1, 0.5, 1.0, 2.0]))
def test_prop_gramian_solves_sampled_lyapunov(seed, n, h):
    rng = np.random.default_rng(seed)
    F = random_stable_matrix(rng, n)
    G = rng.standard_normal((n, max(1, n - 1)))
    P = lyap_ct(F, G @ G.T)
    A = expm(F, h)
    Q = noise_gramian(F, G, h)
    np.testing.assert_allclose(P - A @ P @ A.T, Q, atol=1e-10 * max(1, np.linalg.norm(P)))
