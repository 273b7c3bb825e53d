"""Dense real matrix functions and matrix equation solvers.

Everything here works on small dense matrices (n up to ~50).  The Lyapunov
solvers vectorize the equation with Kronecker products, which costs
O(n^6) and is only sensible at that scale.

Default tolerances
------------------
TAU_FUN   1e-9   matrix-function identities
TAU_LYAP  1e-9   Lyapunov residuals, relative to the right-hand side
RANK_TOL  1e-8   eigenvalue / singular value cutoff relative to the largest
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import linalg

from ._validation import as_matrix, check_square, check_symmetric, symmetrize
from .exceptions import (
    IllConditionedError,
    NotPsdError,
    RankAmbiguous,
    SingularMatrixError,
    SpectrumOnBranchCut,
    UnstableError,
)

TAU_FUN = 1e-9
TAU_LYAP = 1e-9
RANK_TOL = 1e-8
PSD_REL_TOL = 1e-10

__all__ = [
    "PsdVerdict",
    "RankFactor",
    "expm",
    "logm_principal",
    "rootq_principal",
    "lyap_ct",
    "lyap_dt",
    "noise_gramian",
    "psd_check",
    "psd_rank_factor",
    "numerical_rank",
    "sqrtm_psd",
]


@dataclass(frozen=True)
class PsdVerdict:
    is_psd: bool
    min_eig: float
    tolerance_used: float


@dataclass(frozen=True)
class RankFactor:
    """Full-column-rank factor ``L`` with ``L @ L.T`` approximating the input.

    ``dropped_eigs`` holds the eigenvalues that fell below the rank
    threshold; ``ambiguous`` flags an eigenvalue within 10% of it.
    """

    factor: np.ndarray
    rank: int
    dropped_eigs: list = field(default_factory=list)
    ambiguous: bool = False


# ---------------------------------------------------------------------------
# Matrix exponential: scaling and squaring with diagonal Pade approximants
# ---------------------------------------------------------------------------

_PADE_COEFFS = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0),
    9: (17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
        2162160.0, 110880.0, 3960.0, 90.0, 1.0),
    13: (64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
         1187353796428800.0, 129060195264000.0, 10559470521600.0,
         670442572800.0, 33522128640.0, 1323241920.0, 40840800.0, 960960.0,
         16380.0, 182.0, 1.0),
}

# Largest 1-norm for which the degree-m approximant is accurate to unit roundoff.
_PADE_THETA = (
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
)
_THETA_13 = 5.371920351148152e0


def _pade_uv(X, m):
    n = X.shape[0]
    b = _PADE_COEFFS[m]
    ident = np.eye(n)
    X2 = X @ X
    if m == 13:
        X4 = X2 @ X2
        X6 = X4 @ X2
        U = X @ (X6 @ (b[13] * X6 + b[11] * X4 + b[9] * X2)
                 + b[7] * X6 + b[5] * X4 + b[3] * X2 + b[1] * ident)
        V = (X6 @ (b[12] * X6 + b[10] * X4 + b[8] * X2)
             + b[6] * X6 + b[4] * X4 + b[2] * X2 + b[0] * ident)
        return U, V
    powers = [ident, X2]
    for _ in range(2, (m + 1) // 2):
        powers.append(powers[-1] @ X2)
    U = sum(b[2 * k + 1] * powers[k] for k in range((m + 1) // 2))
    V = sum(b[2 * k] * powers[k] for k in range((m + 1) // 2))
    return X @ U, V


def expm(F, t=1.0):
    """Matrix exponential ``exp(F t)``.

    Parameters
    ----------
    F : array_like, shape (n, n)
    t : float
        Time (scale) multiplying ``F``.  ``t == 0`` returns the identity
        exactly.

    Returns
    -------
    ndarray, shape (n, n)
    """
    F = check_square(F, "F")
    t = float(t)
    if not np.isfinite(t):
        raise ValueError("t must be finite")
    n = F.shape[0]
    if t == 0.0:
        return np.eye(n)
    X = F * t
    norm = np.linalg.norm(X, 1)
    if norm == 0.0:
        return np.eye(n)
    for m, theta in _PADE_THETA:
        if norm <= theta:
            U, V = _pade_uv(X, m)
            return np.linalg.solve(V - U, V + U)
    s = max(0, int(np.ceil(np.log2(norm / _THETA_13))))
    U, V = _pade_uv(X / 2.0**s, 13)
    R = np.linalg.solve(V - U, V + U)
    for _ in range(s):
        R = R @ R
    return R


# ---------------------------------------------------------------------------
# Principal logarithm: inverse scaling and squaring on the complex Schur form
# ---------------------------------------------------------------------------

_BRANCH_REL_TOL = 1e-10
_NEAR_IDENTITY = 0.25
_MAX_SQRTS = 100
_QUAD_POINTS = 16


def _check_branch(eigs, scale):
    """Raise if any eigenvalue is zero or on the closed negative real axis."""
    n = len(eigs)
    tiny = n * np.finfo(float).eps * max(scale, np.finfo(float).tiny)
    for lam in eigs:
        if abs(lam) <= tiny:
            raise SingularMatrixError(f"eigenvalue {lam} is numerically zero")
        if lam.real < 0 and abs(lam.imag) <= _BRANCH_REL_TOL * abs(lam):
            raise SpectrumOnBranchCut(
                f"eigenvalue {lam.real:.6g} lies on the negative real axis"
            )


def _sqrtm_triu(T):
    """Principal square root of an upper-triangular complex matrix."""
    n = T.shape[0]
    R = np.zeros_like(T)
    diag = np.sqrt(np.diag(T))
    R[np.diag_indices(n)] = diag
    for d in range(1, n):
        for i in range(n - d):
            j = i + d
            s = R[i, i + 1:j] @ R[i + 1:j, j]
            R[i, j] = (T[i, j] - s) / (diag[i] + diag[j])
    return R


def _log_near_identity(X):
    """log(I + X) by Gauss-Legendre quadrature of X (I + tX)^{-1} on [0, 1]."""
    nodes, weights = leggauss(_QUAD_POINTS)
    nodes = 0.5 * (nodes + 1.0)
    weights = 0.5 * weights
    ident = np.eye(X.shape[0], dtype=X.dtype)
    out = np.zeros_like(X)
    for t, w in zip(nodes, weights):
        out += w * np.linalg.solve((ident + t * X).T, X.T).T
    return out


def logm_principal(A):
    """Principal matrix logarithm.

    Raises
    ------
    SpectrumOnBranchCut
        If ``A`` has an eigenvalue on the negative real axis.
    SingularMatrixError
        If ``A`` has a zero eigenvalue.
    """
    A = check_square(A, "A")
    n = A.shape[0]
    T, Z = linalg.schur(A.astype(complex), output="complex")
    _check_branch(np.diag(T), np.linalg.norm(A, 2))
    ident = np.eye(n)
    s = 0
    while np.linalg.norm(T - ident, 1) > _NEAR_IDENTITY:
        if s >= _MAX_SQRTS:
            raise IllConditionedError("square-root sequence did not approach I")
        T = _sqrtm_triu(T)
        s += 1
    L = (2.0**s) * (Z @ _log_near_identity(T - ident) @ Z.conj().T)
    return L.real


def rootq_principal(A, q):
    """Principal q-th root, computed as ``expm(logm_principal(A) / q)``."""
    A = check_square(A, "A")
    if int(q) != q or q < 1:
        raise ValueError(f"q must be a positive integer, got {q}")
    q = int(q)
    L = logm_principal(A)
    if q == 1:
        return A.copy()
    return expm(L, 1.0 / q)


# ---------------------------------------------------------------------------
# Lyapunov equations (Kronecker vectorization)
# ---------------------------------------------------------------------------

_PAIR_TOL = 1e-12


def lyap_ct(F, W):
    """Solve ``F P + P F' + W = 0`` for a Hurwitz ``F``."""
    F = check_square(F, "F")
    W = check_symmetric(W, "W")
    n = F.shape[0]
    if W.shape != (n, n):
        raise ValueError(f"W has shape {W.shape}, expected {(n, n)}")
    eigs = np.linalg.eigvals(F)
    if np.max(eigs.real) >= 0:
        raise UnstableError(f"F has eigenvalue with Re >= 0: {eigs[np.argmax(eigs.real)]}")
    pair = np.min(np.abs(eigs[:, None] + eigs[None, :]))
    if pair <= _PAIR_TOL * max(np.linalg.norm(F, 2), 1.0):
        raise IllConditionedError("eigenvalue pair sums to nearly zero")
    ident = np.eye(n)
    K = np.kron(ident, F) + np.kron(F, ident)
    vecP = np.linalg.solve(K, -W.reshape(-1, order="F"))
    return symmetrize(vecP.reshape(n, n, order="F"))


def lyap_dt(A, W):
    """Solve ``P = A P A' + W`` for a Schur-stable ``A``."""
    A = check_square(A, "A")
    W = check_symmetric(W, "W")
    n = A.shape[0]
    if W.shape != (n, n):
        raise ValueError(f"W has shape {W.shape}, expected {(n, n)}")
    eigs = np.linalg.eigvals(A)
    if np.max(np.abs(eigs)) >= 1:
        raise UnstableError(f"A has spectral radius {np.max(np.abs(eigs)):.6g} >= 1")
    pair = np.min(np.abs(1.0 - eigs[:, None] * eigs[None, :]))
    if pair <= _PAIR_TOL:
        raise IllConditionedError("eigenvalue pair product is nearly one")
    K = np.eye(n * n) - np.kron(A, A)
    vecP = np.linalg.solve(K, W.reshape(-1, order="F"))
    return symmetrize(vecP.reshape(n, n, order="F"))


def noise_gramian(F, G, h):
    """Integrated noise covariance ``int_0^h e^{Fs} G G' e^{F's} ds``.

    Uses the block-exponential construction: with
    ``E = expm([[-F, GG'], [0, F']] h)``, the integral is ``E22' E12``.
    """
    F = check_square(F, "F")
    G = as_matrix(G, "G")
    n = F.shape[0]
    if G.shape[0] != n:
        raise ValueError(f"G has {G.shape[0]} rows, expected {n}")
    h = float(h)
    if not h > 0:
        raise ValueError(f"h must be positive, got {h}")
    M = np.zeros((2 * n, 2 * n))
    M[:n, :n] = -F
    M[:n, n:] = G @ G.T
    M[n:, n:] = F.T
    E = expm(M, h)
    return symmetrize(E[n:, n:].T @ E[:n, n:])


# ---------------------------------------------------------------------------
# Semidefiniteness and rank
# ---------------------------------------------------------------------------


def _default_psd_tol(M):
    return M.shape[0] * np.linalg.norm(M, 2) * PSD_REL_TOL


def psd_check(M, tol=None):
    """Decide positive semidefiniteness from the smallest eigenvalue.

    ``tol`` defaults to ``dim * ||M||_2 * 1e-10``.
    """
    M = check_symmetric(M, "M")
    if tol is None:
        tol = _default_psd_tol(M)
    min_eig = float(np.linalg.eigvalsh(M)[0])
    return PsdVerdict(is_psd=min_eig >= -tol, min_eig=min_eig, tolerance_used=float(tol))


def psd_rank_factor(M, rank_tol=RANK_TOL, psd_tol=None):
    """Full-column-rank left factor of a PSD matrix.

    Columns are eigenvectors scaled by the square roots of eigenvalues above
    ``rank_tol * lambda_max``, ordered by decreasing eigenvalue, with the
    first nonzero entry of each column made positive.

    Raises
    ------
    NotPsdError
        If ``psd_check(M, psd_tol)`` fails.
    """
    M = check_symmetric(M, "M")
    verdict = psd_check(M, psd_tol)
    if not verdict.is_psd:
        raise NotPsdError(f"matrix has eigenvalue {verdict.min_eig:.3e}")
    w, V = np.linalg.eigh(M)
    order = np.argsort(-w, kind="stable")  # ties keep eigh's order, so I -> I
    w, V = w[order], V[:, order]
    lam_max = max(w[0], 0.0)
    threshold = rank_tol * lam_max
    keep = w > threshold if lam_max > 0 else np.zeros_like(w, dtype=bool)
    r = int(np.count_nonzero(keep))
    L = V[:, :r] * np.sqrt(w[:r])
    for j in range(r):
        nz = np.flatnonzero(np.abs(L[:, j]) > 1e-14 * np.max(np.abs(L[:, j])))
        if nz.size and L[nz[0], j] < 0:
            L[:, j] = -L[:, j]
    ambiguous = bool(lam_max > 0 and np.any(np.abs(w - threshold) <= 0.1 * threshold))
    if ambiguous:
        warnings.warn(
            f"eigenvalue within 10% of the rank threshold {threshold:.3e}",
            RankAmbiguous,
            stacklevel=2,
        )
    return RankFactor(factor=L, rank=r, dropped_eigs=[float(x) for x in w[r:]], ambiguous=ambiguous)


def numerical_rank(M, rank_tol=RANK_TOL):
    """Number of singular values above ``rank_tol * sigma_max``."""
    M = np.atleast_2d(np.asarray(M))
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.count_nonzero(s > rank_tol * s[0]))


def sqrtm_psd(M):
    """Symmetric PSD square root; tiny negative eigenvalues are clipped to zero."""
    M = check_symmetric(M, "M")
    w, V = np.linalg.eigh(M)
    w = np.clip(w, 0.0, None)
    return symmetrize((V * np.sqrt(w)) @ V.T)
