"""Moving stochastic models between time scales.

Forward maps (sampling a continuous model, subsampling a discrete one) are
always defined.  The inverse maps (lifting) succeed only when a principal
logarithm / q-th root exists and a semidefiniteness certificate holds; they
return a :class:`LiftReport` instead of raising when the test fails.
"""

import enum
from dataclasses import dataclass, field

import numpy as np

from ._validation import symmetrize
from .exceptions import (
    DeltaSingular,
    NoConvergence,
    SingularMatrixError,
    SpectrumOnBranchCut,
)
from .matfun import (
    RANK_TOL,
    TAU_FUN,
    expm,
    logm_principal,
    lyap_dt,
    noise_gramian,
    numerical_rank,
    psd_check,
    psd_rank_factor,
    rootq_principal,
    sqrtm_psd,
)
from .model import CtModel, DtModel, psi_origin

__all__ = [
    "FailedCondition",
    "Certificate",
    "LiftReport",
    "MinPhaseResult",
    "sample_ct",
    "lift_to_ct",
    "subsample",
    "lift_q",
    "minphase",
    "lift_general",
]

TAU_RICCATI = 1e-12
MAX_RICCATI_ITER = 10000
DELTA_COND_LIMIT = 1e12


class FailedCondition(str, enum.Enum):
    NO_LOGARITHM = "NoLogarithm"
    NO_ROOT = "NoRoot"
    BB_SINGULAR = "BBSingular"
    PSD_FAIL = "PsdFail"
    PSI_ZERO_FAIL = "PsiZeroFail"

    def __str__(self):
        return self.value


@dataclass(eq=False)
class Certificate:
    """Evidence behind a lifting verdict.

    ``tested`` is the symmetric matrix whose semidefiniteness decides
    feasibility; ``eigenvalues`` are its eigenvalues in descending order and
    ``rank`` the number above the rank threshold.
    """

    P: np.ndarray
    tested: np.ndarray
    eigenvalues: np.ndarray
    rank: int
    min_eig: float = 0.0
    psd_tol: float = 0.0
    extras: dict = field(default_factory=dict)


@dataclass(eq=False)
class LiftReport:
    feasible: bool
    failed_condition: FailedCondition = None
    lifted: object = None
    certificate: Certificate = None
    message: str = ""

    def __post_init__(self):
        if self.feasible != (self.lifted is not None) or self.feasible == (
            self.failed_condition is not None
        ):
            raise ValueError("inconsistent LiftReport: feasible, lifted, failed_condition")

    @property
    def m(self):
        """Noise rank recovered by a feasible lift (None otherwise)."""
        return self.certificate.rank if self.feasible else None

    def summary(self):
        out = {
            "feasible": self.feasible,
            "failed_condition": None if self.failed_condition is None else str(self.failed_condition),
            "message": self.message,
        }
        if self.certificate is not None:
            out["rank"] = self.certificate.rank
            out["eigenvalues"] = [float(x) for x in self.certificate.eigenvalues]
            out["min_eig"] = self.certificate.min_eig
            out["psd_tol"] = self.certificate.psd_tol
        return out


@dataclass(eq=False)
class MinPhaseResult:
    """Minimum-phase spectral factor ``(A, B_minus, C, D_minus)``."""

    P_minus: np.ndarray
    B_minus: np.ndarray
    D_minus: np.ndarray
    iterations: int
    residual: float
    Cbar: np.ndarray
    Lambda0: np.ndarray


def _sorted_desc(M):
    return np.linalg.eigvalsh(M)[::-1]


def _infeasible(cond, message, certificate=None):
    return LiftReport(False, cond, None, certificate, message)


# ---------------------------------------------------------------------------
# continuous <-> discrete
# ---------------------------------------------------------------------------


def sample_ct(model, h):
    """Sample a continuous model with period ``h``.

    Returns ``DtModel(A=e^{Fh}, B=Q^{1/2}, C=H, D=0, step=h)`` where ``Q`` is
    the noise Gramian over one period and ``Q^{1/2}`` its symmetric root.
    """
    h = float(h)
    if not h > 0:
        raise ValueError(f"h must be positive, got {h}")
    A = expm(model.F, h)
    B = sqrtm_psd(noise_gramian(model.F, model.G, h))
    return DtModel(A, B, model.H.copy(), np.zeros((model.p, model.n)), step=h)


def _lift_with_covariance(A, BBt, C, P, h, rank_tol, psd_tol, extras=None):
    """Continuous lift given the state covariance ``P`` of a D = 0 model."""
    n = A.shape[0]
    try:
        L = logm_principal(A)
    except (SpectrumOnBranchCut, SingularMatrixError) as exc:
        return _infeasible(FailedCondition.NO_LOGARITHM, str(exc))
    bb_eigs = np.linalg.eigvalsh(symmetrize(BBt))
    if bb_eigs[-1] <= 0 or bb_eigs[0] <= n * np.finfo(float).eps * bb_eigs[-1]:
        return _infeasible(
            FailedCondition.BB_SINGULAR,
            f"BB' is singular (eigenvalues {bb_eigs[0]:.3e} .. {bb_eigs[-1]:.3e})",
        )
    F = L / h
    S = symmetrize(-(F @ P + P @ F.T))
    verdict = psd_check(S, psd_tol)
    eigs = _sorted_desc(S)
    cert = Certificate(
        P=P, tested=S, eigenvalues=eigs, rank=numerical_rank(S, rank_tol),
        min_eig=verdict.min_eig, psd_tol=verdict.tolerance_used, extras=dict(extras or {}),
    )
    if not verdict.is_psd:
        return _infeasible(
            FailedCondition.PSD_FAIL,
            f"-(FP + PF') has eigenvalue {verdict.min_eig:.3e} below -{verdict.tolerance_used:.3e}",
            cert,
        )
    fac = psd_rank_factor(S, rank_tol, psd_tol=verdict.tolerance_used)
    cert.rank = fac.rank
    lifted = CtModel(F, fac.factor, C.copy())
    return LiftReport(True, None, lifted, cert, f"continuous lift with m = {fac.rank}")


def lift_to_ct(model, h=None, rank_tol=RANK_TOL, psd_tol=None):
    """Find a continuous model whose samples at period ``h`` match ``model``.

    ``model`` must have ``D = 0``; ``h`` defaults to ``model.step``.
    """
    if model.has_feedthrough:
        raise ValueError("lift_to_ct requires D = 0; use lift_general for models with feedthrough")
    h = model.step if h is None else float(h)
    if not h > 0:
        raise ValueError(f"h must be positive, got {h}")
    BBt = model.B @ model.B.T
    P = lyap_dt(model.A, BBt)
    return _lift_with_covariance(model.A, BBt, model.C, P, h, rank_tol, psd_tol)


# ---------------------------------------------------------------------------
# fine discrete <-> coarse discrete
# ---------------------------------------------------------------------------


def subsample(model, q):
    """Model of every q-th sample of a fine discrete model ``(F, G, H, J)``.

    ``A = F^q``, ``B = [G, FG, ..., F^{q-1} G]``, ``C = H`` and
    ``D = [0, ..., 0, J]``.
    """
    if int(q) != q or q < 1:
        raise ValueError(f"q must be a positive integer, got {q}")
    q = int(q)
    F, G, H, J = model.F, model.G, model.H, model.J
    blocks = [G]
    for _ in range(q - 1):
        blocks.append(F @ blocks[-1])
    A = np.linalg.matrix_power(F, q)
    B = np.hstack(blocks)
    D = np.hstack([np.zeros((model.p, G.shape[1] * (q - 1))), J])
    return DtModel(A, B, H.copy(), D, step=model.step * q, scale="coarse")


def lift_q(model, q, rank_tol=RANK_TOL, psd_tol=None):
    """Find a model running q times faster whose q-subsample matches ``model``.

    The certificate is the block matrix
    ``[[P - R P R', R A^{-1} B D'], [D B' (R A^{-1})', D D']]`` with
    ``R = A^{1/q}`` and ``P`` the state covariance, reduced to its upper
    left block when ``D = 0``.  ``[G; J]`` is a full-column-rank factor of it.
    """
    if int(q) != q or q < 1:
        raise ValueError(f"q must be a positive integer, got {q}")
    q = int(q)
    A, B, C, D = model.A, model.B, model.C, model.D
    n, p = model.n, model.p
    try:
        # A^{1/1} = A needs no branch condition
        R = A.copy() if q == 1 else rootq_principal(A, q)
    except (SpectrumOnBranchCut, SingularMatrixError) as exc:
        return _infeasible(FailedCondition.NO_ROOT, str(exc))
    P = lyap_dt(A, B @ B.T)
    top = symmetrize(P - R @ P @ R.T)
    if model.has_feedthrough:
        cross = R @ np.linalg.solve(A, B) @ D.T
        tested = symmetrize(np.block([[top, cross], [cross.T, D @ D.T]]))
    else:
        tested = top
    verdict = psd_check(tested, psd_tol)
    cert = Certificate(
        P=P, tested=tested, eigenvalues=_sorted_desc(tested),
        rank=numerical_rank(tested, rank_tol), min_eig=verdict.min_eig,
        psd_tol=verdict.tolerance_used, extras={"q": q},
    )
    if not verdict.is_psd:
        return _infeasible(
            FailedCondition.PSD_FAIL,
            f"certificate has eigenvalue {verdict.min_eig:.3e} below -{verdict.tolerance_used:.3e}",
            cert,
        )
    fac = psd_rank_factor(tested, rank_tol, psd_tol=verdict.tolerance_used)
    cert.rank = fac.rank
    G = fac.factor[:n]
    J = fac.factor[n:] if model.has_feedthrough else np.zeros((p, fac.rank))
    fine = DtModel(R, G, C.copy(), J, step=model.step / q, scale="fine")
    return LiftReport(True, None, fine, cert, f"lift by q = {q} with noise rank {fac.rank}")


# ---------------------------------------------------------------------------
# general models with feedthrough
# ---------------------------------------------------------------------------


def _output_basis(C, D, tol):
    """Orthonormal basis of the range of [C, D]."""
    U, s, _ = np.linalg.svd(np.hstack([C, D]), full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return U[:, :0]
    return U[:, : int(np.count_nonzero(s > tol * s[0]))]


def minphase(model, tol=TAU_RICCATI, max_iter=MAX_RICCATI_ITER):
    """Minimum-phase spectral factor by the forward Riccati iteration.

    Iterates ``Pi <- A Pi A' + K Delta^{-1} K'`` from ``Pi = 0`` with
    ``K = Cbar' - A Pi C'`` and ``Delta = Lambda0 - C Pi C'``, where
    ``Cbar = C P A' + D B'`` and ``Lambda0 = C P C' + D D'``.  The output is
    first compressed onto the range of ``[C, D]`` so that ``Delta`` stays
    invertible when the output has static linear dependencies.

    Raises
    ------
    DeltaSingular
        If ``cond(Delta) > 1e12`` at some iterate.
    NoConvergence
        If the relative update stays above ``tol`` after ``max_iter`` steps.
    """
    A, B, C, D = model.A, model.B, model.C, model.D
    P = lyap_dt(A, B @ B.T)
    Lambda0 = symmetrize(C @ P @ C.T + D @ D.T)
    Cbar = C @ P @ A.T + D @ B.T
    U = _output_basis(C, D, RANK_TOL)
    Cr, Cbar_r = U.T @ C, U.T @ Cbar
    Lambda0_r = U.T @ Lambda0 @ U

    def step(Pi):
        Delta = symmetrize(Lambda0_r - Cr @ Pi @ Cr.T)
        if Delta.size and np.linalg.cond(Delta) > DELTA_COND_LIMIT:
            raise DeltaSingular(f"cond(Delta) = {np.linalg.cond(Delta):.3e}")
        K = Cbar_r.T - A @ Pi @ Cr.T
        return Delta, K

    Pi = np.zeros_like(A)
    for it in range(1, max_iter + 1):
        Delta, K = step(Pi)
        Pi_new = symmetrize(A @ Pi @ A.T + K @ np.linalg.solve(Delta, K.T))
        change = np.max(np.abs(Pi_new - Pi))
        Pi = Pi_new
        if change <= tol * max(np.max(np.abs(Pi)), np.finfo(float).tiny):
            break
    else:
        raise NoConvergence(f"Riccati iteration did not converge in {max_iter} steps")

    Delta, K = step(Pi)
    Dr = np.linalg.cholesky(Delta)
    D_minus = U @ Dr
    B_minus = np.linalg.solve(Dr, K.T).T
    resid = np.max(np.abs(Pi - A @ Pi @ A.T - B_minus @ B_minus.T)) if A.size else 0.0
    return MinPhaseResult(
        P_minus=Pi, B_minus=B_minus, D_minus=D_minus, iterations=it,
        residual=float(resid), Cbar=Cbar, Lambda0=Lambda0,
    )


def lift_general(model, h=None, rank_tol=RANK_TOL, psd_tol=None, psi_tol=TAU_FUN,
                 riccati_tol=TAU_RICCATI):
    """Continuous lift of a discrete model that may have feedthrough.

    Rejects with ``PsiZeroFail`` when ``||Psi(0)|| > psi_tol * ||Lambda0||``.
    Otherwise the minimum-phase factor gives ``P_minus`` and the continuous
    test runs on ``Phat = A^{-1} P_minus A'^{-1}`` with noise covariance
    ``A^{-1} B_minus B_minus' A'^{-1}``.
    """
    h = model.step if h is None else float(h)
    if not h > 0:
        raise ValueError(f"h must be positive, got {h}")
    A, C = model.A, model.C
    try:
        psi0 = psi_origin(model)
    except SingularMatrixError as exc:
        return _infeasible(FailedCondition.NO_LOGARITHM, str(exc))
    P = lyap_dt(A, model.B @ model.B.T)
    Lambda0 = C @ P @ C.T + model.D @ model.D.T
    scale = max(np.linalg.norm(Lambda0, 2), np.finfo(float).tiny)
    psi_norm = float(np.linalg.norm(psi0, 2))
    if psi_norm > psi_tol * scale:
        return _infeasible(
            FailedCondition.PSI_ZERO_FAIL,
            f"||Psi(0)|| = {psi_norm:.3e} exceeds {psi_tol:.1e} * ||Lambda0||",
        )
    mp = minphase(model, tol=riccati_tol)
    Btil = np.linalg.solve(A, mp.B_minus)
    Phat = symmetrize(np.linalg.solve(A, np.linalg.solve(A, mp.P_minus).T))
    eq23 = float(np.linalg.norm(mp.D_minus - C @ Btil, 2))
    extras = {
        "psi0_norm": psi_norm,
        "eq23_residual": eq23,
        "riccati_iterations": mp.iterations,
        "P_minus": mp.P_minus,
    }
    return _lift_with_covariance(A, Btil @ Btil.T, C, Phat, h, rank_tol, psd_tol, extras)
