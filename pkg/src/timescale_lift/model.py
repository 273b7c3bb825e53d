"""Stochastic state-space models, structural checks and spectral densities.

A continuous-time model ``dx = F x dt + G dw, zeta = H x`` is a
:class:`CtModel`.  A discrete-time model ``xi+ = A xi + B v,
zeta = C xi + D v`` is a :class:`DtModel`; the same class holds fine-scale
models ``x+ = F x + G w, zeta = H x + J w``, whose matrices are also
reachable under the names ``F, G, H, J``.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from ._validation import as_matrix, check_dims, check_square
from .exceptions import NoInvertiblePartition, SingularMatrixError
from .matfun import RANK_TOL, numerical_rank

__all__ = [
    "CtModel",
    "DtModel",
    "Violation",
    "SpectrumSample",
    "RelationDecomposition",
    "validate_ct",
    "validate_dt",
    "spectrum_ct",
    "spectrum_dt",
    "psi_origin",
    "decompose_relations",
    "kernel_residual",
    "ss_eval",
]

# Relative cutoff used by the structural (PBH) rank tests.
STRUCT_RANK_TOL = 1e-10
PARTITION_COND_LIMIT = 1e12


@dataclass(frozen=True, eq=False)
class CtModel:
    """Continuous-time model ``(F, G, H)``."""

    F: np.ndarray
    G: np.ndarray
    H: np.ndarray

    def __post_init__(self):
        F = check_square(self.F, "F")
        G = as_matrix(self.G, "G")
        H = as_matrix(self.H, "H")
        check_dims(G.shape[0], F.shape[0], "G")
        if H.shape[1] != F.shape[0]:
            raise ValueError(f"H has {H.shape[1]} columns, expected {F.shape[0]}")
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "H", H)

    @property
    def n(self):
        return self.F.shape[0]

    @property
    def m(self):
        return self.G.shape[1]

    @property
    def p(self):
        return self.H.shape[0]


@dataclass(frozen=True, eq=False)
class DtModel:
    """Discrete-time model ``(A, B, C, D)`` with a step length.

    ``scale`` is ``"coarse"`` for observation-rate models and ``"fine"``
    for models read as ``(F, G, H, J)``.  ``D`` defaults to zeros.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray = None
    step: float = 1.0
    scale: str = "coarse"

    def __post_init__(self):
        A = check_square(self.A, "A")
        B = as_matrix(self.B, "B")
        C = as_matrix(self.C, "C")
        check_dims(B.shape[0], A.shape[0], "B")
        if C.shape[1] != A.shape[0]:
            raise ValueError(f"C has {C.shape[1]} columns, expected {A.shape[0]}")
        if self.D is None:
            D = np.zeros((C.shape[0], B.shape[1]))
        else:
            D = as_matrix(self.D, "D")
            if D.shape != (C.shape[0], B.shape[1]):
                raise ValueError(
                    f"D has shape {D.shape}, expected {(C.shape[0], B.shape[1])}"
                )
        step = float(self.step)
        if not step > 0:
            raise ValueError(f"step must be positive, got {step}")
        if self.scale not in ("coarse", "fine"):
            raise ValueError(f"scale must be 'coarse' or 'fine', got {self.scale!r}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "step", step)

    @classmethod
    def fine(cls, F, G, H, J=None, step=1.0):
        return cls(F, G, H, J, step=step, scale="fine")

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def r(self):
        """Noise dimension (columns of B and D)."""
        return self.B.shape[1]

    @property
    def p(self):
        return self.C.shape[0]

    # fine-scale aliases
    F = property(lambda self: self.A)
    G = property(lambda self: self.B)
    H = property(lambda self: self.C)
    J = property(lambda self: self.D)

    @property
    def has_feedthrough(self):
        return bool(np.any(self.D != 0))


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str

    def __str__(self):
        return f"{self.kind}: {self.detail}"


@dataclass(frozen=True, eq=False)
class SpectrumSample:
    """Spectral density at one frequency.

    ``frequency`` is omega (continuous) or theta (discrete); ``None`` marks
    the evaluation at z = 0.
    """

    frequency: float
    density: np.ndarray
    rank: int


def _pbh_failures(A, X, side):
    """Eigenvalues at which the PBH rank test fails."""
    n = A.shape[0]
    bad = []
    for lam in np.linalg.eigvals(A):
        M = lam * np.eye(n) - A
        M = np.hstack([M, X]) if side == "ctrb" else np.vstack([M, X])
        if numerical_rank(M, STRUCT_RANK_TOL) < n:
            bad.append(lam)
    return bad


def _fmt(z):
    z = complex(z)
    return f"{z.real:.6g}" if z.imag == 0 else f"{z.real:.6g}{z.imag:+.6g}j"


def validate_ct(model):
    """Return the list of violated standing assumptions (empty when valid)."""
    F, G, H = model.F, model.G, model.H
    out = []
    eigs = np.linalg.eigvals(F)
    unstable = [lam for lam in eigs if lam.real >= 0]
    if unstable:
        out.append(Violation("Unstable", f"eigenvalue {_fmt(unstable[0])} has Re >= 0"))
    bad = _pbh_failures(F, G, "ctrb")
    if bad:
        out.append(Violation("NotControllable", f"(F, G) loses rank at eigenvalue {_fmt(bad[0])}"))
    bad = _pbh_failures(F, H, "obsv")
    if bad:
        out.append(Violation("NotObservable", f"(F, H) loses rank at eigenvalue {_fmt(bad[0])}"))
    rank_g = numerical_rank(G, STRUCT_RANK_TOL)
    if rank_g < G.shape[1] or G.shape[1] > F.shape[0]:
        out.append(Violation("GNotFullRank", f"rank(G) = {rank_g}, columns = {G.shape[1]}"))
    else:
        rank_hg = numerical_rank(H @ G, STRUCT_RANK_TOL)
        if rank_hg < G.shape[1]:
            out.append(Violation("HGRankDeficient", f"rank(HG) = {rank_hg} < m = {G.shape[1]}"))
    return out


def validate_dt(model):
    """Return the list of violated assumptions for a discrete-time model."""
    A, B, C = model.A, model.B, model.C
    out = []
    rho = np.max(np.abs(np.linalg.eigvals(A)))
    if rho >= 1:
        out.append(Violation("Unstable", f"spectral radius {rho:.6g} >= 1"))
    bad = _pbh_failures(A, B, "ctrb")
    if bad:
        out.append(Violation("NotControllable", f"(A, B) loses rank at eigenvalue {_fmt(bad[0])}"))
    bad = _pbh_failures(A, C, "obsv")
    if bad:
        out.append(Violation("NotObservable", f"(A, C) loses rank at eigenvalue {_fmt(bad[0])}"))
    return out


def ss_eval(A, B, C, D, s):
    """Evaluate ``C (sI - A)^{-1} B + D`` at a complex point ``s``."""
    n = A.shape[0]
    if n == 0:
        return np.asarray(D, dtype=complex)
    return C @ np.linalg.solve(s * np.eye(n) - A, B) + D


def spectrum_ct(model, omegas, rank_tol=RANK_TOL):
    """Spectral density ``V(iw) V(iw)^*`` with ``V(s) = H (sI - F)^{-1} G``."""
    zero = np.zeros((model.p, model.m))
    out = []
    for w in np.atleast_1d(np.asarray(omegas, dtype=float)):
        V = ss_eval(model.F, model.G, model.H, zero, 1j * w)
        Phi = V @ V.conj().T
        out.append(SpectrumSample(float(w), Phi, numerical_rank(Phi, rank_tol)))
    return out


def psi_origin(model):
    """``Psi(0) = W(0) W(inf)' = (D - C A^{-1} B) D'``."""
    try:
        W0 = model.D - model.C @ np.linalg.solve(model.A, model.B)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError("A is singular; Psi(0) is undefined") from exc
    return W0 @ model.D.T


def spectrum_dt(model, thetas, include_origin=False, rank_tol=RANK_TOL):
    """Spectral density ``W(z) W(1/z)'`` on the unit circle ``z = e^{i theta}``.

    With ``include_origin`` the first sample is ``Psi(0)`` (frequency None).
    """
    out = []
    if include_origin:
        P0 = psi_origin(model)
        out.append(SpectrumSample(None, P0.astype(complex), numerical_rank(P0, rank_tol)))
    for th in np.atleast_1d(np.asarray(thetas, dtype=float)):
        W = ss_eval(model.A, model.B, model.C, model.D, np.exp(1j * th))
        Psi = W @ W.conj().T
        out.append(SpectrumSample(float(th), Psi, numerical_rank(Psi, rank_tol)))
    return out


# ---------------------------------------------------------------------------
# Dynamic relations
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RelationDecomposition:
    """Split of the output into inputs ``u`` and outputs ``y`` with ``y = T u``.

    ``T_real`` is ``(Gamma, K, H1 Gamma, H1 K)`` with ``K = G (H0 G)^{-1}``
    and ``Gamma = F - K H0 F``; ``M_real`` is ``(F, G, H0 F, H0 G)``.
    ``Gamma`` carries ``m`` zero eigenvalues that are unobservable through
    ``H1 Gamma``; ``T_min`` is the realization with those modes removed and
    is the one used for evaluation.
    """

    input_indices: list
    output_indices: list
    T_real: tuple
    M_real: tuple
    N_real: tuple
    T_min: tuple
    relation_count: int = field(default=0)

    def T(self, s):
        return ss_eval(*self.T_min, s)

    def M(self, s):
        return ss_eval(*self.M_real, s)

    def N(self, s):
        return ss_eval(*self.N_real, s)

    def L(self, s):
        """Kernel operator ``(-T(s), I)`` acting on (u, y)-ordered vectors."""
        T = self.T(s)
        return np.hstack([-T, np.eye(T.shape[0])])

    def factorization_error(self, omegas):
        """Largest pointwise ``||T M - N|| / ||N||`` over ``s = i omega``."""
        worst = 0.0
        if self.relation_count == 0:
            return worst
        for w in np.atleast_1d(omegas):
            s = 1j * w
            N = self.N(s)
            err = np.linalg.norm(self.T(s) @ self.M(s) - N, 2)
            worst = max(worst, err / max(np.linalg.norm(N, 2), np.finfo(float).tiny))
        return worst


_MIN_ANGLE_SIN = 0.1


def _select_inputs(HG, m):
    """Pick m rows of HG: earliest rows first, skipping near-dependent ones.

    A row is accepted when its normalized component orthogonal to the rows
    already chosen has norm >= 0.1.  Falls back to column-pivoted QR on
    (HG)' if the scan comes up short.
    """
    chosen, basis = [], np.zeros((0, HG.shape[1]))
    for i, row in enumerate(HG):
        norm = np.linalg.norm(row)
        if norm == 0:
            continue
        v = row / norm
        resid = v - basis.T @ (basis @ v)
        if np.linalg.norm(resid) >= _MIN_ANGLE_SIN:
            chosen.append(i)
            basis = np.vstack([basis, resid / np.linalg.norm(resid)])
            if len(chosen) == m:
                return chosen
    _, _, piv = linalg.qr(HG.T, pivoting=True, mode="economic")
    return sorted(int(i) for i in piv[:m])


def decompose_relations(model, row_order_hint=None):
    """Expose the ``p - m`` dynamic relations of a continuous-time model.

    Parameters
    ----------
    model : CtModel
    row_order_hint : sequence of int, optional
        Row ordering of ``H``; the first ``m`` entries are used as inputs.
        Without a hint the inputs are the earliest well-separated rows of
        ``H G``.

    Raises
    ------
    NoInvertiblePartition
        If ``rank(HG) < m`` or the hinted rows give a singular ``H0 G``.
    """
    F, G, H = model.F, model.G, model.H
    n, m, p = model.n, model.m, model.p
    HG = H @ G
    if numerical_rank(HG, STRUCT_RANK_TOL) < m:
        raise NoInvertiblePartition(f"rank(HG) < m = {m}")
    if row_order_hint is None:
        inputs = _select_inputs(HG, m)
        outputs = [i for i in range(p) if i not in inputs]
    else:
        order = [int(i) for i in row_order_hint]
        if sorted(order) != list(range(p)):
            raise ValueError(f"row_order_hint must be a permutation of range({p})")
        inputs, outputs = order[:m], order[m:]
    H0, H1 = H[inputs], H[outputs]
    H0G = H0 @ G
    if np.linalg.cond(H0G) > PARTITION_COND_LIMIT:
        raise NoInvertiblePartition(f"H0 G is singular for input rows {inputs}")
    K = np.linalg.solve(H0G.T, G.T).T
    Gamma = F - K @ H0 @ F
    Z = linalg.null_space(H0)
    T_min = (Z.T @ Gamma @ Z, Z.T @ Gamma @ K, H1 @ Z, H1 @ K)
    return RelationDecomposition(
        input_indices=list(inputs),
        output_indices=list(outputs),
        T_real=(Gamma, K, H1 @ Gamma, H1 @ K),
        M_real=(F, G, H0 @ F, H0G),
        N_real=(F, G, H1 @ F, H1 @ G),
        T_min=T_min,
        relation_count=p - m,
    )


def kernel_residual(decomp, model, omegas):
    """Largest ``||L(i omega) Phi(i omega)||_2`` over the grid."""
    worst = 0.0
    if decomp.relation_count == 0:
        return worst
    order = decomp.input_indices + decomp.output_indices
    for sample in spectrum_ct(model, omegas):
        Phi = sample.density[np.ix_(order, order)]
        R = decomp.L(1j * sample.frequency) @ Phi
        worst = max(worst, float(np.linalg.norm(R, 2)))
    return worst
