"""Sweeps over sampling period and subsampling factor, finest-scale search,
relation counting and a seeded trajectory simulator."""

import enum
import io
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .matfun import RANK_TOL, expm, lyap_ct, lyap_dt, noise_gramian, numerical_rank, sqrtm_psd
from .model import CtModel, DtModel
from .resample import lift_general, lift_q, lift_to_ct

__all__ = [
    "Axis",
    "SweepPoint",
    "SweepTable",
    "FinestScaleResult",
    "sweep_h",
    "sweep_h_lyapunov",
    "sweep_q",
    "finest_scale",
    "relation_count",
    "simulate_dt",
    "dyadic_grid",
]

THREADS_ENV = "TIMESCALE_LIFT_THREADS"
DEFAULT_Q_MAX = 16


class Axis(str, enum.Enum):
    SAMPLE_PERIOD = "SamplePeriod"
    SUBSAMPLE_FACTOR = "SubsampleFactor"

    def __str__(self):
        return self.value


@dataclass(frozen=True, eq=False)
class SweepPoint:
    value: float
    eigenvalues: np.ndarray
    feasible: bool
    failed_condition: str = None


@dataclass(eq=False)
class SweepTable:
    axis: Axis
    points: list = field(default_factory=list)

    def eigenvalue_matrix(self):
        """Points x eigenvalues array, NaN-padded for rows without values."""
        width = max((len(p.eigenvalues) for p in self.points), default=0)
        out = np.full((len(self.points), width), np.nan)
        for i, p in enumerate(self.points):
            out[i, : len(p.eigenvalues)] = p.eigenvalues
        return out

    def to_csv(self):
        """CSV text: ``axis_value, eig_1..eig_n, feasible`` with LF endings.

        Floats use the shortest repr that round-trips; rows without
        eigenvalues leave those cells empty.
        """
        width = max((len(p.eigenvalues) for p in self.points), default=0)
        buf = io.StringIO()
        header = ["axis_value"] + [f"eig_{k}" for k in range(1, width + 1)] + ["feasible"]
        buf.write(",".join(header) + "\n")
        for p in self.points:
            value = repr(int(p.value)) if self.axis is Axis.SUBSAMPLE_FACTOR else repr(float(p.value))
            eigs = [repr(float(x)) for x in p.eigenvalues]
            eigs += [""] * (width - len(eigs))
            buf.write(",".join([value] + eigs + ["true" if p.feasible else "false"]) + "\n")
        return buf.getvalue()


@dataclass(eq=False)
class FinestScaleResult:
    """Outcome of lifting a coarse model over q = 1..q_max.

    ``fine_model`` is the discrete lift at ``q_star``; ``continuous`` holds
    the continuous-lift report when one was requested.
    """

    q_star: int
    verdicts: dict
    fine_model: DtModel
    reports: dict = field(default_factory=dict)
    continuous: object = None

    @property
    def finest_model(self):
        if self.continuous is not None and self.continuous.feasible:
            return self.continuous.lifted
        return self.fine_model

    @property
    def relations(self):
        return relation_count(self.finest_model)


def _n_threads():
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _ordered_map(fn, items):
    """map() that may run on a thread pool; output order follows input order."""
    items = list(items)
    threads = min(_n_threads(), len(items))
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def dyadic_grid(k_max=7):
    """``[1, 1/2, ..., 2**-k_max]``."""
    return [2.0**-k for k in range(k_max + 1)]


def sweep_h(model, periods):
    """Eigenvalues (descending) of the one-period noise Gramian for each h."""
    periods = sorted(float(h) for h in periods)
    if not periods:
        raise ValueError("empty sampling-period grid")

    def point(h):
        Q = noise_gramian(model.F, model.G, h)
        return SweepPoint(h, np.linalg.eigvalsh(Q)[::-1], True)

    return SweepTable(Axis.SAMPLE_PERIOD, _ordered_map(point, periods))


def sweep_h_lyapunov(model, periods):
    """Same table as :func:`sweep_h`, computed as ``P - e^{Fh} P e^{F'h}``.

    ``P`` solves ``FP + PF' + GG' = 0``; this is the second of the two
    equivalent routes and is kept for cross-checking.
    """
    P = lyap_ct(model.F, model.G @ model.G.T)
    points = []
    for h in sorted(float(h) for h in periods):
        A = expm(model.F, h)
        M = P - A @ P @ A.T
        points.append(SweepPoint(h, np.linalg.eigvalsh(0.5 * (M + M.T))[::-1], True))
    return SweepTable(Axis.SAMPLE_PERIOD, points)


def sweep_q(model, qs, rank_tol=RANK_TOL, psd_tol=None):
    """Certificate eigenvalues and lift verdict for each subsampling factor."""
    qs = sorted(int(q) for q in qs)
    if not qs:
        raise ValueError("empty subsampling-factor grid")
    if qs[0] < 1:
        raise ValueError("subsampling factors must be positive")

    def point(q):
        rep = lift_q(model, q, rank_tol=rank_tol, psd_tol=psd_tol)
        eigs = rep.certificate.eigenvalues if rep.certificate is not None else np.empty(0)
        failed = None if rep.failed_condition is None else str(rep.failed_condition)
        return SweepPoint(q, eigs, rep.feasible, failed)

    return SweepTable(Axis.SUBSAMPLE_FACTOR, _ordered_map(point, qs))


def finest_scale(model, q_max=DEFAULT_Q_MAX, h_per_step=None, continuous=False,
                 rank_tol=RANK_TOL, psd_tol=None):
    """Largest q for which the model admits a q-times-faster lift.

    Every q in 1..q_max is tested; feasibility is not assumed monotone.
    With ``continuous=True`` the continuous lift of the input model is also
    attempted with period ``h_per_step`` (default ``model.step``).
    """
    if q_max < 1:
        raise ValueError("q_max must be at least 1")
    qs = list(range(1, int(q_max) + 1))
    reports = dict(zip(qs, _ordered_map(
        lambda q: lift_q(model, q, rank_tol=rank_tol, psd_tol=psd_tol), qs)))
    feasible = [q for q, rep in reports.items() if rep.feasible]
    q_star = max(feasible)
    fine = model if q_star == 1 else reports[q_star].lifted
    cont = None
    if continuous:
        h = model.step if h_per_step is None else float(h_per_step)
        if model.has_feedthrough:
            cont = lift_general(model, h, rank_tol=rank_tol, psd_tol=psd_tol)
        else:
            cont = lift_to_ct(model, h, rank_tol=rank_tol, psd_tol=psd_tol)
    return FinestScaleResult(
        q_star=q_star,
        verdicts={q: rep.summary() for q, rep in reports.items()},
        fine_model=fine,
        reports=reports,
        continuous=cont,
    )


def relation_count(model, rank_tol=RANK_TOL):
    """Number of dynamic relations ``p - m``.

    ``m`` is ``rank(G)`` for a continuous model and ``rank([G; J])`` for a
    discrete one.
    """
    if isinstance(model, CtModel):
        return model.p - numerical_rank(model.G, rank_tol)
    return model.p - numerical_rank(np.vstack([model.G, model.J]), rank_tol)


def simulate_dt(model, steps, seed):
    """Sample path of the output, shape ``(steps, p)``.

    Uses numpy's PCG64 generator seeded with ``seed``; the state starts from
    the stationary covariance and the noise is standard normal.
    """
    steps = int(steps)
    if steps < 0:
        raise ValueError("steps must be non-negative")
    rng = np.random.Generator(np.random.PCG64(seed))
    A, B, C, D = model.A, model.B, model.C, model.D
    Y = np.zeros((steps, model.p))
    if steps == 0:
        return Y
    P = lyap_dt(A, B @ B.T)
    x = sqrtm_psd(P) @ rng.standard_normal(model.n)
    V = rng.standard_normal((steps, model.r))
    BV = V @ B.T
    X = np.empty((steps, model.n))
    for k in range(steps):
        X[k] = x
        x = A @ x + BV[k]
    return X @ C.T + V @ D.T
