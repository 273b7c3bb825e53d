"""scikit-learn style wrappers around the functional API.

The "data" passed to ``fit`` is a model object rather than a sample
matrix: lifting learns a finer-scale model from a coarse one.  The
wrappers give the transforms ``get_params``/``set_params``, cloning and a
familiar fitted-attribute convention (trailing underscore).  Output
wrapping (``set_output``) is switched off because the transforms return
model objects, not arrays.

>>> from timescale_lift.reference_models import example2_coarse
>>> FinestScaleSearch(q_max=8).fit(example2_coarse()).q_star_
5
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .analysis import DEFAULT_Q_MAX, finest_scale, relation_count
from .exceptions import TimescaleError
from .matfun import RANK_TOL
from .model import CtModel, DtModel, decompose_relations
from .resample import lift_general, lift_q, lift_to_ct, sample_ct, subsample

__all__ = [
    "InfeasibleLift",
    "Sampler",
    "Subsampler",
    "ContinuousLift",
    "DiscreteLift",
    "FinestScaleSearch",
    "RelationExtractor",
]


class InfeasibleLift(TimescaleError):
    """Raised by ``transform`` when the fitted lift was infeasible."""


def _check_model(model, kind):
    if not isinstance(model, kind):
        raise TypeError(f"expected {kind.__name__}, got {type(model).__name__}")
    return model


class Sampler(TransformerMixin, BaseEstimator, auto_wrap_output_keys=None):
    """Continuous model -> sampled discrete model with period ``h``."""

    def __init__(self, h=1.0):
        self.h = h

    def fit(self, model=None, y=None):
        if not float(self.h) > 0:
            raise ValueError(f"h must be positive, got {self.h}")
        return self

    def transform(self, model):
        return sample_ct(_check_model(model, CtModel), self.h)

    def __sklearn_is_fitted__(self):
        return True


class Subsampler(TransformerMixin, BaseEstimator, auto_wrap_output_keys=None):
    """Fine discrete model -> model of every ``q``-th sample."""

    def __init__(self, q=2):
        self.q = q

    def fit(self, model=None, y=None):
        if int(self.q) != self.q or self.q < 1:
            raise ValueError(f"q must be a positive integer, got {self.q}")
        return self

    def transform(self, model):
        return subsample(_check_model(model, DtModel), self.q)

    def __sklearn_is_fitted__(self):
        return True


class _LiftBase(TransformerMixin, BaseEstimator, auto_wrap_output_keys=None):
    def transform(self, model=None):
        """Return the lifted model learned in ``fit``."""
        check_is_fitted(self, "report_")
        if not self.report_.feasible:
            raise InfeasibleLift(f"{self.report_.failed_condition}: {self.report_.message}")
        return self.model_

    def fit_transform(self, model, y=None):
        return self.fit(model).transform()

    def _store(self, report):
        self.report_ = report
        self.feasible_ = report.feasible
        self.model_ = report.lifted
        self.n_relations_ = relation_count(report.lifted, self.rank_tol) if report.feasible else None
        return self


class ContinuousLift(_LiftBase):
    """Discrete model -> continuous model whose samples reproduce it.

    Parameters
    ----------
    h : float or None
        Sampling period; defaults to the model's ``step``.
    general : {"auto", True, False}
        Use the minimum-phase route for models with feedthrough.  ``"auto"``
        picks it whenever ``D != 0``.
    """

    def __init__(self, h=None, general="auto", rank_tol=RANK_TOL, psd_tol=None):
        self.h = h
        self.general = general
        self.rank_tol = rank_tol
        self.psd_tol = psd_tol

    def fit(self, model, y=None):
        model = _check_model(model, DtModel)
        use_general = model.has_feedthrough if self.general == "auto" else bool(self.general)
        lift = lift_general if use_general else lift_to_ct
        return self._store(lift(model, self.h, rank_tol=self.rank_tol, psd_tol=self.psd_tol))


class DiscreteLift(_LiftBase):
    """Coarse discrete model -> model running ``q`` times faster."""

    def __init__(self, q=2, rank_tol=RANK_TOL, psd_tol=None):
        self.q = q
        self.rank_tol = rank_tol
        self.psd_tol = psd_tol

    def fit(self, model, y=None):
        model = _check_model(model, DtModel)
        return self._store(lift_q(model, self.q, rank_tol=self.rank_tol, psd_tol=self.psd_tol))


class FinestScaleSearch(BaseEstimator):
    """Search q = 1..q_max for the finest consistent discrete model."""

    def __init__(self, q_max=DEFAULT_Q_MAX, continuous=False, h_per_step=None,
                 rank_tol=RANK_TOL, psd_tol=None):
        self.q_max = q_max
        self.continuous = continuous
        self.h_per_step = h_per_step
        self.rank_tol = rank_tol
        self.psd_tol = psd_tol

    def fit(self, model, y=None):
        model = _check_model(model, DtModel)
        res = finest_scale(model, q_max=self.q_max, h_per_step=self.h_per_step,
                           continuous=self.continuous, rank_tol=self.rank_tol,
                           psd_tol=self.psd_tol)
        self.result_ = res
        self.q_star_ = res.q_star
        self.verdicts_ = res.verdicts
        self.fine_model_ = res.fine_model
        self.n_relations_ = relation_count(res.finest_model, self.rank_tol)
        return self


class RelationExtractor(TransformerMixin, BaseEstimator, auto_wrap_output_keys=None):
    """Learn ``y = T(s) u`` from a continuous model.

    ``transform(omegas)`` returns ``T(i omega)`` stacked along the first
    axis, shape ``(len(omegas), p - m, m)``.
    """

    def __init__(self, row_order_hint=None):
        self.row_order_hint = row_order_hint

    def fit(self, model, y=None):
        model = _check_model(model, CtModel)
        dec = decompose_relations(model, self.row_order_hint)
        self.decomposition_ = dec
        self.input_indices_ = dec.input_indices
        self.output_indices_ = dec.output_indices
        self.n_relations_ = dec.relation_count
        return self

    def transform(self, omegas):
        check_is_fitted(self, "decomposition_")
        omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
        return np.stack([self.decomposition_.T(1j * w) for w in omegas])

    def fit_transform(self, model, y=None, omegas=None):
        if omegas is None:
            raise TypeError("fit_transform needs an omegas grid")
        return self.fit(model).transform(omegas)
