"""Convert linear stochastic state-space models between time scales.

Sampling and subsampling move a model to a coarser time scale; lifting
goes the other way and, at the finest consistent scale, exposes the
deterministic dynamic relations that sampling hides.
"""

from .analysis import (
    FinestScaleResult,
    SweepTable,
    finest_scale,
    relation_count,
    simulate_dt,
    sweep_h,
    sweep_q,
)
from .estimators import (
    ContinuousLift,
    DiscreteLift,
    FinestScaleSearch,
    RelationExtractor,
    Sampler,
    Subsampler,
)
from .matfun import (
    expm,
    logm_principal,
    lyap_ct,
    lyap_dt,
    noise_gramian,
    numerical_rank,
    psd_check,
    psd_rank_factor,
    rootq_principal,
)
from .model import (
    CtModel,
    DtModel,
    RelationDecomposition,
    decompose_relations,
    kernel_residual,
    spectrum_ct,
    spectrum_dt,
    validate_ct,
    validate_dt,
)
from .resample import (
    FailedCondition,
    LiftReport,
    MinPhaseResult,
    lift_general,
    lift_q,
    lift_to_ct,
    minphase,
    sample_ct,
    subsample,
)

__version__ = "0.1.0"
