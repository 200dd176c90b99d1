"""Score-level toolkit for spoofing-robust speaker verification (SASV).

Compose countermeasure and speaker-verification LLRs into a SASV LLR under
effective priors, calibrate both score streams jointly by prior-weighted
logistic regression, and evaluate with EER, DCF, Cllr and a-DCF.
"""

from .calibration import (
    CalibrationDataset,
    CalibrationParams,
    CalibrationResult,
    OptimizerSettings,
    corrected_sasv_llr,
    fit_calibration,
    weighted_logistic_objective,
)
from .decision import (
    ConditionalRejectPriors,
    CostModel,
    EffectivePriors,
    LlrPair,
    PriorModel,
    TrialClass,
    bayes_accept,
    bayes_threshold,
    conditional_reject_priors,
    effective_priors,
    sasv_llr,
)
from .metrics import ADcfConfig, MetricsReport, ScoredTrials, evaluate

__version__ = "0.1.0"
