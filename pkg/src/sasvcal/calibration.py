"""Joint affine calibration of CM and ASV scores for the composed SASV LLR.

The calibrated SASV LLR of a trial with raw scores ``(s_cm, s_asv)`` is

    -log( q_bn * exp(-(a1 * s_asv + a0)) + q_st * exp(-(c1 * s_cm + c0)) )

where ``q_bn, q_st`` are the conditional effective reject priors.  The four
parameters are fitted by prior-weighted logistic regression over the three
populated classes BT, BN and ST, with each class weighted by its effective
prior and the logit offset set to the effective prior log-odds of BT.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .decision import (
    ConditionalRejectPriors,
    CostModel,
    LlrPair,
    PriorModel,
    TrialClass,
    conditional_reject_priors,
    effective_priors,
    log_weights,
    neg_log_mix,
    neg_log_mix_array,
)
from .errors import (
    DataError,
    DegenerateRejectMass,
    EmptyClass,
    MaxIterations,
    NonFiniteObjective,
    UnsupportedSpoofNontarget,
)
from .lbfgs import minimize_lbfgs

FIT_CLASSES = (TrialClass.BT, TrialClass.BN, TrialClass.ST)
_SIGN = {TrialClass.BT: 1.0, TrialClass.BN: -1.0, TrialClass.ST: -1.0}


@dataclass(frozen=True)
class CalibrationParams:
    """ASV map ``a1 * s + a0`` and CM map ``c1 * s + c0``.  Scales may be negative."""

    a0: float = 0.0
    a1: float = 1.0
    c0: float = 0.0
    c1: float = 1.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in self.as_array()):
            raise DataError(f"calibration parameters must be finite: {self}")

    @classmethod
    def identity(cls) -> "CalibrationParams":
        return cls()

    @classmethod
    def from_array(cls, v) -> "CalibrationParams":
        a0, a1, c0, c1 = (float(t) for t in v)
        return cls(a0, a1, c0, c1)

    def as_array(self) -> np.ndarray:
        return np.array([self.a0, self.a1, self.c0, self.c1])


@dataclass(frozen=True)
class CalibrationDataset:
    """Raw (cm, asv) score pairs of the BT, BN and ST classes."""

    cm: dict
    asv: dict

    def __post_init__(self):
        for c in FIT_CLASSES:
            cm = np.asarray(self.cm.get(c, ()), dtype=float)
            asv = np.asarray(self.asv.get(c, ()), dtype=float)
            if cm.shape != asv.shape or cm.ndim != 1:
                raise DataError(f"class {c.value}: cm and asv must be 1-D and of equal length")
            if cm.size == 0:
                raise EmptyClass(f"calibration class {c.value} has no trials")
            if not (np.all(np.isfinite(cm)) and np.all(np.isfinite(asv))):
                raise DataError(f"class {c.value}: scores must be finite")
            self.cm[c] = cm
            self.asv[c] = asv

    @classmethod
    def from_arrays(cls, cm, asv, classes) -> "CalibrationDataset":
        """Group parallel arrays by class; SN trials are not used for fitting and are skipped."""
        cm = np.asarray(cm, dtype=float)
        asv = np.asarray(asv, dtype=float)
        labels = np.array([TrialClass(c).index for c in classes], dtype=np.int8)
        return cls(
            cm={c: cm[labels == c.index] for c in FIT_CLASSES},
            asv={c: asv[labels == c.index] for c in FIT_CLASSES},
        )

    def count(self, c: TrialClass) -> int:
        return int(self.cm[c].size)


@dataclass(frozen=True)
class OptimizerSettings:
    gtol: float = 1e-8
    max_iter: int = 1000
    history: int = 10
    c1: float = 1e-4
    c2: float = 0.9


@dataclass(frozen=True)
class CalibrationResult:
    params: CalibrationParams
    final_objective: float
    initial_objective: float
    iterations: int
    converged: bool
    gradient_norm: float
    trace: tuple = field(default=(), repr=False)
    message: str = ""


def corrected_sasv_llr_array(cm, asv, params: CalibrationParams, cond: ConditionalRejectPriors) -> np.ndarray:
    if cond.p_sn > 0:
        raise UnsupportedSpoofNontarget("calibrated composition requires p_sn == 0")
    u = params.a1 * np.asarray(asv, dtype=float) + params.a0
    v = params.c1 * np.asarray(cm, dtype=float) + params.c0
    log_w = [math.log(p) if p > 0 else None for p in (cond.p_bn, cond.p_st)]
    return neg_log_mix_array(log_w, (-u, -v))


def corrected_sasv_llr(raw: LlrPair, params: CalibrationParams, cond: ConditionalRejectPriors) -> float:
    """Calibrated SASV LLR of one trial."""
    if cond.p_sn > 0:
        raise UnsupportedSpoofNontarget("calibrated composition requires p_sn == 0")
    u = params.a1 * raw.llr_asv + params.a0
    v = params.c1 * raw.llr_cm + params.c0
    return neg_log_mix(log_weights(cond), (-u, -v, 0.0))


def softplus(x):
    return np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))


def _sigmoid(x):
    e = np.exp(-np.abs(x))
    return np.where(x >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


class _Problem:
    """Precomputed class weights and data for objective/gradient evaluation."""

    def __init__(self, data: CalibrationDataset, costs: CostModel, priors: PriorModel):
        if priors.p_sn > 0:
            raise UnsupportedSpoofNontarget("calibration is defined for p_sn == 0")
        ep = effective_priors(costs, priors)
        reject = ep.ep_bn + ep.ep_st
        if not (ep.ep_bt > 0 and reject > 0):
            raise DegenerateRejectMass("calibration needs positive effective mass on both hypotheses")
        self.cond = conditional_reject_priors(ep)
        self.tau = math.log(ep.ep_bt / reject)
        ep_of = {TrialClass.BT: ep.ep_bt, TrialClass.BN: ep.ep_bn, TrialClass.ST: ep.ep_st}
        self.log_q = (math.log(self.cond.p_bn) if self.cond.p_bn > 0 else -np.inf,
                      math.log(self.cond.p_st) if self.cond.p_st > 0 else -np.inf)
        self.blocks = [
            (data.cm[c], data.asv[c], _SIGN[c], ep_of[c] / data.count(c)) for c in FIT_CLASSES
        ]

    @np.errstate(over="ignore", invalid="ignore")
    def value_and_grad(self, p: np.ndarray):
        a0, a1, c0, c1 = p
        total = 0.0
        grad = np.zeros(4)
        for cm, asv, sign, w in self.blocks:
            # log of the two reject terms: x_asv = log q_bn - u, x_cm = log q_st - v
            x_asv = self.log_q[0] - (a1 * asv + a0)
            x_cm = self.log_q[1] - (c1 * cm + c0)
            m = np.maximum(x_asv, x_cm)
            e_asv = np.exp(x_asv - m)
            e_cm = np.exp(x_cm - m)
            s = e_asv + e_cm
            llr = -(m + np.log(s))
            margin = sign * (llr + self.tau)
            total += w * float(np.sum(softplus(-margin)))
            # d loss / d llr, then chain through the soft-min weights of the two terms
            dl = -sign * _sigmoid(-margin) * w
            r_asv = dl * (e_asv / s)
            r_cm = dl * (e_cm / s)
            grad += [np.sum(r_asv), np.sum(r_asv * asv), np.sum(r_cm), np.sum(r_cm * cm)]
        return total, grad


def weighted_logistic_objective(data: CalibrationDataset, params: CalibrationParams,
                                costs: CostModel, priors: PriorModel) -> float:
    return _Problem(data, costs, priors).value_and_grad(params.as_array())[0]


def gradient(data: CalibrationDataset, params: CalibrationParams,
             costs: CostModel, priors: PriorModel) -> np.ndarray:
    """Analytic gradient ordered as (d/da0, d/da1, d/dc0, d/dc1)."""
    return _Problem(data, costs, priors).value_and_grad(params.as_array())[1]


def fit_calibration(data: CalibrationDataset, costs: CostModel, priors: PriorModel,
                    settings: OptimizerSettings = OptimizerSettings()) -> CalibrationResult:
    """Fit the four calibration parameters starting from the identity map.

    Raises NonFiniteObjective if the loss is not finite at the start or the
    optimizer ends on a non-finite value; warns with MaxIterations if the
    gradient tolerance was not reached.
    """
    problem = _Problem(data, costs, priors)
    x0 = CalibrationParams.identity().as_array()
    f0, _ = problem.value_and_grad(x0)
    if not math.isfinite(f0):
        raise NonFiniteObjective(tuple(x0), f0)
    res = minimize_lbfgs(problem.value_and_grad, x0, gtol=settings.gtol, max_iter=settings.max_iter,
                         history=settings.history, c1=settings.c1, c2=settings.c2)
    if not math.isfinite(res.fun) or not np.all(np.isfinite(res.x)):
        raise NonFiniteObjective(tuple(res.x), res.fun)
    if not res.converged:
        warnings.warn(MaxIterations(f"calibration did not converge: {res.message}"), stacklevel=2)
    return CalibrationResult(
        params=CalibrationParams.from_array(res.x),
        final_objective=res.fun,
        initial_objective=f0,
        iterations=res.nit,
        converged=res.converged,
        gradient_norm=float(np.max(np.abs(res.grad))),
        trace=tuple(res.trace),
        message=res.message,
    )


def calibrated_cond(costs: CostModel, priors: PriorModel) -> ConditionalRejectPriors:
    """Conditional effective reject priors used by the calibrated composition."""
    return conditional_reject_priors(effective_priors(costs, priors))
