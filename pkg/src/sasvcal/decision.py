"""Class, cost and prior algebra for spoofing-robust speaker verification.

A SASV trial belongs to one of four joint classes: bona fide target (BT),
bona fide nontarget (BN), spoofed target (ST) and spoofed nontarget (SN).
BT is the accept hypothesis, the other three together form the reject
hypothesis.  Given a CM LLR (BT vs ST) and an ASV LLR (BT vs BN), the SASV
LLR is

    -log( p_bn * exp(-llr_asv) + p_st * exp(-llr_cm) + p_sn * exp(-llr_cm - llr_asv) )

with ``p_*`` the priors of the reject classes conditioned on the reject
hypothesis.  Decisions under arbitrary costs reduce to unit costs by
switching to *effective priors*.

All logarithms are natural.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DegenerateRejectMass, InvalidConfig, ZeroNormalizer

SUM_TOL = 1e-12


class TrialClass(str, enum.Enum):
    BT = "BT"
    BN = "BN"
    ST = "ST"
    SN = "SN"

    @property
    def index(self) -> int:
        return _CLASS_INDEX[self]

    @property
    def is_accept(self) -> bool:
        return self is TrialClass.BT

    @property
    def is_bona(self) -> bool:
        return self in (TrialClass.BT, TrialClass.BN)


CLASSES = (TrialClass.BT, TrialClass.BN, TrialClass.ST, TrialClass.SN)
_CLASS_INDEX = {c: i for i, c in enumerate(CLASSES)}


def _check_probabilities(name, values):
    for v in values:
        if not (0.0 <= v <= 1.0):
            raise InvalidConfig(f"{name}: probability {v!r} outside [0, 1]")
    total = math.fsum(values)
    if abs(total - 1.0) > SUM_TOL:
        raise InvalidConfig(f"{name}: probabilities sum to {total!r}, not 1")


@dataclass(frozen=True)
class CostModel:
    c_miss: float = 1.0
    c_fa_imp: float = 1.0
    c_fa_spoof: float = 1.0
    c_fa_spoof_imp: float = 1.0

    def __post_init__(self):
        vals = self.as_tuple()
        if any(not math.isfinite(c) or c < 0 for c in vals):
            raise InvalidConfig(f"costs must be finite and nonnegative, got {vals}")
        if not any(c > 0 for c in vals):
            raise InvalidConfig("at least one cost must be positive")

    @classmethod
    def asvspoof5(cls) -> "CostModel":
        """Challenge operating point: both false-accept types cost 10, a miss costs 1."""
        return cls(c_miss=1.0, c_fa_imp=10.0, c_fa_spoof=10.0, c_fa_spoof_imp=10.0)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.c_miss, self.c_fa_imp, self.c_fa_spoof, self.c_fa_spoof_imp)

    def scaled(self, k: float) -> "CostModel":
        return CostModel(*(k * c for c in self.as_tuple()))


@dataclass(frozen=True)
class PriorModel:
    """Joint priors of the four trial classes."""

    p_bt: float
    p_bn: float
    p_st: float
    p_sn: float = 0.0

    def __post_init__(self):
        _check_probabilities("PriorModel", self.as_tuple())
        if not self.p_bt > 0:
            raise InvalidConfig("PriorModel: p_bt must be positive")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.p_bt, self.p_bn, self.p_st, self.p_sn)


@dataclass(frozen=True)
class EffectivePriors:
    ep_bt: float
    ep_bn: float
    ep_st: float
    ep_sn: float

    def __post_init__(self):
        _check_probabilities("EffectivePriors", self.as_tuple())

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.ep_bt, self.ep_bn, self.ep_st, self.ep_sn)

    @property
    def reject_mass(self) -> float:
        return self.ep_bn + self.ep_st + self.ep_sn


@dataclass(frozen=True)
class ConditionalRejectPriors:
    """Priors of BN, ST, SN given that the trial should be rejected."""

    p_bn: float
    p_st: float
    p_sn: float = 0.0

    def __post_init__(self):
        _check_probabilities("ConditionalRejectPriors", self.as_tuple())

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.p_bn, self.p_st, self.p_sn)


@dataclass(frozen=True)
class LlrPair:
    llr_cm: float
    llr_asv: float

    def __post_init__(self):
        if not (math.isfinite(self.llr_cm) and math.isfinite(self.llr_asv)):
            raise InvalidConfig(f"LLRs must be finite, got {self.llr_cm!r}, {self.llr_asv!r}")


AnyPriors = Union[PriorModel, EffectivePriors]


def effective_priors(costs: CostModel, priors: PriorModel) -> EffectivePriors:
    """Absorb the costs into the priors so that all costs become 1.

    Each class prior is multiplied by the cost of the error made on that
    class (the miss cost for BT, the matching false-accept cost otherwise)
    and the result is renormalized.
    """
    weighted = [p * c for p, c in zip(priors.as_tuple(), costs.as_tuple())]
    z = weighted[0] + weighted[1] + weighted[2] + weighted[3]
    if not z > 0:
        raise ZeroNormalizer(f"cost-weighted prior mass is zero (costs={costs}, priors={priors})")
    return EffectivePriors(*(w / z for w in weighted))


def conditional_reject_priors(priors: AnyPriors) -> ConditionalRejectPriors:
    _, bn, st, sn = priors.as_tuple()
    mass = bn + st + sn
    if not mass > 0:
        raise DegenerateRejectMass("reject-side prior mass is zero")
    return ConditionalRejectPriors(bn / mass, st / mass, sn / mass)


def neg_log_mix(log_w, exponents):
    # -log(sum_k exp(log_w[k] + exponents[k])) over the terms with nonzero weight
    terms = [lw + e for lw, e in zip(log_w, exponents) if lw is not None]
    m = max(terms)
    return -(m + math.log(math.fsum(math.exp(t - m) for t in terms)))


def log_weights(cond: ConditionalRejectPriors):
    return [math.log(p) if p > 0 else None for p in cond.as_tuple()]


def sasv_llr(llrs: LlrPair, cond: ConditionalRejectPriors) -> float:
    """Compose a CM LLR and an ASV LLR into the SASV LLR.

    The spoof-nontarget likelihood ratio is approximated by
    ``exp(llr_cm + llr_asv)``, i.e. spoof and speaker evidence are treated as
    independent.  With ``cond.p_sn == 0`` the approximation is not used.
    """
    exps = (-llrs.llr_asv, -llrs.llr_cm, -llrs.llr_cm - llrs.llr_asv)
    return neg_log_mix(log_weights(cond), exps)


def sasv_llr_array(llr_cm, llr_asv, cond: ConditionalRejectPriors) -> np.ndarray:
    """Vectorized :func:`sasv_llr` over arrays of LLRs."""
    llr_cm = np.asarray(llr_cm, dtype=float)
    llr_asv = np.asarray(llr_asv, dtype=float)
    return neg_log_mix_array(log_weights(cond), (-llr_asv, -llr_cm, -llr_cm - llr_asv))


def neg_log_mix_array(log_w, exponents) -> np.ndarray:
    terms = [lw + e for lw, e in zip(log_w, exponents) if lw is not None]
    if len(terms) == 1:
        return -terms[0]
    m = np.maximum.reduce(terms)
    acc = np.zeros_like(m)
    for t in terms:
        acc += np.exp(t - m)
    return -(m + np.log(acc))


def bayes_threshold(costs: CostModel, priors: PriorModel) -> float:
    """Minimum-expected-cost threshold on a SASV LLR.

    The LLR must have been composed with the conditional *effective* reject
    priors.  Returns +inf when the accept side has no effective mass (always
    reject) and -inf when the reject side has none (always accept).
    """
    ep = effective_priors(costs, priors)
    reject = ep.reject_mass
    if ep.ep_bt == 0:
        return math.inf
    if reject == 0:
        return -math.inf
    return math.log(reject / ep.ep_bt)


def bayes_accept(sasv_llr: float, costs: CostModel, priors: PriorModel) -> bool:
    return bool(sasv_llr > bayes_threshold(costs, priors))


def compose_for_decision(llrs: LlrPair, costs: CostModel, priors: PriorModel) -> float:
    """SASV LLR composed with the conditional effective priors of ``(costs, priors)``."""
    return sasv_llr(llrs, conditional_reject_priors(effective_priors(costs, priors)))
