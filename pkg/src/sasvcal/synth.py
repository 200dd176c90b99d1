"""Synthetic SASV trials with known LLRs, plus naive reference oracles.

Latent CM and ASV scores are unit-variance Gaussians with means ``+/- sep/2``
(bona fide vs spoof, target vs nontarget).  Under that model the exact LLR
of a latent draw ``s`` is ``sep * s``, so the emitted ground-truth scores
are perfectly calibrated LLRs.  Raw scores are an affine corruption of them.

Classes draw their latents as follows:

    BT: CM bona fide, ASV target
    BN: CM bona fide, ASV nontarget
    ST: CM spoof,     ASV target

With CM and ASV latents independent, composing the true LLRs gives the
exact SASV LLR.

Randomness: numpy's counter-based Philox bit generator, one independent
stream per class spawned from ``SeedSequence(seed)``.  Draws are platform
independent for a fixed numpy major version.

The ``oracle_*`` functions are deliberately naive O(N^2) reference
implementations used to cross-check :mod:`sasvcal.metrics` and
:mod:`sasvcal.decision`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, stats

from .decision import CostModel, PriorModel, TrialClass
from .errors import InvalidConfig
from .scoreio import JoinedTrialSet

SYNTH_CLASSES = (TrialClass.BT, TrialClass.BN, TrialClass.ST)
# (CM latent is bona fide, ASV latent is target) per class
_LATENT_SIDE = {TrialClass.BT: (True, True), TrialClass.BN: (True, False), TrialClass.ST: (False, True)}


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 0
    n_per_class: tuple = (1000, 1000, 1000)
    cm_separation: float = 3.0
    asv_separation: float = 4.0
    cm_corruption: tuple = (1.0, 0.0)
    asv_corruption: tuple = (1.0, 0.0)

    def __post_init__(self):
        n = self.n_per_class
        if isinstance(n, int):
            n = (n, n, n)
            object.__setattr__(self, "n_per_class", n)
        if len(n) != 3 or any(int(k) <= 0 for k in n):
            raise InvalidConfig("n_per_class needs three positive counts (BT, BN, ST)")
        if not (self.cm_separation > 0 and self.asv_separation > 0):
            raise InvalidConfig("separations must be positive")
        for name in ("cm_corruption", "asv_corruption"):
            scale, offset = getattr(self, name)
            if scale == 0 or not (math.isfinite(scale) and math.isfinite(offset)):
                raise InvalidConfig(f"{name}: scale must be nonzero and finite")
        if not 0 <= self.seed < 2**64:
            raise InvalidConfig("seed must fit in 64 bits")


@dataclass(frozen=True)
class SynthTrialSet:
    trials: JoinedTrialSet
    true_llr_cm: np.ndarray
    true_llr_asv: np.ndarray
    config: SynthConfig = field(repr=False)


def _class_streams(seed: int):
    children = np.random.SeedSequence(seed).spawn(len(SYNTH_CLASSES))
    return [np.random.Generator(np.random.Philox(ss)) for ss in children]


def generate(cfg: SynthConfig) -> SynthTrialSet:
    ids, classes, llr_cm, llr_asv = [], [], [], []
    for c, rng, n in zip(SYNTH_CLASSES, _class_streams(cfg.seed), cfg.n_per_class):
        cm_bona, asv_target = _LATENT_SIDE[c]
        mu_cm = cfg.cm_separation / 2 * (1 if cm_bona else -1)
        mu_asv = cfg.asv_separation / 2 * (1 if asv_target else -1)
        s_cm = mu_cm + rng.standard_normal(n)
        s_asv = mu_asv + rng.standard_normal(n)
        llr_cm.append(cfg.cm_separation * s_cm)
        llr_asv.append(cfg.asv_separation * s_asv)
        ids.extend(f"{c.value.lower()}{i:07d}" for i in range(n))
        classes.extend([c] * n)
    llr_cm = np.concatenate(llr_cm)
    llr_asv = np.concatenate(llr_asv)
    (cs, co), (as_, ao) = cfg.cm_corruption, cfg.asv_corruption
    trials = JoinedTrialSet(
        trial_ids=tuple(ids),
        classes=tuple(classes),
        cm=cs * llr_cm + co,
        asv=as_ * llr_asv + ao,
    )
    return SynthTrialSet(trials, llr_cm, llr_asv, cfg)


def analytic_cllr(separation: float) -> float:
    """Expected Cllr (bits) of exact LLRs from the equal-variance Gaussian model.

    The positive-class LLR is N(d^2/2, d^2) with d the separation; by symmetry
    the negative class contributes the same amount.
    """
    d = separation
    dist = stats.norm(loc=d * d / 2, scale=d)

    def integrand(x):
        return dist.pdf(x) * (max(-x, 0.0) + math.log1p(math.exp(-abs(x)))) / math.log(2)

    lo, hi = dist.ppf(1e-15), dist.ppf(1 - 1e-15)
    value, _ = integrate.quad(integrand, lo, hi, epsabs=1e-13, epsrel=1e-11, limit=200)
    return value


# --- naive oracles ---------------------------------------------------------


def _all_candidates(scores):
    # every score, the double just below every score, and both infinities
    out = [-math.inf, math.inf]
    for s in scores:
        out.append(float(s))
        out.append(math.nextafter(float(s), -math.inf))
    return out


def _naive_rates(scores, labels, t):
    # full rescan of every trial at every threshold: O(N) per call, no sorting
    groups = (labels == 0, labels == 1, labels >= 2)
    accepted = scores > t
    out = []
    for g, m in enumerate(groups):
        n = int(np.count_nonzero(m))
        hits = int(np.count_nonzero(m & (accepted if g else ~accepted)))
        out.append(hits / n if n else 0.0)
    return tuple(out)


def oracle_min_a_dcf(scores, labels, costs: CostModel, priors: PriorModel):
    """Exhaustive a-DCF minimum; returns (value, a threshold attaining it)."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=int)
    best = (math.inf, None)
    for t in _all_candidates(scores):
        pm, pfi, pfs = _naive_rates(scores, labels, t)
        cost = (costs.c_miss * priors.p_bt) * pm + (costs.c_fa_imp * priors.p_bn) * pfi \
            + (costs.c_fa_spoof * (priors.p_st + priors.p_sn)) * pfs
        if cost < best[0]:
            best = (cost, t)
    return best


def oracle_min_dcf(scores, labels, costs: CostModel, priors: PriorModel):
    """Normalized minimum DCF: exhaustive a-DCF minimum over the best default cost."""
    value, _ = oracle_min_a_dcf(scores, labels, costs, priors)
    w_miss = costs.c_miss * priors.p_bt
    w_rej = costs.c_fa_imp * priors.p_bn + costs.c_fa_spoof * (priors.p_st + priors.p_sn)
    return value / min(w_miss, w_rej)


def oracle_eer(pos, neg):
    """EER by brute-force threshold enumeration and linear crossing interpolation."""
    pos = np.asarray(pos, dtype=float)
    neg = np.asarray(neg, dtype=float)
    thresholds = sorted(set(_all_candidates(np.concatenate([pos, neg]))))
    curve = []
    for t in thresholds:
        pm = int(np.count_nonzero(pos <= t)) / len(pos)
        pf = int(np.count_nonzero(neg > t)) / len(neg)
        curve.append((pm, pf))
    for k, (pm1, pf1) in enumerate(curve):
        if pm1 >= pf1:
            break
    if k == 0:
        return curve[0][0]
    pm0, pf0 = curve[k - 1]
    denom = (pm1 - pm0) - (pf1 - pf0)
    if denom == 0:
        return pm1
    t = (pf0 - pm0) / denom
    return pm0 + t * (pm1 - pm0)


def oracle_bayes_decisions(likelihoods, costs: CostModel, priors: PriorModel):
    """Direct minimum-expected-cost decisions from raw class likelihoods.

    ``likelihoods`` is an iterable of (P(X|BT), P(X|BN), P(X|ST), P(X|SN)).
    Accept iff the expected cost of rejecting exceeds that of accepting.
    """
    out = []
    for l_bt, l_bn, l_st, l_sn in likelihoods:
        num = l_bt * priors.p_bt * costs.c_miss
        den = (l_bn * priors.p_bn * costs.c_fa_imp + l_st * priors.p_st * costs.c_fa_spoof
               + l_sn * priors.p_sn * costs.c_fa_spoof_imp)
        out.append(num > den)
    return out
