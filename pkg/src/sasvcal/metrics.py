"""Detection metrics: EER, (min/act) DCF, Cllr and min a-DCF.

Threshold convention used throughout: a trial is accepted iff its score is
strictly greater than the threshold.  Sweeps run over the canonical
threshold set: -inf, the midpoints between consecutive distinct sorted
scores, and +inf.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Iterable, Sequence

import numpy as np

from .decision import CLASSES, CostModel, PriorModel, TrialClass, bayes_threshold
from .errors import DataError, EmptyClass

LN2 = math.log(2.0)

BONA = frozenset({TrialClass.BT, TrialClass.BN})
SPOOF = frozenset({TrialClass.ST, TrialClass.SN})
ACCEPT = frozenset({TrialClass.BT})
REJECT = frozenset({TrialClass.BN, TrialClass.ST, TrialClass.SN})


@dataclass(frozen=True)
class ScoredTrials:
    """Scores with their trial classes; ``labels`` holds class indices 0..3 (BT, BN, ST, SN)."""

    scores: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=float)
        labels = np.asarray(self.labels, dtype=np.int8)
        if scores.ndim != 1 or scores.shape != labels.shape:
            raise DataError("scores and labels must be 1-D arrays of equal length")
        if not np.all(np.isfinite(scores)):
            raise DataError("scores must be finite")
        if labels.size and (labels.min() < 0 or labels.max() > 3):
            raise DataError("labels must be class indices in 0..3")
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_classes(cls, scores: Sequence[float], classes: Iterable[TrialClass | str]):
        labels = [TrialClass(c).index for c in classes]
        return cls(np.asarray(scores, dtype=float), np.asarray(labels, dtype=np.int8))

    @classmethod
    def from_groups(cls, bt=(), bn=(), st=(), sn=()):
        groups = [np.asarray(g, dtype=float).ravel() for g in (bt, bn, st, sn)]
        labels = np.concatenate([np.full(g.size, i, dtype=np.int8) for i, g in enumerate(groups)])
        return cls(np.concatenate(groups), labels)

    def counts(self) -> dict[TrialClass, int]:
        n = np.bincount(self.labels, minlength=4)
        return {c: int(n[i]) for i, c in enumerate(CLASSES)}

    def mask(self, classes: Iterable[TrialClass]) -> np.ndarray:
        return np.isin(self.labels, [TrialClass(c).index for c in classes])

    def select(self, classes: Iterable[TrialClass]) -> np.ndarray:
        return self.scores[self.mask(classes)]

    def collapse_binary(self) -> "ScoredTrials":
        """Relabel bona fide trials as BT and spoofed trials as ST."""
        labels = np.where(self.labels <= 1, 0, 2).astype(np.int8)
        return ScoredTrials(self.scores, labels)


@dataclass(frozen=True)
class ADcfConfig:
    costs: CostModel
    priors: PriorModel

    @property
    def weights(self) -> tuple[float, float, float]:
        """Multipliers of (p_miss, p_fa_imp, p_fa_spoof) in the a-DCF."""
        c, p = self.costs, self.priors
        return (c.c_miss * p.p_bt, c.c_fa_imp * p.p_bn, c.c_fa_spoof * (p.p_st + p.p_sn))

    def default_cost(self) -> float:
        """Cost of the better of accept-all and reject-all."""
        w_miss, w_imp, w_spf = self.weights
        return min(w_miss, w_imp + w_spf)

    def collapse_binary(self) -> "ADcfConfig":
        p = self.priors
        return ADcfConfig(self.costs, PriorModel(p.p_bt + p.p_bn, 0.0, p.p_st + p.p_sn, 0.0))


@dataclass(frozen=True)
class MetricsReport:
    eer: float
    min_dcf: float
    act_dcf: float
    cllr: float
    min_a_dcf: float
    min_a_dcf_threshold: float

    def as_lines(self) -> list[str]:
        return [f"{f.name}={getattr(self, f.name)!r}" for f in fields(self)]

    def table(self) -> str:
        rows = [
            ("EER (%)", f"{100 * self.eer:.4f}"),
            ("minDCF", f"{self.min_dcf:.5f}"),
            ("actDCF", f"{self.act_dcf:.5f}"),
            ("Cllr (bits)", f"{self.cllr:.5f}"),
            ("min a-DCF", f"{self.min_a_dcf:.5f}"),
            ("  at threshold", f"{self.min_a_dcf_threshold:.6g}"),
        ]
        width = max(len(r[0]) for r in rows)
        return "\n".join(f"{k:<{width}}  {v:>12}" for k, v in rows)


def _groups(trials: ScoredTrials):
    bt = trials.labels == 0
    bn = trials.labels == 1
    spf = trials.labels >= 2
    return bt, bn, spf


def _rate(hits: int, n: int) -> float:
    return hits / n if n else 0.0


def error_rates_at(trials: ScoredTrials, threshold: float) -> tuple[float, float, float]:
    """(p_miss, p_fa_imp, p_fa_spoof) at one threshold; scores equal to it are rejected.

    Rates of an empty nontarget group are reported as 0.
    """
    bt, bn, spf = _groups(trials)
    if not bt.any():
        raise EmptyClass("no BT trials")
    if not (bn.any() or spf.any()):
        raise EmptyClass("no non-BT trials")
    s = trials.scores
    accept = s > threshold
    p_miss = _rate(int(np.count_nonzero(bt & ~accept)), int(bt.sum()))
    p_fa_imp = _rate(int(np.count_nonzero(bn & accept)), int(bn.sum()))
    p_fa_spoof = _rate(int(np.count_nonzero(spf & accept)), int(spf.sum()))
    return p_miss, p_fa_imp, p_fa_spoof


def _check_support(trials: ScoredTrials, cfg: ADcfConfig):
    bt, bn, spf = _groups(trials)
    w_miss, w_imp, w_spf = cfg.weights
    for name, mask, w in (("BT", bt, w_miss), ("BN", bn, w_imp), ("ST/SN", spf, w_spf)):
        if w > 0 and not mask.any():
            raise EmptyClass(f"no {name} trials but the configuration gives them weight")
    if not bt.any() or not (bn.any() or spf.any()):
        raise EmptyClass("need at least one BT and one non-BT trial")


def a_dcf(rates: tuple[float, float, float], cfg: ADcfConfig) -> float:
    w_miss, w_imp, w_spf = cfg.weights
    p_miss, p_fa_imp, p_fa_spoof = rates
    return w_miss * p_miss + w_imp * p_fa_imp + w_spf * p_fa_spoof


def canonical_thresholds(scores: np.ndarray) -> np.ndarray:
    """-inf, midpoints between consecutive distinct values, +inf."""
    u = np.unique(scores)
    mids = 0.5 * (u[:-1] + u[1:])
    # the midpoint of adjacent doubles may round up onto the larger value
    mids = np.where(mids >= u[1:], u[:-1], mids)
    return np.concatenate(([-np.inf], mids, [np.inf]))


def _sweep_counts(scores: np.ndarray, groups: Sequence[np.ndarray]):
    """Rejected counts per group at each canonical threshold.

    Returns (thresholds, [rejected_count_per_group]) where entry k corresponds
    to rejecting the k smallest distinct score values.
    """
    u, inv = np.unique(scores, return_inverse=True)
    out = []
    for g in groups:
        per_value = np.bincount(inv[g], minlength=u.size)
        out.append(np.concatenate(([0], np.cumsum(per_value))))
    return canonical_thresholds(scores), out


def a_dcf_curve(trials: ScoredTrials, cfg: ADcfConfig):
    """(thresholds, a-DCF at each) over the canonical threshold set."""
    _check_support(trials, cfg)
    bt, bn, spf = _groups(trials)
    thr, (r_bt, r_bn, r_spf) = _sweep_counts(trials.scores, (bt, bn, spf))
    n_bt, n_bn, n_spf = int(bt.sum()), int(bn.sum()), int(spf.sum())
    p_miss = r_bt / n_bt
    p_fa_imp = (n_bn - r_bn) / n_bn if n_bn else np.zeros(thr.size)
    p_fa_spoof = (n_spf - r_spf) / n_spf if n_spf else np.zeros(thr.size)
    w_miss, w_imp, w_spf = cfg.weights
    return thr, w_miss * p_miss + w_imp * p_fa_imp + w_spf * p_fa_spoof


def min_a_dcf(trials: ScoredTrials, cfg: ADcfConfig, normalize: bool = False) -> tuple[float, float]:
    """Minimum a-DCF over the canonical thresholds and the first threshold attaining it.

    Unnormalized by default; ``normalize=True`` divides by the default-decision cost.
    """
    thr, cost = a_dcf_curve(trials, cfg)
    k = int(np.argmin(cost))
    value = float(cost[k])
    if normalize:
        value = value / cfg.default_cost()
    return value, float(thr[k])


def det_points(trials: ScoredTrials, positive=ACCEPT, negative=REJECT) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(thresholds, p_miss, p_fa) over the canonical threshold set."""
    pos = trials.mask(positive)
    neg = trials.mask(negative)
    if not pos.any() or not neg.any():
        raise EmptyClass("positive and negative sets must be nonempty")
    keep = pos | neg
    scores = trials.scores[keep]
    thr, (r_pos, r_neg) = _sweep_counts(scores, (pos[keep], neg[keep]))
    n_pos, n_neg = int(pos.sum()), int(neg.sum())
    return thr, r_pos / n_pos, (n_neg - r_neg) / n_neg


def eer_from_curve(p_miss: Sequence[float], p_fa: Sequence[float]) -> float:
    """Crossing of the miss and false-alarm step curves, linearly interpolated.

    ``p_miss`` must be non-decreasing and ``p_fa`` non-increasing, starting at
    (0, 1) and ending at (1, 0).
    """
    k = 0
    while p_miss[k] < p_fa[k]:
        k += 1
    if k == 0:
        return float(p_miss[0])
    pm0, pf0 = p_miss[k - 1], p_fa[k - 1]
    pm1, pf1 = p_miss[k], p_fa[k]
    denom = (pm1 - pm0) - (pf1 - pf0)
    if denom == 0:
        return float(pm1)
    t = (pf0 - pm0) / denom
    return float(pm0 + t * (pm1 - pm0))


def eer(trials: ScoredTrials, positive=ACCEPT, negative=REJECT) -> float:
    _, p_miss, p_fa = det_points(trials, positive, negative)
    return eer_from_curve(p_miss, p_fa)


def dcf(
    trials: ScoredTrials,
    cfg: ADcfConfig,
    threshold: float | str = "bayes",
    binary: bool = False,
    normalize: bool = True,
) -> float:
    """Detection cost at a threshold, or at the Bayes threshold when ``threshold == "bayes"``.

    With ``binary=True`` the classes collapse to bona fide vs spoof, the
    prior of each side is the sum of its joint priors, and the false-accept
    cost is ``c_fa_spoof``.
    """
    if binary:
        trials, cfg = trials.collapse_binary(), cfg.collapse_binary()
    _check_support(trials, cfg)
    if threshold == "bayes":
        threshold = bayes_threshold(cfg.costs, cfg.priors)
    value = a_dcf(error_rates_at(trials, float(threshold)), cfg)
    return value / cfg.default_cost() if normalize else value


def min_dcf(trials: ScoredTrials, cfg: ADcfConfig, binary: bool = False) -> float:
    if binary:
        trials, cfg = trials.collapse_binary(), cfg.collapse_binary()
    return min_a_dcf(trials, cfg, normalize=True)[0]


def act_dcf(trials: ScoredTrials, cfg: ADcfConfig, binary: bool = False) -> float:
    return dcf(trials, cfg, "bayes", binary=binary, normalize=True)


def _softplus(x):
    return np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))


def cllr(trials: ScoredTrials, positive=ACCEPT, negative=REJECT) -> float:
    """Cost of log-likelihood ratio in bits; scores must be natural-log LLRs."""
    pos = trials.select(positive)
    neg = trials.select(negative)
    if pos.size == 0 or neg.size == 0:
        raise EmptyClass("positive and negative sets must be nonempty")
    return float(0.5 * (np.mean(_softplus(-pos)) + np.mean(_softplus(neg))) / LN2)


def evaluate(
    trials: ScoredTrials, cfg: ADcfConfig, binary_cm: bool = False, normalize_a_dcf: bool = False
) -> MetricsReport:
    """All metrics in one report.

    SASV mode scores BT against everything else.  ``binary_cm`` evaluates a
    countermeasure instead: bona fide against spoof.
    """
    if binary_cm:
        trials, cfg = trials.collapse_binary(), cfg.collapse_binary()
    pos, neg = ACCEPT, REJECT
    value, thr = min_a_dcf(trials, cfg, normalize=normalize_a_dcf)
    return MetricsReport(
        eer=eer(trials, pos, neg),
        min_dcf=min_dcf(trials, cfg),
        act_dcf=act_dcf(trials, cfg),
        cllr=cllr(trials, pos, neg),
        min_a_dcf=value,
        min_a_dcf_threshold=thr,
    )
