"""Score-level helpers: label-scheme aggregation, min-max fusion, cosine scoring."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import (
    ConstantScores,
    DataError,
    DimensionMismatch,
    TrialMismatch,
    ZeroNormAfterNormalization,
)
from .scoreio import CLAMP, ScoreFile

SCHEMES = ("spk-binspf", "spk-mulspf", "spk-onespf", "mulspf", "binspf")


@dataclass(frozen=True)
class LabelScheme:
    """Training-class layout: ``is_bona[k]`` tells whether class k is a bona fide class."""

    name: str
    is_bona: tuple

    def __post_init__(self):
        if not any(self.is_bona) or all(self.is_bona):
            raise DataError(f"scheme {self.name}: both bona fide and spoof groups must be nonempty")

    @property
    def k(self) -> int:
        return len(self.is_bona)

    def group_of(self, idx: int) -> str:
        return "bona" if self.is_bona[idx] else "spoof"

    @classmethod
    def named(cls, name: str, n_speakers: int = 400, n_spoof_types: int = 8) -> "LabelScheme":
        """Standard schemes.  Bona fide classes come first, spoof classes after.

        spk-binspf   one bona and one spoof class per speaker
        spk-mulspf   per speaker: bona fide plus one class per spoof type
        spk-onespf   one bona class per speaker plus a single spoof class
        mulspf       bona fide plus one class per spoof type
        binspf       bona fide vs spoof
        """
        s, a = n_speakers, n_spoof_types
        layouts = {
            "spk-binspf": (s, s),
            "spk-mulspf": (s, s * a),
            "spk-onespf": (s, 1),
            "mulspf": (1, a),
            "binspf": (1, 1),
        }
        if name not in layouts:
            raise DataError(f"unknown label scheme {name!r}; expected one of {', '.join(SCHEMES)}")
        n_bona, n_spoof = layouts[name]
        return cls(name, (True,) * n_bona + (False,) * n_spoof)


def aggregate_group_llr(lik, scheme: LabelScheme, class_priors=None) -> float:
    """Bona fide vs spoof LLR from per-class likelihoods.

    Likelihoods of the classes in each group are summed, weighted by
    ``class_priors`` (uniform when omitted).  Softmax posteriors must be
    divided by the training class priors first, or passed together with
    reciprocal-prior weights.  Clamped to +/-700 when a group sum underflows.
    """
    lik = np.asarray(lik, dtype=float)
    if lik.shape != (scheme.k,):
        raise DimensionMismatch(f"expected {scheme.k} likelihoods, got shape {lik.shape}")
    if not np.all(np.isfinite(lik)) or np.any(lik < 0) or not np.any(lik > 0):
        raise DataError("likelihoods must be finite, nonnegative and not all zero")
    if class_priors is None:
        w = np.ones(scheme.k)
    else:
        w = np.asarray(class_priors, dtype=float)
        if w.shape != (scheme.k,):
            raise DimensionMismatch(f"expected {scheme.k} class priors, got shape {w.shape}")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise DataError("class priors must be finite and nonnegative")
    bona = np.asarray(scheme.is_bona, dtype=bool)
    if not (w[bona].sum() > 0 and w[~bona].sum() > 0):
        raise DataError("each group needs positive prior mass")
    num = math.fsum(w[bona] * lik[bona])
    den = math.fsum(w[~bona] * lik[~bona])
    if num == 0:
        return -CLAMP
    if den == 0:
        return CLAMP
    return max(-CLAMP, min(CLAMP, math.log(num) - math.log(den)))


def minmax_fuse(systems: Sequence[ScoreFile]) -> ScoreFile:
    """Average of per-system min-max normalized scores, ordered by trial id."""
    if len(systems) < 2:
        raise DataError("fusion needs at least two systems")
    ref = set(systems[0].trial_ids)
    for i, sf in enumerate(systems[1:], start=2):
        if set(sf.trial_ids) != ref:
            raise TrialMismatch(f"system {i} does not cover the same trials as system 1")
    ids = sorted(ref)
    acc = np.zeros(len(ids))
    for i, sf in enumerate(systems, start=1):
        lo, hi = float(np.min(sf.scores)), float(np.max(sf.scores))
        if hi == lo:
            raise ConstantScores(i)
        d = sf.as_dict()
        x = np.array([d[t] for t in ids])
        acc += (x - lo) / (hi - lo)
    return ScoreFile(tuple(ids), acc / len(systems))


def cosine_score(enroll: Sequence, test, mean: Optional[Sequence] = None) -> float:
    """Cosine similarity of the averaged (mean-normalized) enrollment embedding and the test embedding."""
    enroll = np.atleast_2d(np.asarray(enroll, dtype=float))
    test = np.asarray(test, dtype=float)
    if enroll.shape[0] == 0:
        raise DataError("need at least one enrollment embedding")
    if test.ndim != 1 or enroll.shape[1] != test.shape[0]:
        raise DimensionMismatch("enrollment and test embeddings differ in dimension")
    if mean is not None:
        mean = np.asarray(mean, dtype=float)
        if mean.shape != test.shape:
            raise DimensionMismatch("mean embedding has the wrong dimension")
        enroll = enroll - mean
        test = test - mean
    if not (np.all(np.isfinite(enroll)) and np.all(np.isfinite(test))):
        raise DataError("embeddings must be finite")
    e = enroll.mean(axis=0)
    ne, nt = np.linalg.norm(e), np.linalg.norm(test)
    if ne == 0 or nt == 0:
        raise ZeroNormAfterNormalization("embedding has zero norm after normalization")
    return float(np.clip(np.dot(e, test) / (ne * nt), -1.0, 1.0))
