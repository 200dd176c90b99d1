"""Trial key and score files, and joining them into trial records.

Both formats are UTF-8 text with one record per line, fields separated by a
single TAB.  Lines starting with ``#`` are comments; trailing blank lines are
ignored.

    key file:    <trial_id> TAB <target_bona|nontarget_bona|spoof_target|spoof_nontarget>
    score file:  <trial_id> TAB <decimal score>

Scores are written with 17 significant digits so they re-parse to the same
double.
"""

from __future__ import annotations

import logging
import math
import os
import re
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .decision import TrialClass
from .errors import DuplicateTrialId, EmptyJoin, ParseError

log = logging.getLogger(__name__)

CLAMP = 700.0

KEY_TOKENS = {
    "target_bona": TrialClass.BT,
    "nontarget_bona": TrialClass.BN,
    "spoof_target": TrialClass.ST,
    "spoof_nontarget": TrialClass.SN,
}
TOKEN_OF = {v: k for k, v in KEY_TOKENS.items()}

_DECIMAL = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")


def parse_decimal(text: str) -> float:
    if not _DECIMAL.fullmatch(text):
        raise ValueError(f"not a decimal number: {text!r}")
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(f"score out of range: {text!r}")
    return value


def format_score(x: float) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True)
class ScoreFile:
    trial_ids: tuple
    scores: np.ndarray

    def as_dict(self) -> dict:
        return dict(zip(self.trial_ids, self.scores.tolist()))

    @classmethod
    def from_dict(cls, d: dict) -> "ScoreFile":
        ids = tuple(d)
        return cls(ids, np.array([d[k] for k in ids], dtype=float))

    def __len__(self):
        return len(self.trial_ids)


@dataclass(frozen=True)
class TrialKeyFile:
    trial_ids: tuple
    classes: tuple

    def as_dict(self) -> dict:
        return dict(zip(self.trial_ids, self.classes))

    def __len__(self):
        return len(self.trial_ids)


class TrialRecord(NamedTuple):
    trial_id: str
    trial_class: TrialClass
    s_cm_raw: float
    s_asv_raw: float


@dataclass(frozen=True)
class JoinedTrialSet:
    """Inner join of a key with CM and ASV scores, ordered by trial id."""

    trial_ids: tuple
    classes: tuple
    cm: np.ndarray
    asv: np.ndarray
    n_missing_cm: int = 0
    n_missing_asv: int = 0
    n_dropped: int = 0
    n_clamped: int = 0

    def __len__(self):
        return len(self.trial_ids)

    def records(self) -> Iterator[TrialRecord]:
        for i, tid in enumerate(self.trial_ids):
            yield TrialRecord(tid, self.classes[i], float(self.cm[i]), float(self.asv[i]))

    @property
    def labels(self) -> np.ndarray:
        return np.array([c.index for c in self.classes], dtype=np.int8)


def _rows(path, n_fields: int):
    """Yield (line_no, fields) for the data lines of a TAB-separated file."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        lines = fh.read().split("\n")
    while lines and lines[-1] == "":
        lines.pop()
    for no, line in enumerate(lines, start=1):
        if line.startswith("#"):
            continue
        if line.endswith("\r"):
            raise ParseError(no, "CR line ending", path)
        if line == "":
            raise ParseError(no, "blank line", path)
        fields = line.split("\t")
        if len(fields) != n_fields:
            raise ParseError(no, f"expected {n_fields} TAB-separated fields, got {len(fields)}", path)
        if any(f == "" for f in fields):
            raise ParseError(no, "empty field", path)
        yield no, fields


def parse_score_file(path) -> ScoreFile:
    ids, scores, seen = [], [], {}
    for no, (tid, text) in _rows(path, 2):
        if tid in seen:
            raise DuplicateTrialId(tid, no)
        try:
            value = parse_decimal(text)
        except ValueError as exc:
            raise ParseError(no, str(exc), path) from None
        seen[tid] = no
        ids.append(tid)
        scores.append(value)
    return ScoreFile(tuple(ids), np.array(scores, dtype=float))


def parse_key_file(path) -> TrialKeyFile:
    ids, classes, seen = [], [], set()
    for no, (tid, token) in _rows(path, 2):
        if tid in seen:
            raise DuplicateTrialId(tid, no)
        if token not in KEY_TOKENS:
            raise ParseError(no, f"unknown class token {token!r}", path)
        seen.add(tid)
        ids.append(tid)
        classes.append(KEY_TOKENS[token])
    return TrialKeyFile(tuple(ids), tuple(classes))


def write_score_file(path, trial_ids: Sequence[str], scores) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for tid, s in zip(trial_ids, scores):
            fh.write(f"{tid}\t{format_score(s)}\n")


def write_key_file(path, trial_ids: Sequence[str], classes: Sequence[TrialClass]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for tid, c in zip(trial_ids, classes):
            fh.write(f"{tid}\t{TOKEN_OF[TrialClass(c)]}\n")


def clamp_scores(x: np.ndarray) -> tuple[np.ndarray, int]:
    n = int(np.count_nonzero(np.abs(x) > CLAMP))
    return np.clip(x, -CLAMP, CLAMP), n


def join_trials(key: TrialKeyFile, cm: ScoreFile, asv: ScoreFile) -> JoinedTrialSet:
    """Inner join on trial id; output sorted by id so row order never matters."""
    cm_d, asv_d = cm.as_dict(), asv.as_dict()
    key_d = key.as_dict()
    ids = sorted(key_d)
    missing_cm = sum(1 for t in ids if t not in cm_d)
    missing_asv = sum(1 for t in ids if t not in asv_d)
    kept = [t for t in ids if t in cm_d and t in asv_d]
    dropped = len(ids) - len(kept)
    if not kept:
        raise EmptyJoin("no keyed trial has both a CM and an ASV score")
    cm_arr, n1 = clamp_scores(np.array([cm_d[t] for t in kept], dtype=float))
    asv_arr, n2 = clamp_scores(np.array([asv_d[t] for t in kept], dtype=float))
    if dropped:
        log.warning("join: dropped %d keyed trials (missing cm %d, missing asv %d)",
                    dropped, missing_cm, missing_asv)
    if n1 + n2:
        log.warning("join: clamped %d scores to [-%g, %g]", n1 + n2, CLAMP, CLAMP)
    return JoinedTrialSet(
        trial_ids=tuple(kept),
        classes=tuple(key_d[t] for t in kept),
        cm=cm_arr,
        asv=asv_arr,
        n_missing_cm=missing_cm,
        n_missing_asv=missing_asv,
        n_dropped=dropped,
        n_clamped=n1 + n2,
    )


def join_scores(cm: ScoreFile, asv: ScoreFile):
    """Inner join of two score files without a key: (ids, cm, asv, n_dropped, n_clamped)."""
    cm_d, asv_d = cm.as_dict(), asv.as_dict()
    ids = sorted(set(cm_d) & set(asv_d))
    if not ids:
        raise EmptyJoin("score files share no trial ids")
    dropped = len(set(cm_d) ^ set(asv_d))
    if dropped:
        log.warning("join: %d trials present in only one score file", dropped)
    cm_arr, n1 = clamp_scores(np.array([cm_d[t] for t in ids], dtype=float))
    asv_arr, n2 = clamp_scores(np.array([asv_d[t] for t in ids], dtype=float))
    if n1 + n2:
        log.warning("join: clamped %d scores to [-%g, %g]", n1 + n2, CLAMP, CLAMP)
    return tuple(ids), cm_arr, asv_arr, dropped, n1 + n2


def read_key_value(path) -> dict:
    """Parse a ``key=value`` text artifact; '#' comments and blank lines skipped."""
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ParseError(no, "expected key=value", path)
            k, v = line.split("=", 1)
            out[k.strip()] = v.strip()
    return out


def write_key_value(path, items) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for k, v in items:
            fh.write(f"{k}={v}\n")


def ensure_dir(path) -> None:
    if path:
        os.makedirs(path, exist_ok=True)

