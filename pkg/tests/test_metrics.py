import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sasvcal import metrics
from sasvcal.decision import CostModel, PriorModel, TrialClass
from sasvcal.errors import EmptyClass
from sasvcal.metrics import ADcfConfig, ScoredTrials
from sasvcal.synth import oracle_eer, oracle_min_a_dcf, oracle_min_dcf

UNIT = ADcfConfig(CostModel(), PriorModel(0.5, 0.25, 0.25, 0.0))
CHALLENGE = ADcfConfig(CostModel.asvspoof5(), PriorModel(0.9, 0.05, 0.05, 0.0))


def small():
    return ScoredTrials.from_groups(bt=[2, 3], bn=[1], st=[4])


def test_error_rates_extremes():
    t = small()
    assert metrics.error_rates_at(t, -math.inf) == (0.0, 1.0, 1.0)
    assert metrics.error_rates_at(t, math.inf) == (1.0, 0.0, 0.0)


def test_error_rates_counts():
    assert metrics.error_rates_at(small(), 2.5) == (0.5, 0.0, 1.0)


def test_ties_are_rejected():
    t = ScoredTrials.from_groups(bt=[1.0], bn=[1.0])
    assert metrics.error_rates_at(t, 1.0) == (1.0, 0.0, 0.0)


def test_error_rates_empty():
    with pytest.raises(EmptyClass):
        metrics.error_rates_at(ScoredTrials.from_groups(bn=[1.0]), 0.0)


def test_min_a_dcf_small_by_hand():
    # thresholds -inf, 1.5, 2.5, 3.5, +inf give 0.5, 0.25, 0.5, 0.75, 0.5
    value, thr = metrics.min_a_dcf(small(), UNIT)
    assert value == 0.25
    assert thr == 1.5
    assert value == oracle_min_a_dcf(small().scores, small().labels, UNIT.costs, UNIT.priors)[0]


def test_min_a_dcf_perfect_system():
    t = ScoredTrials.from_groups(bt=[5, 6, 7], bn=[-1, 0], st=[1, 2])
    assert metrics.min_a_dcf(t, CHALLENGE)[0] == 0.0


def test_min_a_dcf_rank_invariant(rng):
    t = ScoredTrials.from_groups(bt=rng.normal(2, 1, 40), bn=rng.normal(-1, 1, 30), st=rng.normal(0, 1, 30))
    moved = ScoredTrials(3 * t.scores + 7, t.labels)
    assert metrics.min_a_dcf(t, CHALLENGE)[0] == metrics.min_a_dcf(moved, CHALLENGE)[0]


def test_min_a_dcf_threshold_attains_value(rng):
    t = ScoredTrials.from_groups(bt=rng.normal(1, 1, 50), bn=rng.normal(-1, 1, 50), st=rng.normal(0, 1, 50))
    value, thr = metrics.min_a_dcf(t, CHALLENGE)
    assert metrics.a_dcf(metrics.error_rates_at(t, thr), CHALLENGE) == value


def test_min_a_dcf_normalized():
    t = small()
    raw, _ = metrics.min_a_dcf(t, UNIT)
    norm, _ = metrics.min_a_dcf(t, UNIT, normalize=True)
    assert norm == raw / UNIT.default_cost()


def test_min_a_dcf_below_every_threshold(rng):
    t = ScoredTrials.from_groups(bt=rng.normal(1, 1, 30), bn=rng.normal(-1, 1, 30), st=rng.normal(0, 1, 30))
    value, _ = metrics.min_a_dcf(t, CHALLENGE)
    for thr in np.linspace(-4, 4, 101):
        assert value <= metrics.a_dcf(metrics.error_rates_at(t, thr), CHALLENGE)


def test_adjacent_doubles_midpoint():
    a = 1.0
    b = math.nextafter(a, 2.0)
    thr = metrics.canonical_thresholds(np.array([a, b]))
    t = ScoredTrials.from_groups(bt=[b], bn=[a])
    assert metrics.min_a_dcf(t, ADcfConfig(CostModel(), PriorModel(0.5, 0.5, 0, 0)))[0] == 0.0
    assert a <= thr[1] < b


@pytest.mark.parametrize(
    "pos, neg, expected",
    [([2, 3], [1, 4], 0.5), ([5, 6], [1, 2], 0.0), ([1, 2, 3], [1, 2, 3], 0.5), ([1.0], [1.0], 0.5)],
)
def test_eer_examples(pos, neg, expected):
    t = ScoredTrials.from_groups(bt=pos, bn=neg)
    assert metrics.eer(t) == expected
    assert oracle_eer(pos, neg) == expected


def test_eer_interpolated_value():
    # curve (0,1) (0,1/2) (1/3,1/2) (1/3,0): crossing on the vertical drop at 1/3
    t = ScoredTrials.from_groups(bt=[2, 4, 5], bn=[1, 3])
    assert metrics.eer(t) == pytest.approx(1 / 3, abs=1e-15)


def test_dcf_perfect_and_uninformative():
    perfect = ScoredTrials.from_groups(bt=[5, 6], bn=[-5], st=[-6])
    assert metrics.min_dcf(perfect, CHALLENGE) == 0.0
    flat = ScoredTrials.from_groups(bt=[0.0] * 5, bn=[0.0] * 3, st=[0.0] * 4)
    # Bayes threshold log(1.9/0.9) > 0 rejects everything: cost = the better default
    assert metrics.dcf(flat, CHALLENGE, "bayes", normalize=False) == CHALLENGE.default_cost()
    assert metrics.act_dcf(flat, CHALLENGE) == 1.0


def test_dcf_binary_cm_mode(rng):
    t = ScoredTrials.from_groups(bt=rng.normal(2, 1, 30), bn=rng.normal(2, 1, 30), st=rng.normal(-2, 1, 30))
    cfg = ADcfConfig(CostModel(1, 10, 10, 10), PriorModel(0.9, 0.05, 0.05, 0.0))
    binary = metrics.min_dcf(t, cfg, binary=True)
    collapsed = t.collapse_binary()
    ref = oracle_min_dcf(collapsed.scores, collapsed.labels, cfg.costs, PriorModel(0.95, 0.0, 0.05, 0.0))
    assert binary == ref
    assert binary <= metrics.act_dcf(t, cfg, binary=True)


def test_cllr_values():
    flat = ScoredTrials.from_groups(bt=[0.0, 0.0], bn=[0.0])
    assert metrics.cllr(flat) == 1.0
    sharp = ScoredTrials.from_groups(bt=[10.0], bn=[-10.0])
    # log2(1 + e^-10), 40-digit mpmath
    assert metrics.cllr(sharp) == pytest.approx(6.549676676198847e-05, rel=1e-12)


def test_cllr_sign_flip_is_bad():
    perfect = ScoredTrials.from_groups(bt=[8.0, 9.0], bn=[-8.0, -9.0])
    flipped = ScoredTrials(-perfect.scores, perfect.labels)
    assert metrics.cllr(perfect) >= 0
    assert metrics.cllr(flipped) > 1.0


def test_evaluate_report_invariants(rng):
    t = ScoredTrials.from_groups(bt=rng.normal(3, 2, 200), bn=rng.normal(-3, 2, 100), st=rng.normal(-1, 2, 100))
    rep = metrics.evaluate(t, CHALLENGE)
    assert 0 <= rep.eer <= 0.5
    assert rep.min_dcf <= rep.act_dcf
    assert rep.cllr >= 0
    assert rep.min_a_dcf == metrics.min_a_dcf(t, CHALLENGE)[0]
    lines = dict(line.split("=", 1) for line in rep.as_lines())
    assert set(lines) == {"eer", "min_dcf", "act_dcf", "cllr", "min_a_dcf", "min_a_dcf_threshold"}
    assert "min a-DCF" in rep.table()


def test_det_points_monotone(rng):
    t = ScoredTrials.from_groups(bt=rng.normal(1, 1, 60), bn=rng.normal(-1, 1, 40), st=rng.normal(0, 1, 40))
    thr, pm, pf = metrics.det_points(t)
    assert np.all(np.diff(thr) > 0)
    assert np.all(np.diff(pm) >= 0) and np.all(np.diff(pf) <= 0)
    assert (pm[0], pf[0], pm[-1], pf[-1]) == (0.0, 1.0, 1.0, 0.0)


scores_st = st.lists(st.integers(-6, 6).map(float), min_size=1, max_size=25)


@given(scores_st, scores_st, scores_st, st.floats(-5, 5))
def test_error_rates_monotone(bt, bn, spf, thr):
    t = ScoredTrials.from_groups(bt=bt, bn=bn, st=spf)
    lo = metrics.error_rates_at(t, thr)
    hi = metrics.error_rates_at(t, thr + 0.5)
    assert hi[0] >= lo[0] and hi[1] <= lo[1] and hi[2] <= lo[2]


@given(scores_st, scores_st, scores_st)
def test_fast_sweeps_match_oracles(bt, bn, spf):
    t = ScoredTrials.from_groups(bt=bt, bn=bn, st=spf)
    assert metrics.min_a_dcf(t, CHALLENGE)[0] == oracle_min_a_dcf(t.scores, t.labels, *_cp(CHALLENGE))[0]
    assert metrics.min_dcf(t, CHALLENGE) == oracle_min_dcf(t.scores, t.labels, *_cp(CHALLENGE))
    assert metrics.eer(t) == oracle_eer(bt, bn + spf)


@given(scores_st, scores_st, scores_st)
def test_act_dcf_not_below_min(bt, bn, spf):
    t = ScoredTrials.from_groups(bt=bt, bn=bn, st=spf)
    assert metrics.min_dcf(t, CHALLENGE) <= metrics.act_dcf(t, CHALLENGE)


@given(scores_st, scores_st)
def test_rank_metrics_invariant_under_increasing_map(bt, bn):
    t = ScoredTrials.from_groups(bt=bt, bn=bn)
    moved = ScoredTrials(np.exp(t.scores / 3.0) * 2 - 1, t.labels)
    cfg = ADcfConfig(CostModel(), PriorModel(0.5, 0.5, 0.0, 0.0))
    assert metrics.eer(t) == metrics.eer(moved)
    assert metrics.min_a_dcf(t, cfg)[0] == metrics.min_a_dcf(moved, cfg)[0]


def _cp(cfg):
    return cfg.costs, cfg.priors


def test_scored_trials_from_classes():
    t = ScoredTrials.from_classes([1.0, 2.0], [TrialClass.BT, "ST"])
    assert t.counts()[TrialClass.ST] == 1
