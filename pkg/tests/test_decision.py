import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sasvcal.decision import (
    ConditionalRejectPriors,
    CostModel,
    LlrPair,
    PriorModel,
    bayes_accept,
    bayes_threshold,
    compose_for_decision,
    conditional_reject_priors,
    effective_priors,
    sasv_llr,
    sasv_llr_array,
)
from sasvcal.errors import DegenerateRejectMass, InvalidConfig, ZeroNormalizer
from sasvcal.synth import oracle_bayes_decisions

# values frozen from 40-digit mpmath evaluation
SASV_2_1 = 1.37988549304172247536823662649
LOG10 = 2.30258509299404568401799145468


def test_effective_priors_unit_costs_identity():
    ep = effective_priors(CostModel(), PriorModel(0.25, 0.25, 0.25, 0.25))
    assert ep.as_tuple() == (0.25, 0.25, 0.25, 0.25)


def test_effective_priors_challenge_costs():
    ep = effective_priors(CostModel.asvspoof5(), PriorModel(0.5, 0.25, 0.25, 0.0))
    assert ep.ep_bt == pytest.approx(1 / 11, abs=1e-15)
    assert ep.ep_bn == pytest.approx(5 / 11, abs=1e-15)
    assert ep.ep_st == pytest.approx(5 / 11, abs=1e-15)
    assert ep.ep_sn == 0.0


prob4 = st.lists(st.floats(0.01, 1.0), min_size=4, max_size=4).map(lambda v: [x / sum(v) for x in v])
costs4 = st.lists(st.floats(0.0, 100.0), min_size=4, max_size=4).filter(lambda v: v[0] > 0)


def _priors(v):
    # renormalize so the sum invariant holds to rounding
    p = [float(x) for x in v]
    p[-1] = 1.0 - sum(p[:-1])
    return PriorModel(*p) if p[-1] >= 0 else None


@given(prob4, costs4, st.sampled_from([0.5, 2.0, 4.0, 8.0, 1024.0]))
def test_effective_priors_scale_invariant(p, c, k):
    priors = _priors(p)
    if priors is None:
        return
    costs = CostModel(*c)
    # power-of-two scaling keeps every intermediate exact
    assert effective_priors(costs, priors) == effective_priors(costs.scaled(k), priors)


@given(prob4)
def test_unit_costs_are_identity(p):
    priors = _priors(p)
    if priors is None:
        return
    ep = effective_priors(CostModel(), priors)
    np.testing.assert_allclose(ep.as_tuple(), priors.as_tuple(), rtol=0, atol=1e-15)


def test_effective_priors_zero_normalizer():
    with pytest.raises(ZeroNormalizer):
        effective_priors(CostModel(0.0, 0.0, 0.0, 1.0), PriorModel(0.5, 0.5, 0.0, 0.0))


def test_cost_and_prior_validation():
    with pytest.raises(InvalidConfig):
        CostModel(-1.0, 1, 1, 1)
    with pytest.raises(InvalidConfig):
        CostModel(0.0, 0.0, 0.0, 0.0)
    with pytest.raises(InvalidConfig):
        PriorModel(0.5, 0.5, 0.1, 0.0)
    with pytest.raises(InvalidConfig):
        PriorModel(0.0, 0.5, 0.5, 0.0)
    with pytest.raises(InvalidConfig):
        LlrPair(math.inf, 0.0)


@pytest.mark.parametrize(
    "priors, expected",
    [
        ((0.5, 0.25, 0.25, 0.0), (0.5, 0.5, 0.0)),
        ((0.9, 0.05, 0.04, 0.01), (0.5, 0.4, 0.1)),
        ((0.5, 0.5, 0.0, 0.0), (1.0, 0.0, 0.0)),
    ],
)
def test_conditional_reject_priors(priors, expected):
    cond = conditional_reject_priors(PriorModel(*priors))
    np.testing.assert_allclose(cond.as_tuple(), expected, rtol=0, atol=1e-15)


def test_conditional_reject_priors_degenerate():
    with pytest.raises(DegenerateRejectMass):
        conditional_reject_priors(PriorModel(1.0, 0.0, 0.0, 0.0))


def test_sasv_llr_equal_inputs_collapse():
    cond = ConditionalRejectPriors(0.3, 0.7, 0.0)
    assert sasv_llr(LlrPair(1.7, 1.7), cond) == pytest.approx(1.7, abs=1e-15)


def test_sasv_llr_value():
    assert sasv_llr(LlrPair(2.0, 1.0), ConditionalRejectPriors(0.5, 0.5, 0.0)) == pytest.approx(SASV_2_1, abs=1e-14)


def test_sasv_llr_single_term():
    assert sasv_llr(LlrPair(-3.0, 0.4), ConditionalRejectPriors(1.0, 0.0, 0.0)) == 0.4


def test_sasv_llr_spoof_nontarget_term():
    cond = ConditionalRejectPriors(0.2, 0.3, 0.5)
    cm, asv = 0.7, -0.2
    ref = -math.log(0.2 * math.exp(-asv) + 0.3 * math.exp(-cm) + 0.5 * math.exp(-cm - asv))
    assert sasv_llr(LlrPair(cm, asv), cond) == pytest.approx(ref, abs=1e-14)


def test_sasv_llr_large_inputs_stable():
    cond = ConditionalRejectPriors(0.5, 0.5, 0.0)
    assert sasv_llr(LlrPair(700.0, 700.0), cond) == pytest.approx(700.0)
    assert sasv_llr(LlrPair(-700.0, 5.0), cond) == pytest.approx(-700.0 - math.log(0.5))


def test_limit_large_cm_llr():
    cond = ConditionalRejectPriors(0.3, 0.7, 0.0)
    assert abs(sasv_llr(LlrPair(50.0, 1.2), cond) - (1.2 - math.log(0.3))) < 1e-9


finite = st.floats(-40, 40, allow_nan=False)
positive_cond = st.floats(0.01, 0.99).map(lambda a: ConditionalRejectPriors(a, 1.0 - a, 0.0))


@given(finite, finite, st.floats(0.01, 5.0), positive_cond)
def test_sasv_llr_strictly_increasing(cm, asv, delta, cond):
    base = sasv_llr(LlrPair(cm, asv), cond)
    up_cm = sasv_llr(LlrPair(cm + delta, asv), cond)
    up_asv = sasv_llr(LlrPair(cm, asv + delta), cond)
    assert up_cm >= base and up_asv >= base
    # strictness is only observable in doubles while neither term swamps the other
    gap = abs((math.log(cond.p_bn) - asv) - (math.log(cond.p_st) - cm))
    if gap + delta < 30:
        assert up_cm > base and up_asv > base


@given(finite, finite, positive_cond)
def test_sasv_llr_upper_bound(cm, asv, cond):
    v = sasv_llr(LlrPair(cm, asv), cond)
    assert v <= min(asv - math.log(cond.p_bn), cm - math.log(cond.p_st))


def test_array_matches_scalar(rng):
    cond = ConditionalRejectPriors(0.2, 0.5, 0.3)
    cm = rng.normal(0, 5, 50)
    asv = rng.normal(0, 5, 50)
    vec = sasv_llr_array(cm, asv, cond)
    ref = [sasv_llr(LlrPair(a, b), cond) for a, b in zip(cm, asv)]
    np.testing.assert_allclose(vec, ref, rtol=0, atol=1e-12)


def test_bayes_accept_symmetric():
    assert bayes_threshold(CostModel(), PriorModel(0.5, 0.5, 0.0, 0.0)) == 0.0
    assert bayes_accept(0.1, CostModel(), PriorModel(0.5, 0.5, 0.0, 0.0))


def test_bayes_accept_challenge_costs():
    costs, priors = CostModel.asvspoof5(), PriorModel(0.5, 0.25, 0.25, 0.0)
    assert bayes_threshold(costs, priors) == pytest.approx(LOG10, abs=1e-14)
    assert not bayes_accept(2.0, costs, priors)
    assert bayes_accept(2.4, costs, priors)


def test_bayes_degenerate_forced_decisions():
    # zero miss cost: never worth accepting
    assert bayes_threshold(CostModel(0.0, 1, 1, 1), PriorModel(0.5, 0.5, 0, 0)) == math.inf
    assert not bayes_accept(1e300, CostModel(0.0, 1, 1, 1), PriorModel(0.5, 0.5, 0, 0))
    # no reject mass: always accept
    assert bayes_threshold(CostModel(), PriorModel(1.0, 0.0, 0.0, 0.0)) == -math.inf
    assert bayes_accept(-1e300, CostModel(), PriorModel(1.0, 0.0, 0.0, 0.0))


def _random_problem(rng):
    costs = CostModel(*rng.uniform(0.05, 20.0, 4))
    p = rng.dirichlet(np.ones(4))
    p[3] = rng.choice([0.0, p[3]])
    p = p / p.sum()
    priors = PriorModel(float(p[0]), float(p[1]), float(p[2]), max(0.0, 1.0 - float(p[0] + p[1] + p[2])))
    return costs, priors


def test_decision_equivalence_random(rng):
    for _ in range(2000):
        costs, priors = _random_problem(rng)
        cm, asv = rng.normal(0, 4, 2)
        lik = (1.0, math.exp(-asv), math.exp(-cm), math.exp(-cm - asv))
        direct = oracle_bayes_decisions([lik], costs, priors)[0]
        via_llr = bayes_accept(compose_for_decision(LlrPair(cm, asv), costs, priors), costs, priors)
        assert direct == via_llr
