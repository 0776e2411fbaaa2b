from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pytest

from oracles import rr_truth_probability
from xborder.errors import BudgetExhausted, EmptyEvalSet, InsufficientTrials, InvalidParameter
from xborder.privacy import (
    GENERIC_COMPLETION,
    DPMode,
    PrivacyBudget,
    RandomizedResponse,
    build_model,
    charge_budget,
    estimate_privacy_loss,
    jurisdiction_epsilon,
    laplace_noise,
    laplace_scale,
    load_corpus,
    private_complete,
    synthetic_corpus,
    utility_retention,
)

FIXTURE = Path(__file__).resolve().parents[1] / "src" / "xborder" / "data" / "canaries.txt"


@pytest.mark.parametrize("eps", [0.8, 1.5])
def test_empirical_epsilon_of_randomized_response(eps):
    rr = RandomizedResponse(eps)
    eps_hat = estimate_privacy_loss(rr, (True, False), trials=1_000_000, seed=int(eps * 10))
    assert eps_hat <= eps + 0.1
    assert abs(eps_hat - eps) < 0.05


@pytest.mark.parametrize("eps", [0.0, 0.8, 1.5, 3.0])
def test_truthful_rate(eps):
    rr = RandomizedResponse(eps)
    assert rr.p_truth == pytest.approx(rr_truth_probability(eps))
    rng = np.random.default_rng(5)
    bits = rng.random(200_000) < 0.5
    rate = float(np.mean(rr(bits, rng) == bits))
    assert abs(rate - rr_truth_probability(eps)) < 0.01


def test_advantage_bound_formula():
    rr = RandomizedResponse(1.5)
    assert rr.advantage_bound == pytest.approx(math.tanh(0.75))


def test_budget_never_overspends_under_fuzzed_charges():
    rng = np.random.default_rng(9)
    for _ in range(10_000):
        total = float(rng.uniform(0.1, 5.0))
        b = PrivacyBudget("EU", total)
        accepted = 0.0
        for _ in range(int(rng.integers(1, 12))):
            eps = float(rng.choice([rng.uniform(0.01, 2.0), total - accepted, 0.8]))
            if eps <= 0:
                continue
            try:
                charge_budget(b, eps)
                accepted += eps
            except BudgetExhausted:
                assert accepted + eps > total
            assert b.epsilon_spent <= b.epsilon_total
        assert sum(b.charges) <= total + 1e-6
        assert b.epsilon_spent == pytest.approx(min(sum(b.charges), total))


def test_budget_sequential_composition():
    b = PrivacyBudget("US", 1.5)
    for _ in range(3):
        charge_budget(b, 0.5)
    assert b.remaining == pytest.approx(0.0)
    with pytest.raises(BudgetExhausted):
        charge_budget(b, 0.01)


@pytest.mark.parametrize("bad", [0.0, -1.0, float("nan"), float("inf")])
def test_budget_rejects_bad_charges(bad):
    with pytest.raises(InvalidParameter):
        charge_budget(PrivacyBudget("US", 1.0), bad)


def test_laplace_scale_and_moments():
    assert laplace_scale(2.0, 0.5) == 4.0
    draws = laplace_noise(1.0, 0.8, seed=3, size=400_000)
    b = 1 / 0.8
    assert abs(float(np.mean(draws))) < 0.02
    assert float(np.var(draws)) == pytest.approx(2 * b * b, rel=0.02)
    assert float(np.mean(np.abs(draws))) == pytest.approx(b, rel=0.01)
    assert laplace_noise(1.0, 0.8, seed=3) == laplace_noise(1.0, 0.8, seed=3)
    with pytest.raises(InvalidParameter):
        laplace_scale(1.0, 0.0)


def test_insufficient_trials():
    with pytest.raises(InsufficientTrials):
        estimate_privacy_loss(RandomizedResponse(1.0), trials=999)
    with pytest.raises(InsufficientTrials):
        estimate_privacy_loss(RandomizedResponse(40.0), trials=1000, seed=0)


def test_jurisdiction_epsilon(registry):
    assert jurisdiction_epsilon("EU", registry) == 0.8
    assert jurisdiction_epsilon("CN", registry) == 1.5


def _model(strength=1.0, **kw):
    corpus = synthetic_corpus(20, 30, 10, seed=1)
    return corpus, build_model(corpus, strength, seed=2, **kw)


def test_no_dp_releases_every_memorised_canary():
    corpus, model = _model()
    for prefix, secret in corpus.canaries.items():
        res = private_complete(model, prefix, None, DPMode.NO_DP)
        assert res.completion == secret and res.was_canary


def test_inference_dp_charges_and_refuses_when_exhausted():
    corpus, model = _model()
    budget = PrivacyBudget("EU", 1.6)
    prefix = next(iter(corpus.canaries))
    for _ in range(2):
        assert private_complete(model, prefix, budget, DPMode.INFERENCE_DP, 0, 0.8).epsilon_charged == 0.8
    with pytest.raises(BudgetExhausted):
        private_complete(model, prefix, budget, DPMode.INFERENCE_DP, 0, 0.8)


def test_inference_dp_release_rate_matches_rr():
    corpus, model = _model()
    prefix = next(iter(corpus.canaries))
    rng = np.random.default_rng(4)
    hits = sum(
        private_complete(model, prefix, PrivacyBudget("x", 1.5), DPMode.INFERENCE_DP, rng, 1.5).was_canary
        for _ in range(20_000)
    )
    assert hits / 20_000 == pytest.approx(rr_truth_probability(1.5), abs=0.01)


def test_non_member_gets_fabrication_not_a_real_secret():
    corpus, model = _model()
    rng = np.random.default_rng(8)
    outs = {
        private_complete(model, d, PrivacyBudget("x", 1.0), DPMode.INFERENCE_DP, rng, 0.1).completion
        for d in corpus.decoys for _ in range(10)
    }
    assert not outs & model.secrets
    assert GENERIC_COMPLETION in outs and len(outs) > 1


def test_utility_retention_bounds():
    corpus, model = _model(background_degradation=0.0)
    prompts = list(corpus.background)
    assert utility_retention(model, DPMode.NO_DP, prompts) == 1.0
    _, flagged = _model(false_flag_rate=1.0)
    u = utility_retention(flagged, DPMode.INFERENCE_DP, prompts, seed=1, epsilon=1.5)
    assert 0.5 < u < 1.0
    with pytest.raises(EmptyEvalSet):
        utility_retention(model, DPMode.NO_DP, [])
    with pytest.raises(InvalidParameter):
        utility_retention(model, DPMode.NO_DP, list(corpus.canaries)[:1])


def test_memorisation_strength_validated():
    corpus = synthetic_corpus(3, 3)
    with pytest.raises(InvalidParameter):
        build_model(corpus, 1.5)


def test_fixture_corpus_loads():
    corpus = load_corpus(FIXTURE)
    assert len(corpus.canaries) == 20 and len(corpus.background) == 40 and len(corpus.decoys) == 10
    assert not set(corpus.canaries) & set(corpus.decoys)


def test_malformed_fixture_line(tmp_path):
    p = tmp_path / "c.tsv"
    p.write_text("canary\tonly-prefix\n")
    with pytest.raises(ValueError, match=":1:"):
        load_corpus(p)
