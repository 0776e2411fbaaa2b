"""Canary extraction against a memorising model, with and without the
inference-time gate."""

import numpy as np

from xborder.adversary import ModelEndpoint, extraction_attack, membership_inference
from xborder.privacy import DPMode, PrivacyBudget, RandomizedResponse, build_model, synthetic_corpus

corpus = synthetic_corpus(100, 200, 100, seed=0)
model = build_model(corpus, 0.42, seed=1)
targets = list(corpus.canaries)

# %% no protection
rep = extraction_attack(ModelEndpoint(model, DPMode.NO_DP), targets, 1000, seed=2)
print("no DP      :", rep.extras["per_1000"], "secrets per 1000 queries")

# %% gate at the US epsilon, one account with a 24-epsilon lifetime budget
ep = ModelEndpoint(model, DPMode.INFERENCE_DP, PrivacyBudget("US", 24.0), 1.5, seed=3)
rep = extraction_attack(ep, targets, 1000, seed=2)
print("gated      :", rep.extras["per_1000"], "secrets;", rep.extras["refused"], "queries refused")

# %% membership inference, averaged over 30 attacks, sits at the randomized-response bound
rng = np.random.default_rng(4)
full = build_model(corpus, 1.0, seed=5)
for eps in (0.8, 1.5):
    advs = []
    for _ in range(30):
        ep = ModelEndpoint(full, DPMode.INFERENCE_DP, PrivacyBudget("x", 1e9), eps, rng)
        advs.append(membership_inference(ep, targets, corpus.decoys, rng).extras["advantage"])
    print(f"eps={eps}: advantage {np.mean(advs):.3f}  bound {RandomizedResponse(eps).advantage_bound:.3f}")
