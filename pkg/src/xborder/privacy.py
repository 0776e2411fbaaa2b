"""Jurisdiction-aware inference-time differential privacy over a canary model.

The "model" is a lookup table that has memorised some synthetic PII
(canaries) next to benign background completions.  Inference-time DP is
randomized response on whether a PII-shaped completion is released, charged
against a per-account epsilon budget under sequential composition.
"""

from __future__ import annotations

import enum
import math
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .errors import BudgetExhausted, EmptyEvalSet, InsufficientTrials, InvalidParameter

GENERIC_COMPLETION = "<no information>"
DEGRADED_COMPLETION = "<garbled>"
_BUDGET_SLACK = 1e-9


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


class DPMode(enum.Enum):
    NO_DP = "NoDP"
    TRAIN_TIME_DP = "TrainTimeDP"
    INFERENCE_DP = "InferenceDP"


def jurisdiction_epsilon(code: str, registry) -> float:
    return registry.jurisdiction(code).epsilon_default


@dataclass
class PrivacyBudget:
    jurisdiction: str
    epsilon_total: float
    delta: float = 0.0
    epsilon_spent: float = 0.0
    charges: list = field(default_factory=list, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def __post_init__(self):
        if not self.epsilon_total > 0:
            raise InvalidParameter("epsilon_total must be positive")
        if not 0.0 <= self.delta < 1.0:
            raise InvalidParameter("delta must lie in [0, 1)")
        if self.epsilon_spent < 0:
            raise InvalidParameter("epsilon_spent must be non-negative")

    @property
    def remaining(self) -> float:
        return self.epsilon_total - self.epsilon_spent

    def can_afford(self, epsilon: float) -> bool:
        return self.epsilon_spent + epsilon <= self.epsilon_total + _BUDGET_SLACK


def charge_budget(budget: PrivacyBudget, epsilon: float) -> PrivacyBudget:
    """Spend ``epsilon`` from ``budget`` in place (sequential composition)."""
    if not epsilon > 0 or not math.isfinite(epsilon):
        raise InvalidParameter(f"charge must be a positive finite epsilon, got {epsilon!r}")
    with budget._lock:
        if not budget.can_afford(epsilon):
            raise BudgetExhausted(
                f"{budget.jurisdiction}: charging {epsilon:g} would exceed "
                f"{budget.epsilon_total:g} (spent {budget.epsilon_spent:g})"
            )
        budget.epsilon_spent = min(budget.epsilon_spent + epsilon, budget.epsilon_total)
        budget.charges.append(epsilon)
    return budget


def laplace_scale(sensitivity: float, epsilon: float) -> float:
    if not sensitivity > 0 or not epsilon > 0:
        raise InvalidParameter("sensitivity and epsilon must both be positive")
    return sensitivity / epsilon


def laplace_noise(sensitivity: float, epsilon: float, seed=None, size=None):
    """Laplace(0, sensitivity/epsilon) draw(s); deterministic for a fixed seed."""
    b = laplace_scale(sensitivity, epsilon)
    out = _rng(seed).laplace(0.0, b, size=size)
    return float(out) if size is None else out


class RandomizedResponse:
    """Binary randomized response: report the true bit with probability
    e^eps / (1 + e^eps), otherwise its negation."""

    def __init__(self, epsilon: float):
        if not epsilon >= 0 or not math.isfinite(epsilon):
            raise InvalidParameter(f"epsilon must be finite and >= 0, got {epsilon!r}")
        self.epsilon = float(epsilon)
        self.p_truth = 1.0 / (1.0 + math.exp(-self.epsilon))

    def truthful(self, rng: np.random.Generator) -> bool:
        return bool(rng.random() < self.p_truth)

    def __call__(self, bits, rng: np.random.Generator):
        bits = np.asarray(bits, dtype=bool)
        keep = rng.random(bits.shape) < self.p_truth
        return np.where(keep, bits, ~bits)

    @property
    def advantage_bound(self) -> float:
        """Max TPR - FPR of any membership test on one release."""
        return 2.0 * self.p_truth - 1.0


@dataclass(frozen=True)
class Corpus:
    canaries: Mapping
    background: Mapping
    decoys: tuple = ()


def synthetic_corpus(n_canaries: int, n_background: int, n_decoys: int = 0, seed=0) -> Corpus:
    rng = _rng(seed)
    ids = rng.permutation(10 * (n_canaries + n_decoys) + 10)
    canaries = {}
    for i in range(n_canaries):
        digits = rng.integers(0, 10, size=9)
        secret = "{}{}{}-{}{}-{}{}{}{}".format(*digits)
        canaries[f"The national ID number of resident #{ids[i]:05d} is"] = secret
    decoys = tuple(
        f"The national ID number of resident #{ids[n_canaries + i]:05d} is" for i in range(n_decoys)
    )
    background = {
        f"Summarise telemetry batch {i:05d}:": f"batch {i:05d} nominal" for i in range(n_background)
    }
    return Corpus(canaries, background, decoys)


def load_corpus(path) -> Corpus:
    """Read a tab-separated fixture: ``kind<TAB>prefix[<TAB>completion]``.

    ``kind`` is one of canary, background, decoy.  Blank lines and lines
    starting with ``#`` are ignored.
    """
    canaries, background, decoys = {}, {}, []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        kind = parts[0].strip()
        if kind == "decoy" and len(parts) >= 2:
            decoys.append(parts[1])
        elif kind in ("canary", "background") and len(parts) >= 3:
            (canaries if kind == "canary" else background)[parts[1]] = parts[2]
        else:
            raise ValueError(f"{path}:{lineno}: expected kind<TAB>prefix<TAB>completion")
    return Corpus(canaries, background, tuple(decoys))


@dataclass(frozen=True)
class CanaryModel:
    canaries: Mapping
    background: Mapping
    memorization_strength: float
    recallable: frozenset
    degraded: frozenset = frozenset()
    flagged: frozenset = frozenset()

    def __post_init__(self):
        if not 0.0 <= self.memorization_strength <= 1.0:
            raise InvalidParameter("memorization_strength must lie in [0, 1]")
        overlap = set(self.canaries) & set(self.background)
        if overlap:
            raise InvalidParameter(f"canary prefixes collide with background: {sorted(overlap)[:3]}")

    @property
    def secrets(self) -> frozenset:
        return frozenset(self.canaries.values())


def build_model(
    corpus: Corpus,
    memorization_strength: float,
    seed=None,
    background_degradation: float = 0.0,
    false_flag_rate: float = 0.0,
) -> CanaryModel:
    """Draw which canaries are recallable, which background answers are
    degraded (training-time noise) and which benign outputs the inference
    gate mistakes for memorised content."""
    for name, v in (
        ("memorization_strength", memorization_strength),
        ("background_degradation", background_degradation),
        ("false_flag_rate", false_flag_rate),
    ):
        if not 0.0 <= v <= 1.0:
            raise InvalidParameter(f"{name} must lie in [0, 1]")
    rng = _rng(seed)
    canary_keys = list(corpus.canaries)
    bg_keys = list(corpus.background)
    recall = rng.random(len(canary_keys)) < memorization_strength
    degrade = rng.random(len(bg_keys)) < background_degradation
    flag = rng.random(len(bg_keys)) < false_flag_rate
    return CanaryModel(
        canaries=dict(corpus.canaries),
        background=dict(corpus.background),
        memorization_strength=memorization_strength,
        recallable=frozenset(k for k, r in zip(canary_keys, recall) if r),
        degraded=frozenset(k for k, d in zip(bg_keys, degrade) if d),
        flagged=frozenset(k for k, f in zip(bg_keys, flag) if f),
    )


@dataclass(frozen=True)
class QueryResult:
    completion: str
    was_canary: bool
    epsilon_charged: float = 0.0


def _fabricate(model: CanaryModel, rng: np.random.Generator) -> str:
    secrets = model.secrets
    while True:
        d = rng.integers(0, 10, size=9)
        fake = "{}{}{}-{}{}-{}{}{}{}".format(*d)
        if fake not in secrets:
            return fake


def private_complete(
    model: CanaryModel,
    prompt: str,
    budget: PrivacyBudget | None,
    mode: DPMode,
    seed=None,
    epsilon: float | None = None,
) -> QueryResult:
    """Answer one prompt.

    Under InferenceDP every PII-shaped prompt (anything that is not a known
    background prompt) and every gate-flagged background prompt goes through
    randomized response and is charged ``epsilon``; other background prompts
    are free.
    """
    mode = DPMode(mode)
    rng = _rng(seed)
    bg = model.background.get(prompt)
    if bg is not None:
        answer = DEGRADED_COMPLETION if prompt in model.degraded else bg
        if mode is DPMode.INFERENCE_DP and prompt in model.flagged:
            eps = _charge(budget, epsilon)
            if not RandomizedResponse(eps).truthful(rng):
                answer = GENERIC_COMPLETION
            return QueryResult(answer, False, eps)
        return QueryResult(answer, False, 0.0)

    memorised = model.canaries[prompt] if prompt in model.recallable else None
    if mode is not DPMode.INFERENCE_DP:
        return QueryResult(memorised or GENERIC_COMPLETION, memorised is not None, 0.0)

    eps = _charge(budget, epsilon)
    truthful = RandomizedResponse(eps).truthful(rng)
    if memorised is not None:
        return QueryResult(memorised if truthful else GENERIC_COMPLETION, truthful, eps)
    return QueryResult(GENERIC_COMPLETION if truthful else _fabricate(model, rng), False, eps)


def _charge(budget, epsilon):
    if budget is None or epsilon is None:
        raise InvalidParameter("InferenceDP needs a budget and a per-query epsilon")
    charge_budget(budget, epsilon)
    return epsilon


def utility_retention(
    model: CanaryModel,
    mode: DPMode,
    prompts: Iterable[str],
    seed=None,
    epsilon: float | None = None,
) -> float:
    """Share of background prompts answered correctly; the NoDP reference is 1.0.

    InferenceDP queries are charged to a fresh single-query budget each,
    standing in for many independent benign users.
    """
    prompts = list(prompts)
    if not prompts:
        raise EmptyEvalSet("utility needs at least one background prompt")
    rng = _rng(seed)
    correct = 0
    for p in prompts:
        if p not in model.background:
            raise InvalidParameter(f"eval prompt is not a background prompt: {p!r}")
        budget = PrivacyBudget("eval", epsilon) if mode is DPMode.INFERENCE_DP else None
        res = private_complete(model, p, budget, mode, rng, epsilon)
        correct += res.completion == model.background[p]
    return correct / len(prompts)


def estimate_privacy_loss(mechanism, neighbors=(True, False), trials: int = 1_000_000, seed=None) -> float:
    """Monte Carlo epsilon-hat for a mechanism on a two-point neighbouring pair.

    ``mechanism(inputs, rng)`` maps an array of inputs to an array of
    outputs from a small discrete domain.  Returns the largest absolute log
    ratio of empirical output probabilities.
    """
    if trials < 1000:
        raise InsufficientTrials(f"need at least 1000 trials, got {trials}")
    rng = _rng(seed)
    x1, x2 = neighbors
    out1 = np.asarray(mechanism(np.full(trials, x1), rng))
    out2 = np.asarray(mechanism(np.full(trials, x2), rng))
    domain = np.union1d(np.unique(out1), np.unique(out2))
    worst = 0.0
    for o in domain:
        c1 = int(np.count_nonzero(out1 == o))
        c2 = int(np.count_nonzero(out2 == o))
        if c1 == 0 or c2 == 0:
            raise InsufficientTrials(f"output {o!r} never observed under one input; increase trials")
        worst = max(worst, abs(math.log(c1 / c2)))
    return worst
