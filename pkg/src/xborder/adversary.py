"""Attackers: border interception under compelled access, MITM tampering,
prompt extraction and membership inference."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .crypto import EscrowRegistry, LayeredCiphertext, compel_escrow, open_with
from .errors import AuthFailure, BudgetExhausted, NotCompellable
from .privacy import GENERIC_COMPLETION, DPMode, PrivacyBudget, private_complete


@dataclass(frozen=True)
class AttackReport:
    attempts: int
    successes: int
    detail: tuple = ()
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0 <= self.successes <= self.attempts:
            raise ValueError(f"invalid attack counts {self.successes}/{self.attempts}")

    @property
    def success_rate(self) -> float | None:
        return self.successes / self.attempts if self.attempts else None

    def to_dict(self) -> dict:
        return {
            "attempts": self.attempts,
            "successes": self.successes,
            "success_rate": self.success_rate,
            **self.extras,
        }


@dataclass(frozen=True)
class Intercept:
    packet_id: str
    ciphertext: LayeredCiphertext
    plaintext: bytes


def border_intercept(
    captured: Sequence[Intercept], crossing_jurisdiction: str, escrow: EscrowRegistry
) -> AttackReport:
    """Compel the crossing jurisdiction's escrow and try to open every capture."""
    try:
        keys = compel_escrow(crossing_jurisdiction, escrow)
    except NotCompellable:
        keys = frozenset()
    detail = []
    for item in captured:
        recovered = keys and open_with(item.ciphertext, keys) == item.plaintext
        detail.append((item.packet_id, bool(recovered)))
    return AttackReport(
        attempts=len(detail),
        successes=sum(ok for _, ok in detail),
        detail=tuple(detail),
        extras={"jurisdiction": crossing_jurisdiction, "compelled_keys": len(keys)},
    )


def flip_random_bit(data: bytes, rng: np.random.Generator) -> bytes:
    buf = bytearray(data)
    pos = int(rng.integers(len(buf)))
    buf[pos] ^= 1 << int(rng.integers(8))
    return bytes(buf)


def mitm_tamper(
    ct: LayeredCiphertext,
    receiver_keys: Iterable,
    original: bytes,
    seed=None,
    attempts: int = 1,
    edge: tuple | None = None,
) -> AttackReport:
    """Flip bits of the in-flight onion and count how often the receiver,
    holding every legitimate key, accepts altered plaintext."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    keys = list(receiver_keys)
    wire = ct.to_bytes()
    detail = []
    for _ in range(attempts):
        try:
            tampered = ct.with_outer_bytes(flip_random_bit(wire, rng))
        except AuthFailure:
            detail.append(False)
            continue
        got = open_with(tampered, keys)
        detail.append(got is not None and got != original)
    return AttackReport(attempts, sum(detail), tuple(detail), {"edge": list(edge) if edge else None})


class ModelEndpoint:
    """Query interface an attacker sees: prompt in, QueryResult out."""

    def __init__(self, model, mode: DPMode, budget: PrivacyBudget | None = None,
                 epsilon: float | None = None, seed=None):
        self.model = model
        self.mode = DPMode(mode)
        self.budget = budget
        self.epsilon = epsilon
        self.rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)

    def __call__(self, prompt: str):
        return private_complete(self.model, prompt, self.budget, self.mode, self.rng, self.epsilon)


def extraction_attack(
    endpoint: Callable, targets: Sequence[str], query_budget: int = 1000, seed=None
) -> AttackReport:
    """Cycle through target prefixes (shuffled) for ``query_budget`` queries.

    Success counts distinct secrets released.  Refused queries (exhausted
    privacy budget) still count against the query budget.
    """
    if query_budget < 1:
        raise ValueError("query_budget must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    order = [targets[i] for i in rng.permutation(len(targets))] if len(targets) else []
    extracted = set()
    detail = []
    refused = 0
    for q in range(query_budget if order else 0):
        prompt = order[q % len(order)]
        try:
            res = endpoint(prompt)
        except BudgetExhausted:
            refused += 1
            detail.append((prompt, "refused"))
            continue
        if res.was_canary:
            extracted.add(res.completion)
        detail.append((prompt, "secret" if res.was_canary else "miss"))
    return AttackReport(
        attempts=query_budget,
        successes=len(extracted),
        detail=tuple(detail),
        extras={"per_1000": len(extracted) * 1000.0 / query_budget, "refused": refused},
    )


def membership_inference(
    endpoint: Callable, members: Sequence[str], non_members: Sequence[str], seed=None
) -> AttackReport:
    """Guess 'member' whenever the reply is PII-shaped rather than generic.

    ``advantage`` = TPR - FPR; it is 0 when either candidate group is empty.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    candidates = [(p, True) for p in members] + [(p, False) for p in non_members]
    order = rng.permutation(len(candidates)) if candidates else []
    tp = fp = correct = 0
    detail = []
    for i in order:
        prompt, is_member = candidates[i]
        try:
            guess = endpoint(prompt).completion != GENERIC_COMPLETION
        except BudgetExhausted:
            guess = False
        tp += guess and is_member
        fp += guess and not is_member
        correct += guess == is_member
        detail.append((prompt, is_member, guess))
    tpr = tp / len(members) if members else 0.0
    fpr = fp / len(non_members) if non_members else 0.0
    advantage = tpr - fpr if members and non_members else 0.0
    return AttackReport(
        attempts=len(candidates),
        successes=correct,
        detail=tuple(detail),
        extras={"tpr": tpr, "fpr": fpr, "advantage": advantage},
    )
