"""Architecture variants and the mechanism toggles each one enables."""

from __future__ import annotations

import enum
from dataclasses import dataclass


class ArchitectureVariant(enum.Enum):
    STANDARD_ENCRYPTION = "StandardEncryption"
    FEDERATED_LEARNING = "FederatedLearning"
    LOCALIZATION_DP = "LocalizationDP"
    PROPOSED = "Proposed"

    @classmethod
    def parse(cls, value) -> "ArchitectureVariant":
        if isinstance(value, cls):
            return value
        for v in cls:
            if value in (v.value, v.name, v.value.lower()):
                return v
        raise ValueError(f"unknown variant {value!r}")


@dataclass(frozen=True)
class VariantProfile:
    key_layout: str          # "replicated" or "escrowed"
    transit_layers: bool
    policy_routing: bool
    pre_transfer_check: bool
    localization: bool
    federated_updates: bool
    privacy_row: str         # row name in privacy.rows
    audit: str               # "pre" or "post"

    @property
    def mechanisms(self) -> tuple:
        on = []
        if self.policy_routing:
            on.append("jurisdiction-aware-routing")
        if self.privacy_row == "Proposed":
            on.append("inference-time-dp")
        if self.key_layout == "escrowed" and self.transit_layers:
            on.append("multi-layer-encryption+escrow")
        if self.audit == "pre":
            on.append("compliance-assertion")
        return tuple(on)


PROFILES = {
    ArchitectureVariant.STANDARD_ENCRYPTION: VariantProfile(
        "replicated", False, False, False, False, False, "NoDP", "post"),
    ArchitectureVariant.FEDERATED_LEARNING: VariantProfile(
        "replicated", False, False, False, False, True, "FederatedLearning", "post"),
    ArchitectureVariant.LOCALIZATION_DP: VariantProfile(
        "replicated", False, False, False, True, False, "LocalizationDP", "post"),
    ArchitectureVariant.PROPOSED: VariantProfile(
        "escrowed", True, True, True, False, False, "Proposed", "pre"),
}

# Table II carries one row that is not an architecture variant.
REFERENCE_ROWS = ("TrainTimeDP",)
