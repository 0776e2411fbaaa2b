"""Jurisdiction-aware cross-border data transfer: policy evaluation,
compliant routing, escrowed layered encryption, Merkle audit logs and
inference-time differential privacy."""

from .errors import (
    AuthFailure,
    BudgetExhausted,
    ConfigError,
    DeniedTransfer,
    NoCompliantRoute,
    NotCompellable,
    UnknownJurisdiction,
    XBorderError,
)
from .policy import (
    DataPacket,
    RegimeRegistry,
    SensitivityClass,
    TransferDecision,
    Verdict,
    classify_packet,
    evaluate_transfer,
    load_registry,
)
from .routing import RegionGraph, Route, plan_route, validate_route

__version__ = "0.1.0"
