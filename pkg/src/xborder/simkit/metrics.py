from __future__ import annotations

from dataclasses import dataclass, field

OVERHEAD_COMPONENTS = ("routing", "encryption", "escrow", "dp", "proof")


@dataclass
class ScenarioMetrics:
    """Metrics for one (scenario, variant) cell.

    Rates are fractions in [0, 1] except ``plaintext_recovered_pct`` and the
    overhead entries, which are percentages.  ``None`` marks a metric that
    does not apply or whose denominator was zero.  ``mttv_ms`` and
    ``measured`` hold wall-clock values and are kept out of the
    deterministic results file.
    """

    scenario: str
    variant: str
    asr: float | None = None
    plaintext_recovered_pct: float | None = None
    pii_per_1000: float | None = None
    cvr: float | None = None
    utility_retention: float | None = None
    overhead: dict | None = None
    extra: dict = field(default_factory=dict)
    mttv_ms: float | None = None
    measured: dict = field(default_factory=dict)

    def deterministic_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "variant": self.variant,
            "asr": self.asr,
            "plaintext_recovered_pct": self.plaintext_recovered_pct,
            "pii_per_1000": self.pii_per_1000,
            "cvr": self.cvr,
            "utility_retention": self.utility_retention,
            "overhead": self.overhead,
            "extra": self.extra,
        }

    def measured_dict(self) -> dict:
        return {"scenario": self.scenario, "variant": self.variant, "mttv_ms": self.mttv_ms, **self.measured}
