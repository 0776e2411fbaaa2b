"""Jurisdictions, regulation regimes and transfer legality.

Regimes are declarative rule tables.  A registry document looks like::

    jurisdictions:
      - {code: EU, regime: GDPR, epsilon: 0.8, compelled_access: false}
    regimes:
      - id: GDPR
        residency_required: false
        class_uplift: {Personal: SensitivePersonal}
        min_controls: {Public: [], Personal: [audit-log], ...}
        rules:
          - {id: GDPR-EU-US-P, source: EU, destination: US, class: Personal,
             verdict: allow_with_controls, controls: [transit-encryption]}

Every regime must list ``min_controls`` for all four sensitivity classes.
Rules are owned by the regime of their ``source`` jurisdiction.  Anything not
covered by a rule is denied.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping

import yaml

from .errors import ConfigError, DeniedTransfer, UnknownJurisdiction


class SensitivityClass(enum.IntEnum):
    PUBLIC = 0
    PERSONAL = 1
    SENSITIVE_PERSONAL = 2
    CONFIDENTIAL = 3

    @property
    def label(self) -> str:
        return _CLASS_LABELS[self]

    @classmethod
    def parse(cls, value) -> "SensitivityClass":
        if isinstance(value, cls):
            return value
        if isinstance(value, int):
            return cls(value)
        key = str(value).replace("_", "").replace("-", "").lower()
        for member, label in _CLASS_LABELS.items():
            if label.lower() == key:
                return member
        raise ConfigError(f"unknown sensitivity class: {value!r}")


_CLASS_LABELS = {
    SensitivityClass.PUBLIC: "Public",
    SensitivityClass.PERSONAL: "Personal",
    SensitivityClass.SENSITIVE_PERSONAL: "SensitivePersonal",
    SensitivityClass.CONFIDENTIAL: "Confidential",
}


class Verdict(enum.Enum):
    ALLOW = "allow"
    ALLOW_WITH_CONTROLS = "allow_with_controls"
    DENY = "deny"


@dataclass(frozen=True)
class TransferRule:
    id: str
    source: str
    destination: str
    data_class: SensitivityClass
    verdict: Verdict
    controls: frozenset = frozenset()

    def __post_init__(self):
        if self.verdict is Verdict.ALLOW_WITH_CONTROLS and not self.controls:
            raise ConfigError(f"rule {self.id}: allow_with_controls needs controls")


@dataclass(frozen=True)
class RegulationRegime:
    id: str
    residency_required: bool
    rules: tuple = ()
    min_controls: Mapping = field(default_factory=dict)
    class_uplift: Mapping = field(default_factory=dict)

    def __post_init__(self):
        missing = [c.label for c in SensitivityClass if c not in self.min_controls]
        if missing:
            raise ConfigError(f"regime {self.id}: min_controls missing for {missing}")
        object.__setattr__(self, "min_controls", MappingProxyType(dict(self.min_controls)))
        object.__setattr__(self, "class_uplift", MappingProxyType(dict(self.class_uplift)))


@dataclass(frozen=True)
class Jurisdiction:
    code: str
    regime: RegulationRegime
    epsilon_default: float
    compelled_access: bool = False

    def __post_init__(self):
        if not self.epsilon_default > 0:
            raise ConfigError(f"jurisdiction {self.code}: epsilon must be > 0")


@dataclass(frozen=True)
class DataPacket:
    id: str
    origin: str
    destination: str
    subject_jurisdiction: str
    data_class: SensitivityClass
    payload: bytes
    origin_region: str | None = None
    destination_region: str | None = None

    def __post_init__(self):
        if not self.payload:
            raise ValueError(f"packet {self.id}: payload must be non-empty")


@dataclass(frozen=True)
class TransferDecision:
    verdict: Verdict
    rule_ids: tuple = ()
    rationale: str = ""
    controls: frozenset = frozenset()

    def __post_init__(self):
        if self.verdict is Verdict.DENY and not self.rule_ids:
            raise ValueError("a Deny decision must cite at least one rule")
        if self.verdict is Verdict.ALLOW_WITH_CONTROLS and not self.controls:
            raise ValueError("AllowWithControls needs a non-empty control set")

    @property
    def allowed(self) -> bool:
        return self.verdict is not Verdict.DENY


class RegimeRegistry:
    """Immutable lookup of jurisdictions, regimes and their rule tables."""

    def __init__(self, jurisdictions: Iterable[Jurisdiction]):
        table = {}
        for j in jurisdictions:
            if j.code in table:
                raise ConfigError(f"duplicate jurisdiction code {j.code!r}")
            table[j.code] = j
        self._jurisdictions = MappingProxyType(table)
        self._rules = {}
        for j in table.values():
            for rule in j.regime.rules:
                for code in (rule.source, rule.destination):
                    if code not in table:
                        raise ConfigError(f"rule {rule.id} references unknown jurisdiction {code!r}")
                if table[rule.source].regime.id != j.regime.id:
                    raise ConfigError(
                        f"rule {rule.id}: source {rule.source} is not governed by {j.regime.id}"
                    )
                key = (rule.source, rule.destination, rule.data_class)
                existing = self._rules.get(key)
                if existing is not None and existing != rule:
                    raise ConfigError(f"rules {existing.id} and {rule.id} overlap on {key}")
                self._rules[key] = rule

    @property
    def codes(self) -> tuple:
        return tuple(self._jurisdictions)

    def __contains__(self, code) -> bool:
        return code in self._jurisdictions

    def jurisdiction(self, code: str) -> Jurisdiction:
        try:
            return self._jurisdictions[code]
        except KeyError:
            raise UnknownJurisdiction(code) from None

    def regime_of(self, code: str) -> RegulationRegime:
        return self.jurisdiction(code).regime

    def rule_for(self, source: str, destination: str, data_class: SensitivityClass):
        return self._rules.get((source, destination, SensitivityClass(data_class)))

    def rules(self) -> list:
        return sorted(self._rules.values(), key=lambda r: r.id)

    @classmethod
    def from_dict(cls, doc: Mapping) -> "RegimeRegistry":
        try:
            regimes = {}
            for spec in doc["regimes"]:
                rules = tuple(
                    TransferRule(
                        id=str(r["id"]),
                        source=str(r["source"]),
                        destination=str(r["destination"]),
                        data_class=SensitivityClass.parse(r["class"]),
                        verdict=Verdict(r["verdict"]),
                        controls=frozenset(r.get("controls", ())),
                    )
                    for r in spec.get("rules", ())
                )
                regimes[spec["id"]] = RegulationRegime(
                    id=str(spec["id"]),
                    residency_required=bool(spec.get("residency_required", False)),
                    rules=rules,
                    min_controls={
                        SensitivityClass.parse(k): frozenset(v or ())
                        for k, v in spec.get("min_controls", {}).items()
                    },
                    class_uplift={
                        SensitivityClass.parse(k): SensitivityClass.parse(v)
                        for k, v in (spec.get("class_uplift") or {}).items()
                    },
                )
            jurisdictions = []
            for spec in doc["jurisdictions"]:
                if spec["regime"] not in regimes:
                    raise ConfigError(f"jurisdiction {spec['code']}: unknown regime {spec['regime']!r}")
                jurisdictions.append(
                    Jurisdiction(
                        code=str(spec["code"]),
                        regime=regimes[spec["regime"]],
                        epsilon_default=float(spec["epsilon"]),
                        compelled_access=bool(spec.get("compelled_access", False)),
                    )
                )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"malformed regime registry: {exc!r}") from exc
        return cls(jurisdictions)


def load_registry(path) -> RegimeRegistry:
    text = Path(path).read_text(encoding="utf-8")
    doc = yaml.safe_load(text)
    if not isinstance(doc, dict):
        raise ConfigError(f"registry file is empty or not a mapping: {path}")
    return RegimeRegistry.from_dict(doc.get("registry", doc))


def _resolve(registry: RegimeRegistry, *codes: str) -> None:
    for code in codes:
        registry.jurisdiction(code)


def classify_packet(packet: DataPacket, registry: RegimeRegistry) -> SensitivityClass:
    """Effective class: the declared class raised by the subject regime's uplift table.

    The uplift map is followed to a fixed point so the result is idempotent.
    """
    _resolve(registry, packet.origin, packet.destination, packet.subject_jurisdiction)
    uplift = registry.regime_of(packet.subject_jurisdiction).class_uplift
    current = SensitivityClass(packet.data_class)
    while True:
        nxt = max(current, uplift.get(current, current))
        if nxt == current:
            return current
        current = nxt


def _pair_verdict(registry, source, destination, data_class):
    if source == destination:
        return Verdict.ALLOW, None, frozenset(), f"{source}->{destination}: no border crossed"
    regime = registry.regime_of(source)
    if regime.residency_required and data_class >= SensitivityClass.PERSONAL:
        rid = f"{regime.id}:residency:{source}"
        return Verdict.DENY, rid, frozenset(), (
            f"{source}->{destination}: {regime.id} requires {data_class.label} data to stay in {source}"
        )
    rule = registry.rule_for(source, destination, data_class)
    if rule is None:
        rid = f"default-deny:{source}->{destination}:{data_class.label}"
        return Verdict.DENY, rid, frozenset(), f"{source}->{destination}: no rule for {data_class.label}"
    return rule.verdict, rule.id, rule.controls, f"{source}->{destination}: rule {rule.id}"


def evaluate_flow(
    packet: DataPacket, destination: str, registry: RegimeRegistry
) -> TransferDecision:
    """Decide whether ``packet`` may be moved into ``destination``.

    Both the origin regime and, when different, the data subject's regime
    must permit the move; the most restrictive verdict wins.
    """
    _resolve(registry, packet.origin, destination, packet.subject_jurisdiction)
    data_class = classify_packet(packet, registry)
    sources = [packet.origin]
    if packet.subject_jurisdiction != packet.origin:
        sources.append(packet.subject_jurisdiction)

    denies, cited, notes = [], [], []
    controls = set()
    for source in sources:
        verdict, rid, ctl, note = _pair_verdict(registry, source, destination, data_class)
        notes.append(note)
        if verdict is Verdict.DENY:
            denies.append(rid)
        elif rid is not None:
            cited.append(rid)
            controls |= ctl
    rationale = "; ".join(notes)
    if denies:
        return TransferDecision(Verdict.DENY, tuple(denies), rationale)
    if controls:
        return TransferDecision(Verdict.ALLOW_WITH_CONTROLS, tuple(cited), rationale, frozenset(controls))
    return TransferDecision(Verdict.ALLOW, tuple(cited), rationale)


def evaluate_transfer(packet: DataPacket, registry: RegimeRegistry) -> TransferDecision:
    return evaluate_flow(packet, packet.destination, registry)


def required_controls(
    decision: TransferDecision, regime: RegulationRegime, data_class: SensitivityClass
) -> frozenset:
    if decision.verdict is Verdict.DENY:
        raise DeniedTransfer(f"no controls for a denied transfer ({', '.join(decision.rule_ids)})")
    return frozenset(decision.controls) | frozenset(regime.min_controls[SensitivityClass(data_class)])
