"""Walk a few transfers through the rule tables and the region graph."""

from xborder.policy import DataPacket, SensitivityClass, evaluate_transfer, required_controls
from xborder.routing import RegionGraph, plan_route, static_route
from xborder.simkit import load_config

cfg = load_config()
reg, graph = cfg.registry, cfg.graph

# %% verdicts for one EU record at each class
for cls in SensitivityClass:
    pkt = DataPacket("demo", "EU", "US", "EU", cls, b"...")
    dec = evaluate_transfer(pkt, reg)
    print(f"EU->US {cls.label:<18} {dec.verdict.value:<20} {', '.join(dec.rule_ids)}")

# %% controls that ride along with an allowed transfer
pkt = DataPacket("demo", "EU", "US", "EU", SensitivityClass.PERSONAL, b"...", "eu-west", "us-east")
dec = evaluate_transfer(pkt, reg)
print(sorted(required_controls(dec, reg.regime_of("EU"), SensitivityClass.PERSONAL)))

# %% residency: CN personal data never leaves
cn = DataPacket("demo", "CN", "US", "CN", SensitivityClass.PERSONAL, b"...")
print(evaluate_transfer(cn, reg).rationale)

# %% a graph where the cheap path crosses a forbidden jurisdiction
toy = RegionGraph(
    {"fra": "EU", "bj": "CN", "sf": "US", "nyc": "US"},
    [("fra", "bj", 40), ("bj", "sf", 40), ("fra", "nyc", 75), ("nyc", "sf", 60)],
)
pkt = DataPacket("demo", "EU", "US", "EU", SensitivityClass.PERSONAL, b"...", "fra", "sf")
print("latency only :", static_route(toy, "fra", "sf"))
print("policy aware :", plan_route(pkt, toy, reg))
