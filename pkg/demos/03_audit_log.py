"""Append decisions to a Merkle log, prove one, then tamper with it."""

import tempfile
from pathlib import Path

from xborder.audit import AuditRecord, MerkleLog, prove_inclusion, verify_assertion, verify_export, write_export

log = MerkleLog()
for i, (o, d, v) in enumerate([("EU", "US", "allow_with_controls"), ("CN", "EU", "deny"),
                               ("US", "CN", "allow_with_controls"), ("EU", "EU", "allow"),
                               ("US", "EU", "allow")]):
    log.append(AuditRecord(f"t{i}", o, d, v, (), i))
print("root", log.root.hex())

# %%
a = prove_inclusion(log, 1)
print(a.statement, "| path length", len(a.inclusion_proof), "| ok", verify_assertion(a, log.root, len(log)))

# %% export, edit one line, re-verify
with tempfile.TemporaryDirectory() as d:
    rec, man = Path(d) / "records.jsonl", Path(d) / "manifest.json"
    write_export(log, rec, man)
    print("clean:", verify_export(rec, man))
    rec.write_text(rec.read_text().replace('"deny"', '"allow"'))
    print("edited:", verify_export(rec, man))
