"""Render results as the three comparison tables (text and long-form CSV)."""

from __future__ import annotations

import csv
import io

from .metrics import OVERHEAD_COMPONENTS
from .variants import PROFILES, ArchitectureVariant

CSV_FIELDS = ("table", "row", "metric", "value")
TABLE_II_ORDER = ("NoDP", "FederatedLearning", "TrainTimeDP", "LocalizationDP", "Proposed")


def _index(results) -> dict:
    cells = list(results.get("cells", ())) + list(results.get("reference_cells", ()))
    return {(c["scenario"], c["variant"]): c for c in cells}


def table_rows(results) -> list:
    """Long-form (table, row, metric, value) tuples; value is a float or None."""
    cells = _index(results)
    rows = []
    for v in ArchitectureVariant:
        a = cells.get(("A", v.value))
        if a:
            asr = a["asr"]
            rows.append(("I", v.value, "attack_success_pct", None if asr is None else 100.0 * asr))
            rows.append(("I", v.value, "plaintext_recovered_pct", a["plaintext_recovered_pct"]))

    by_row = {}
    for (s, name), c in cells.items():
        if s == "B":
            by_row[c["extra"]["privacy_row"]] = c
    for name in TABLE_II_ORDER:
        b = by_row.get(name)
        if b:
            rows.append(("II", name, "pii_per_1000", b["pii_per_1000"]))
            rows.append(("II", name, "utility_retention", b["utility_retention"]))

    for v in ArchitectureVariant:
        c = cells.get(("C", v.value))
        if not c:
            continue
        ov = c["overhead"] or {}
        for comp in OVERHEAD_COMPONENTS + ("total",):
            rows.append(("III", v.value, f"overhead_{comp}_pct", ov.get(comp)))
        rows.append(("III", v.value, "cvr", c["cvr"]))
        rows.append(("III", v.value, "prevention_rate", c["extra"]["probabilistic"]["prevention_rate"]))
    return rows


def _fmt(v, width=10, digits=2) -> str:
    return f"{'n/a':>{width}}" if v is None else f"{v:>{width}.{digits}f}"


def render_text(results, measured=None) -> str:
    cells = _index(results)
    mttv = {}
    if measured:
        mttv = {c["variant"]: c["mttv_ms"] for c in measured["cells"] if c["scenario"] == "C"}
    out = [f"config {results.get('config_hash')}  seed {results.get('seed')}", ""]

    out.append("Table I  border interception with compelled escrow access")
    out.append(f"{'variant':<22}{'ASR %':>10}{'recovered %':>14}")
    for v in ArchitectureVariant:
        a = cells.get(("A", v.value))
        if a:
            asr = None if a["asr"] is None else 100 * a["asr"]
            out.append(f"{v.value:<22}{_fmt(asr)}{_fmt(a['plaintext_recovered_pct'], 14)}")
    out.append("")

    out.append("Table II  prompt extraction (1,000 queries) and utility")
    out.append(f"{'row':<22}{'PII/1000':>10}{'utility':>10}")
    for kind, row, metric, value in table_rows(results):
        if kind == "II" and metric == "pii_per_1000":
            util = next(r[3] for r in table_rows(results) if r[:3] == ("II", row, "utility_retention"))
            out.append(f"{row:<22}{_fmt(value)}{_fmt(util, 10, 3)}")
    out.append("")

    out.append("Table III  enforcement overhead (% over no-controls baseline) and compliance")
    head = "".join(f"{c:>11}" for c in OVERHEAD_COMPONENTS + ("total",))
    out.append(f"{'variant':<22}{head}{'CVR':>8}{'prevent':>9}{'MTTV ms':>10}")
    for v in ArchitectureVariant:
        c = cells.get(("C", v.value))
        if not c:
            continue
        ov = c["overhead"] or {}
        vals = "".join(_fmt(ov.get(k), 11) for k in OVERHEAD_COMPONENTS + ("total",))
        prev = c["extra"]["probabilistic"]["prevention_rate"]
        out.append(f"{v.value:<22}{vals}{_fmt(c['cvr'], 8, 3)}{_fmt(prev, 9, 3)}{_fmt(mttv.get(v.value), 10, 4)}")
        mech = ", ".join(PROFILES[v].mechanisms) or "none"
        out.append(f"  mechanisms: {mech}")
    return "\n".join(out) + "\n"


def render_csv(results) -> str:
    buf = io.StringIO()
    buf.write(f"# config_hash={results.get('config_hash')} seed={results.get('seed')}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for table, row, metric, value in table_rows(results):
        w.writerow((table, row, metric, "" if value is None else repr(float(value))))
    return buf.getvalue()


def parse_csv(text: str) -> list:
    """Inverse of render_csv.  Raises ValueError naming the bad line."""
    lines = [(n, l) for n, l in enumerate(text.splitlines(), 1) if not l.startswith("#")]
    rows = list(csv.reader(l for _, l in lines))
    if not rows or tuple(rows[0]) != CSV_FIELDS:
        raise ValueError(f"line {lines[0][0] if lines else 1}: expected header {','.join(CSV_FIELDS)}")
    out = []
    for (lineno, _), row in zip(lines[1:], rows[1:]):
        if len(row) != len(CSV_FIELDS):
            raise ValueError(f"line {lineno}: expected {len(CSV_FIELDS)} fields, got {len(row)}")
        t, r, m, v = row
        try:
            out.append((t, r, m, float(v) if v != "" else None))
        except ValueError:
            raise ValueError(f"line {lineno}: value {v!r} is not a number") from None
    return out
