from __future__ import annotations

import json

import numpy as np
import pytest

from oracles import rfc_root
from xborder.audit import (
    AuditRecord,
    ComplianceAssertion,
    ExportError,
    MerkleLog,
    append_record,
    merkle_root,
    prove_inclusion,
    verify_assertion,
    verify_export,
    write_export,
)
from xborder.errors import IndexOutOfRange


def record(i: int) -> AuditRecord:
    return AuditRecord(f"t{i:04d}", "EU", "US", "allow_with_controls", ("audit-log", "transit-encryption"), i)


def build(n: int) -> MerkleLog:
    log = MerkleLog()
    for i in range(n):
        append_record(log, record(i))
    return log


def test_incremental_root_equals_recomputation_up_to_64():
    log = MerkleLog()
    assert log.root == rfc_root([])
    for i in range(64):
        root = append_record(log, record(i))
        assert root == log.root == merkle_root(log.leaves) == rfc_root(log.records)


def test_all_inclusion_proofs_verify_up_to_32():
    for n in range(1, 33):
        log = build(n)
        for i in range(n):
            a = prove_inclusion(log, i)
            assert verify_assertion(a, log.root, n), (n, i)


def _corrupt(a: ComplianceAssertion, rng) -> ComplianceAssertion:
    kind = int(rng.integers(6))
    if kind == 0:
        buf = bytearray(a.record_bytes)
        pos = int(rng.integers(len(buf)))
        buf[pos] ^= 1 << int(rng.integers(8))
        return ComplianceAssertion(a.root, a.record_index, a.leaf_count, a.inclusion_proof, bytes(buf))
    if kind == 1 and a.inclusion_proof:
        path = list(a.inclusion_proof)
        j = int(rng.integers(len(path)))
        h = bytearray(path[j])
        h[int(rng.integers(32))] ^= 1 << int(rng.integers(8))
        path[j] = bytes(h)
        return ComplianceAssertion(a.root, a.record_index, a.leaf_count, tuple(path), a.record_bytes)
    if kind == 2 and a.leaf_count > 1:
        other = (a.record_index + 1 + int(rng.integers(a.leaf_count - 1))) % a.leaf_count
        return ComplianceAssertion(a.root, other, a.leaf_count, a.inclusion_proof, a.record_bytes)
    if kind == 3:
        return ComplianceAssertion(a.root, a.record_index, a.leaf_count + 1 + int(rng.integers(4)),
                                   a.inclusion_proof, a.record_bytes)
    if kind == 4:
        extra = (bytes(rng.bytes(32)),)
        path = a.inclusion_proof[:-1] if a.inclusion_proof and rng.random() < 0.5 else a.inclusion_proof + extra
        return ComplianceAssertion(a.root, a.record_index, a.leaf_count, path, a.record_bytes)
    forged = bytes(rng.bytes(32))
    return ComplianceAssertion(forged, a.record_index, a.leaf_count, a.inclusion_proof, a.record_bytes)


def test_corrupted_assertions_all_rejected():
    rng = np.random.default_rng(3)
    logs = {n: build(n) for n in range(1, 33)}
    rejected = 0
    for _ in range(10_000):
        n = int(rng.integers(1, 33))
        log = logs[n]
        a = prove_inclusion(log, int(rng.integers(n)))
        bad = _corrupt(a, rng)
        if bad == a:
            bad = _corrupt(a, rng)
        assert bad != a
        rejected += not verify_assertion(bad, log.root, n)
    assert rejected == 10_000


def test_size_is_not_pinned_by_path_alone():
    # a left-edge proof in a 5-leaf tree has the same shape as in a 6-leaf tree
    log = build(5)
    a = prove_inclusion(log, 0)
    wrong = ComplianceAssertion(a.root, 0, 6, a.inclusion_proof, a.record_bytes)
    assert verify_assertion(wrong, log.root)
    assert not verify_assertion(wrong, log.root, 5)


def test_proof_index_out_of_range():
    log = build(3)
    with pytest.raises(IndexOutOfRange):
        prove_inclusion(log, 3)
    with pytest.raises(IndexOutOfRange):
        prove_inclusion(MerkleLog(), 0)


def test_assertion_statement_reads_record():
    a = prove_inclusion(build(2), 1)
    assert a.statement == "transfer t0001 EU->US: allow_with_controls"


def test_canonical_bytes_are_order_independent():
    a = AuditRecord("x", "EU", "US", "allow", ("b", "a"), 1)
    b = AuditRecord("x", "EU", "US", "allow", ("a", "b"), 1)
    assert a.canonical_bytes() == b.canonical_bytes()
    assert AuditRecord.from_dict(json.loads(a.canonical_bytes())).canonical_bytes() == a.canonical_bytes()


def test_log_holds_no_payload_fields():
    doc = json.loads(record(0).canonical_bytes())
    assert set(doc) == {"transfer_id", "origin", "destination", "verdict", "controls_applied", "timestamp"}


def _export(tmp_path, n=20):
    log = build(n)
    rec, man = tmp_path / "records.jsonl", tmp_path / "manifest.json"
    write_export(log, rec, man)
    return log, rec, man


def test_export_round_trip(tmp_path):
    _, rec, man = _export(tmp_path)
    assert verify_export(rec, man) == (20, None)


def test_export_edit_names_index(tmp_path):
    _, rec, man = _export(tmp_path)
    lines = rec.read_bytes().split(b"\n")
    lines[7] = lines[7].replace(b"allow_with_controls", b"allow")
    rec.write_bytes(b"\n".join(lines))
    assert verify_export(rec, man) == (7, 7)


def test_export_truncation_is_a_parse_error(tmp_path):
    _, rec, man = _export(tmp_path)
    data = rec.read_bytes()
    rec.write_bytes(data[: len(data) // 2])
    with pytest.raises(ExportError, match="line"):
        verify_export(rec, man)


def test_export_dropped_record_detected(tmp_path):
    _, rec, man = _export(tmp_path)
    lines = rec.read_bytes().split(b"\n")
    rec.write_bytes(b"\n".join(lines[:5] + lines[6:]))
    with pytest.raises(ExportError, match="records but manifest"):
        verify_export(rec, man)


def test_empty_export(tmp_path):
    rec, man = tmp_path / "r", tmp_path / "m"
    write_export(MerkleLog(), rec, man)
    assert verify_export(rec, man) == (0, None)
