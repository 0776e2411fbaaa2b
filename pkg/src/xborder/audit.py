"""Append-only Merkle audit log of transfer decisions.

Leaves commit to canonical JSON of decision metadata only; payload bytes
never enter the log.  Hashing is SHA-256 with a one-byte domain tag
(0x00 leaf, 0x01 interior).  Levels are built bottom-up and an odd trailing
node is promoted unchanged.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass
from pathlib import Path

from .errors import IndexOutOfRange

LEAF_TAG = b"\x00"
NODE_TAG = b"\x01"


def leaf_hash(data: bytes) -> bytes:
    return hashlib.sha256(LEAF_TAG + data).digest()


def node_hash(left: bytes, right: bytes) -> bytes:
    return hashlib.sha256(NODE_TAG + left + right).digest()


@dataclass(frozen=True)
class AuditRecord:
    transfer_id: str
    origin: str
    destination: str
    verdict: str
    controls_applied: tuple = ()
    timestamp: int = 0

    def to_dict(self) -> dict:
        return {
            "transfer_id": self.transfer_id,
            "origin": self.origin,
            "destination": self.destination,
            "verdict": self.verdict,
            "controls_applied": sorted(self.controls_applied),
            "timestamp": int(self.timestamp),
        }

    def canonical_bytes(self) -> bytes:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"), ensure_ascii=True).encode()

    @classmethod
    def from_dict(cls, doc: dict) -> "AuditRecord":
        return cls(
            transfer_id=str(doc["transfer_id"]),
            origin=str(doc["origin"]),
            destination=str(doc["destination"]),
            verdict=str(doc["verdict"]),
            controls_applied=tuple(sorted(doc.get("controls_applied", ()))),
            timestamp=int(doc["timestamp"]),
        )


def merkle_root(leaves: list) -> bytes:
    """Root over already-hashed leaves, built level by level."""
    if not leaves:
        return hashlib.sha256(b"").digest()
    level = list(leaves)
    while len(level) > 1:
        nxt = [node_hash(level[i], level[i + 1]) for i in range(0, len(level) - 1, 2)]
        if len(level) % 2:
            nxt.append(level[-1])
        level = nxt
    return level[0]


@dataclass(frozen=True)
class ComplianceAssertion:
    root: bytes
    record_index: int
    leaf_count: int
    inclusion_proof: tuple
    record_bytes: bytes

    @property
    def statement(self) -> str:
        doc = json.loads(self.record_bytes)
        return f"transfer {doc['transfer_id']} {doc['origin']}->{doc['destination']}: {doc['verdict']}"


class MerkleLog:
    """Single-writer log.  The root is maintained incrementally from a
    frontier of perfect-subtree roots, so appends are O(log n)."""

    def __init__(self):
        self.records = []
        self.leaves = []
        self._frontier = []  # (size, digest), sizes strictly decreasing
        self._root = merkle_root([])
        self._lock = threading.Lock()

    def __len__(self):
        return len(self.leaves)

    @property
    def root(self) -> bytes:
        return self._root

    def append(self, record: AuditRecord) -> bytes:
        return self.append_bytes(record.canonical_bytes())

    def append_bytes(self, data: bytes) -> bytes:
        """Append an already-canonical record; returns the new root."""
        digest = leaf_hash(data)
        with self._lock:
            self.records.append(data)
            self.leaves.append(digest)
            size = 1
            while self._frontier and self._frontier[-1][0] == size:
                left_size, left = self._frontier.pop()
                digest = node_hash(left, digest)
                size += left_size
            self._frontier.append((size, digest))
            acc = self._frontier[-1][1]
            for _, d in reversed(self._frontier[:-1]):
                acc = node_hash(d, acc)
            self._root = acc
            return acc

    def levels(self) -> list:
        level = list(self.leaves)
        out = [level]
        while len(level) > 1:
            nxt = [node_hash(level[i], level[i + 1]) for i in range(0, len(level) - 1, 2)]
            if len(level) % 2:
                nxt.append(level[-1])
            out.append(nxt)
            level = nxt
        return out


def append_record(log: MerkleLog, record: AuditRecord) -> bytes:
    return log.append(record)


def prove_inclusion(log: MerkleLog, index: int, levels: list | None = None) -> ComplianceAssertion:
    """Sibling path for leaf ``index``.  Pass precomputed ``levels`` to amortise."""
    n = len(log)
    if not 0 <= index < n:
        raise IndexOutOfRange(f"index {index} outside log of {n} records")
    levels = levels if levels is not None else log.levels()
    path = []
    i = index
    for level in levels[:-1]:
        if i % 2:
            path.append(level[i - 1])
        elif i + 1 < len(level):
            path.append(level[i + 1])
        i //= 2
    return ComplianceAssertion(levels[-1][0], index, n, tuple(path), log.records[index])


def root_from_path(data: bytes, index: int, leaf_count: int, path) -> bytes | None:
    if not 0 <= index < leaf_count:
        return None
    h = leaf_hash(data)
    i, n = index, leaf_count
    remaining = list(path)
    while n > 1:
        if i % 2:
            if not remaining:
                return None
            h = node_hash(remaining.pop(0), h)
        elif i + 1 < n:
            if not remaining:
                return None
            h = node_hash(h, remaining.pop(0))
        i //= 2
        n = (n + 1) // 2
    return None if remaining else h


def verify_assertion(
    assertion: ComplianceAssertion, expected_root: bytes, expected_leaf_count: int | None = None
) -> bool:
    """True iff the record hashes up to ``expected_root``.

    The path shape alone does not pin the tree size (a left-edge proof is
    valid for several sizes), so pass ``expected_leaf_count`` whenever the
    published tree head includes it.
    """
    if expected_leaf_count is not None and assertion.leaf_count != expected_leaf_count:
        return False
    try:
        got = root_from_path(
            assertion.record_bytes, assertion.record_index, assertion.leaf_count, assertion.inclusion_proof
        )
    except (TypeError, ValueError):
        return False
    return got is not None and got == expected_root and assertion.root == expected_root


def write_export(log: MerkleLog, records_path, manifest_path, meta: dict | None = None) -> dict:
    """Write line-delimited canonical records plus a root manifest.

    ``meta`` is copied into the manifest untouched (run provenance)."""
    levels = log.levels() if len(log) else [[]]
    Path(records_path).write_bytes(b"".join(r + b"\n" for r in log.records))
    manifest = {
        "hash": "sha256",
        "leaf_count": len(log),
        "root": log.root.hex(),
        "proofs": [
            [h.hex() for h in prove_inclusion(log, i, levels).inclusion_proof] for i in range(len(log))
        ],
    }
    if meta:
        manifest["meta"] = dict(meta)
    Path(manifest_path).write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    return manifest


class ExportError(ValueError):
    pass


def verify_export(records_path, manifest_path):
    """Re-verify every exported record against the manifest root.

    Returns (verified_count, first_failing_index or None).  Raises
    ExportError for unparseable or truncated inputs.
    """
    try:
        manifest = json.loads(Path(manifest_path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ExportError(f"{manifest_path}: line {exc.lineno} col {exc.colno}: {exc.msg}") from exc
    try:
        root = bytes.fromhex(manifest["root"])
        count = int(manifest["leaf_count"])
        proofs = [[bytes.fromhex(h) for h in p] for p in manifest["proofs"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ExportError(f"{manifest_path}: malformed manifest ({exc!r})") from exc

    raw = Path(records_path).read_bytes()
    lines = raw.split(b"\n")
    if lines and lines[-1] == b"":
        lines.pop()
    elif raw:
        raise ExportError(f"{records_path}: line {len(lines)}: truncated record (no trailing newline)")
    for lineno, line in enumerate(lines, 1):
        try:
            json.loads(line)
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise ExportError(f"{records_path}: line {lineno}: not a JSON record ({exc})") from exc
    if len(lines) != count or len(proofs) != count:
        raise ExportError(
            f"{records_path}: {len(lines)} records but manifest lists {count} leaves / {len(proofs)} proofs"
        )
    verified = 0
    for i, line in enumerate(lines):
        assertion = ComplianceAssertion(root, i, count, tuple(proofs[i]), line)
        if not verify_assertion(assertion, root, count):
            return verified, i
        verified += 1
    return verified, None
