"""Onion-style envelope encryption with jurisdiction-bound key escrow.

A payload is sealed once under a payload key escrowed in the data's home
jurisdiction.  Each border segment then wraps the current outermost layer
under a transit key, and the receiving gateway strips it again.  Layers are
AES-256-GCM by default; ``aes-256-ctr`` exists only to model a degraded,
unauthenticated baseline for tamper experiments.
"""

from __future__ import annotations

import enum
import os
import secrets
import struct
import threading
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from .errors import AuthFailure, NotCompellable, UnknownJurisdiction, WrongKeyPurpose

KEY_BYTES = 32
GCM = "aes-256-gcm"
CTR = "aes-256-ctr"
_NONCE_BYTES = {GCM: 12, CTR: 16}
_MAGIC = b"XBL1"


class KeyPurpose(enum.Enum):
    PAYLOAD = "payload"
    TRANSIT = "transit"


@dataclass(frozen=True)
class EscrowKey:
    key_id: str
    jurisdiction: str
    material: bytes = field(repr=False)
    purpose: KeyPurpose

    def __post_init__(self):
        if len(self.material) != KEY_BYTES:
            raise ValueError(f"key material must be {KEY_BYTES} bytes")


class EscrowRegistry:
    """Per-jurisdiction key stores.

    ``compellable`` maps jurisdiction code to whether its government can
    force disclosure of everything escrowed there.
    """

    def __init__(self, compellable: Mapping[str, bool]):
        self.compellable = dict(compellable)
        self._store = {code: {} for code in self.compellable}
        self._counter = 0
        self._lock = threading.Lock()

    @classmethod
    def for_registry(cls, registry) -> "EscrowRegistry":
        return cls({c: registry.jurisdiction(c).compelled_access for c in registry.codes})

    def _check(self, code):
        if code not in self._store:
            raise UnknownJurisdiction(code)

    def next_key_id(self, jurisdiction: str, purpose: KeyPurpose) -> str:
        with self._lock:
            self._counter += 1
            return f"{jurisdiction}-{purpose.value}-{self._counter:07d}"

    def deposit(self, key: EscrowKey) -> None:
        self._check(key.jurisdiction)
        with self._lock:
            self._store[key.jurisdiction][key.key_id] = key

    def keys_in(self, jurisdiction: str) -> frozenset:
        self._check(jurisdiction)
        return frozenset(self._store[jurisdiction].values())

    def lookup(self, jurisdiction: str, key_id: str):
        self._check(jurisdiction)
        return self._store[jurisdiction].get(key_id)

    def all_keys(self) -> list:
        return [k for store in self._store.values() for k in store.values()]


def generate_key(jurisdiction: str, purpose: KeyPurpose, escrow: EscrowRegistry) -> EscrowKey:
    escrow._check(jurisdiction)
    key = EscrowKey(
        key_id=escrow.next_key_id(jurisdiction, purpose),
        jurisdiction=jurisdiction,
        material=secrets.token_bytes(KEY_BYTES),
        purpose=purpose,
    )
    escrow.deposit(key)
    return key


def replicate_key(key: EscrowKey, escrow: EscrowRegistry, jurisdictions: Iterable[str] | None = None):
    """Copy ``key`` into other escrows (uniform key management baseline).

    Each copy keeps the key id and material but is tagged with the escrow it
    lives in, so the per-jurisdiction tag invariant still holds.
    """
    targets = list(escrow.compellable) if jurisdictions is None else list(jurisdictions)
    copies = []
    for code in targets:
        copy = EscrowKey(key.key_id, code, key.material, key.purpose)
        escrow.deposit(copy)
        copies.append(copy)
    return copies


def compel_escrow(jurisdiction: str, escrow: EscrowRegistry) -> frozenset:
    escrow._check(jurisdiction)
    if not escrow.compellable[jurisdiction]:
        raise NotCompellable(f"{jurisdiction} cannot compel key disclosure")
    return escrow.keys_in(jurisdiction)


@dataclass(frozen=True)
class Layer:
    key_id: str
    nonce: bytes
    ciphertext: bytes

    def to_bytes(self) -> bytes:
        kid = self.key_id.encode()
        return _MAGIC + struct.pack(">HB", len(kid), len(self.nonce)) + kid + self.nonce + self.ciphertext

    @classmethod
    def from_bytes(cls, data: bytes) -> "Layer":
        if len(data) < 7 or data[:4] != _MAGIC:
            raise AuthFailure("inner layer is malformed")
        klen, nlen = struct.unpack(">HB", data[4:7])
        body = data[7:]
        if len(body) < klen + nlen:
            raise AuthFailure("inner layer is truncated")
        try:
            key_id = body[:klen].decode()
        except UnicodeDecodeError:
            raise AuthFailure("inner layer key id is malformed") from None
        return cls(key_id, body[klen:klen + nlen], body[klen + nlen:])


@dataclass(frozen=True)
class LayeredCiphertext:
    """Outermost layer plus the public key-id stack (innermost first).

    Wrapped layers live inside ``outer.ciphertext``; ``key_path`` is the
    routing header a gateway uses to pick its key.
    """

    outer: Layer
    key_path: tuple
    cipher: str = GCM

    @property
    def depth(self) -> int:
        return len(self.key_path) - 1

    @property
    def payload_layer(self):
        return self.outer if self.depth == 0 else None

    @property
    def transit_layers(self) -> tuple:
        return self.key_path[1:]

    def to_bytes(self) -> bytes:
        return self.outer.to_bytes()

    def with_outer_bytes(self, data: bytes) -> "LayeredCiphertext":
        """Rebuild from (possibly tampered) wire bytes of the outer layer."""
        return LayeredCiphertext(Layer.from_bytes(data), self.key_path, self.cipher)


def _aad(purpose: KeyPurpose, key_id: str, depth: int) -> bytes:
    return b"xborder|" + purpose.value.encode() + b"|" + key_id.encode() + b"|" + str(depth).encode()


def _seal(cipher: str, key: EscrowKey, plaintext: bytes, aad: bytes) -> Layer:
    nonce = os.urandom(_NONCE_BYTES[cipher])
    if cipher == GCM:
        ct = AESGCM(key.material).encrypt(nonce, plaintext, aad)
    elif cipher == CTR:
        enc = Cipher(algorithms.AES(key.material), modes.CTR(nonce)).encryptor()
        ct = enc.update(plaintext) + enc.finalize()
    else:
        raise ValueError(f"unsupported cipher {cipher!r}")
    return Layer(key.key_id, nonce, ct)


def _open(cipher: str, key: EscrowKey, layer: Layer, aad: bytes) -> bytes:
    if layer.key_id != key.key_id:
        raise AuthFailure(f"layer sealed under {layer.key_id!r}, not {key.key_id!r}")
    if cipher == GCM:
        if len(layer.nonce) != 12:
            raise AuthFailure("bad nonce length")
        try:
            return AESGCM(key.material).decrypt(layer.nonce, layer.ciphertext, aad)
        except InvalidTag:
            raise AuthFailure(f"authentication failed for layer {layer.key_id}") from None
    if len(layer.nonce) != 16:
        raise AuthFailure("bad nonce length")
    dec = Cipher(algorithms.AES(key.material), modes.CTR(layer.nonce)).decryptor()
    return dec.update(layer.ciphertext) + dec.finalize()


def _require(key: EscrowKey, purpose: KeyPurpose):
    if key.purpose is not purpose:
        raise WrongKeyPurpose(f"key {key.key_id} is a {key.purpose.value} key, need {purpose.value}")


def encrypt_payload(packet, key: EscrowKey, cipher: str = GCM) -> LayeredCiphertext:
    _require(key, KeyPurpose.PAYLOAD)
    layer = _seal(cipher, key, packet.payload, _aad(KeyPurpose.PAYLOAD, key.key_id, 0))
    return LayeredCiphertext(layer, (key.key_id,), cipher)


def decrypt_payload(ct: LayeredCiphertext, key: EscrowKey) -> bytes:
    _require(key, KeyPurpose.PAYLOAD)
    if ct.depth:
        raise AuthFailure(f"{ct.depth} transit layer(s) still applied")
    return _open(ct.cipher, key, ct.outer, _aad(KeyPurpose.PAYLOAD, key.key_id, 0))


def add_transit_layer(ct: LayeredCiphertext, key: EscrowKey) -> LayeredCiphertext:
    _require(key, KeyPurpose.TRANSIT)
    depth = ct.depth + 1
    layer = _seal(ct.cipher, key, ct.outer.to_bytes(), _aad(KeyPurpose.TRANSIT, key.key_id, depth))
    return LayeredCiphertext(layer, ct.key_path + (key.key_id,), ct.cipher)


def strip_transit_layer(ct: LayeredCiphertext, key: EscrowKey) -> LayeredCiphertext:
    _require(key, KeyPurpose.TRANSIT)
    if ct.depth == 0:
        raise AuthFailure("no transit layer to strip")
    inner_bytes = _open(ct.cipher, key, ct.outer, _aad(KeyPurpose.TRANSIT, key.key_id, ct.depth))
    inner = Layer.from_bytes(inner_bytes)
    if inner.key_id != ct.key_path[-2]:
        raise AuthFailure("inner layer does not match the key path")
    return LayeredCiphertext(inner, ct.key_path[:-1], ct.cipher)


def open_with(ct: LayeredCiphertext, keys: Iterable[EscrowKey]):
    """Peel every layer using whatever keys are at hand.

    Returns the plaintext, or None if a needed key is missing or a layer
    fails authentication.
    """
    by_id = {}
    for k in keys:
        by_id.setdefault(k.key_id, k)
    try:
        while ct.depth:
            key = by_id.get(ct.outer.key_id)
            if key is None or key.purpose is not KeyPurpose.TRANSIT:
                return None
            ct = strip_transit_layer(ct, key)
        key = by_id.get(ct.outer.key_id)
        if key is None or key.purpose is not KeyPurpose.PAYLOAD:
            return None
        return decrypt_payload(ct, key)
    except AuthFailure:
        return None
