from __future__ import annotations

import numpy as np
import pytest

from xborder.crypto import (
    CTR,
    EscrowRegistry,
    KeyPurpose,
    Layer,
    LayeredCiphertext,
    add_transit_layer,
    compel_escrow,
    decrypt_payload,
    encrypt_payload,
    generate_key,
    open_with,
    replicate_key,
    strip_transit_layer,
)
from xborder.errors import AuthFailure, NotCompellable, UnknownJurisdiction, WrongKeyPurpose
from xborder.policy import DataPacket, SensitivityClass

CODES = ("EU", "US", "CN")
PAYLOAD, TRANSIT = KeyPurpose.PAYLOAD, KeyPurpose.TRANSIT


def _escrow():
    return EscrowRegistry({"EU": False, "US": True, "CN": True})


def _pkt(payload: bytes):
    return DataPacket("p", "EU", "US", "EU", SensitivityClass.PERSONAL, payload)


def _stack(rng, escrow, depth, cipher="aes-256-gcm"):
    payload = rng.bytes(int(rng.integers(1, 257)))
    pkey = generate_key(CODES[int(rng.integers(3))], PAYLOAD, escrow)
    ct = encrypt_payload(_pkt(payload), pkey, cipher)
    tkeys = []
    for _ in range(depth):
        k = generate_key(CODES[int(rng.integers(3))], TRANSIT, escrow)
        ct = add_transit_layer(ct, k)
        tkeys.append(k)
    return payload, pkey, tkeys, ct


def test_layered_round_trip_on_fuzzed_stacks():
    rng = np.random.default_rng(1)
    escrow = _escrow()
    for _ in range(1000):
        depth = int(rng.integers(0, 6))
        payload, pkey, tkeys, ct = _stack(rng, escrow, depth)
        assert ct.depth == depth
        assert open_with(ct, [pkey, *tkeys]) == payload
        for k in reversed(tkeys):
            ct = strip_transit_layer(ct, k)
        assert decrypt_payload(ct, pkey) == payload


def test_every_single_bit_tamper_rejected():
    rng = np.random.default_rng(2)
    escrow = _escrow()
    rejected = total = 0
    for _ in range(100):
        payload, pkey, tkeys, ct = _stack(rng, escrow, int(rng.integers(0, 4)))
        wire = bytearray(ct.to_bytes())
        keys = [pkey, *tkeys]
        for _ in range(100):
            buf = bytearray(wire)
            bit = int(rng.integers(len(buf) * 8))
            buf[bit // 8] ^= 1 << (bit % 8)
            total += 1
            try:
                got = open_with(ct.with_outer_bytes(bytes(buf)), keys)
            except AuthFailure:
                got = None
            rejected += got is None
    assert total == 10_000
    assert rejected == total


def test_unauthenticated_baseline_accepts_tampering():
    rng = np.random.default_rng(3)
    escrow = _escrow()
    payload, pkey, _, ct = _stack(rng, escrow, 0, cipher=CTR)
    layer = ct.outer
    flipped = bytearray(layer.ciphertext)
    flipped[0] ^= 1
    got = open_with(LayeredCiphertext(Layer(layer.key_id, layer.nonce, bytes(flipped)), ct.key_path, CTR), [pkey])
    assert got is not None and got != payload


def test_strip_needs_the_outermost_key():
    rng = np.random.default_rng(4)
    payload, pkey, tkeys, ct = _stack(rng, _escrow(), 2)
    with pytest.raises(AuthFailure):
        strip_transit_layer(ct, tkeys[0])
    with pytest.raises(AuthFailure):
        decrypt_payload(ct, pkey)


def test_missing_key_means_no_plaintext():
    rng = np.random.default_rng(5)
    payload, pkey, tkeys, ct = _stack(rng, _escrow(), 2)
    assert open_with(ct, [pkey, tkeys[1]]) is None
    assert open_with(ct, tkeys) is None


def test_key_purpose_enforced():
    escrow = _escrow()
    t = generate_key("US", TRANSIT, escrow)
    p = generate_key("US", PAYLOAD, escrow)
    with pytest.raises(WrongKeyPurpose):
        encrypt_payload(_pkt(b"x"), t)
    ct = encrypt_payload(_pkt(b"x"), p)
    with pytest.raises(WrongKeyPurpose):
        add_transit_layer(ct, p)


def test_same_material_under_other_id_fails():
    escrow = _escrow()
    k = generate_key("US", PAYLOAD, escrow)
    ct = encrypt_payload(_pkt(b"secret"), k)
    from xborder.crypto import EscrowKey

    impostor = EscrowKey("other-id", "US", k.material, PAYLOAD)
    with pytest.raises(AuthFailure):
        decrypt_payload(ct, impostor)


def test_key_material_hidden_from_repr():
    k = generate_key("EU", PAYLOAD, _escrow())
    assert k.material.hex() not in repr(k)


def test_compel_matches_jurisdiction_filter_on_random_layouts():
    rng = np.random.default_rng(6)
    for _ in range(1000):
        n = int(rng.integers(1, 5))
        codes = [f"J{i}" for i in range(n)]
        flags = {c: bool(rng.random() < 0.5) for c in codes}
        escrow = EscrowRegistry(flags)
        for _ in range(int(rng.integers(0, 8))):
            home = codes[int(rng.integers(n))]
            key = generate_key(home, PAYLOAD if rng.random() < 0.5 else TRANSIT, escrow)
            if rng.random() < 0.3:
                replicate_key(key, escrow, [c for c in codes if rng.random() < 0.5])
        target = codes[int(rng.integers(n))]
        expect = {(k.key_id, k.jurisdiction) for k in escrow.all_keys() if k.jurisdiction == target}
        if flags[target]:
            got = compel_escrow(target, escrow)
            assert {(k.key_id, k.jurisdiction) for k in got} == expect
            assert all(k.jurisdiction == target for k in got)
        else:
            with pytest.raises(NotCompellable):
                compel_escrow(target, escrow)


def test_escrowed_key_does_not_leak_to_other_jurisdictions():
    escrow = _escrow()
    k = generate_key("EU", PAYLOAD, escrow)
    assert k in escrow.keys_in("EU")
    assert all(x.key_id != k.key_id for x in compel_escrow("US", escrow))


def test_replication_exposes_key_everywhere():
    escrow = _escrow()
    k = generate_key("EU", PAYLOAD, escrow)
    replicate_key(k, escrow, ["US", "CN"])
    ct = encrypt_payload(_pkt(b"hello"), k)
    assert open_with(ct, compel_escrow("CN", escrow)) == b"hello"


def test_unknown_escrow_jurisdiction():
    with pytest.raises(UnknownJurisdiction):
        generate_key("BR", PAYLOAD, _escrow())
