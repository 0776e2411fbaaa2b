"""Onion layers, per-jurisdiction escrow, and what a compelled escrow reveals."""

from xborder.crypto import (
    EscrowRegistry,
    KeyPurpose,
    add_transit_layer,
    compel_escrow,
    encrypt_payload,
    generate_key,
    open_with,
    replicate_key,
    strip_transit_layer,
)
from xborder.policy import DataPacket, SensitivityClass
from xborder.simkit import load_config

reg = load_config().registry
pkt = DataPacket("rec-1", "EU", "US", "EU", SensitivityClass.PERSONAL, b"patient 4411: diagnosis B")

# %% proposed layout: payload key stays in EU escrow, transit key in US escrow
escrow = EscrowRegistry.for_registry(reg)
pkey = generate_key("EU", KeyPurpose.PAYLOAD, escrow)
tkey = generate_key("US", KeyPurpose.TRANSIT, escrow)
ct = add_transit_layer(encrypt_payload(pkt, pkey), tkey)
print("key path", ct.key_path, "depth", ct.depth)
print("US compels its escrow ->", open_with(ct, compel_escrow("US", escrow)))
ct = strip_transit_layer(ct, tkey)
print("after US gateway strips ->", ct.key_path)

# %% uniform key management: one key replicated everywhere
escrow = EscrowRegistry.for_registry(reg)
key = generate_key("EU", KeyPurpose.PAYLOAD, escrow)
replicate_key(key, escrow, ["US", "CN"])
ct = encrypt_payload(pkt, key)
print("US compels its escrow ->", open_with(ct, compel_escrow("US", escrow)))
