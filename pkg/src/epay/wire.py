"""Encrypted wire records for protocol messages.

Payloads are canonical JSON (sorted keys, compact separators) encrypted
with RC5-32 CBC under a pre-shared channel key.  The iv of each record is
derived from a caller-supplied counter, so encoding is deterministic and
an iv is never reused under one key within a run.
"""

from __future__ import annotations

import json

from .numcrypt import ChannelCorrupt, Rc5Params, rc5_cbc

WIRE_VERSION = "VP1"


def canonical_json(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def counter_iv(counter: int) -> bytes:
    if not 0 <= counter < 1 << 64:
        raise ValueError("counter must fit in 64 bits")
    return counter.to_bytes(8, "big")


class WireRecord(dict):
    """A transmitted record: {"v", "kind", "ctr", "ct"} with hex ciphertext."""


def wire_encode(kind: str, payload: dict, key: bytes, counter: int, rounds: int = 12) -> WireRecord:
    params = Rc5Params(key=key, rounds=rounds, iv=counter_iv(counter))
    ciphertext = rc5_cbc("encrypt", params, canonical_json(payload).encode())
    return WireRecord(v=WIRE_VERSION, kind=kind, ctr=counter, ct=ciphertext.hex())


def wire_decode(record: dict, key: bytes, rounds: int = 12) -> tuple[str, dict]:
    """Decrypt and parse a record; any mismatch raises ChannelCorrupt."""
    try:
        if record["v"] != WIRE_VERSION:
            raise ChannelCorrupt(f"unsupported wire version {record['v']!r}")
        kind = record["kind"]
        counter = record["ctr"]
        ciphertext = bytes.fromhex(record["ct"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ChannelCorrupt(f"malformed wire record: {exc}") from exc
    params = Rc5Params(key=key, rounds=rounds, iv=counter_iv(counter))
    plaintext = rc5_cbc("decrypt", params, ciphertext)
    try:
        payload = json.loads(plaintext.decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ChannelCorrupt(f"payload did not parse: {exc}") from exc
    if not isinstance(payload, dict):
        raise ChannelCorrupt("payload is not an object")
    return kind, payload


def dump_records(records: list[WireRecord]) -> str:
    """One JSON record per line, for transcript files."""
    return "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)


def load_records(text: str) -> list[dict]:
    return [json.loads(line) for line in text.splitlines() if line.strip()]
