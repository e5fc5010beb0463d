"""Wire format and transcript records for the two-party exchange.

Each message is encoded bit-exactly as

    header:  round u8 | sender u8 | count u32 (big-endian)
    body:    count payloads, each u32 big-endian length + big-endian bytes

Payloads are nonnegative big integers (ciphertext residues, ciphertext
components in c1, c2 order, or masked values as least nonnegative residues
modulo the additive modulus).  A transcript is the ordered list of the five
round messages plus the deterministic limb schedule used to embed additive
ciphertexts into the multiplicative plaintext space.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

from ..errors import ParseError, ProtocolError

CLIENT = 0
SERVER = 1

KIND_BY_ROUND = {
    1: "encrypted-query",
    2: "wrapped-correlations",
    3: "masked-permuted-correlations",
    4: "blinded-affine",
    5: "masked-values",
}

_MAGIC = b"GMKT"
_VERSION = 1

EXPECTED_SENDERS = {1: CLIENT, 2: SERVER, 3: CLIENT, 4: SERVER, 5: CLIENT}


@dataclass(frozen=True)
class ProtocolMessage:
    round_no: int
    sender: int
    payloads: tuple[int, ...]

    def __post_init__(self):
        if self.round_no not in KIND_BY_ROUND:
            raise ProtocolError(f"round must be 1..5, got {self.round_no}")
        if self.sender != EXPECTED_SENDERS[self.round_no]:
            raise ProtocolError(f"round {self.round_no} must be sent by party {EXPECTED_SENDERS[self.round_no]}")
        if any(p < 0 for p in self.payloads):
            raise ProtocolError("wire payloads must be nonnegative integers")

    @property
    def kind(self) -> str:
        return KIND_BY_ROUND[self.round_no]

    def encode(self) -> bytes:
        parts = [struct.pack(">BBI", self.round_no, self.sender, len(self.payloads))]
        for value in self.payloads:
            raw = value.to_bytes(max(1, (value.bit_length() + 7) // 8), "big")
            parts.append(struct.pack(">I", len(raw)))
            parts.append(raw)
        return b"".join(parts)


def decode_message(buf: bytes, offset: int = 0) -> tuple[ProtocolMessage, int]:
    if offset + 6 > len(buf):
        raise ParseError("truncated message header")
    round_no, sender, count = struct.unpack_from(">BBI", buf, offset)
    offset += 6
    payloads = []
    for _ in range(count):
        if offset + 4 > len(buf):
            raise ParseError("truncated payload length")
        (length,) = struct.unpack_from(">I", buf, offset)
        offset += 4
        if offset + length > len(buf):
            raise ParseError("truncated payload body")
        payloads.append(int.from_bytes(buf[offset : offset + length], "big"))
        offset += length
    return ProtocolMessage(round_no, sender, tuple(payloads)), offset


@dataclass(frozen=True)
class ProtocolTranscript:
    """The five round messages in order, plus the limb schedule."""

    messages: tuple[ProtocolMessage, ...]
    limbs_per_value: int

    def __post_init__(self):
        rounds = tuple(m.round_no for m in self.messages)
        if rounds != (1, 2, 3, 4, 5):
            raise ProtocolError(f"transcript must contain rounds 1..5 in order, got {rounds}")
        if self.limbs_per_value < 1:
            raise ProtocolError("limb schedule must be at least 1 limb per value")

    def message(self, round_no: int) -> ProtocolMessage:
        return self.messages[round_no - 1]

    def to_bytes(self) -> bytes:
        parts = [_MAGIC, struct.pack(">BI", _VERSION, self.limbs_per_value)]
        parts.extend(m.encode() for m in self.messages)
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, buf: bytes) -> "ProtocolTranscript":
        if buf[:4] != _MAGIC:
            raise ParseError("bad transcript magic")
        version, limbs = struct.unpack_from(">BI", buf, 4)
        if version != _VERSION:
            raise ParseError(f"unsupported transcript version {version}")
        offset = 9
        messages = []
        for _ in range(5):
            msg, offset = decode_message(buf, offset)
            messages.append(msg)
        if offset != len(buf):
            raise ParseError(f"{len(buf) - offset} trailing bytes after transcript")
        return cls(tuple(messages), limbs)

    def save(self, path: str) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def load(cls, path: str) -> "ProtocolTranscript":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())
