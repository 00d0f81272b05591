"""Key and parameter files.

A file is a sequence of records ``kind (1) || length (4, big-endian) || body``
where the body is the same encoding used on the wire.
"""

from __future__ import annotations

import enum
from pathlib import Path

from ..groupsig import GroupPublicKey, IssuerKey, SigningKey
from ..ibe import IbeDecryptionKey, IbeMasterKey, IbeParams
from ..pairing import DecodeError


class Kind(enum.IntEnum):
    GPK = 0x01
    IK = 0x02
    SK = 0x03
    PARAMS = 0x04
    MSK = 0x05
    DK = 0x06


_TYPES = {
    Kind.GPK: GroupPublicKey,
    Kind.IK: IssuerKey,
    Kind.SK: SigningKey,
    Kind.PARAMS: IbeParams,
    Kind.MSK: IbeMasterKey,
    Kind.DK: IbeDecryptionKey,
}
_KINDS = {cls: kind for kind, cls in _TYPES.items()}


def dump_keys(*objs) -> bytes:
    out = bytearray()
    for obj in objs:
        body = obj.to_bytes()
        out += bytes([_KINDS[type(obj)]]) + len(body).to_bytes(4, "big") + body
    return bytes(out)


def load_keys(data: bytes) -> dict[Kind, object]:
    out: dict[Kind, object] = {}
    i = 0
    while i < len(data):
        if i + 5 > len(data):
            raise DecodeError("key file record header truncated")
        try:
            kind = Kind(data[i])
        except ValueError:
            raise DecodeError(f"unknown key record kind 0x{data[i]:02x}") from None
        n = int.from_bytes(data[i + 1 : i + 5], "big")
        body = data[i + 5 : i + 5 + n]
        if len(body) != n:
            raise DecodeError("key file record truncated")
        if kind in out:
            raise DecodeError(f"duplicate {kind.name} record")
        out[kind] = _TYPES[kind].from_bytes(body)
        i += 5 + n
    return out


def write_keyfile(path, *objs) -> None:
    Path(path).write_bytes(dump_keys(*objs))


def read_keyfile(path) -> dict[Kind, object]:
    return load_keys(Path(path).read_bytes())
