"""Boneh-Franklin style identity-based encryption (CPA variant).

Identity keys live in G1 (``d = s * H(id)``), ciphertext randomness in G2
(``U = r * g2``).  The payload is XORed with a SHAKE-256 keystream derived from
``e(H(id), P_pub)^r``, so messages may have any length up to ``MAX_PLAINTEXT``.

Wire layout of a ciphertext: ``U (65) || len (4, big-endian) || V``.
"""

from __future__ import annotations

from dataclasses import dataclass
from random import Random

from .pairing import (
    G1,
    G1_BYTES,
    G2,
    G2_BYTES,
    BilinearContext,
    DecodeError,
    default_context,
    hash_to_g1,
    mask_bytes,
    pair,
    random_scalar,
    scalar_from_bytes,
    scalar_to_bytes,
    xor_bytes,
)

MAX_PLAINTEXT = 64 * 1024


def identity_point(identity: bytes) -> G1:
    return hash_to_g1(identity)


@dataclass(frozen=True)
class IbeParams:
    ctx: BilinearContext
    P_pub: G2

    def to_bytes(self) -> bytes:
        return bytes(self.P_pub)

    @classmethod
    def from_bytes(cls, data: bytes, ctx: BilinearContext | None = None) -> IbeParams:
        P_pub = G2.from_bytes(data)
        if P_pub.is_identity():
            raise DecodeError("P_pub must not be the identity")
        return cls(ctx or default_context(), P_pub)


@dataclass(frozen=True)
class IbeMasterKey:
    s: int

    def matches(self, params: IbeParams) -> bool:
        return params.ctx.g2 * self.s == params.P_pub

    def to_bytes(self) -> bytes:
        return scalar_to_bytes(self.s)

    @classmethod
    def from_bytes(cls, data: bytes) -> IbeMasterKey:
        return cls(scalar_from_bytes(data))


@dataclass(frozen=True)
class IbeDecryptionKey:
    id: bytes
    d: G1

    def is_valid(self, params: IbeParams) -> bool:
        return pair(self.d, params.ctx.g2) == pair(identity_point(self.id), params.P_pub)

    def to_bytes(self) -> bytes:
        return self.id + bytes(self.d)

    @classmethod
    def from_bytes(cls, data: bytes, id_len: int = 16) -> IbeDecryptionKey:
        if len(data) != id_len + G1_BYTES:
            raise DecodeError(f"decryption key must be {id_len + G1_BYTES} bytes")
        return cls(bytes(data[:id_len]), G1.from_bytes(data[id_len:]))


@dataclass(frozen=True)
class IbeCiphertext:
    U: G2
    V: bytes

    @property
    def length(self) -> int:
        return len(self.V)

    def to_bytes(self) -> bytes:
        return bytes(self.U) + len(self.V).to_bytes(4, "big") + self.V

    @classmethod
    def from_bytes(cls, data: bytes, max_len: int = MAX_PLAINTEXT) -> IbeCiphertext:
        if len(data) < G2_BYTES + 4:
            raise DecodeError("ciphertext truncated")
        n = int.from_bytes(data[G2_BYTES : G2_BYTES + 4], "big")
        if n < 1 or n > max_len:
            raise DecodeError(f"ciphertext payload length {n} out of range")
        if len(data) != G2_BYTES + 4 + n:
            raise DecodeError("ciphertext length field does not match payload")
        U = G2.from_bytes(data[:G2_BYTES])
        return cls(U, bytes(data[G2_BYTES + 4 :]))


def ibe_setup(security_level: int = 128, rng: Random | None = None):
    ctx = default_context(security_level)
    s = random_scalar(rng, nonzero=True)
    return IbeParams(ctx, ctx.g2 * s), IbeMasterKey(s)


def ibe_extract(params: IbeParams, msk: IbeMasterKey, identity: bytes) -> IbeDecryptionKey:
    return IbeDecryptionKey(bytes(identity), identity_point(identity) * msk.s)


def ibe_encrypt(
    params: IbeParams,
    identity: bytes,
    msg: bytes,
    rng: Random | None = None,
    max_len: int = MAX_PLAINTEXT,
) -> IbeCiphertext:
    if not 1 <= len(msg) <= max_len:
        raise ValueError(f"message length must be in [1, {max_len}], got {len(msg)}")
    r = random_scalar(rng, nonzero=True)
    seed = pair(identity_point(identity), params.P_pub) ** r
    return IbeCiphertext(params.ctx.g2 * r, xor_bytes(msg, mask_bytes(seed, len(msg))))


def ibe_decrypt(params: IbeParams, ct: IbeCiphertext | bytes, dk: IbeDecryptionKey) -> bytes:
    if isinstance(ct, (bytes, bytearray)):
        ct = IbeCiphertext.from_bytes(bytes(ct))
    seed = pair(dk.d, ct.U)
    return xor_bytes(ct.V, mask_bytes(seed, len(ct.V)))
