"""The ten protocol algorithms linking the group signature and IBE.

A user signs a fresh 16-byte ``TempId`` and hands ``(sig, temp_id, dst)`` to a
proxy.  The proxy remembers ``temp_id -> source address`` and forwards
``(sig, temp_id)`` to the service provider, which checks the signature and
encrypts its content under ``temp_id`` as an IBE identity.  The ciphertext
travels back through the proxy, which drops the table entry as it delivers it.

Only ``IdIpTable`` holds mutable state; everything else is a pure function of
its arguments.
"""

from __future__ import annotations

import enum
import ipaddress
import logging
import secrets
import threading
import time
from dataclasses import dataclass, field
from random import Random
from typing import Callable

from .groupsig import (
    GroupPublicKey,
    GroupSignature,
    IssuerKey,
    SigningKey,
    Verdict,
    gs_join,
    gs_setup,
    gs_sign,
    gs_verify,
)
from .ibe import (
    IbeCiphertext,
    IbeDecryptionKey,
    IbeMasterKey,
    IbeParams,
    ibe_decrypt,
    ibe_encrypt,
    ibe_extract,
    ibe_setup,
)
from .pairing import DecodeError

log = logging.getLogger(__name__)

TEMP_ID_BYTES = 16
DEFAULT_TTL = 30.0


@dataclass(frozen=True)
class TempId:
    value: bytes

    def __post_init__(self):
        if len(self.value) != TEMP_ID_BYTES:
            raise ValueError(f"TempId must be {TEMP_ID_BYTES} bytes")

    @classmethod
    def random(cls, rng: Random | None = None) -> TempId:
        if rng is None:
            return cls(secrets.token_bytes(TEMP_ID_BYTES))
        return cls(rng.getrandbits(8 * TEMP_ID_BYTES).to_bytes(TEMP_ID_BYTES, "big"))

    def __bytes__(self):
        return self.value

    def __repr__(self):
        return f"TempId({self.value.hex()})"


@dataclass(frozen=True)
class Address:
    host: str
    port: int

    def __post_init__(self):
        ip = ipaddress.ip_address(self.host)
        object.__setattr__(self, "host", str(ip))
        if not 1 <= self.port <= 65535:
            raise ValueError(f"port out of range: {self.port}")

    @classmethod
    def parse(cls, text: str) -> Address:
        host, _, port = text.rpartition(":")
        return cls(host.strip("[]"), int(port))

    def to_bytes(self) -> bytes:
        ip = ipaddress.ip_address(self.host)
        return bytes([ip.version]) + ip.packed + self.port.to_bytes(2, "big")

    @classmethod
    def decode(cls, data: bytes, offset: int = 0) -> tuple[Address, int]:
        """Decode an address at ``offset``; returns it and the next offset."""
        if offset >= len(data):
            raise DecodeError("address truncated")
        version = data[offset]
        if version not in (4, 6):
            raise DecodeError(f"bad address family {version}")
        n = 4 if version == 4 else 16
        end = offset + 1 + n + 2
        if end > len(data):
            raise DecodeError("address truncated")
        ip = ipaddress.ip_address(bytes(data[offset + 1 : offset + 1 + n]))
        port = int.from_bytes(data[end - 2 : end], "big")
        if port == 0:
            raise DecodeError("port 0 is not a valid address")
        return cls(str(ip), port), end

    def __str__(self):
        return f"[{self.host}]:{self.port}" if ":" in self.host else f"{self.host}:{self.port}"


class DuplicateTempId(Exception):
    pass


class UnknownSession(LookupError):
    pass


@dataclass(frozen=True)
class TableEntry:
    temp_id: TempId
    src: Address
    created_at: float


class IdIpTable:
    """Proxy registry of in-flight sessions, ``TempId -> source address``.

    All operations take the same lock, so concurrent sessions see a
    linearizable table.  Entries older than ``ttl`` seconds count as absent
    and are purged on the next access.
    """

    def __init__(self, ttl: float = DEFAULT_TTL, clock: Callable[[], float] = time.monotonic):
        self.ttl = ttl
        self._clock = clock
        self._entries: dict[TempId, TableEntry] = {}
        self._lock = threading.Lock()

    def _expired(self, entry: TableEntry, now: float) -> bool:
        return now - entry.created_at >= self.ttl

    def _purge_locked(self, now: float) -> list[TableEntry]:
        dead = [e for e in self._entries.values() if self._expired(e, now)]
        for e in dead:
            del self._entries[e.temp_id]
        return dead

    def add(self, temp_id: TempId, src: Address) -> TableEntry:
        with self._lock:
            now = self._clock()
            self._purge_locked(now)
            if temp_id in self._entries:
                raise DuplicateTempId(f"{temp_id!r} already in flight")
            entry = TableEntry(temp_id, src, now)
            self._entries[temp_id] = entry
            return entry

    def lookup(self, temp_id: TempId) -> Address | None:
        with self._lock:
            self._purge_locked(self._clock())
            entry = self._entries.get(temp_id)
            return entry.src if entry else None

    def pop(self, temp_id: TempId) -> TableEntry:
        with self._lock:
            self._purge_locked(self._clock())
            try:
                return self._entries.pop(temp_id)
            except KeyError:
                raise UnknownSession(f"no session for {temp_id!r}") from None

    def discard(self, temp_id: TempId) -> None:
        with self._lock:
            self._entries.pop(temp_id, None)

    def purge_expired(self) -> list[TableEntry]:
        with self._lock:
            return self._purge_locked(self._clock())

    def entries(self) -> list[TableEntry]:
        with self._lock:
            self._purge_locked(self._clock())
            return list(self._entries.values())

    def __len__(self):
        with self._lock:
            self._purge_locked(self._clock())
            return len(self._entries)

    def __contains__(self, temp_id):
        return self.lookup(temp_id) is not None


@dataclass(frozen=True)
class RequestToken:
    sig: GroupSignature
    temp_id: TempId
    dst: Address


@dataclass(frozen=True)
class ForwardedRequest:
    sig: GroupSignature
    temp_id: TempId
    reply_to: Address


@dataclass(frozen=True)
class ContentMessage:
    temp_id: TempId
    ct: IbeCiphertext


class RefusalReason(enum.IntEnum):
    BAD_SIGNATURE = 0x01
    MALFORMED_TOKEN = 0x02
    POLICY = 0x03


@dataclass(frozen=True)
class Refusal:
    reason: RefusalReason = RefusalReason.BAD_SIGNATURE


@dataclass
class Delivery:
    """What the proxy does with a ciphertext: who gets it, and which entry went."""

    dst: Address
    ct: IbeCiphertext
    entry: TableEntry = field(repr=False)


# --------------------------------------------------------------------------


def gm_setup(security_level: int = 128, rng: Random | None = None):
    return gs_setup(security_level, rng)


def kgc_setup(security_level: int = 128, rng: Random | None = None):
    return ibe_setup(security_level, rng)


def join(gpk: GroupPublicKey, ik: IssuerKey, rng: Random | None = None) -> SigningKey:
    return gs_join(gpk, ik, rng)


def user_key_gen(params: IbeParams, msk: IbeMasterKey, temp_id: TempId) -> IbeDecryptionKey:
    return ibe_extract(params, msk, bytes(temp_id))


def send_request(
    gpk: GroupPublicKey,
    sk: SigningKey,
    dst: Address,
    rng: Random | None = None,
    temp_id: TempId | None = None,
) -> tuple[RequestToken, TempId]:
    """Sign a fresh TempId.  ``temp_id`` may be fixed by a game challenger."""
    temp_id = temp_id or TempId.random(rng)
    sig = gs_sign(gpk, sk, bytes(temp_id), rng=rng)
    return RequestToken(sig, temp_id, dst), temp_id


def relay_request(
    tbl: IdIpTable, token: RequestToken, src: Address, proxy: Address
) -> ForwardedRequest:
    """Record the source and strip it; no cryptographic checks at the proxy."""
    tbl.add(token.temp_id, src)
    return ForwardedRequest(token.sig, token.temp_id, reply_to=proxy)


def validity_check(gpk: GroupPublicKey, sig: GroupSignature | bytes, temp_id: TempId) -> Verdict:
    return gs_verify(gpk, sig, bytes(temp_id))


def send_content(
    gpk: GroupPublicKey,
    params: IbeParams,
    request: ForwardedRequest | RequestToken,
    msg: bytes,
    rng: Random | None = None,
) -> ContentMessage | Refusal:
    if not msg:
        raise ValueError("content must be nonempty")
    verdict = validity_check(gpk, request.sig, request.temp_id)
    if not verdict:
        reason = (
            RefusalReason.MALFORMED_TOKEN
            if verdict is Verdict.REJECT_MALFORMED
            else RefusalReason.BAD_SIGNATURE
        )
        return Refusal(reason)
    ct = ibe_encrypt(params, bytes(request.temp_id), msg, rng=rng)
    return ContentMessage(request.temp_id, ct)


def relay_content(tbl: IdIpTable, cm: ContentMessage) -> Delivery | None:
    """Look up and remove the session in one step; ``None`` means dropped."""
    try:
        entry = tbl.pop(cm.temp_id)
    except UnknownSession:
        log.error("dropping content for unknown or expired session %r", cm.temp_id)
        return None
    return Delivery(entry.src, cm.ct, entry)


def get_content(params: IbeParams, ct: IbeCiphertext, dk: IbeDecryptionKey) -> bytes:
    return ibe_decrypt(params, ct, dk)
