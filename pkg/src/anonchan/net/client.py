"""User side of the three prototype sequences: User-GM, User-KGC, User-Proxy-SP."""

from __future__ import annotations

import asyncio
import time
from dataclasses import dataclass, field
from random import Random

from ..groupsig import GroupPublicKey, SigningKey
from ..ibe import IbeDecryptionKey, IbeParams
from ..protocol import (
    Address,
    RefusalReason,
    RequestToken,
    TempId,
    get_content,
    send_request,
)
from .wire import (
    AuthRequest,
    ContentForward,
    Error,
    ExtractRequest,
    ExtractResponse,
    JoinRequest,
    JoinResponse,
    Refuse,
    read_frame,
    write_frame,
)


class SessionError(Exception):
    pass


class SessionRefused(SessionError):
    def __init__(self, reason: RefusalReason):
        super().__init__(f"refused: {reason.name}")
        self.reason = reason


class SessionTimeout(SessionError):
    pass


class ServiceError(SessionError):
    def __init__(self, code: int, text: str):
        super().__init__(f"service error {code}: {text}")
        self.code = code


async def _exchange(addr: Address, msg, local_host: str | None = None):
    local = (local_host, 0) if local_host else None
    reader, writer = await asyncio.open_connection(addr.host, addr.port, local_addr=local)
    try:
        await write_frame(writer, msg)
        return await read_frame(reader)
    finally:
        writer.close()


def _unexpected(reply):
    if isinstance(reply, Refuse):
        return SessionRefused(reply.reason)
    if isinstance(reply, Error):
        return ServiceError(reply.code, reply.text)
    return SessionError(f"unexpected reply {type(reply).__name__}")


async def request_join(gm: Address, token: bytes = b"") -> SigningKey:
    reply = await _exchange(gm, JoinRequest(token))
    if not isinstance(reply, JoinResponse):
        raise _unexpected(reply)
    return reply.sk


async def request_decryption_key(
    kgc: Address,
    temp_id: TempId,
    token: bytes = b"",
    deadline: float | None = None,
    retry_delay: float = 0.05,
) -> IbeDecryptionKey:
    """Fetch ``dk_TempID``, retrying while the KGC is unreachable until ``deadline``."""
    while True:
        try:
            reply = await _exchange(kgc, ExtractRequest(temp_id, token))
            break
        except OSError:
            if deadline is not None and time.monotonic() + retry_delay < deadline:
                await asyncio.sleep(retry_delay)
                continue
            raise
    if not isinstance(reply, ExtractResponse):
        raise _unexpected(reply)
    if reply.dk.id != bytes(temp_id):
        raise SessionError("KGC returned a key for another identity")
    return reply.dk


@dataclass
class UserConfig:
    gpk: GroupPublicKey
    params: IbeParams
    sk: SigningKey
    proxy: Address
    sp: Address
    kgc: Address
    bind_host: str | None = None
    timeout: float = 30.0
    kgc_token: bytes = b""


@dataclass
class SessionResult:
    content: bytes
    temp_id: TempId
    timings: dict[str, float] = field(default_factory=dict)


def precompute_request(cfg: UserConfig, rng: Random | None = None) -> tuple[RequestToken, TempId]:
    """Offline half of SendRequest: pick a TempId and sign it ahead of time."""
    return send_request(cfg.gpk, cfg.sk, cfg.sp, rng=rng)


async def user_session(
    cfg: UserConfig,
    offline: tuple[RequestToken, TempId] | None = None,
    rng: Random | None = None,
) -> SessionResult:
    deadline = time.monotonic() + cfg.timeout
    t0 = time.perf_counter()
    token, temp_id = offline or send_request(cfg.gpk, cfg.sk, cfg.sp, rng=rng)
    t1 = time.perf_counter()
    # User-KGC runs alongside User-Proxy-SP; it only has to finish before GetContent
    key_task = asyncio.create_task(
        request_decryption_key(cfg.kgc, temp_id, cfg.kgc_token, deadline=deadline)
    )
    key_task.add_done_callback(lambda t: t.cancelled() or t.exception())
    try:
        try:
            reply = await asyncio.wait_for(
                _exchange(cfg.proxy, AuthRequest(token), cfg.bind_host),
                timeout=max(deadline - time.monotonic(), 0),
            )
        except asyncio.TimeoutError:
            raise SessionTimeout("no reply from proxy") from None
        t2 = time.perf_counter()
        if not isinstance(reply, ContentForward):
            raise _unexpected(reply)
        try:
            dk = await asyncio.wait_for(key_task, timeout=max(deadline - time.monotonic(), 0))
        except asyncio.TimeoutError:
            raise SessionTimeout("no decryption key from KGC") from None
    finally:
        if not key_task.done():
            key_task.cancel()
    t3 = time.perf_counter()
    content = await asyncio.to_thread(get_content, cfg.params, reply.ct, dk)
    t4 = time.perf_counter()
    return SessionResult(
        content=content,
        temp_id=temp_id,
        timings={
            "send_request": t1 - t0,
            "round_trip": t2 - t1,
            "key_wait": t3 - t2,
            "get_content": t4 - t3,
            "total": t4 - t0,
        },
    )


def user_client_session(
    cfg: UserConfig, offline: tuple[RequestToken, TempId] | None = None
) -> SessionResult:
    """Blocking wrapper around :func:`user_session` for scripts."""
    return asyncio.run(user_session(cfg, offline))
