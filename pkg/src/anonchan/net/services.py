"""asyncio TCP services for the four server-side roles.

Each service accepts any number of connections and handles one frame at a
time per connection.  Crypto runs in worker threads (the backend releases the
GIL), so a slow verification never stalls the event loop.

Return traffic follows the connection a request arrived on: the SP answers on
the proxy's AUTH_FWD connection, and the proxy answers on the user's
AUTH_REQ connection once the IdIpTable hands back the session's source
address.  The ``reply_to`` address in AUTH_FWD is the proxy's advertised
address.
"""

from __future__ import annotations

import asyncio
import hmac
import logging
from dataclasses import dataclass, field
from typing import Callable

from ..groupsig import GroupPublicKey, IssuerKey
from ..ibe import IbeMasterKey, IbeParams
from ..protocol import (
    DEFAULT_TTL,
    Address,
    ContentMessage,
    DuplicateTempId,
    IdIpTable,
    Refusal,
    RefusalReason,
    TempId,
    join,
    relay_content,
    relay_request,
    send_content,
    user_key_gen,
)
from .wire import (
    AuthForward,
    AuthRequest,
    Content,
    ContentForward,
    Error,
    ErrorCode,
    ExtractRequest,
    ExtractResponse,
    FrameError,
    JoinRequest,
    JoinResponse,
    MsgType,
    Refuse,
    decode_frame,
    read_frame,
    read_frame_bytes,
    write_frame,
)

log = logging.getLogger(__name__)


def _peer(writer: asyncio.StreamWriter) -> Address:
    host, port = writer.get_extra_info("peername")[:2]
    return Address(host, port)


def _authorized(secret: bytes | None, token: bytes) -> bool:
    return secret is None or hmac.compare_digest(secret, token)


class Service:
    """Base class: owns the listening socket and the per-connection loop."""

    name = "service"

    def __init__(self, host: str = "127.0.0.1", port: int = 0):
        self.host = host
        self.port = port
        self._server: asyncio.AbstractServer | None = None

    @property
    def address(self) -> Address:
        if self._server is None:
            raise RuntimeError(f"{self.name} not started")
        host, port = self._server.sockets[0].getsockname()[:2]
        return Address(host, port)

    async def start(self) -> Service:
        self._server = await asyncio.start_server(self._handle, self.host, self.port)
        log.info("%s listening on %s", self.name, self.address)
        return self

    async def serve_forever(self) -> None:
        if self._server is None:
            await self.start()
        await self._server.serve_forever()

    async def close(self) -> None:
        if self._server is not None:
            self._server.close()
            await self._server.wait_closed()

    async def _handle(self, reader, writer) -> None:
        try:
            while True:
                try:
                    raw = await read_frame_bytes(reader)
                    msg = decode_frame(raw)
                except EOFError:
                    break
                except FrameError as exc:
                    log.warning("%s: bad frame from %s: %s", self.name, _peer(writer), exc)
                    await self.on_bad_frame(writer, exc)
                    break
                if not await self.on_message(msg, raw, reader, writer):
                    break
        except (ConnectionError, asyncio.IncompleteReadError):
            pass
        except Exception:
            log.exception("%s: connection handler failed", self.name)
        finally:
            writer.close()

    async def on_bad_frame(self, writer, exc: FrameError) -> None:
        await write_frame(writer, Error(exc.code, str(exc)))

    async def on_message(self, msg, raw: bytes, reader, writer) -> bool:
        raise NotImplementedError

    async def unexpected(self, writer, msg) -> bool:
        await write_frame(writer, Error(ErrorCode.UNEXPECTED, type(msg).__name__))
        return False


class GmService(Service):
    name = "gm"

    def __init__(self, gpk: GroupPublicKey, ik: IssuerKey, enroll_secret: bytes | None = None, **kw):
        super().__init__(**kw)
        self.gpk = gpk
        self.ik = ik
        self.enroll_secret = enroll_secret

    async def on_message(self, msg, raw, reader, writer) -> bool:
        if not isinstance(msg, JoinRequest):
            return await self.unexpected(writer, msg)
        if not _authorized(self.enroll_secret, msg.token):
            await write_frame(writer, Error(ErrorCode.UNAUTHORIZED, "join refused"))
            return False
        sk = await asyncio.to_thread(join, self.gpk, self.ik)
        await write_frame(writer, JoinResponse(sk))
        return True


class KgcService(Service):
    name = "kgc"

    def __init__(self, params: IbeParams, msk: IbeMasterKey, enroll_secret: bytes | None = None, **kw):
        super().__init__(**kw)
        self.params = params
        self.msk = msk
        self.enroll_secret = enroll_secret

    async def on_message(self, msg, raw, reader, writer) -> bool:
        if not isinstance(msg, ExtractRequest):
            return await self.unexpected(writer, msg)
        if not _authorized(self.enroll_secret, msg.token):
            await write_frame(writer, Error(ErrorCode.UNAUTHORIZED, "extract refused"))
            return False
        dk = await asyncio.to_thread(user_key_gen, self.params, self.msk, msg.temp_id)
        await write_frame(writer, ExtractResponse(dk))
        return True


Payload = bytes | Callable[[TempId], bytes]


class SpService(Service):
    """Verifies forwarded tokens and answers with CONTENT or REFUSE."""

    name = "sp"

    def __init__(
        self,
        gpk: GroupPublicKey,
        params: IbeParams,
        payload: Payload,
        frame_log: list[bytes] | None = None,
        **kw,
    ):
        super().__init__(**kw)
        self.gpk = gpk
        self.params = params
        self.payload = payload
        self.frame_log = frame_log

    def content_for(self, temp_id: TempId) -> bytes:
        return self.payload(temp_id) if callable(self.payload) else self.payload

    async def on_bad_frame(self, writer, exc: FrameError) -> None:
        if exc.msg_type is MsgType.AUTH_FWD:
            await write_frame(writer, Refuse(RefusalReason.MALFORMED_TOKEN))
        else:
            await super().on_bad_frame(writer, exc)

    async def on_message(self, msg, raw, reader, writer) -> bool:
        if self.frame_log is not None:
            self.frame_log.append(raw)
        if not isinstance(msg, AuthForward):
            return await self.unexpected(writer, msg)
        fwd = msg.request
        content = self.content_for(fwd.temp_id)
        result = await asyncio.to_thread(send_content, self.gpk, self.params, fwd, content)
        if isinstance(result, Refusal):
            log.info("sp: refusing %r (%s)", fwd.temp_id, result.reason.name)
            await write_frame(writer, Refuse(result.reason))
        else:
            await write_frame(writer, Content(result))
        return True


class ProxyService(Service):
    """Relays requests downstream and ciphertexts back, keeping the IdIpTable.

    With ``next_hop`` set, requests go to another proxy (as AUTH_REQ) instead of
    to the SP; each hop records its own predecessor.
    """

    name = "proxy"

    def __init__(
        self,
        ttl: float = DEFAULT_TTL,
        next_hop: Address | None = None,
        advertise: Address | None = None,
        table: IdIpTable | None = None,
        **kw,
    ):
        super().__init__(**kw)
        self.table = table if table is not None else IdIpTable(ttl)
        self.next_hop = next_hop
        self.advertise = advertise

    @property
    def reply_to(self) -> Address:
        return self.advertise or self.address

    async def on_message(self, msg, raw, reader, writer) -> bool:
        if not isinstance(msg, AuthRequest):
            return await self.unexpected(writer, msg)
        token = msg.token
        src = _peer(writer)
        try:
            fwd = relay_request(self.table, token, src, self.reply_to)
        except DuplicateTempId:
            await write_frame(writer, Refuse(RefusalReason.POLICY))
            return True
        try:
            reply = await asyncio.wait_for(
                self._forward(AuthRequest(token) if self.next_hop else AuthForward(fwd),
                              self.next_hop or token.dst),
                timeout=self.table.ttl,
            )
        except (asyncio.TimeoutError, OSError, FrameError, EOFError) as exc:
            log.warning("proxy: upstream failure for %r: %r", token.temp_id, exc)
            self.table.discard(token.temp_id)
            await write_frame(writer, Error(ErrorCode.UPSTREAM_FAILURE, type(exc).__name__))
            return True

        match reply:
            case Content(cm) if cm.temp_id == token.temp_id:
                pass
            case ContentForward(ct):
                cm = ContentMessage(token.temp_id, ct)
            case Refuse():
                self.table.discard(token.temp_id)
                await write_frame(writer, reply)
                return True
            case _:
                self.table.discard(token.temp_id)
                await write_frame(writer, Error(ErrorCode.UPSTREAM_FAILURE, "unexpected reply"))
                return True

        delivery = relay_content(self.table, cm)
        if delivery is None:
            return False
        if delivery.dst != src:
            log.error("proxy: table routes %r to %s, not this connection", token.temp_id, delivery.dst)
            return False
        await write_frame(writer, ContentForward(delivery.ct))
        return True

    async def _forward(self, msg, dst: Address):
        reader, writer = await asyncio.open_connection(dst.host, dst.port)
        try:
            await write_frame(writer, msg)
            return await read_frame(reader)
        finally:
            writer.close()


@dataclass
class GmConfig:
    gpk: GroupPublicKey
    ik: IssuerKey
    listen: tuple[str, int] = ("127.0.0.1", 0)
    enroll_secret: bytes | None = None


@dataclass
class KgcConfig:
    params: IbeParams
    msk: IbeMasterKey
    listen: tuple[str, int] = ("127.0.0.1", 0)
    enroll_secret: bytes | None = None


@dataclass
class SpConfig:
    gpk: GroupPublicKey
    params: IbeParams
    payload: Payload
    listen: tuple[str, int] = ("127.0.0.1", 0)
    frame_log: list[bytes] | None = None


@dataclass
class ProxyConfig:
    listen: tuple[str, int] = ("127.0.0.1", 0)
    ttl: float = DEFAULT_TTL
    next_hop: Address | None = None
    advertise: Address | None = None
    table: IdIpTable | None = field(default=None, repr=False)


async def run_gm_service(cfg: GmConfig) -> GmService:
    host, port = cfg.listen
    return await GmService(cfg.gpk, cfg.ik, cfg.enroll_secret, host=host, port=port).start()


async def run_kgc_service(cfg: KgcConfig) -> KgcService:
    host, port = cfg.listen
    return await KgcService(cfg.params, cfg.msk, cfg.enroll_secret, host=host, port=port).start()


async def run_sp(cfg: SpConfig) -> SpService:
    host, port = cfg.listen
    svc = SpService(cfg.gpk, cfg.params, cfg.payload, cfg.frame_log, host=host, port=port)
    return await svc.start()


async def run_proxy(cfg: ProxyConfig) -> ProxyService:
    host, port = cfg.listen
    svc = ProxyService(
        ttl=cfg.ttl, next_hop=cfg.next_hop, advertise=cfg.advertise, table=cfg.table,
        host=host, port=port,
    )
    return await svc.start()
