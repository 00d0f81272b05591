"""Frame codec for the role services.

Every frame is a 10-byte header followed by the body::

    magic "ANC1" | version 0x01 | msg_type (1) | payload_len (4, big-endian)

Bodies are concatenations of the fixed-length encodings from the crypto
modules, so a non-canonical point or scalar fails here, before any
verification is attempted.
"""

from __future__ import annotations

import asyncio
import enum
from dataclasses import dataclass

from ..groupsig import SIGNATURE_BYTES, SigningKey, GroupSignature
from ..ibe import IbeCiphertext, IbeDecryptionKey
from ..pairing import DecodeError
from ..protocol import (
    TEMP_ID_BYTES,
    Address,
    ContentMessage,
    ForwardedRequest,
    RefusalReason,
    RequestToken,
    TempId,
)

MAGIC = b"ANC1"
VERSION = 0x01
HEADER_BYTES = 10
MAX_FRAME = 1 << 20


class MsgType(enum.IntEnum):
    JOIN_REQ = 0x01
    JOIN_RESP = 0x02
    EXTRACT_REQ = 0x03
    EXTRACT_RESP = 0x04
    AUTH_REQ = 0x05
    AUTH_FWD = 0x06
    CONTENT = 0x07
    CONTENT_FWD = 0x08
    REFUSE = 0x09
    ERROR = 0x0A


class ErrorCode(enum.IntEnum):
    TRUNCATED = 1
    BAD_MAGIC = 2
    BAD_VERSION = 3
    OVERSIZE = 4
    UNKNOWN_TYPE = 5
    LENGTH_MISMATCH = 6
    BAD_BODY = 7
    # service-level codes carried in ERROR frames
    UNAUTHORIZED = 16
    UNEXPECTED = 17
    DUPLICATE_SESSION = 18
    UPSTREAM_FAILURE = 19
    INTERNAL = 20


class FrameError(Exception):
    def __init__(self, code: ErrorCode, detail: str = ""):
        super().__init__(f"{code.name}: {detail}" if detail else code.name)
        self.code = code
        self.detail = detail
        self.msg_type: MsgType | None = None


@dataclass(frozen=True)
class JoinRequest:
    token: bytes = b""


@dataclass(frozen=True)
class JoinResponse:
    sk: SigningKey


@dataclass(frozen=True)
class ExtractRequest:
    temp_id: TempId
    token: bytes = b""


@dataclass(frozen=True)
class ExtractResponse:
    dk: IbeDecryptionKey


@dataclass(frozen=True)
class AuthRequest:
    token: RequestToken


@dataclass(frozen=True)
class AuthForward:
    request: ForwardedRequest


@dataclass(frozen=True)
class Content:
    message: ContentMessage


@dataclass(frozen=True)
class ContentForward:
    ct: IbeCiphertext


@dataclass(frozen=True)
class Refuse:
    reason: RefusalReason


@dataclass(frozen=True)
class Error:
    code: int
    text: str = ""


WireMessage = (
    JoinRequest
    | JoinResponse
    | ExtractRequest
    | ExtractResponse
    | AuthRequest
    | AuthForward
    | Content
    | ContentForward
    | Refuse
    | Error
)


def _body(m) -> tuple[MsgType, bytes]:
    match m:
        case JoinRequest(token):
            return MsgType.JOIN_REQ, token
        case JoinResponse(sk):
            return MsgType.JOIN_RESP, sk.to_bytes()
        case ExtractRequest(temp_id, token):
            return MsgType.EXTRACT_REQ, bytes(temp_id) + token
        case ExtractResponse(dk):
            return MsgType.EXTRACT_RESP, dk.to_bytes()
        case AuthRequest(t):
            return MsgType.AUTH_REQ, t.sig.to_bytes() + bytes(t.temp_id) + t.dst.to_bytes()
        case AuthForward(f):
            return MsgType.AUTH_FWD, f.sig.to_bytes() + bytes(f.temp_id) + f.reply_to.to_bytes()
        case Content(cm):
            return MsgType.CONTENT, bytes(cm.temp_id) + cm.ct.to_bytes()
        case ContentForward(ct):
            return MsgType.CONTENT_FWD, ct.to_bytes()
        case Refuse(reason):
            return MsgType.REFUSE, bytes([int(reason)])
        case Error(code, text):
            return MsgType.ERROR, int(code).to_bytes(2, "big") + text.encode("utf-8")
    raise TypeError(f"not a wire message: {m!r}")


def encode_frame(m: WireMessage) -> bytes:
    msg_type, body = _body(m)
    if len(body) > MAX_FRAME:
        raise FrameError(ErrorCode.OVERSIZE, f"{len(body)} byte body")
    return MAGIC + bytes([VERSION, msg_type]) + len(body).to_bytes(4, "big") + body


def parse_header(header: bytes, max_payload: int = MAX_FRAME) -> tuple[MsgType, int]:
    if len(header) < HEADER_BYTES:
        raise FrameError(ErrorCode.TRUNCATED, "short header")
    if header[:4] != MAGIC:
        raise FrameError(ErrorCode.BAD_MAGIC, repr(bytes(header[:4])))
    if header[4] != VERSION:
        raise FrameError(ErrorCode.BAD_VERSION, f"version {header[4]}")
    try:
        msg_type = MsgType(header[5])
    except ValueError:
        raise FrameError(ErrorCode.UNKNOWN_TYPE, f"type 0x{header[5]:02x}") from None
    n = int.from_bytes(header[6:10], "big")
    if n > max_payload:
        raise FrameError(ErrorCode.OVERSIZE, f"payload_len {n}")
    return msg_type, n


def _split_sig_tid(body: bytes) -> tuple[GroupSignature, TempId, bytes]:
    need = SIGNATURE_BYTES + TEMP_ID_BYTES
    if len(body) < need:
        raise DecodeError("body shorter than signature and TempId")
    sig = GroupSignature.from_bytes(body[:SIGNATURE_BYTES])
    return sig, TempId(bytes(body[SIGNATURE_BYTES:need])), body[need:]


def _temp_id(body: bytes) -> tuple[TempId, bytes]:
    if len(body) < TEMP_ID_BYTES:
        raise DecodeError("body shorter than TempId")
    return TempId(bytes(body[:TEMP_ID_BYTES])), body[TEMP_ID_BYTES:]


def _address(rest: bytes) -> Address:
    addr, end = Address.decode(rest)
    if end != len(rest):
        raise DecodeError("trailing bytes after address")
    return addr


def decode_body(msg_type: MsgType, body: bytes) -> WireMessage:
    try:
        match msg_type:
            case MsgType.JOIN_REQ:
                return JoinRequest(bytes(body))
            case MsgType.JOIN_RESP:
                return JoinResponse(SigningKey.from_bytes(body))
            case MsgType.EXTRACT_REQ:
                tid, rest = _temp_id(body)
                return ExtractRequest(tid, bytes(rest))
            case MsgType.EXTRACT_RESP:
                return ExtractResponse(IbeDecryptionKey.from_bytes(body, TEMP_ID_BYTES))
            case MsgType.AUTH_REQ:
                sig, tid, rest = _split_sig_tid(body)
                return AuthRequest(RequestToken(sig, tid, _address(rest)))
            case MsgType.AUTH_FWD:
                sig, tid, rest = _split_sig_tid(body)
                return AuthForward(ForwardedRequest(sig, tid, _address(rest)))
            case MsgType.CONTENT:
                tid, rest = _temp_id(body)
                return Content(ContentMessage(tid, IbeCiphertext.from_bytes(rest)))
            case MsgType.CONTENT_FWD:
                return ContentForward(IbeCiphertext.from_bytes(body))
            case MsgType.REFUSE:
                if len(body) != 1:
                    raise DecodeError("REFUSE body must be one byte")
                return Refuse(RefusalReason(body[0]))
            case MsgType.ERROR:
                if len(body) < 2:
                    raise DecodeError("ERROR body truncated")
                return Error(int.from_bytes(body[:2], "big"), bytes(body[2:]).decode("utf-8"))
    except (DecodeError, ValueError) as exc:
        # ValueError also covers bad RefusalReason values and invalid UTF-8
        err = FrameError(ErrorCode.BAD_BODY, f"{msg_type.name}: {exc}")
        err.msg_type = msg_type
        raise err from None
    raise FrameError(ErrorCode.UNKNOWN_TYPE, str(msg_type))


def decode_frame(data: bytes, max_payload: int = MAX_FRAME) -> WireMessage:
    msg_type, n = parse_header(data, max_payload)
    if len(data) < HEADER_BYTES + n:
        raise FrameError(ErrorCode.TRUNCATED, f"need {n} body bytes, have {len(data) - HEADER_BYTES}")
    if len(data) > HEADER_BYTES + n:
        raise FrameError(ErrorCode.LENGTH_MISMATCH, "trailing bytes after frame")
    return decode_body(msg_type, data[HEADER_BYTES:])


async def read_frame_bytes(reader: asyncio.StreamReader, max_payload: int = MAX_FRAME) -> bytes:
    """Read one whole frame off a stream; raises ``EOFError`` on a clean close."""
    try:
        header = await reader.readexactly(HEADER_BYTES)
    except asyncio.IncompleteReadError as exc:
        if not exc.partial:
            raise EOFError from None
        raise FrameError(ErrorCode.TRUNCATED, "connection closed inside header") from None
    _, n = parse_header(header, max_payload)
    try:
        body = await reader.readexactly(n)
    except asyncio.IncompleteReadError:
        raise FrameError(ErrorCode.TRUNCATED, "connection closed inside body") from None
    return header + body


async def read_frame(reader: asyncio.StreamReader, max_payload: int = MAX_FRAME) -> WireMessage:
    return decode_frame(await read_frame_bytes(reader, max_payload), max_payload)


async def write_frame(writer: asyncio.StreamWriter, m: WireMessage) -> None:
    writer.write(encode_frame(m))
    await writer.drain()
