"""Asymmetric bilinear group over the BN254 curve, plus the hashes built on it.

Group arithmetic and the optimal-ate pairing come from the mcl library (the
``mclbn256`` wheel ships a prebuilt ``libmclbn256``); this module binds to it
through ctypes and is the only place in the package that touches curve
internals.

Scalars are plain Python ints reduced modulo ``ORDER``.  G1 and G2 use additive
notation (``a + b``, ``a * k``); GT is multiplicative (``x * y``, ``x ** k``).

Encodings (all fixed length)::

    scalar   32 bytes, big-endian, value < ORDER
    G1       33 bytes, 0x02|sign || x (big-endian); identity = 33 zero bytes
    G2       65 bytes, 0x02|sign || x.c0 || x.c1 (big-endian); identity = zeros
    GT      384 bytes, twelve Fp coefficients, little-endian, mcl tower order
"""

from __future__ import annotations

import ctypes
import hashlib
import secrets
from dataclasses import dataclass
from random import Random

import mclbn256.mclbn256 as _mcl

_lib = _mcl.lib

ORDER = 16798108731015832284940804142231733909759579603404752749028378864165570215949
FIELD = 16798108731015832284940804142231733909889187121439069848933715426072753864723

SCALAR_BYTES = 32
G1_BYTES = 33
G2_BYTES = 65
GT_BYTES = 384

_FP_BYTES = 32
_SIGN_BIT = 0x80  # mcl keeps the y-parity flag in the top bit of the last byte
_FLAG_MASK = 0xC0

_Fr = _mcl.mclBnFr_bytes
_Fp = _mcl.mclBnFp_bytes
_G1 = _mcl.mclBnG1_bytes
_G2 = _mcl.mclBnG2_bytes
_GT = _mcl.mclBnGT_bytes

_lib.mclBn_verifyOrderG1(1)
_lib.mclBn_verifyOrderG2(1)


class DecodeError(ValueError):
    """Raised for byte strings that are not canonical encodings."""


# --------------------------------------------------------------------------
# scalars


def random_scalar(rng: Random | None = None, nonzero: bool = False) -> int:
    lo = 1 if nonzero else 0
    if rng is None:
        return lo + secrets.randbelow(ORDER - lo)
    return rng.randrange(lo, ORDER)


def scalar_to_bytes(k: int) -> bytes:
    return (k % ORDER).to_bytes(SCALAR_BYTES, "big")


def scalar_from_bytes(data: bytes) -> int:
    if len(data) != SCALAR_BYTES:
        raise DecodeError(f"scalar must be {SCALAR_BYTES} bytes, got {len(data)}")
    k = int.from_bytes(data, "big")
    if k >= ORDER:
        raise DecodeError("scalar not reduced modulo the group order")
    return k


def inv(k: int) -> int:
    k %= ORDER
    if k == 0:
        raise ZeroDivisionError("zero has no inverse in Z_p")
    return pow(k, -1, ORDER)


def _fr(k: int) -> _Fr:
    out = _Fr()
    buf = (k % ORDER).to_bytes(SCALAR_BYTES, "little")
    if _lib.mclBnFr_setLittleEndianMod(out, buf, SCALAR_BYTES) != 0:
        raise RuntimeError("mclBnFr_setLittleEndianMod failed")
    return out


# --------------------------------------------------------------------------
# group elements


class _Point:
    __slots__ = ("_raw",)
    _ctype: type
    _prefix: str
    _nbytes: int

    def __init__(self, raw=None):
        self._raw = raw if raw is not None else self._ctype()

    @classmethod
    def identity(cls):
        return cls()

    @classmethod
    def random(cls, rng: Random | None = None):
        return cls.generator() * random_scalar(rng, nonzero=True)

    def _call(self, fn, *args):
        out = type(self)()
        getattr(_lib, self._prefix + fn)(out._raw, *args)
        return out

    def __add__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return self._call("_add", self._raw, other._raw)

    def __sub__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return self._call("_sub", self._raw, other._raw)

    def __neg__(self):
        return self._call("_neg", self._raw)

    def __mul__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        return self._call("_mul", self._raw, _fr(k))

    __rmul__ = __mul__

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return bool(getattr(_lib, self._prefix + "_isEqual")(self._raw, other._raw))

    def __hash__(self):
        return hash(bytes(self))

    def is_identity(self) -> bool:
        return bool(getattr(_lib, self._prefix + "_isZero")(self._raw))

    def _mcl_bytes(self) -> bytes:
        buf = ctypes.create_string_buffer(2 * self._nbytes)
        n = getattr(_lib, self._prefix + "_serialize")(buf, len(buf), self._raw)
        if n == 0:
            raise RuntimeError(f"{self._prefix}_serialize failed")
        return buf.raw[:n]

    def __bytes__(self) -> bytes:
        if self.is_identity():
            return bytes(self._nbytes)
        raw = bytearray(self._mcl_bytes())
        sign = 1 if raw[-1] & _SIGN_BIT else 0
        raw[-1] &= ~_FLAG_MASK & 0xFF
        coords = b"".join(
            raw[i : i + _FP_BYTES][::-1] for i in range(0, len(raw), _FP_BYTES)
        )
        return bytes([0x02 | sign]) + coords

    @classmethod
    def from_bytes(cls, data: bytes):
        if len(data) != cls._nbytes:
            raise DecodeError(
                f"{cls.__name__} encoding must be {cls._nbytes} bytes, got {len(data)}"
            )
        prefix = data[0]
        if prefix == 0x00:
            if any(data[1:]):
                raise DecodeError(f"non-canonical {cls.__name__} identity encoding")
            return cls()
        if prefix not in (0x02, 0x03):
            raise DecodeError(f"bad {cls.__name__} prefix byte 0x{prefix:02x}")
        raw = bytearray()
        for i in range(1, len(data), _FP_BYTES):
            coord = int.from_bytes(data[i : i + _FP_BYTES], "big")
            if coord >= FIELD:
                raise DecodeError(f"{cls.__name__} coordinate not reduced mod p")
            raw += coord.to_bytes(_FP_BYTES, "little")
        if prefix == 0x03:
            raw[-1] |= _SIGN_BIT
        out = cls()
        n = getattr(_lib, cls._prefix + "_deserialize")(out._raw, bytes(raw), len(raw))
        if n != len(raw) or out.is_identity():
            raise DecodeError(f"{cls.__name__} point not on curve or not in subgroup")
        return out

    def __repr__(self):
        return f"{type(self).__name__}({bytes(self).hex()[:16]}...)"


class G1(_Point):
    __slots__ = ()
    _ctype = _G1
    _prefix = "mclBnG1"
    _nbytes = G1_BYTES

    @classmethod
    def generator(cls) -> G1:
        return _G1_GEN


class G2(_Point):
    __slots__ = ()
    _ctype = _G2
    _prefix = "mclBnG2"
    _nbytes = G2_BYTES

    @classmethod
    def generator(cls) -> G2:
        return _G2_GEN


def _from_mcl(cls, hexstr: str):
    out = cls()
    data = bytes.fromhex(hexstr)
    if getattr(_lib, cls._prefix + "_deserialize")(out._raw, data, len(data)) != len(data):
        raise RuntimeError("bad built-in generator")
    return out


# Fixed generators of the mcl Fp254BNb curve.
_G1_GEN = _from_mcl(G1, "12000000000000a7130000000000216108000000804d34ba01000040826423a5")
_G2_GEN = _from_mcl(
    G2,
    "2bfb03c82442ee910dbf9848bb8b64a4b6ed618c7e8c8deb2fb69e51bb101a06"
    "f34cd5e7c1348c0db78437ae6b744d1f5baa82598ca70a31337873baf9aa1605",
)


class GT:
    __slots__ = ("_raw",)

    def __init__(self, raw=None):
        self._raw = raw if raw is not None else _GT()

    @classmethod
    def identity(cls) -> GT:
        out = cls()
        _lib.mclBnGT_setInt(out._raw, ctypes.c_int64(1))
        return out

    def _call(self, fn, *args) -> GT:
        out = GT()
        getattr(_lib, "mclBnGT_" + fn)(out._raw, *args)
        return out

    def __mul__(self, other: GT) -> GT:
        if not isinstance(other, GT):
            return NotImplemented
        return self._call("mul", self._raw, other._raw)

    def __truediv__(self, other: GT) -> GT:
        if not isinstance(other, GT):
            return NotImplemented
        return self._call("div", self._raw, other._raw)

    def __invert__(self) -> GT:
        # unitary inverse (conjugation); valid for elements of the order-p subgroup
        return self._call("inv", self._raw)

    def __pow__(self, k: int) -> GT:
        if not isinstance(k, int):
            return NotImplemented
        return self._call("pow", self._raw, _fr(k))

    def __eq__(self, other):
        if not isinstance(other, GT):
            return NotImplemented
        return bool(_lib.mclBnGT_isEqual(self._raw, other._raw))

    def __hash__(self):
        return hash(bytes(self))

    def is_identity(self) -> bool:
        return bool(_lib.mclBnGT_isOne(self._raw))

    def __bytes__(self) -> bytes:
        buf = ctypes.create_string_buffer(GT_BYTES)
        if _lib.mclBnGT_serialize(buf, GT_BYTES, self._raw) != GT_BYTES:
            raise RuntimeError("mclBnGT_serialize failed")
        return buf.raw

    @classmethod
    def from_bytes(cls, data: bytes) -> GT:
        if len(data) != GT_BYTES:
            raise DecodeError(f"GT encoding must be {GT_BYTES} bytes, got {len(data)}")
        for i in range(0, GT_BYTES, _FP_BYTES):
            if int.from_bytes(data[i : i + _FP_BYTES], "little") >= FIELD:
                raise DecodeError("GT coefficient not reduced mod p")
        out = cls()
        if _lib.mclBnGT_deserialize(out._raw, data, GT_BYTES) != GT_BYTES:
            raise DecodeError("GT decoding rejected by backend")
        # subgroup membership: x^(r-1) * x == 1  <=>  x^r == 1
        if _lib.mclBnGT_isZero(out._raw) or not (out ** (ORDER - 1) * out).is_identity():
            raise DecodeError("GT element outside the order-p subgroup")
        return out

    def __repr__(self):
        return f"GT({bytes(self).hex()[:16]}...)"


def pair(a: G1, b: G2) -> GT:
    out = GT()
    _lib.mclBn_pairing(out._raw, a._raw, b._raw)
    return out


def multi_pair(pairs) -> GT:
    """Product of pairings with a single final exponentiation."""
    pairs = list(pairs)
    n = len(pairs)
    g1s = (_G1 * n)(*(a._raw for a, _ in pairs))
    g2s = (_G2 * n)(*(b._raw for _, b in pairs))
    ml = GT()
    _lib.mclBn_millerLoopVec(ml._raw, g1s, g2s, n)
    out = GT()
    _lib.mclBn_finalExp(out._raw, ml._raw)
    return out


@dataclass(frozen=True)
class BilinearContext:
    """Published parameters shared by every role."""

    p: int = ORDER
    g1: G1 = _G1_GEN
    g2: G2 = _G2_GEN
    scalar_len: int = SCALAR_BYTES
    g1_len: int = G1_BYTES
    g2_len: int = G2_BYTES
    gt_len: int = GT_BYTES


def default_context(security_level: int = 128) -> BilinearContext:
    if security_level > 128:
        raise ValueError(f"BN254 backend offers ~128-bit security, asked for {security_level}")
    return BilinearContext()


# --------------------------------------------------------------------------
# hashing


def lp_encode(*parts: bytes) -> bytes:
    """Injective concatenation: each part prefixed by its 4-byte big-endian length."""
    return b"".join(len(p).to_bytes(4, "big") + p for p in parts)


def hash_to_scalar(domain_tag: bytes, payload: bytes) -> int:
    """SHA-512 of the tagged payload reduced mod ORDER (bias below 2^-250)."""
    if not domain_tag:
        raise ValueError("domain_tag must be nonempty")
    digest = hashlib.sha512(lp_encode(domain_tag, payload)).digest()
    return int.from_bytes(digest, "big") % ORDER


_H2C_TAG = b"anonchan/hash_to_g1/v1"


def _hash_to_fp(data: bytes, index: int) -> _Fp:
    digest = hashlib.sha512(lp_encode(_H2C_TAG, bytes([index]), data)).digest()
    out = _Fp()
    if _lib.mclBnFp_setLittleEndianMod(out, digest, len(digest)) != 0:
        raise RuntimeError("mclBnFp_setLittleEndianMod failed")
    return out


def _map_to_g1(u: _Fp) -> G1:
    out = G1()
    if _lib.mclBnFp_mapToG1(out._raw, u) != 0:
        raise RuntimeError("mclBnFp_mapToG1 failed")
    return out


def hash_to_g1(id_bytes: bytes) -> G1:
    """Random-oracle hash onto G1: two field elements, each mapped, then added."""
    counter = 0
    while True:
        # the sum is the identity with probability ~1/p; the counter only exists for that
        data = id_bytes if counter == 0 else id_bytes + counter.to_bytes(4, "big")
        q = _map_to_g1(_hash_to_fp(data, 0)) + _map_to_g1(_hash_to_fp(data, 1))
        if not q.is_identity():
            return q
        counter += 1


_MASK_TAG = b"anonchan/mask/v1"


def mask_bytes(seed: GT, out_len: int) -> bytes:
    """Keystream of ``out_len`` bytes derived from a GT element with SHAKE-256."""
    if out_len < 1:
        raise ValueError("out_len must be at least 1")
    return hashlib.shake_256(lp_encode(_MASK_TAG, bytes(seed))).digest(out_len)


def xor_bytes(a: bytes, b: bytes) -> bytes:
    return (int.from_bytes(a, "big") ^ int.from_bytes(b, "big")).to_bytes(len(a), "big")
