"""Open-free group signature: a Furukawa-Imai style scheme with the opening
machinery removed.

A member key is an SDH certificate ``A = (g1 - y*h) / (gamma + x)`` (additive
notation), so that ``e(A, x*g2 + W) == e(g1, g2) * e(h, g2)^-y``.  A signature
is a Fiat-Shamir proof of knowledge of such a triple, blinded by
``T = A + beta*h``.  Nothing in a signature identifies the member; there is no
Open or Judge.

The interactive form of the proof is exposed as well (``Transcript``,
``gs_simulate``, ``gs_extract``) so that the zero-knowledge simulator and the
special-soundness extractor can be exercised directly.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from random import Random

from .pairing import (
    G1,
    G1_BYTES,
    G2,
    G2_BYTES,
    GT,
    ORDER,
    SCALAR_BYTES,
    BilinearContext,
    DecodeError,
    default_context,
    hash_to_scalar,
    inv,
    lp_encode,
    pair,
    random_scalar,
    scalar_from_bytes,
    scalar_to_bytes,
)

H3_TAG = b"anonchan/groupsig/H3/v1"


class ExtractionError(ValueError):
    pass


class Verdict(enum.Enum):
    ACCEPT = 0
    REJECT_MALFORMED = 1
    REJECT_HASH = 2

    def __bool__(self):
        return self is Verdict.ACCEPT


@dataclass(frozen=True)
class GroupPublicKey:
    ctx: BilinearContext
    h: G1
    W: G2
    e_g1_g2: GT
    e_g1_W: GT
    e_h_g2: GT
    e_h_W: GT
    tag: bytes = H3_TAG

    @classmethod
    def build(cls, ctx: BilinearContext, h: G1, W: G2) -> GroupPublicKey:
        return cls(
            ctx=ctx,
            h=h,
            W=W,
            e_g1_g2=pair(ctx.g1, ctx.g2),
            e_g1_W=pair(ctx.g1, W),
            e_h_g2=pair(h, ctx.g2),
            e_h_W=pair(h, W),
        )

    def to_bytes(self) -> bytes:
        return bytes(self.h) + bytes(self.W)

    @classmethod
    def from_bytes(cls, data: bytes, ctx: BilinearContext | None = None) -> GroupPublicKey:
        if len(data) != G1_BYTES + G2_BYTES:
            raise DecodeError(f"group public key must be {G1_BYTES + G2_BYTES} bytes")
        h = G1.from_bytes(data[:G1_BYTES])
        W = G2.from_bytes(data[G1_BYTES:])
        return cls.build(ctx or default_context(), h, W)

    def canonical(self) -> bytes:
        """Byte string hashed into every challenge: generators, then h and W."""
        return lp_encode(bytes(self.ctx.g1), bytes(self.ctx.g2), bytes(self.h), bytes(self.W))

    def is_consistent(self) -> bool:
        fresh = GroupPublicKey.build(self.ctx, self.h, self.W)
        return (
            not self.h.is_identity()
            and fresh.e_g1_g2 == self.e_g1_g2
            and fresh.e_g1_W == self.e_g1_W
            and fresh.e_h_g2 == self.e_h_g2
            and fresh.e_h_W == self.e_h_W
        )


@dataclass(frozen=True)
class IssuerKey:
    gamma: int

    def matches(self, gpk: GroupPublicKey) -> bool:
        return gpk.ctx.g2 * self.gamma == gpk.W

    def to_bytes(self) -> bytes:
        return scalar_to_bytes(self.gamma)

    @classmethod
    def from_bytes(cls, data: bytes) -> IssuerKey:
        return cls(scalar_from_bytes(data))


SIGNING_KEY_BYTES = 2 * SCALAR_BYTES + G1_BYTES


@dataclass(frozen=True)
class SigningKey:
    x: int
    y: int
    A: G1

    def satisfies(self, gpk: GroupPublicKey) -> bool:
        lhs = pair(self.A, gpk.ctx.g2 * self.x + gpk.W)
        return lhs == gpk.e_g1_g2 / gpk.e_h_g2 ** self.y

    def to_bytes(self) -> bytes:
        return scalar_to_bytes(self.x) + scalar_to_bytes(self.y) + bytes(self.A)

    @classmethod
    def from_bytes(cls, data: bytes) -> SigningKey:
        if len(data) != SIGNING_KEY_BYTES:
            raise DecodeError(f"signing key must be {SIGNING_KEY_BYTES} bytes")
        return cls(
            x=scalar_from_bytes(data[:32]),
            y=scalar_from_bytes(data[32:64]),
            A=G1.from_bytes(data[64:]),
        )


SIGNATURE_BYTES = G1_BYTES + 4 * SCALAR_BYTES


@dataclass(frozen=True)
class GroupSignature:
    T: G1
    c: int
    s_x: int
    s_delta: int
    s_beta: int

    def to_bytes(self) -> bytes:
        return bytes(self.T) + b"".join(
            scalar_to_bytes(v) for v in (self.c, self.s_x, self.s_delta, self.s_beta)
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> GroupSignature:
        if len(data) != SIGNATURE_BYTES:
            raise DecodeError(f"group signature must be {SIGNATURE_BYTES} bytes, got {len(data)}")
        T = G1.from_bytes(data[:G1_BYTES])
        vals = [
            scalar_from_bytes(data[i : i + SCALAR_BYTES])
            for i in range(G1_BYTES, SIGNATURE_BYTES, SCALAR_BYTES)
        ]
        return cls(T, *vals)


@dataclass(frozen=True)
class SignRandomness:
    beta: int
    delta: int
    r_x: int
    r_delta: int
    r_beta: int

    @classmethod
    def fresh(cls, sk: SigningKey, rng: Random | None = None) -> SignRandomness:
        beta = random_scalar(rng)
        return cls(
            beta=beta,
            delta=(beta * sk.x - sk.y) % ORDER,
            r_x=random_scalar(rng),
            r_delta=random_scalar(rng),
            r_beta=random_scalar(rng),
        )


@dataclass(frozen=True)
class Transcript:
    T: G1
    R: GT
    c: int
    s_x: int
    s_delta: int
    s_beta: int

    def signature(self) -> GroupSignature:
        return GroupSignature(self.T, self.c, self.s_x, self.s_delta, self.s_beta)


@dataclass(frozen=True)
class ExtractedWitness:
    x_t: int
    y_t: int
    beta_t: int
    A_t: G1

    def as_signing_key(self) -> SigningKey:
        return SigningKey(self.x_t, self.y_t, self.A_t)


@dataclass(frozen=True)
class SignatureSizeReport:
    ours: int
    original: int
    ratio: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "ratio", self.ours / self.original)


# --------------------------------------------------------------------------


def gs_setup(security_level: int = 128, rng: Random | None = None):
    ctx = default_context(security_level)
    gamma = random_scalar(rng, nonzero=True)
    h = G1.random(rng)
    gpk = GroupPublicKey.build(ctx, h, ctx.g2 * gamma)
    return gpk, IssuerKey(gamma)


def gs_join(gpk: GroupPublicKey, ik: IssuerKey, rng: Random | None = None) -> SigningKey:
    while True:
        x = random_scalar(rng)
        if (ik.gamma + x) % ORDER:
            break
    y = random_scalar(rng)
    A = (gpk.ctx.g1 - gpk.h * y) * inv(ik.gamma + x)
    return SigningKey(x, y, A)


def _commitment(gpk: GroupPublicKey, T: G1, r_x: int, r_delta: int, r_beta: int) -> GT:
    return gpk.e_h_g2**r_delta * gpk.e_h_W**r_beta / pair(T, gpk.ctx.g2) ** r_x


def _recompute_commitment(gpk: GroupPublicKey, T: G1, c, s_x, s_delta, s_beta) -> GT:
    # R' = e(h,g2)^s_delta e(h,W)^s_beta / e(T,g2)^s_x * (e(T,W)/e(g1,g2))^-c
    ratio = pair(T, gpk.W) / gpk.e_g1_g2
    return _commitment(gpk, T, s_x, s_delta, s_beta) * ratio ** (-c % ORDER)


def challenge(gpk: GroupPublicKey, T: G1, R: GT, msg: bytes) -> int:
    return hash_to_scalar(gpk.tag, lp_encode(gpk.canonical(), bytes(T), bytes(R), msg))


def sign_transcript(
    gpk: GroupPublicKey,
    sk: SigningKey,
    msg: bytes,
    randomness: SignRandomness | None = None,
    c: int | None = None,
    rng: Random | None = None,
) -> Transcript:
    """Run the prover.  ``c`` overrides the Fiat-Shamir challenge (forking only)."""
    rnd = randomness or SignRandomness.fresh(sk, rng)
    T = sk.A + gpk.h * rnd.beta
    R = _commitment(gpk, T, rnd.r_x, rnd.r_delta, rnd.r_beta)
    if c is None:
        c = challenge(gpk, T, R, msg)
    return Transcript(
        T=T,
        R=R,
        c=c,
        s_x=(rnd.r_x + c * sk.x) % ORDER,
        s_delta=(rnd.r_delta + c * rnd.delta) % ORDER,
        s_beta=(rnd.r_beta + c * rnd.beta) % ORDER,
    )


def gs_sign(
    gpk: GroupPublicKey, sk: SigningKey, msg: bytes, rng: Random | None = None
) -> GroupSignature:
    return sign_transcript(gpk, sk, msg, rng=rng).signature()


def gs_verify(gpk: GroupPublicKey, sig: GroupSignature | bytes, msg: bytes) -> Verdict:
    if isinstance(sig, (bytes, bytearray)):
        try:
            sig = GroupSignature.from_bytes(bytes(sig))
        except DecodeError:
            return Verdict.REJECT_MALFORMED
    R = _recompute_commitment(gpk, sig.T, sig.c, sig.s_x, sig.s_delta, sig.s_beta)
    if challenge(gpk, sig.T, R, msg) != sig.c:
        return Verdict.REJECT_HASH
    return Verdict.ACCEPT


def transcript_accepts(gpk: GroupPublicKey, t: Transcript) -> bool:
    """Verification equation of the interactive proof (no hash involved)."""
    return _recompute_commitment(gpk, t.T, t.c, t.s_x, t.s_delta, t.s_beta) == t.R


def gs_simulate(gpk: GroupPublicKey, msg: bytes = b"", rng: Random | None = None) -> Transcript:
    """Accepting transcript produced without any signing key.

    T is drawn uniformly from G1 directly; the challenge is uniform rather than
    hashed, so ``msg`` does not enter the transcript.
    """
    del msg
    T = G1.random(rng)
    c, s_x, s_delta, s_beta = (random_scalar(rng) for _ in range(4))
    R = _recompute_commitment(gpk, T, c, s_x, s_delta, s_beta)
    return Transcript(T, R, c, s_x, s_delta, s_beta)


def fork_sign(
    gpk: GroupPublicKey,
    sk: SigningKey,
    msg: bytes,
    rng: Random | None = None,
    second_challenge: int | None = None,
) -> tuple[Transcript, Transcript]:
    """Rewind the prover after its commitment and answer two challenges.

    Test hook for the extractor; never used on the signing path.
    """
    rnd = SignRandomness.fresh(sk, rng)
    t1 = sign_transcript(gpk, sk, msg, randomness=rnd)
    c2 = second_challenge
    while c2 is None or c2 == t1.c:
        c2 = random_scalar(rng)
    return t1, sign_transcript(gpk, sk, msg, randomness=rnd, c=c2)


def gs_extract(
    gpk: GroupPublicKey, t1: Transcript, t2: Transcript, verify_inputs: bool = True
) -> ExtractedWitness:
    if t1.T != t2.T or t1.R != t2.R:
        raise ExtractionError("transcripts do not share a commitment")
    dc = (t1.c - t2.c) % ORDER
    if dc == 0:
        raise ExtractionError("transcripts share the same challenge")
    if verify_inputs and not (transcript_accepts(gpk, t1) and transcript_accepts(gpk, t2)):
        raise ExtractionError("transcript does not satisfy the verification equation")
    dx = (t1.s_x - t2.s_x) % ORDER
    dd = (t1.s_delta - t2.s_delta) % ORDER
    db = (t1.s_beta - t2.s_beta) % ORDER
    dc_inv = inv(dc)
    x_t = dx * dc_inv % ORDER
    y_t = (dx * db - dd * dc) * dc_inv * dc_inv % ORDER
    beta_t = db * dc_inv % ORDER
    return ExtractedWitness(x_t, y_t, beta_t, t1.T - gpk.h * beta_t)


def gs_signature_size(gpk: GroupPublicKey) -> SignatureSizeReport:
    """Signature length, and that of Furukawa-Imai with its opening material.

    The original carries three extra DDH-group elements and three extra
    scalars; a DDH element is counted as a compressed point of a 254-bit-order
    curve, i.e. the same length as our G1 encoding.
    """
    ctx = gpk.ctx
    ours = ctx.g1_len + 4 * ctx.scalar_len
    return SignatureSizeReport(ours=ours, original=ours + 3 * ctx.g1_len + 3 * ctx.scalar_len)
