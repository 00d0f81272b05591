"""Challengers for the anonymity, semantic-security and unforgeability games.

Each game runs entirely in process over the protocol algorithms.  An
adversary is an object with the hooks the game calls; it only ever sees what
the challenger hands it, so the key-exposure rules of each game are fixed by
the shape of the views below:

* anonymity: ``gpk, sk_0, sk_1, params, msk``; never a source address
* semantic security: ``gpk, ik, params``; never ``msk``
* unforgeability: ``gpk, params, msk``; never ``ik`` or a signing key

A trial in which the adversary breaks the rules (bad guess, forbidden query,
exception) is voided and logged rather than counted.
"""

from __future__ import annotations

import logging
import math
import random
import secrets
from dataclasses import dataclass, field
from typing import Protocol

from ..groupsig import GroupPublicKey, GroupSignature, IssuerKey, SigningKey, gs_simulate
from ..ibe import IbeCiphertext, IbeDecryptionKey, IbeMasterKey, IbeParams, ibe_encrypt
from ..pairing import G1, G1_BYTES, SCALAR_BYTES, random_scalar, scalar_to_bytes
from ..protocol import (
    Address,
    ContentMessage,
    ForwardedRequest,
    IdIpTable,
    Refusal,
    RequestToken,
    TempId,
    get_content,
    gm_setup,
    join,
    kgc_setup,
    relay_content,
    relay_request,
    send_content,
    send_request,
    user_key_gen,
    validity_check,
)

log = logging.getLogger(__name__)

MIN_TRIALS = 100


class ProtocolViolation(Exception):
    """The adversary broke a rule of the game; the trial is voided."""


@dataclass
class GameResult:
    game: str
    adversary: str
    trials: int
    wins: int
    voided: int = 0
    kind: str = "guess"  # "guess": advantage |acc - 1/2|; "forge": win rate
    threshold: float = field(init=False)

    def __post_init__(self):
        self.threshold = three_sigma(self.trials) if self.kind == "guess" else 0.0

    @property
    def valid(self) -> int:
        return self.trials - self.voided

    @property
    def advantage(self) -> float:
        if self.valid == 0:
            return 0.0
        rate = self.wins / self.valid
        return abs(rate - 0.5) if self.kind == "guess" else rate

    @property
    def indistinguishable(self) -> bool:
        """Advantage (or win rate) consistent with zero at the 3-sigma level."""
        return self.advantage <= self.threshold

    def line(self) -> str:
        return (
            f"game={self.game} adversary={self.adversary} trials={self.trials} "
            f"voided={self.voided} wins={self.wins} advantage={self.advantage:.4f} "
            f"threshold={self.threshold:.4f} indistinguishable={int(self.indistinguishable)}"
        )


def three_sigma(n: int) -> float:
    """Three binomial standard deviations of an accuracy estimate at p = 1/2."""
    return 3 * math.sqrt(0.25 / n) if n else 1.0


def _check_trials(trials: int) -> None:
    if trials < MIN_TRIALS:
        raise ValueError(f"need at least {MIN_TRIALS} trials, got {trials}")


def _bit(guess) -> int:
    if guess not in (0, 1):
        raise ProtocolViolation(f"guess must be 0 or 1, got {guess!r}")
    return int(guess)


# --------------------------------------------------------------------------
# anonymity


@dataclass(frozen=True)
class AnonymityView:
    gpk: GroupPublicKey
    sk_0: SigningKey
    sk_1: SigningKey
    params: IbeParams
    msk: IbeMasterKey
    sp: Address


class AnonymityOracles:
    """SendRequest / RelayRequest / RelayContent, with source addresses hidden."""

    def __init__(self, ch: _AnonymityChallenger):
        self._ch = ch

    def send_request(self, i: int, temp_id: TempId) -> GroupSignature:
        return self._ch.send_request(i, temp_id)

    def relay_request(self, sig: GroupSignature, temp_id: TempId) -> ForwardedRequest:
        return self._ch.relay_request(sig, temp_id)

    def relay_content(self, ct: IbeCiphertext, temp_id: TempId) -> bool:
        """Returns whether a pending session took the ciphertext, nothing more."""
        return self._ch.relay_content(ct, temp_id)


class AnonymityAdversary(Protocol):
    name: str

    def learn(self, view: AnonymityView, oracles: AnonymityOracles, rng: random.Random) -> None: ...
    def choose(self) -> TempId: ...
    def respond(self, fwd: ForwardedRequest) -> IbeCiphertext | None: ...
    def guess(self) -> int: ...


class _AnonymityChallenger:
    def __init__(self, rng: random.Random, leak: bool):
        self.rng = rng
        self.leak = leak
        self.gpk, _ik = gm_setup(rng=rng)
        self.params, self.msk = kgc_setup(rng=rng)
        self.sks = [join(self.gpk, _ik, rng), join(self.gpk, _ik, rng)]
        # distinct, secret source addresses for the two users
        self.srcs = [Address(f"10.0.{rng.randrange(256)}.{i + 1}", 40000 + i) for i in range(2)]
        self.proxy = Address("192.0.2.1", 9000)
        self.sp = Address("198.51.100.1", 443)
        self.tbl = IdIpTable(ttl=float("inf"))
        self.pending_src: dict[TempId, Address] = {}

    def view(self) -> AnonymityView:
        return AnonymityView(self.gpk, self.sks[0], self.sks[1], self.params, self.msk, self.sp)

    def send_request(self, i: int, temp_id: TempId) -> GroupSignature:
        if i not in (0, 1):
            raise ProtocolViolation(f"no user {i!r}")
        token, _ = send_request(self.gpk, self.sks[i], self.sp, rng=self.rng, temp_id=temp_id)
        self.pending_src[temp_id] = self.srcs[i]
        return token.sig

    def relay_request(self, sig: GroupSignature, temp_id: TempId) -> ForwardedRequest:
        src = self.pending_src.pop(temp_id, None)
        if src is None:
            raise ProtocolViolation("relay of a request no user sent")
        try:
            return relay_request(self.tbl, RequestToken(sig, temp_id, self.sp), src, self.proxy)
        except Exception as exc:
            raise ProtocolViolation(str(exc)) from exc

    def relay_content(self, ct: IbeCiphertext, temp_id: TempId) -> bool:
        return relay_content(self.tbl, ContentMessage(temp_id, ct)) is not None

    def challenge(self, temp_id: TempId, b: int) -> ForwardedRequest:
        if not isinstance(temp_id, TempId):
            raise ProtocolViolation("challenge TempId must be a TempId")
        sig = self.send_request(b, temp_id)
        fwd = self.relay_request(sig, temp_id)
        if self.leak:
            # test-only: a broken proxy that lets the user's identity slip
            # into the reply_to port
            fwd = ForwardedRequest(fwd.sig, fwd.temp_id, Address(self.proxy.host, 9000 + b))
        return fwd


def game_anonymity(
    adversary: AnonymityAdversary,
    trials: int,
    rng: random.Random | None = None,
    leak: bool = False,
) -> GameResult:
    """Play ``trials`` independent anonymity games.

    ``leak=True`` swaps in a cheating challenger whose proxy encodes ``b`` in
    the forwarded request; it exists only to show the harness catches leaks.
    """
    _check_trials(trials)
    rng = rng or random.Random(secrets.randbits(64))
    wins = voided = 0
    for _ in range(trials):
        ch = _AnonymityChallenger(rng, leak)
        try:
            adversary.learn(ch.view(), AnonymityOracles(ch), rng)
            temp_id = adversary.choose()
            b = rng.randrange(2)
            fwd = ch.challenge(temp_id, b)
            ct = adversary.respond(fwd)
            if ct is not None:
                ch.relay_content(ct, temp_id)
            wins += _bit(adversary.guess()) == b
        except ProtocolViolation as exc:
            log.info("anonymity trial voided: %s", exc)
            voided += 1
    return GameResult("anonymity", adversary.name, trials, wins, voided)


class RandomGuess:
    """Ignores everything and flips a coin."""

    name = "random-guess"

    def learn(self, view, oracles, rng):
        self.rng = rng

    def choose(self):
        return TempId.random(self.rng)

    def respond(self, fwd):
        return None

    def guess(self):
        return self.rng.randrange(2)


def _byte_features(data: bytes) -> list[float]:
    return [float(v) for v in data]


def _nearest(x: list[float], centroids: list[list[float]]) -> int:
    dists = [sum((a - b) ** 2 for a, b in zip(x, c)) for c in centroids]
    return min(range(len(dists)), key=dists.__getitem__)


def _centroid(rows: list[list[float]]) -> list[float]:
    return [sum(col) / len(rows) for col in zip(*rows)]


class ByteStatistics:
    """Nearest-centroid classifier on the serialized signature bytes.

    Trains on a few signatures from each user via the SendRequest and
    RelayRequest oracles, then assigns the challenge signature to the closer
    class mean.
    """

    name = "byte-statistics"

    def __init__(self, samples_per_class: int = 8):
        self.samples = samples_per_class

    def learn(self, view, oracles, rng):
        self.rng = rng
        rows: list[list[list[float]]] = [[], []]
        for i in (0, 1):
            for _ in range(self.samples):
                tid = TempId.random(rng)
                sig = oracles.send_request(i, tid)
                fwd = oracles.relay_request(sig, tid)
                # answer like an honest SP so the proxy table drains
                oracles.relay_content(ibe_encrypt(view.params, bytes(tid), b"ok", rng), tid)
                rows[i].append(_byte_features(fwd.sig.to_bytes()))
        self.centroids = [_centroid(r) for r in rows]

    def choose(self):
        self.tid = TempId.random(self.rng)
        return self.tid

    def respond(self, fwd):
        self.features = _byte_features(fwd.sig.to_bytes())
        return None

    def guess(self):
        return _nearest(self.features, self.centroids)


class ReplyToPort:
    """Reads the forwarded reply_to port; only wins against a leaking proxy."""

    name = "reply-to-port"

    def learn(self, view, oracles, rng):
        self.rng = rng

    def choose(self):
        return TempId.random(self.rng)

    def respond(self, fwd):
        self.port = fwd.reply_to.port
        return None

    def guess(self):
        return self.port % 2


# --------------------------------------------------------------------------
# semantic security


@dataclass(frozen=True)
class SemanticView:
    gpk: GroupPublicKey
    ik: IssuerKey
    params: IbeParams


class SemanticOracles:
    def __init__(self, ch: _SemanticChallenger):
        self._ch = ch

    def user_key_gen(self, temp_id: TempId) -> IbeDecryptionKey:
        return self._ch.user_key_gen(temp_id)


class SemanticAdversary(Protocol):
    name: str

    def learn(self, view: SemanticView, oracles: SemanticOracles, rng: random.Random) -> None: ...
    def challenge_request(self) -> tuple[TempId, bytes, bytes, SigningKey]: ...
    def observe(self, sig: GroupSignature, temp_id: TempId, ct: IbeCiphertext) -> None: ...
    def guess(self) -> int: ...


class _SemanticChallenger:
    def __init__(self, rng: random.Random, hand_over_key: bool):
        self.rng = rng
        self.hand_over_key = hand_over_key
        self.gpk, self.ik = gm_setup(rng=rng)
        self.params, self._msk = kgc_setup(rng=rng)
        self.queried: set[TempId] = set()
        self.target: TempId | None = None
        self.sp = Address("198.51.100.1", 443)

    def user_key_gen(self, temp_id: TempId) -> IbeDecryptionKey:
        if temp_id == self.target and not self.hand_over_key:
            raise ProtocolViolation("UserKeyGen query on the challenge TempId")
        self.queried.add(temp_id)
        return user_key_gen(self.params, self._msk, temp_id)

    def challenge(self, temp_id, m0: bytes, m1: bytes, sk, b: int):
        if not isinstance(temp_id, TempId):
            raise ProtocolViolation("challenge TempId must be a TempId")
        if temp_id in self.queried:
            raise ProtocolViolation("challenge TempId was already a UserKeyGen query")
        if not m0 or len(m0) != len(m1):
            raise ProtocolViolation("challenge messages must be nonempty and of equal length")
        if not isinstance(sk, SigningKey):
            raise ProtocolViolation("sk* must be a SigningKey")
        self.target = temp_id
        token, _ = send_request(self.gpk, sk, self.sp, rng=self.rng, temp_id=temp_id)
        result = send_content(self.gpk, self.params, token, (m0, m1)[b], rng=self.rng)
        if isinstance(result, Refusal):
            raise ProtocolViolation(f"SendContent refused sk*: {result.reason.name}")
        return token.sig, result.ct


def game_semantic_security(
    adversary: SemanticAdversary,
    trials: int,
    rng: random.Random | None = None,
    hand_over_key: bool = False,
) -> GameResult:
    """Play ``trials`` semantic-security games.

    ``hand_over_key=True`` is the cheating challenger: it answers UserKeyGen on
    the challenge TempId after the challenge.
    """
    _check_trials(trials)
    rng = rng or random.Random(secrets.randbits(64))
    wins = voided = 0
    for _ in range(trials):
        ch = _SemanticChallenger(rng, hand_over_key)
        try:
            adversary.learn(SemanticView(ch.gpk, ch.ik, ch.params), SemanticOracles(ch), rng)
            temp_id, m0, m1, sk = adversary.challenge_request()
            b = rng.randrange(2)
            sig, ct = ch.challenge(temp_id, m0, m1, sk, b)
            adversary.observe(sig, temp_id, ct)
            wins += _bit(adversary.guess()) == b
        except ProtocolViolation as exc:
            log.info("semantic-security trial voided: %s", exc)
            voided += 1
    return GameResult("semantic-security", adversary.name, trials, wins, voided)


class _SsBase:
    """Shared plumbing: join as a member with ik, pick zeros vs ones."""

    m0 = b"\x00" * 64
    m1 = b"\xff" * 64

    def learn(self, view, oracles, rng):
        self.view, self.oracles, self.rng = view, oracles, rng

    def challenge_request(self):
        self.temp_id = TempId.random(self.rng)
        sk = join(self.view.gpk, self.view.ik, self.rng)
        return self.temp_id, self.m0, self.m1, sk

    def observe(self, sig, temp_id, ct):
        self.ct = ct


class SsRandomGuess(_SsBase):
    name = "random-guess"

    def guess(self):
        return self.rng.randrange(2)


class SsByteStatistics(_SsBase):
    """Guesses 1 when the masked body has more set bits than half."""

    name = "byte-statistics"

    def guess(self):
        ones = sum(bin(v).count("1") for v in self.ct.V)
        return int(ones > 4 * len(self.ct.V))


class WrongKeyDecryptor(_SsBase):
    """Decrypts C* with the key of another TempId and reads the first byte."""

    name = "wrong-key"

    def observe(self, sig, temp_id, ct):
        other = TempId.random(self.rng)
        dk = self.oracles.user_key_gen(other)
        pt = get_content(self.view.params, ct, dk)
        self.first = pt[0]

    def guess(self):
        return int(self.first >= 0x80)


class KeyGrab(_SsBase):
    """Asks for dk of the challenge TempId; only a cheating challenger obliges."""

    name = "key-grab"

    def observe(self, sig, temp_id, ct):
        dk = self.oracles.user_key_gen(temp_id)
        self.pt = get_content(self.view.params, ct, dk)

    def guess(self):
        return int(self.pt == self.m1)


# --------------------------------------------------------------------------
# unforgeability


@dataclass(frozen=True)
class ForgeryView:
    gpk: GroupPublicKey
    params: IbeParams
    msk: IbeMasterKey


class ForgeryOracles:
    def __init__(self, ch: _ForgeryChallenger):
        self._ch = ch

    def send_request(self, i: int, temp_id: TempId) -> GroupSignature:
        return self._ch.send_request(i, temp_id)


class ForgeryAdversary(Protocol):
    name: str

    def forge(
        self, view: ForgeryView, oracles: ForgeryOracles, rng: random.Random
    ) -> tuple[GroupSignature | bytes, TempId]: ...


class _ForgeryChallenger:
    def __init__(self, rng: random.Random):
        self.rng = rng
        self.gpk, self._ik = gm_setup(rng=rng)
        self.params, self.msk = kgc_setup(rng=rng)
        self._sks: dict[int, SigningKey] = {}
        self.S: set[tuple[bytes, TempId]] = set()
        self.sp = Address("198.51.100.1", 443)

    def send_request(self, i: int, temp_id: TempId) -> GroupSignature:
        if i not in self._sks:
            self._sks[i] = join(self.gpk, self._ik, self.rng)
        token, _ = send_request(self.gpk, self._sks[i], self.sp, rng=self.rng, temp_id=temp_id)
        self.S.add((token.sig.to_bytes(), temp_id))
        return token.sig

    def wins(self, sig, temp_id: TempId) -> bool:
        raw = sig.to_bytes() if isinstance(sig, GroupSignature) else bytes(sig)
        if (raw, temp_id) in self.S:
            return False
        return bool(validity_check(self.gpk, raw, temp_id))


def game_unforgeability(
    adversary: ForgeryAdversary, trials: int, rng: random.Random | None = None
) -> GameResult:
    _check_trials(trials)
    rng = rng or random.Random(secrets.randbits(64))
    wins = voided = 0
    for _ in range(trials):
        ch = _ForgeryChallenger(rng)
        try:
            sig, temp_id = adversary.forge(ForgeryView(ch.gpk, ch.params, ch.msk), ForgeryOracles(ch), rng)
            if not isinstance(temp_id, TempId):
                raise ProtocolViolation("forgery TempId must be a TempId")
            wins += ch.wins(sig, temp_id)
        except ProtocolViolation as exc:
            log.info("unforgeability trial voided: %s", exc)
            voided += 1
    return GameResult("unforgeability", adversary.name, trials, wins, voided, kind="forge")


class Replay:
    """Resubmits an oracle signature unchanged."""

    name = "replay"

    def forge(self, view, oracles, rng):
        tid = TempId.random(rng)
        return oracles.send_request(0, tid), tid


class BitFlip:
    """Flips one random bit of an oracle signature."""

    name = "bit-flip"

    def forge(self, view, oracles, rng):
        tid = TempId.random(rng)
        raw = bytearray(oracles.send_request(rng.randrange(2), tid).to_bytes())
        pos = rng.randrange(len(raw) * 8)
        raw[pos // 8] ^= 1 << (pos % 8)
        return bytes(raw), tid


class SimulatedTranscript:
    """Submits a simulator transcript; without the key its c is not H3(T, R, m)."""

    name = "simulated-transcript"

    def forge(self, view, oracles, rng):
        tid = TempId.random(rng)
        return gs_simulate(view.gpk, bytes(tid), rng).signature(), tid


class RandomBytes:
    """No oracle use at all: a uniformly random, well-formed signature."""

    name = "random-signature"

    def forge(self, view, oracles, rng):
        T = G1.random(rng)
        raw = bytes(T) + b"".join(scalar_to_bytes(random_scalar(rng)) for _ in range(4))
        assert len(raw) == G1_BYTES + 4 * SCALAR_BYTES
        return raw, TempId.random(rng)
