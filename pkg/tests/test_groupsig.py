import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anonchan.groupsig import (
    SIGNATURE_BYTES,
    ExtractionError,
    GroupPublicKey,
    GroupSignature,
    IssuerKey,
    SigningKey,
    Transcript,
    Verdict,
    challenge,
    fork_sign,
    gs_extract,
    gs_join,
    gs_setup,
    gs_sign,
    gs_signature_size,
    gs_simulate,
    gs_verify,
    sign_transcript,
    SignRandomness,
    transcript_accepts,
)
from anonchan.harness.zk import sdh_holds
from anonchan.pairing import G1, ORDER, DecodeError, pair, random_scalar


def sdh_relation(gpk, x, y, A):
    # e(A, g2^x W) = e(g1, g2) e(h, g2)^-y, written with the precomputed pairings
    return pair(A, gpk.ctx.g2 * x + gpk.W) == gpk.e_g1_g2 * gpk.e_h_g2 ** ((-y) % ORDER)


def test_setup_consistent(group):
    gpk, ik = group
    assert gpk.is_consistent()
    assert ik.matches(gpk)
    assert gpk.ctx.g2 * ik.gamma == gpk.W
    assert not gpk.h.is_identity()
    assert gpk.e_g1_g2 == pair(gpk.ctx.g1, gpk.ctx.g2)
    assert gpk.e_g1_W == pair(gpk.ctx.g1, gpk.W)


def test_two_setups_independent():
    a, _ = gs_setup()
    b, _ = gs_setup()
    assert a.h != b.h and a.W != b.W


def test_gpk_round_trip(group):
    gpk, ik = group
    back = GroupPublicKey.from_bytes(gpk.to_bytes())
    assert back.h == gpk.h and back.W == gpk.W and back.e_h_W == gpk.e_h_W
    assert back.canonical() == gpk.canonical()
    assert IssuerKey.from_bytes(ik.to_bytes()) == ik


def test_join_satisfies_sdh(group, rng):
    gpk, ik = group
    for _ in range(5):
        sk = gs_join(gpk, ik, rng)
        assert sk.satisfies(gpk)
        assert sdh_relation(gpk, sk.x, sk.y, sk.A)
        assert sdh_holds(gpk, sk.x, sk.y, sk.A)


def test_join_distinct_keys(group, rng):
    gpk, ik = group
    a, b = gs_join(gpk, ik, rng), gs_join(gpk, ik, rng)
    assert (a.x, a.y, a.A) != (b.x, b.y, b.A)


def test_join_resamples_zero_denominator(group):
    gpk, ik = group

    class Scripted(random.Random):
        """Returns -gamma for the first x, then behaves normally."""

        def __init__(self):
            super().__init__(4)
            self.first = True

        def randrange(self, *args):
            if self.first:
                self.first = False
                return (-ik.gamma) % ORDER
            return super().randrange(*args)

    sk = gs_join(gpk, ik, Scripted())
    assert (sk.x + ik.gamma) % ORDER != 0
    assert sk.satisfies(gpk)


def test_forged_certificate_fails_sdh(group, member, rng):
    gpk, _ = group
    fake = SigningKey(member.x, member.y, G1.random(rng))
    assert not fake.satisfies(gpk)
    assert not sdh_relation(gpk, fake.x, fake.y, fake.A)


def test_signing_key_round_trip(member):
    assert SigningKey.from_bytes(member.to_bytes()) == member


def test_completeness_many_messages(group, rng):
    gpk, ik = group
    for _ in range(5):
        sk = gs_join(gpk, ik, rng)
        for _ in range(20):
            msg = rng.randbytes(rng.randrange(0, 100))
            assert gs_verify(gpk, gs_sign(gpk, sk, msg, rng), msg) is Verdict.ACCEPT


def test_signature_layout_and_size(group, member):
    gpk, _ = group
    sig = gs_sign(gpk, member, b"m")
    raw = sig.to_bytes()
    assert len(raw) == SIGNATURE_BYTES == 33 + 4 * 32
    assert raw[:33] == bytes(sig.T)
    assert int.from_bytes(raw[33:65], "big") == sig.c
    assert int.from_bytes(raw[129:161], "big") == sig.s_beta
    assert GroupSignature.from_bytes(raw) == sig


def test_signing_is_randomized(group, member):
    gpk, _ = group
    assert gs_sign(gpk, member, b"m").T != gs_sign(gpk, member, b"m").T


def test_sign_equations(group, member, rng):
    gpk, _ = group
    rnd = SignRandomness.fresh(member, rng)
    assert rnd.delta == (rnd.beta * member.x - member.y) % ORDER
    t = sign_transcript(gpk, member, b"msg", randomness=rnd)
    assert t.T == member.A + gpk.h * rnd.beta
    R = gpk.e_h_g2**rnd.r_delta * gpk.e_h_W**rnd.r_beta / pair(t.T, gpk.ctx.g2) ** rnd.r_x
    assert t.R == R
    assert t.c == challenge(gpk, t.T, t.R, b"msg")
    assert t.s_x == (rnd.r_x + t.c * member.x) % ORDER
    assert t.s_delta == (rnd.r_delta + t.c * rnd.delta) % ORDER
    assert t.s_beta == (rnd.r_beta + t.c * rnd.beta) % ORDER


def test_message_bit_flips_reject(group, member, rng):
    gpk, _ = group
    msg = rng.randbytes(16)
    sig = gs_sign(gpk, member, msg)
    for _ in range(100):
        pos = rng.randrange(len(msg) * 8)
        bad = bytearray(msg)
        bad[pos // 8] ^= 1 << (pos % 8)
        assert gs_verify(gpk, sig, bytes(bad)) is Verdict.REJECT_HASH


def test_every_signature_bit_matters(group, member):
    gpk, _ = group
    raw = gs_sign(gpk, member, b"m").to_bytes()
    for pos in range(len(raw) * 8):
        bad = bytearray(raw)
        bad[pos // 8] ^= 1 << (pos % 8)
        assert gs_verify(gpk, bytes(bad), b"m") is not Verdict.ACCEPT, pos


def test_random_T_rejects(group, member, rng):
    gpk, _ = group
    sig = gs_sign(gpk, member, b"m")
    bad = GroupSignature(G1.random(rng), sig.c, sig.s_x, sig.s_delta, sig.s_beta)
    assert gs_verify(gpk, bad, b"m") is Verdict.REJECT_HASH


def test_malformed_signature_is_distinguished(group):
    gpk, _ = group
    assert gs_verify(gpk, b"\x00" * 10, b"m") is Verdict.REJECT_MALFORMED
    assert gs_verify(gpk, b"\x05" + bytes(160), b"m") is Verdict.REJECT_MALFORMED
    assert not Verdict.REJECT_MALFORMED and not Verdict.REJECT_HASH and Verdict.ACCEPT
    with pytest.raises(DecodeError):
        GroupSignature.from_bytes(bytes(33) + ORDER.to_bytes(32, "big") + bytes(96))


def test_verification_needs_only_gpk(group):
    gpk, ik = group
    sk0, sk1 = gs_join(gpk, ik), gs_join(gpk, ik)
    for sk in (sk0, sk1):
        assert gs_verify(gpk, gs_sign(gpk, sk, b"m"), b"m")


def test_simulator_without_any_join():
    gpk, _ = gs_setup()
    seen = set()
    for i in range(1000):
        t = gs_simulate(gpk, str(i).encode())
        if i < 100:
            assert transcript_accepts(gpk, t)
        seen.add(bytes(t.T))
    assert len(seen) == 1000


def test_simulated_signature_is_not_a_valid_signature(group):
    gpk, _ = group
    t = gs_simulate(gpk, b"m")
    assert transcript_accepts(gpk, t)
    assert gs_verify(gpk, t.signature(), b"m") is Verdict.REJECT_HASH


def test_real_transcript_accepts(group, member):
    gpk, _ = group
    assert transcript_accepts(gpk, sign_transcript(gpk, member, b"m"))


def test_extractor_recovers_key(group, rng):
    gpk, ik = group
    for _ in range(20):
        sk = gs_join(gpk, ik, rng)
        t1, t2 = fork_sign(gpk, sk, b"m", rng)
        assert t1.T == t2.T and t1.R == t2.R and t1.c != t2.c
        w = gs_extract(gpk, t1, t2)
        assert (w.x_t, w.y_t, w.A_t) == (sk.x, sk.y, sk.A)
        assert sdh_relation(gpk, w.x_t, w.y_t, w.A_t)
        assert w.as_signing_key() == sk


def test_extractor_errors(group, member, rng):
    gpk, _ = group
    t1, t2 = fork_sign(gpk, member, b"m", rng)
    with pytest.raises(ExtractionError):
        gs_extract(gpk, t1, t1)
    other = sign_transcript(gpk, member, b"m", rng=rng)
    with pytest.raises(ExtractionError):
        gs_extract(gpk, t1, other)
    bad = Transcript(t2.T, t2.R, t2.c, (t2.s_x + 1) % ORDER, t2.s_delta, t2.s_beta)
    with pytest.raises(ExtractionError):
        gs_extract(gpk, t1, bad)
    w = gs_extract(gpk, t1, bad, verify_inputs=False)
    assert not sdh_relation(gpk, w.x_t, w.y_t, w.A_t)


def test_fork_with_fixed_second_challenge(group, member):
    gpk, _ = group
    t1, t2 = fork_sign(gpk, member, b"m", second_challenge=12345)
    assert t2.c == 12345
    assert gs_extract(gpk, t1, t2).x_t == member.x


def test_signature_size_report(group):
    gpk, _ = group
    rep = gs_signature_size(gpk)
    assert rep.ours == 161
    assert rep.original == 161 + 3 * 33 + 3 * 32 == 356
    assert rep.ratio == pytest.approx(161 / 356)
    assert 0.40 <= rep.ratio <= 0.55


@settings(max_examples=25, deadline=None)
@given(st.binary(max_size=200))
def test_completeness_property(group, member, msg):
    gpk, _ = group
    assert gs_verify(gpk, gs_sign(gpk, member, msg), msg)


@settings(max_examples=25, deadline=None)
@given(st.binary(min_size=1, max_size=32), st.binary(min_size=1, max_size=32))
def test_signature_binds_message(group, member, m1, m2):
    gpk, _ = group
    sig = gs_sign(gpk, member, m1)
    assert bool(gs_verify(gpk, sig, m2)) == (m1 == m2)
