import dataclasses
import random

import pytest

from anonchan.harness import bench, games, zk
from anonchan.harness.games import (
    AnonymityView,
    ForgeryView,
    GameResult,
    SemanticView,
    three_sigma,
)
from anonchan.protocol import TempId


def test_three_sigma():
    assert three_sigma(1000) == pytest.approx(3 * 0.5 / 1000**0.5)


def test_game_result_arithmetic():
    r = GameResult("g", "a", trials=100, wins=60, voided=0)
    assert r.advantage == pytest.approx(0.1)
    assert r.indistinguishable is (0.1 <= three_sigma(100))
    f = GameResult("uf", "a", trials=100, wins=0, kind="forge")
    assert f.advantage == 0 and f.indistinguishable
    assert "game=uf" in f.line()


def test_minimum_trials_enforced():
    with pytest.raises(ValueError):
        games.game_anonymity(games.RandomGuess(), 10)


def test_views_expose_exactly_the_allowed_keys():
    fields = lambda cls: {f.name for f in dataclasses.fields(cls)}
    assert fields(AnonymityView) == {"gpk", "sk_0", "sk_1", "params", "msk", "sp"}
    assert fields(SemanticView) == {"gpk", "ik", "params"}
    assert fields(ForgeryView) == {"gpk", "params", "msk"}


class Snoop:
    """Records what an anonymity adversary can reach."""

    name = "snoop"

    def learn(self, view, oracles, rng):
        self.rng = rng
        tid = TempId.random(rng)
        sig = oracles.send_request(0, tid)
        self.fwd = oracles.relay_request(sig, tid)
        self.oracles = oracles

    def choose(self):
        return TempId.random(self.rng)

    def respond(self, fwd):
        return None

    def guess(self):
        return 0


def test_anonymity_oracles_hide_source():
    adv = Snoop()
    games.game_anonymity(adv, 100, random.Random(1))
    assert not hasattr(adv.oracles, "srcs")
    assert adv.fwd.reply_to.host == "192.0.2.1"


class BadGuesser(Snoop):
    name = "bad"

    def learn(self, view, oracles, rng):
        self.rng = rng

    def guess(self):
        return 7


def test_protocol_violations_void_trials():
    r = games.game_anonymity(BadGuesser(), 100, random.Random(2))
    assert r.voided == 100 and r.advantage == 0


def test_anonymity_baselines_small():
    rng = random.Random(3)
    for adv in (games.RandomGuess(), games.ByteStatistics(4), games.ReplyToPort()):
        assert games.game_anonymity(adv, 150, rng).indistinguishable
    assert games.game_anonymity(games.ReplyToPort(), 100, rng, leak=True).advantage > 0.45


def test_semantic_security_baselines_small():
    rng = random.Random(4)
    for adv in (games.SsRandomGuess(), games.SsByteStatistics(), games.WrongKeyDecryptor()):
        assert games.game_semantic_security(adv, 150, rng).indistinguishable
    honest = games.game_semantic_security(games.KeyGrab(), 100, rng)
    assert honest.voided == 100
    cheat = games.game_semantic_security(games.KeyGrab(), 100, rng, hand_over_key=True)
    assert cheat.advantage > 0.45


class PreQueryTarget(games.SsRandomGuess):
    name = "pre-query"

    def challenge_request(self):
        tid, m0, m1, sk = super().challenge_request()
        self.oracles.user_key_gen(tid)
        return tid, m0, m1, sk


class UnequalMessages(games.SsRandomGuess):
    name = "unequal"

    def challenge_request(self):
        tid, m0, m1, sk = super().challenge_request()
        return tid, m0, m1 + b"x", sk


def test_semantic_security_rules_enforced():
    rng = random.Random(5)
    assert games.game_semantic_security(PreQueryTarget(), 100, rng).voided == 100
    assert games.game_semantic_security(UnequalMessages(), 100, rng).voided == 100


def test_unforgeability_small():
    rng = random.Random(6)
    for adv in (games.Replay(), games.BitFlip(), games.SimulatedTranscript(), games.RandomBytes()):
        r = games.game_unforgeability(adv, 100, rng)
        assert r.wins == 0 and r.voided == 0


class MovedSignature:
    """Reuses an oracle signature for a different TempId."""

    name = "moved-signature"

    def forge(self, view, oracles, rng):
        tid = TempId.random(rng)
        sig = oracles.send_request(0, tid)
        return sig, TempId.random(rng)


def test_unforgeability_rejects_signature_moved_to_new_temp_id():
    r = games.game_unforgeability(MovedSignature(), 100, random.Random(7))
    assert r.wins == 0


def test_zk_and_extractor_small():
    rep = zk.check_zero_knowledge(500, random.Random(8))
    assert rep.simulated_accepting == rep.real_accepting == 500
    assert rep.T_collisions == 0
    assert set(rep.p_values) == set(zk.COMPONENTS)
    ext = zk.check_extractor(10, random.Random(9))
    assert ext.passed, ext.line()


def test_chi_square_detects_a_biased_component():
    # sanity check of the statistic itself: a component pinned low is flagged
    from anonchan.groupsig import Transcript, gs_setup, gs_simulate
    import numpy as np
    from scipy.stats import chi2_contingency

    gpk, _ = gs_setup()
    rng = random.Random(10)
    good = [gs_simulate(gpk, rng=rng) for _ in range(300)]
    bad = [Transcript(t.T, t.R, t.c % (1 << 64), t.s_x, t.s_delta, t.s_beta) for t in good]
    table = np.vstack([zk.byte_histogram(good, "c"), zk.byte_histogram(bad, "c")])
    assert chi2_contingency(table)[1] < 0.01


def test_bench_reports():
    algos = bench.bench_algorithms(3)
    assert list(algos.rows) == list(bench.ALGORITHMS)
    assert len(algos.lines()) == 8
    assert "GM.Setup" in algos.table()
    sess = bench.bench_session(3)
    assert "Session" in sess.rows
    assert bench.consistency(algos, sess)
