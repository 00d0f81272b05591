"""Statistical checks on the simulator and exact checks on the extractor."""

from __future__ import annotations

import random
import secrets
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import chi2_contingency

from ..groupsig import (
    ExtractionError,
    GroupPublicKey,
    Transcript,
    fork_sign,
    gs_extract,
    gs_join,
    gs_setup,
    gs_simulate,
    sign_transcript,
    transcript_accepts,
)
from ..pairing import ORDER, pair, scalar_to_bytes

P_THRESHOLD = 0.01
COMPONENTS = ("T", "c", "s_x", "s_delta", "s_beta")


def component_bytes(t: Transcript, name: str) -> bytes:
    if name == "T":
        # skip the sign/flag byte; the x-coordinate bytes carry the distribution
        return bytes(t.T)[1:]
    return scalar_to_bytes(getattr(t, name))


def byte_histogram(transcripts: list[Transcript], name: str, skip: int = 1) -> np.ndarray:
    """Counts of each byte value over a component, leading ``skip`` bytes dropped.

    Scalars are reduced mod a 254-bit prime and x-coordinates live below a
    254-bit prime, so the top byte is not uniform for either; the remaining
    bytes are.
    """
    counts = np.zeros(256, dtype=np.int64)
    for t in transcripts:
        raw = np.frombuffer(component_bytes(t, name)[skip:], dtype=np.uint8)
        counts += np.bincount(raw, minlength=256)
    return counts


@dataclass
class ZkReport:
    trials: int
    simulated_accepting: int
    real_accepting: int
    p_values: dict[str, float] = field(default_factory=dict)
    T_collisions: int = 0

    @property
    def passed(self) -> bool:
        return (
            self.simulated_accepting == self.trials
            and self.real_accepting == self.trials
            and self.T_collisions == 0
            and all(p >= P_THRESHOLD for p in self.p_values.values())
        )

    def line(self) -> str:
        ps = " ".join(f"p_{k}={v:.4f}" for k, v in self.p_values.items())
        return (
            f"check=zero-knowledge trials={self.trials} simulated_accepting={self.simulated_accepting} "
            f"real_accepting={self.real_accepting} T_collisions={self.T_collisions} {ps} "
            f"passed={int(self.passed)}"
        )


def check_zero_knowledge(trials: int = 10_000, rng: random.Random | None = None) -> ZkReport:
    """Compare simulated transcripts with real ones, component by component.

    Every transcript of both kinds must satisfy the verification equation, no
    two T values may coincide, and a chi-square test on the byte histograms of
    each component must not separate the two populations at p < 0.01.
    """
    rng = rng or random.Random(secrets.randbits(64))
    gpk, ik = gs_setup(rng=rng)
    sk = gs_join(gpk, ik, rng)

    sim, real = [], []
    for i in range(trials):
        msg = i.to_bytes(8, "big")
        sim.append(gs_simulate(gpk, msg, rng))
        real.append(sign_transcript(gpk, sk, msg, rng=rng))

    report = ZkReport(
        trials=trials,
        simulated_accepting=sum(transcript_accepts(gpk, t) for t in sim),
        real_accepting=sum(transcript_accepts(gpk, t) for t in real),
    )
    all_T = [bytes(t.T) for t in sim + real]
    report.T_collisions = len(all_T) - len(set(all_T))
    for name in COMPONENTS:
        table = np.vstack([byte_histogram(real, name), byte_histogram(sim, name)])
        report.p_values[name] = float(chi2_contingency(table)[1])
    return report


def sdh_holds(gpk: GroupPublicKey, x: int, y: int, A) -> bool:
    """e(A, W g2^x) == e(g1 h^-y, g2): A is a certificate on (x, y)."""
    g2 = gpk.ctx.g2
    return pair(A, gpk.W + g2 * x) == pair(gpk.ctx.g1 - gpk.h * y, g2)


@dataclass
class ExtractorReport:
    trials: int
    exact: int
    sdh_valid: int
    equal_challenge_rejected: bool
    tampered_fails_sdh: bool

    @property
    def passed(self) -> bool:
        return (
            self.exact == self.trials
            and self.sdh_valid == self.trials
            and self.equal_challenge_rejected
            and self.tampered_fails_sdh
        )

    def line(self) -> str:
        return (
            f"check=extractor trials={self.trials} exact={self.exact} sdh_valid={self.sdh_valid} "
            f"equal_challenge_rejected={int(self.equal_challenge_rejected)} "
            f"tampered_fails_sdh={int(self.tampered_fails_sdh)} passed={int(self.passed)}"
        )


def check_extractor(trials: int = 100, rng: random.Random | None = None) -> ExtractorReport:
    """Fork the prover ``trials`` times and recover the signing key each time."""
    rng = rng or random.Random(secrets.randbits(64))
    gpk, ik = gs_setup(rng=rng)
    exact = sdh = 0
    for i in range(trials):
        sk = gs_join(gpk, ik, rng)
        t1, t2 = fork_sign(gpk, sk, i.to_bytes(8, "big"), rng)
        w = gs_extract(gpk, t1, t2)
        exact += (w.x_t, w.y_t, w.A_t) == (sk.x, sk.y, sk.A)
        sdh += sdh_holds(gpk, w.x_t, w.y_t, w.A_t)

    sk = gs_join(gpk, ik, rng)
    t1, t2 = fork_sign(gpk, sk, b"edge", rng)
    try:
        gs_extract(gpk, t1, t1)
        equal_rejected = False
    except ExtractionError:
        equal_rejected = True

    bad = Transcript(t2.T, t2.R, t2.c, (t2.s_x + 1) % ORDER, t2.s_delta, t2.s_beta)
    w = gs_extract(gpk, t1, bad, verify_inputs=False)
    tampered = not sdh_holds(gpk, w.x_t, w.y_t, w.A_t)
    return ExtractorReport(trials, exact, sdh, equal_rejected, tampered)
