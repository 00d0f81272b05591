"""Timing of the ten protocol algorithms and of complete networked sessions.

The report has the shape of a two-table benchmark: per-algorithm running
times and the running time of one session.  Absolute numbers depend on the
machine and mean nothing across hosts; only relations between rows
(offline signing is faster online, a session costs at least its algorithms)
are checked.
"""

from __future__ import annotations

import os
import platform
import random
import secrets
import statistics
import time
from dataclasses import dataclass, field

from ..net.client import precompute_request
from ..net.deploy import LocalDeployment
from ..protocol import (
    Address,
    IdIpTable,
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

ALGORITHMS = (
    "GM.Setup",
    "KGC.Setup",
    "Join",
    "UserKeyGen",
    "SendRequest",
    "ValidityCheck",
    "SendContent",
    "GetContent",
)
# the algorithms a user waits on during one session, in order
ONLINE = ("SendRequest", "ValidityCheck", "SendContent", "GetContent")


@dataclass
class Row:
    name: str
    samples: list[float] = field(default_factory=list)

    @property
    def mean(self) -> float:
        return statistics.fmean(self.samples)

    @property
    def min(self) -> float:
        return min(self.samples)

    @property
    def max(self) -> float:
        return max(self.samples)


def environment() -> str:
    return f"{platform.python_implementation()} {platform.python_version()} {platform.machine()} cpus={os.cpu_count()}"


@dataclass
class BenchReport:
    title: str
    iterations: int
    rows: dict[str, Row] = field(default_factory=dict)
    env: str = field(default_factory=environment)

    def add(self, name: str, seconds: float) -> None:
        self.rows.setdefault(name, Row(name)).samples.append(seconds)

    def table(self) -> str:
        out = [f"{self.title} ({self.iterations} iterations; {self.env})"]
        out.append(f"{'':<24}{'mean ms':>10}{'min ms':>10}{'max ms':>10}")
        for r in self.rows.values():
            out.append(f"{r.name:<24}{r.mean * 1e3:>10.3f}{r.min * 1e3:>10.3f}{r.max * 1e3:>10.3f}")
        return "\n".join(out)

    def lines(self) -> list[str]:
        """Machine-readable form: one ``bench`` line per row."""
        return [
            f"bench name={r.name} n={len(r.samples)} mean_ms={r.mean * 1e3:.4f} "
            f"min_ms={r.min * 1e3:.4f} max_ms={r.max * 1e3:.4f}"
            for r in self.rows.values()
        ]


def _timed(report: BenchReport, name: str, fn, *args, **kw):
    t = time.perf_counter()
    out = fn(*args, **kw)
    report.add(name, time.perf_counter() - t)
    return out


def bench_algorithms(iterations: int = 30, payload_len: int = 1024, rng: random.Random | None = None) -> BenchReport:
    """Time each algorithm once per iteration over a fresh in-process run.

    The proxy's two relay steps are table operations with no cryptography and
    are run but not reported.
    """
    if iterations < 1:
        raise ValueError("iterations must be positive")
    rng = rng or random.Random(secrets.randbits(64))
    report = BenchReport("algorithms", iterations)
    src, proxy, sp = Address("10.0.0.2", 40000), Address("10.0.0.1", 9000), Address("10.0.0.3", 443)
    payload = rng.randbytes(payload_len)
    for _ in range(iterations):
        gpk, ik = _timed(report, "GM.Setup", gm_setup)
        params, msk = _timed(report, "KGC.Setup", kgc_setup)
        sk = _timed(report, "Join", join, gpk, ik)
        temp_id = TempId.random()
        dk = _timed(report, "UserKeyGen", user_key_gen, params, msk, temp_id)
        token, _ = _timed(report, "SendRequest", send_request, gpk, sk, sp, temp_id=temp_id)
        tbl = IdIpTable()
        fwd = relay_request(tbl, token, src, proxy)
        if not _timed(report, "ValidityCheck", validity_check, gpk, fwd.sig, fwd.temp_id):
            raise RuntimeError("honest signature rejected")
        cm = _timed(report, "SendContent", send_content, gpk, params, fwd, payload)
        delivery = relay_content(tbl, cm)
        if _timed(report, "GetContent", get_content, params, delivery.ct, dk) != payload:
            raise RuntimeError("decryption mismatch")
    report.rows = {k: report.rows[k] for k in ALGORITHMS}
    return report


def bench_session(
    iterations: int = 30,
    offline_sign: bool = False,
    payload_len: int = 1024,
    hops: int = 1,
    deployment=None,
) -> BenchReport:
    """Time complete sessions over loopback TCP.

    With ``offline_sign`` the TempId and signature are produced before the
    clock starts, so only the network round trip, key wait and decryption
    count as online time.
    """
    if iterations < 1:
        raise ValueError("iterations must be positive")
    mode = "offline-sign" if offline_sign else "online"
    report = BenchReport(f"session ({mode})", iterations)
    own = deployment is None
    dep = deployment or LocalDeployment(payload=os.urandom(payload_len), hops=hops).__enter__()
    try:
        user = dep.new_user()
        dep.session(user)  # warm up connections and code paths
        for _ in range(iterations):
            pre = None
            if offline_sign:
                pre = precompute_request(user)
            t = time.perf_counter()
            res = dep.session(user, offline=pre)
            report.add("Session", time.perf_counter() - t)
            for k, v in res.timings.items():
                report.add(f"  {k}", v)
    finally:
        if own:
            dep.__exit__(None, None, None)
    return report


def consistency(algorithms: BenchReport, session: BenchReport, slack: float = 0.8) -> bool:
    """A full online session cannot be much cheaper than its own algorithms."""
    floor = sum(algorithms.rows[n].mean for n in ONLINE)
    return session.rows["Session"].mean >= slack * floor
