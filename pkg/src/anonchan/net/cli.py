"""``anonchan`` command line: run one role per process, or the harness.

    anonchan setup --out keys/
    anonchan gm    --listen 127.0.0.1:7001 --keyfile keys/gm.key
    anonchan kgc   --listen 127.0.0.1:7002 --keyfile keys/kgc.key
    anonchan sp    --listen 127.0.0.1:7003 --keyfile keys/public.key --payload page.html
    anonchan proxy --listen 127.0.0.1:7000 [--hops 127.0.0.1:7010] [--ttl 30]
    anonchan user  --keyfile keys/public.key --gm ... --kgc ... --proxy ... --sp ...
    anonchan harness --game anon|ss|uf|zk|extract --trials N
    anonchan bench --iterations N [--offline-sign]

``ANONCHAN_LOG`` sets the log level (default WARNING).
"""

from __future__ import annotations

import argparse
import asyncio
import logging
import os
import sys
import time
from pathlib import Path

from ..protocol import DEFAULT_TTL, Address, gm_setup, kgc_setup
from .client import SessionError, UserConfig, precompute_request, request_join, user_session
from .keyfile import Kind, read_keyfile, write_keyfile
from .services import GmService, KgcService, ProxyService, SpService

log = logging.getLogger("anonchan")


def _addr(text: str) -> Address:
    try:
        return Address.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _keys(path, *kinds: Kind) -> dict:
    keys = read_keyfile(path)
    missing = [k.name for k in kinds if k not in keys]
    if missing:
        raise SystemExit(f"{path}: missing {', '.join(missing)} record(s)")
    return keys


def _secret(args) -> bytes | None:
    value = args.secret or os.environ.get("ANONCHAN_ENROLL_SECRET")
    return value.encode() if value else None


async def _serve(svc) -> None:
    await svc.start()
    print(f"{svc.name} listening on {svc.address.host}:{svc.address.port}", flush=True)
    await svc.serve_forever()


def cmd_setup(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    gpk, ik = gm_setup()
    params, msk = kgc_setup()
    write_keyfile(out / "gm.key", gpk, ik)
    write_keyfile(out / "kgc.key", params, msk)
    write_keyfile(out / "public.key", gpk, params)
    for name in ("gm.key", "kgc.key"):
        os.chmod(out / name, 0o600)
    print(f"wrote {out / 'gm.key'}, {out / 'kgc.key'}, {out / 'public.key'}")
    return 0


def cmd_gm(args) -> int:
    keys = _keys(args.keyfile, Kind.GPK, Kind.IK)
    svc = GmService(keys[Kind.GPK], keys[Kind.IK], _secret(args), host=args.listen.host, port=args.listen.port)
    asyncio.run(_serve(svc))
    return 0


def cmd_kgc(args) -> int:
    keys = _keys(args.keyfile, Kind.PARAMS, Kind.MSK)
    svc = KgcService(keys[Kind.PARAMS], keys[Kind.MSK], _secret(args), host=args.listen.host, port=args.listen.port)
    asyncio.run(_serve(svc))
    return 0


def cmd_sp(args) -> int:
    keys = _keys(args.keyfile, Kind.GPK, Kind.PARAMS)
    payload = Path(args.payload).read_bytes() if args.payload else b"hello from the service provider\n"
    svc = SpService(keys[Kind.GPK], keys[Kind.PARAMS], payload, host=args.listen.host, port=args.listen.port)
    asyncio.run(_serve(svc))
    return 0


def cmd_proxy(args) -> int:
    hops = [_addr(h) for h in args.hops.split(",") if h] if args.hops else []
    if len(hops) > 1:
        # each proxy only knows its successor; chain them by starting one per hop
        raise SystemExit("--hops takes the next proxy only; start one proxy per hop")
    svc = ProxyService(
        ttl=args.ttl,
        next_hop=hops[0] if hops else None,
        advertise=args.advertise,
        host=args.listen.host,
        port=args.listen.port,
    )
    asyncio.run(_serve(svc))
    return 0


async def _user(args) -> int:
    keys = _keys(args.keyfile, Kind.GPK, Kind.PARAMS)
    sk = keys.get(Kind.SK)
    if sk is None:
        if args.gm is None:
            raise SystemExit("no SK record in the key file and no --gm to join with")
        token = _secret(args) or b""
        sk = await request_join(args.gm, token)
        if args.save_key:
            write_keyfile(args.save_key, keys[Kind.GPK], keys[Kind.PARAMS], sk)
            os.chmod(args.save_key, 0o600)
    cfg = UserConfig(
        gpk=keys[Kind.GPK],
        params=keys[Kind.PARAMS],
        sk=sk,
        proxy=args.proxy,
        sp=args.sp,
        kgc=args.kgc,
        timeout=args.timeout,
        kgc_token=_secret(args) or b"",
    )
    if not args.bench:
        res = await user_session(cfg)
        if args.out:
            Path(args.out).write_bytes(res.content)
        else:
            sys.stdout.buffer.write(res.content)
            sys.stdout.flush()
        log.info("timings %s", res.timings)
        return 0
    totals = []
    for _ in range(args.bench):
        pre = precompute_request(cfg) if args.offline_sign else None
        t = time.perf_counter()
        await user_session(cfg, pre)
        totals.append(time.perf_counter() - t)
    mean = sum(totals) / len(totals)
    print(f"bench name=Session n={len(totals)} mean_ms={mean * 1e3:.4f} "
          f"min_ms={min(totals) * 1e3:.4f} max_ms={max(totals) * 1e3:.4f}")
    return 0


def cmd_user(args) -> int:
    try:
        return asyncio.run(_user(args))
    except SessionError as exc:
        print(f"session failed: {exc}", file=sys.stderr)
        return 1


def cmd_harness(args) -> int:
    import random

    from ..harness import games, zk

    rng = random.Random(args.seed) if args.seed is not None else None
    if args.game == "anon":
        results = [
            games.game_anonymity(games.RandomGuess(), args.trials, rng),
            games.game_anonymity(games.ByteStatistics(), args.trials, rng),
            games.game_anonymity(games.ReplyToPort(), args.trials, rng, leak=True),
        ]
    elif args.game == "ss":
        results = [
            games.game_semantic_security(games.SsRandomGuess(), args.trials, rng),
            games.game_semantic_security(games.SsByteStatistics(), args.trials, rng),
            games.game_semantic_security(games.WrongKeyDecryptor(), args.trials, rng),
            games.game_semantic_security(games.KeyGrab(), args.trials, rng, hand_over_key=True),
        ]
    elif args.game == "uf":
        results = [
            games.game_unforgeability(adv(), args.trials, rng)
            for adv in (games.Replay, games.BitFlip, games.SimulatedTranscript, games.RandomBytes)
        ]
    elif args.game == "zk":
        rep = zk.check_zero_knowledge(args.trials, rng)
        print(rep.line())
        return 0 if rep.passed else 1
    else:
        rep = zk.check_extractor(args.trials, rng)
        print(rep.line())
        return 0 if rep.passed else 1
    print(f"{'game':<20}{'adversary':<24}{'trials':>8}{'voided':>8}{'advantage':>11}{'3 sigma':>9}")
    for r in results:
        print(f"{r.game:<20}{r.adversary:<24}{r.trials:>8}{r.voided:>8}{r.advantage:>11.4f}{r.threshold:>9.4f}")
    for r in results:
        print(r.line())
    return 0


def cmd_bench(args) -> int:
    from ..harness import bench

    algos = bench.bench_algorithms(args.iterations)
    online = bench.bench_session(args.iterations, offline_sign=False, hops=args.hops)
    reports = [algos, online]
    if args.offline_sign:
        reports.append(bench.bench_session(args.iterations, offline_sign=True, hops=args.hops))
    for rep in reports:
        print(rep.table())
        print()
    for rep in reports:
        for line in rep.lines():
            print(f"{line} report={rep.title.replace(' ', '_')}")
    print(f"bench check=consistency ok={int(bench.consistency(algos, online))}")
    if args.offline_sign:
        faster = reports[2].rows["Session"].mean < online.rows["Session"].mean
        print(f"bench check=offline_faster ok={int(faster)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="anonchan", description="anonymous authenticated channel roles and tools")
    sub = p.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("setup", help="generate GM and KGC key files")
    s.add_argument("--out", default=".")
    s.set_defaults(fn=cmd_setup)

    for name, fn, default_port in (("gm", cmd_gm, 7001), ("kgc", cmd_kgc, 7002)):
        s = sub.add_parser(name, help=f"run the {name.upper()} service")
        s.add_argument("--listen", type=_addr, default=Address("127.0.0.1", default_port))
        s.add_argument("--keyfile", required=True)
        s.add_argument("--secret", help="pre-shared enrollment secret (or ANONCHAN_ENROLL_SECRET)")
        s.set_defaults(fn=fn)

    s = sub.add_parser("sp", help="run the service provider")
    s.add_argument("--listen", type=_addr, default=Address("127.0.0.1", 7003))
    s.add_argument("--keyfile", required=True)
    s.add_argument("--payload", help="file whose bytes are served to every user")
    s.set_defaults(fn=cmd_sp)

    s = sub.add_parser("proxy", help="run a relaying proxy")
    s.add_argument("--listen", type=_addr, default=Address("127.0.0.1", 7000))
    s.add_argument("--ttl", type=float, default=DEFAULT_TTL)
    s.add_argument("--hops", help="address of the next proxy in a chain")
    s.add_argument("--advertise", type=_addr, help="reply_to address sent to the SP")
    s.set_defaults(fn=cmd_proxy)

    s = sub.add_parser("user", help="run one session (or --bench N sessions)")
    s.add_argument("--keyfile", required=True)
    s.add_argument("--gm", type=_addr)
    s.add_argument("--kgc", type=_addr, required=True)
    s.add_argument("--proxy", type=_addr, required=True)
    s.add_argument("--sp", type=_addr, required=True)
    s.add_argument("--secret")
    s.add_argument("--save-key", help="write the joined signing key here")
    s.add_argument("--out", help="write content here instead of stdout")
    s.add_argument("--timeout", type=float, default=30.0)
    s.add_argument("--bench", type=int, default=0, metavar="N")
    s.add_argument("--offline-sign", action="store_true")
    s.set_defaults(fn=cmd_user)

    s = sub.add_parser("harness", help="play the security games or run the simulator/extractor checks")
    s.add_argument("--game", choices=["anon", "ss", "uf", "zk", "extract"], required=True)
    s.add_argument("--trials", type=int, default=1000)
    s.add_argument("--seed", type=int)
    s.set_defaults(fn=cmd_harness)

    s = sub.add_parser("bench", help="benchmark the algorithms and full sessions")
    s.add_argument("--iterations", type=int, default=30)
    s.add_argument("--offline-sign", action="store_true")
    s.add_argument("--hops", type=int, default=1)
    s.set_defaults(fn=cmd_bench)
    return p


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=os.environ.get("ANONCHAN_LOG", "WARNING").upper(),
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    sys.exit(main())
