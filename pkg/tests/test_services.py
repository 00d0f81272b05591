import asyncio
import socket

import pytest

from anonchan.groupsig import SigningKey, gs_simulate
from anonchan.net import LocalDeployment
from anonchan.net.client import (
    ServiceError,
    precompute_request,
    SessionRefused,
    UserConfig,
    _exchange,
    request_decryption_key,
    request_join,
    user_session,
)
from anonchan.net.services import GmService, KgcService, ProxyService, SpService
from anonchan.net.wire import (
    AuthForward,
    AuthRequest,
    Content,
    Error,
    ErrorCode,
    ExtractRequest,
    Refuse,
    decode_frame,
    read_frame,
)
from anonchan.protocol import (
    Address,
    ForwardedRequest,
    RefusalReason,
    RequestToken,
    TempId,
    gm_setup,
    join,
    kgc_setup,
    send_request,
)


@pytest.fixture(scope="module")
def dep():
    with LocalDeployment(payload=b"the content") as d:
        yield d


def test_honest_session(dep):
    res = dep.session(dep.new_user())
    assert res.content == b"the content"
    assert set(res.timings) >= {"send_request", "round_trip", "get_content", "total"}
    assert all(len(t) == 0 for t in dep.tables)


def test_fifty_concurrent_sessions_drain_table(dep):
    users = [dep.new_user() for _ in range(50)]
    results = dep.sessions(users)
    assert all(not isinstance(r, BaseException) and r.content == b"the content" for r in results)
    assert len({r.temp_id for r in results}) == 50
    assert all(len(t) == 0 for t in dep.tables)


def test_corrupted_key_is_refused(dep):
    user = dep.new_user()
    user.sk = SigningKey((user.sk.x + 1) % dep.gpk.ctx.p, user.sk.y, user.sk.A)
    with pytest.raises(SessionRefused) as exc:
        dep.session(user)
    assert exc.value.reason is RefusalReason.BAD_SIGNATURE
    assert all(len(t) == 0 for t in dep.tables)


def test_sp_refuses_invalid_signature_directly(dep):
    tid = TempId.random()
    sig = gs_simulate(dep.gpk, bytes(tid)).signature()
    fwd = ForwardedRequest(sig, tid, Address("127.0.0.1", 9))
    reply = dep.run(_exchange(dep.sp.address, AuthForward(fwd)))
    assert reply == Refuse(RefusalReason.BAD_SIGNATURE)


def test_sp_refuses_malformed_token(dep):
    async def go():
        r, w = await asyncio.open_connection(dep.sp.address.host, dep.sp.address.port)
        body = b"\x07" * 161 + bytes(16) + Address("127.0.0.1", 9).to_bytes()
        w.write(b"ANC1\x01\x06" + len(body).to_bytes(4, "big") + body)
        await w.drain()
        reply = await read_frame(r)
        w.close()
        return reply

    assert dep.run(go()) == Refuse(RefusalReason.MALFORMED_TOKEN)


@pytest.mark.parametrize("garbage", [b"XXXX\x01\x01\x00\x00\x00\x00", b"ANC1\x01\x7f\x00\x00\x00\x00", b"ANC1\x01\x05\x00\x00\x00\x03abc"])
def test_services_survive_malformed_input(dep, garbage):
    async def poke(addr):
        r, w = await asyncio.open_connection(addr.host, addr.port)
        w.write(garbage)
        await w.drain()
        try:
            return await asyncio.wait_for(read_frame(r), 5)
        finally:
            w.close()

    for svc in (dep.gm, dep.kgc, dep.sp, dep.proxies[0]):
        reply = dep.run(poke(svc.address))
        assert isinstance(reply, (Error, Refuse))
    assert dep.session(dep.new_user()).content == b"the content"


def test_wrong_message_type_gets_error(dep):
    reply = dep.run(_exchange(dep.gm.address, ExtractRequest(TempId.random())))
    assert isinstance(reply, Error) and reply.code == ErrorCode.UNEXPECTED


def test_duplicate_temp_id_refused_by_policy(dep):
    user = dep.new_user()
    pre = send_request(dep.gpk, user.sk, user.sp)
    dep.proxies[0].table.add(pre[1], Address("10.0.0.1", 1))
    try:
        with pytest.raises(SessionRefused) as exc:
            dep.session(user, offline=pre)
        assert exc.value.reason is RefusalReason.POLICY
    finally:
        dep.proxies[0].table.discard(pre[1])


def test_offline_precomputed_request(dep):
    user = dep.new_user()
    pre = precompute_request(user)
    res = dep.session(user, offline=pre)
    assert res.temp_id == pre[1] and res.content == b"the content"


def test_kgc_unreachable_until_after_content(dep):
    s = socket.socket()
    s.bind(("127.0.0.1", 0))
    port = s.getsockname()[1]
    s.close()
    user = dep.new_user()
    user.kgc = Address("127.0.0.1", port)

    async def go():
        late = KgcService(dep.params, dep.msk, host="127.0.0.1", port=port)
        loop = asyncio.get_running_loop()
        loop.call_later(0.5, lambda: asyncio.ensure_future(late.start()))
        try:
            return await user_session(user)
        finally:
            await late.close()

    res = dep.run(go())
    assert res.content == b"the content"
    assert res.timings["key_wait"] > 0.2


def test_enrollment_secret():
    gpk, ik = gm_setup()
    params, msk = kgc_setup()

    async def go():
        gm = await GmService(gpk, ik, enroll_secret=b"s3cret").start()
        kgc = await KgcService(params, msk, enroll_secret=b"s3cret").start()
        try:
            with pytest.raises(ServiceError) as e1:
                await request_join(gm.address, b"wrong")
            assert e1.value.code == ErrorCode.UNAUTHORIZED
            sk = await request_join(gm.address, b"s3cret")
            assert sk.satisfies(gpk)
            with pytest.raises(ServiceError):
                await request_decryption_key(kgc.address, TempId.random(), b"")
            dk = await request_decryption_key(kgc.address, TempId.random(), b"s3cret")
            assert dk.is_valid(params)
        finally:
            await gm.close()
            await kgc.close()

    asyncio.run(go())


class Tap:
    """Transparent TCP relay that records every byte in both directions."""

    def __init__(self, target: Address):
        self.target = target
        self.seen = bytearray()

    async def start(self):
        self.server = await asyncio.start_server(self._handle, "127.0.0.1", 0)
        host, port = self.server.sockets[0].getsockname()[:2]
        self.address = Address(host, port)
        return self

    async def _pipe(self, r, w):
        while data := await r.read(65536):
            self.seen += data
            w.write(data)
            await w.drain()
        w.close()

    async def _handle(self, r, w):
        ur, uw = await asyncio.open_connection(self.target.host, self.target.port)
        await asyncio.gather(self._pipe(r, uw), self._pipe(ur, w), return_exceptions=True)

    async def close(self):
        self.server.close()


def test_secret_keys_never_cross_the_wire(dep):
    async def go():
        gm_tap = await Tap(dep.gm.address).start()
        kgc_tap = await Tap(dep.kgc.address).start()
        proxy_tap = await Tap(dep.entry).start()
        sp_tap = await Tap(dep.sp.address).start()
        try:
            sk = await request_join(gm_tap.address)
            cfg = UserConfig(dep.gpk, dep.params, sk, proxy_tap.address, sp_tap.address, kgc_tap.address)
            # the token names the SP tap, so the proxy-to-SP leg is recorded as well
            res = await user_session(cfg)
            assert res.content == b"the content"
        finally:
            for t in (gm_tap, kgc_tap, proxy_tap, sp_tap):
                await t.close()
        return gm_tap, kgc_tap, proxy_tap, sp_tap

    taps = dep.run(go())
    everything = b"".join(bytes(t.seen) for t in taps)
    assert dep.ik.to_bytes() not in everything
    assert dep.msk.to_bytes() not in everything
    assert len(taps[3].seen) > 0  # SP traffic really went through its tap


def test_upstream_timeout_reports_error_and_clears_table():
    gpk, ik = gm_setup()
    params, _ = kgc_setup()
    sk = join(gpk, ik)

    async def go():
        async def mute(reader, writer):
            await asyncio.sleep(5)

        sp = await asyncio.start_server(mute, "127.0.0.1", 0)
        sp_addr = Address(*sp.sockets[0].getsockname()[:2])
        proxy = await ProxyService(ttl=0.3).start()
        try:
            token, _ = send_request(gpk, sk, sp_addr)
            reply = await _exchange(proxy.address, AuthRequest(token))
            return reply, len(proxy.table)
        finally:
            await proxy.close()
            sp.close()

    reply, remaining = asyncio.run(go())
    assert isinstance(reply, Error) and reply.code == ErrorCode.UPSTREAM_FAILURE
    assert remaining == 0


def test_sp_unreachable_reports_upstream_failure(dep):
    user = dep.new_user()
    user.sp = Address("127.0.0.1", 1)
    with pytest.raises(ServiceError) as exc:
        dep.session(user)
    assert exc.value.code == ErrorCode.UPSTREAM_FAILURE
    assert all(len(t) == 0 for t in dep.tables)


def test_three_hop_chain_and_sp_blindness():
    with LocalDeployment(payload=lambda tid: b"for " + bytes(tid), hops=3) as d:
        user = d.new_user(bind_host="127.0.0.2")
        for _ in range(5):
            res = d.session(user)
            assert res.content == b"for " + bytes(res.temp_id)
        assert all(len(t) == 0 for t in d.tables)
        src_ip = bytes([127, 0, 0, 2])
        assert d.sp_frames and all(src_ip not in f for f in d.sp_frames)
        # the SP only ever sees forwarded requests that name the last proxy
        last = d.proxies[-1].address
        for f in d.sp_frames:
            msg = decode_frame(f)
            assert isinstance(msg, AuthForward) and msg.request.reply_to == last


def test_proxy_restart_loses_only_in_flight_state():
    with LocalDeployment(payload=b"p") as d:
        user = d.new_user()
        assert d.session(user).content == b"p"

        async def restart():
            old = d.proxies[0]
            await old.close()
            new = await ProxyService(ttl=30.0, host="127.0.0.1").start()
            d.proxies[0] = new
            return new

        new = d.run(restart())
        user.proxy = new.address
        assert len(new.table) == 0
        assert d.session(user).content == b"p"
        assert len(new.table) == 0
