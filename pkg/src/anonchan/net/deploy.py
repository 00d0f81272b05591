"""All five roles on one host, driven from synchronous code.

The services share one event loop running in a background thread; callers
submit coroutines with :meth:`LocalDeployment.run`.  Used by the tests, the
benchmark and the demo scripts.
"""

from __future__ import annotations

import asyncio
import threading
from random import Random

from ..protocol import Address, IdIpTable, gm_setup, kgc_setup
from .client import SessionResult, UserConfig, request_join, user_session
from .services import GmService, KgcService, ProxyService, SpService, Payload


class LocalDeployment:
    def __init__(
        self,
        payload: Payload = b"hello from the service provider",
        hops: int = 1,
        ttl: float = 30.0,
        host: str = "127.0.0.1",
        capture_sp_frames: bool = True,
        rng: Random | None = None,
    ):
        if hops < 1:
            raise ValueError("need at least one proxy")
        self.payload = payload
        self.hops = hops
        self.ttl = ttl
        self.host = host
        self.rng = rng
        self.sp_frames: list[bytes] | None = [] if capture_sp_frames else None
        self.gpk, self.ik = gm_setup(rng=rng)
        self.params, self.msk = kgc_setup(rng=rng)
        self.proxies: list[ProxyService] = []
        self._loop = asyncio.new_event_loop()
        self._thread = threading.Thread(target=self._loop.run_forever, daemon=True)

    def run(self, coro, timeout: float | None = 120.0):
        return asyncio.run_coroutine_threadsafe(coro, self._loop).result(timeout)

    async def _start(self) -> None:
        self.gm = await GmService(self.gpk, self.ik, host=self.host).start()
        self.kgc = await KgcService(self.params, self.msk, host=self.host).start()
        self.sp = await SpService(
            self.gpk, self.params, self.payload, self.sp_frames, host=self.host
        ).start()
        next_hop = None
        for _ in range(self.hops):
            proxy = await ProxyService(ttl=self.ttl, next_hop=next_hop, host=self.host).start()
            self.proxies.insert(0, proxy)
            next_hop = proxy.address

    async def _stop(self) -> None:
        for svc in [self.gm, self.kgc, self.sp, *self.proxies]:
            await svc.close()

    def __enter__(self) -> LocalDeployment:
        self._thread.start()
        self.run(self._start())
        return self

    def __exit__(self, *exc) -> None:
        try:
            self.run(self._stop())
        finally:
            self._loop.call_soon_threadsafe(self._loop.stop)
            self._thread.join(5)
            self._loop.close()

    @property
    def entry(self) -> Address:
        return self.proxies[0].address

    @property
    def tables(self) -> list[IdIpTable]:
        return [p.table for p in self.proxies]

    def new_user(self, bind_host: str | None = "127.0.0.2", timeout: float = 30.0) -> UserConfig:
        """Enroll a user with the GM service (User-GM sequence)."""
        sk = self.run(request_join(self.gm.address))
        return UserConfig(
            gpk=self.gpk,
            params=self.params,
            sk=sk,
            proxy=self.entry,
            sp=self.sp.address,
            kgc=self.kgc.address,
            bind_host=bind_host,
            timeout=timeout,
        )

    def session(self, user: UserConfig, offline=None) -> SessionResult:
        return self.run(user_session(user, offline, rng=self.rng))

    def sessions(self, users: list[UserConfig]) -> list[SessionResult | BaseException]:
        """Run one session per user concurrently."""

        async def _all():
            return await asyncio.gather(
                *(user_session(u) for u in users), return_exceptions=True
            )

        return self.run(_all())
