"""One anonymous session over loopback TCP, and what each party saw.

A user enrolls with the group manager, signs a fresh temporary id, and sends
it through a proxy.  The service provider checks the signature, encrypts its
answer to the temporary id and replies through the proxy.  The user fetches
the matching decryption key from the key generation center and reads the
answer.  The provider never sees the user's address, and the proxy forgets
the session as soon as the answer passes through.

Run:  python demos/03_protocol_session.py
"""

from anonchan.net import LocalDeployment

PAGE = b"<html>members only</html>"

with LocalDeployment(payload=PAGE, hops=2) as dep:
    print("proxy chain:", " -> ".join(str(p.address) for p in dep.proxies), "->", dep.sp.address)
    user = dep.new_user(bind_host="127.0.0.2")
    res = dep.session(user)
    print("user received:", res.content)
    print("temporary id used:", bytes(res.temp_id).hex())
    for name, seconds in res.timings.items():
        print(f"  {name:<16}{seconds * 1e3:8.2f} ms")

    print("proxy table sizes after the session:", [len(t) for t in dep.tables])
    user_ip = bytes([127, 0, 0, 2])
    seen = sum(user_ip in f for f in dep.sp_frames)
    print(f"frames received by the provider: {len(dep.sp_frames)}, containing the user's address: {seen}")
