"""Sign as an anonymous group member, then look at what a verifier learns.

Run:  python demos/01_group_signature.py
"""

from anonchan.groupsig import (
    fork_sign,
    gs_extract,
    gs_join,
    gs_setup,
    gs_sign,
    gs_signature_size,
    gs_simulate,
    gs_verify,
    transcript_accepts,
)

gpk, ik = gs_setup()
alice = gs_join(gpk, ik)
bob = gs_join(gpk, ik)
print("two members enrolled; both certificates check out:", alice.satisfies(gpk), bob.satisfies(gpk))

msg = b"temporary id 0123456789abcdef"
sig_a = gs_sign(gpk, alice, msg)
sig_b = gs_sign(gpk, bob, msg)
print(f"signature length: {len(sig_a.to_bytes())} bytes")
print("alice's signature verifies:", gs_verify(gpk, sig_a, msg).name)
print("bob's signature verifies:  ", gs_verify(gpk, sig_b, msg).name)
print("a signature does not carry over to another message:", gs_verify(gpk, sig_a, b"something else").name)

# Two signatures by the same member share no bytes a verifier could link on.
again = gs_sign(gpk, alice, msg)
shared = sum(x == y for x, y in zip(sig_a.to_bytes(), again.to_bytes()))
print(f"alice signing twice: {shared} of {len(again.to_bytes())} byte positions coincide (chance level is about 1/256)")

# Nobody holds a key that reveals the signer.  Transcripts can be produced
# without any member key at all, and they satisfy the verification equation.
fake = gs_simulate(gpk, msg)
print("transcript built without a signing key satisfies the equation:", transcript_accepts(gpk, fake))

# Conversely, a prover answering two challenges on the same commitment gives
# away its key; this is why a valid signature implies key possession.
t1, t2 = fork_sign(gpk, alice, msg)
w = gs_extract(gpk, t1, t2)
print("key recovered from two forked transcripts equals alice's:", (w.x_t, w.y_t, w.A_t) == (alice.x, alice.y, alice.A))

rep = gs_signature_size(gpk)
print(f"size against a scheme with an opening trapdoor: {rep.ours} vs {rep.original} bytes (ratio {rep.ratio:.3f})")
