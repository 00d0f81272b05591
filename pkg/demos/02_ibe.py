"""Encrypt to a short-lived identity string and decrypt with the extracted key.

Run:  python demos/02_ibe.py
"""

import os

from anonchan.ibe import ibe_decrypt, ibe_encrypt, ibe_extract, ibe_setup

params, msk = ibe_setup()
identity = os.urandom(16)
print("identity:", identity.hex())

ct = ibe_encrypt(params, identity, b"the page you asked for")
print(f"ciphertext: {len(ct.to_bytes())} bytes for a {ct.length}-byte message")

dk = ibe_extract(params, msk, identity)
print("decryption key is consistent with the public parameters:", dk.is_valid(params))
print("decrypted:", ibe_decrypt(params, ct, dk))

other = ibe_extract(params, msk, os.urandom(16))
print("a key for another identity yields noise:", ibe_decrypt(params, ct, other)[:12].hex(), "...")
