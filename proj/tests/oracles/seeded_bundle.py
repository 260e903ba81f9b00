#!/usr/bin/env python3
"""Recomputes the meta-address that recipient_setup derives from
SeededEntropy(42, "fixture"), using hashlib SHAKE-256 for the seed expansion,
py_ecc for the spending key and kyber-py for the viewing key. Prints the
SHA-256 of the encoded meta-address and the compressed spending key."""
import hashlib
import struct

from kyber_py.kyber import Kyber768
from py_ecc.secp256k1 import secp256k1 as ec


class Stream:
    def __init__(self, seed, domain):
        d = domain.encode()
        self.data = hashlib.shake_256(struct.pack("<I", len(d)) + d + struct.pack("<Q", seed)).digest(4096)
        self.pos = 0

    def take(self, n):
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out


def compressed(point):
    x, y = point
    return bytes([2 + (y & 1)]) + x.to_bytes(32, "big")


rng = Stream(42, "fixture")
while True:
    k = int.from_bytes(rng.take(32), "big")
    if 0 < k < ec.N:
        break
Kyber768.random_bytes = lambda n: rng.take(n)
pk, _ = Kyber768.keygen()
meta = "st:eth:0x" + compressed(ec.multiply(ec.G, k)).hex() + pk.hex()
print("sha256(meta)", hashlib.sha256(meta.encode()).hexdigest())
print("spend_pub   ", compressed(ec.multiply(ec.G, k)).hex())
