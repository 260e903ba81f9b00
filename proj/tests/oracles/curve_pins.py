#!/usr/bin/env python3
"""Independent computation of the pinned curve and view-tag values used by
the unit tests (hashlib SHAKE-256, pycryptodome Keccak-256, py_ecc
secp256k1)."""
import hashlib

from Crypto.Hash import keccak
from py_ecc.secp256k1 import secp256k1 as ec

N = ec.N


def keccak256(b):
    h = keccak.new(digest_bits=256)
    h.update(b)
    return h.digest()


def xof_to_scalar(s):
    return int.from_bytes(hashlib.shake_256(s).digest(48), "big") % N


def address(point):
    x, y = point
    return keccak256(x.to_bytes(32, "big") + y.to_bytes(32, "big"))[12:].hex()


zero = bytes(32)
seq = bytes(range(32))
print("xof(zero)       ", format(xof_to_scalar(zero), "064x"))
print("xof(0..31)      ", format(xof_to_scalar(seq), "064x"))
print("address(g)      ", address(ec.G))
print("address(2g)     ", address(ec.multiply(ec.G, 2)))
print("tag(zero, 4)    ", keccak256(zero)[:4].hex())
print("tag(0..31, 1)   ", keccak256(seq)[:1].hex())
k = 0xC0FFEE
p = (k + xof_to_scalar(seq)) % N
print("p(k=c0ffee,0..31)", format(p, "064x"))
print("addr(p*g)       ", address(ec.multiply(ec.G, p)))
