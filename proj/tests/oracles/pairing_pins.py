"""Reference G1 multiples and a pairing check for the pairing engine tests.

Uses py_ecc's pure-Python bn128 and bls12_381 implementations.
"""
from py_ecc import bn128, bls12_381


def be(v, n):
    return int(v).to_bytes(n, "big").hex()


def g1_hex(mod, pt, n):
    x, y = mod.normalize(pt) if len(pt) == 3 else pt
    return be(x.n, n) + be(y.n, n)


for label, mod, n in (("bn254", bn128, 32), ("bls12_381", bls12_381, 48)):
    for k in (1, 2, 0xC0FFEE, mod.curve_order - 1):
        print(label, hex(k), g1_hex(mod, mod.multiply(mod.G1, k), n))
    # e(3*G1, 5*G2) == e(15*G1, G2)
    lhs = mod.pairing(mod.multiply(mod.G2, 5), mod.multiply(mod.G1, 3))
    rhs = mod.pairing(mod.G2, mod.multiply(mod.G1, 15))
    print(label, "bilinear", lhs == rhs)
