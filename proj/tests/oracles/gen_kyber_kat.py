#!/usr/bin/env python3
"""Regenerate the Kyber known-answer files under tests/data.

Uses kyber-py (pure Python, round-3 Kyber) with the NIST AES-256-CTR DRBG
procedure: an outer DRBG seeded with bytes 0..47 yields one 48-byte seed per
vector, and each vector's keygen/encaps draw from a DRBG reseeded with it.

    pip install kyber-py==1.0.1
    python3 gen_kyber_kat.py ../data
"""
import sys
from pathlib import Path

from kyber_py.drbg.aes256_ctr_drbg import AES256_CTR_DRBG
from kyber_py.kyber import Kyber512, Kyber768, Kyber1024

COUNTS = {"512": 10, "768": 100, "1024": 10}


def vectors(kem, count):
    outer = AES256_CTR_DRBG(bytes(range(48)))
    for i in range(count):
        seed = outer.random_bytes(48)
        kem.set_drbg_seed(seed)
        pk, sk = kem.keygen()
        ss, ct = kem.encaps(pk)
        assert kem.decaps(sk, ct) == ss
        yield (f"count = {i}\nseed = {seed.hex().upper()}\npk = {pk.hex().upper()}\n"
               f"sk = {sk.hex().upper()}\nct = {ct.hex().upper()}\nss = {ss.hex().upper()}\n")


def main():
    out_dir = Path(sys.argv[1] if len(sys.argv) > 1 else ".")
    for level, kem in (("512", Kyber512), ("768", Kyber768), ("1024", Kyber1024)):
        path = out_dir / f"kat_kyber{level}.rsp"
        with path.open("w") as f:
            f.write(f"# Kyber{level}\n\n")
            for v in vectors(kem, COUNTS[level]):
                f.write(v + "\n")
        print(path)


if __name__ == "__main__":
    main()
