#!/usr/bin/env python3
"""Keccak-256 reference digests (pycryptodome) for messages that straddle the
136-byte rate boundary. Message i is bytes((j * 7 + 3) % 256 for j < len_i).

    python3 gen_keccak_vectors.py > ../data/keccak256_vectors.txt
"""
from Crypto.Hash import keccak

LENGTHS = [0, 1, 2, 31, 32, 33, 55, 56, 64, 100, 134, 135, 136, 137, 200, 271, 272, 273, 500, 1000]


def message(n):
    return bytes((j * 7 + 3) % 256 for j in range(n))


for n in LENGTHS:
    h = keccak.new(digest_bits=256)
    h.update(message(n))
    print(n, h.hexdigest())
