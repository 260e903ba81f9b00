"""Reference value for the lattice stealth address used by the mlwe_sap kernel.

spend[i][j] = (i * 256 + j) * 7 mod q, S = bytes 0..31. XOF(S) is SHAKE-256
read in 168-byte blocks, 3 bytes -> two 12-bit candidates, keep those < q.
"""
from Crypto.Hash import SHAKE256, keccak

q, n, k = 3329, 256, 3
spend = [[((i * n + j) * 7) % q for j in range(n)] for i in range(k)]
S = bytes(range(32))

xof = SHAKE256.new(S)
buf = b""
coeffs = []
while len(coeffs) < k * n:
    if not buf:
        buf = xof.read(168)
    b0, b1, b2, buf = buf[0], buf[1], buf[2], buf[3:]
    for c in (b0 | ((b1 & 0x0F) << 8), (b1 >> 4) | (b2 << 4)):
        if c < q and len(coeffs) < k * n:
            coeffs.append(c)

packed = bytearray()
for i in range(k):
    p = [(spend[i][j] + coeffs[i * n + j]) % q for j in range(n)]
    for j in range(0, n, 2):
        a, b = p[j], p[j + 1]
        packed += bytes([a & 0xFF, (a >> 8) | ((b << 4) & 0xF0), b >> 4])
print(keccak.new(digest_bits=256, data=bytes(packed)).hexdigest()[24:])
