#!/usr/bin/env python3
"""Independent oracle for the pinned test vectors.

Plain Python integers, naive affine point addition, hashlib SHA-256. Nothing
here shares code with the C++ library. Regenerate with:

    python3 tests/oracles/gen_vectors.py > tests/fixtures/vectors.txt
"""
import hashlib

# SEC 2 prime: 2^256 - 2^32 - 977. The last term is 2^0; a trailing 2^1 would make p even.
SECP_P = 2**256 - 2**32 - 2**9 - 2**8 - 2**7 - 2**6 - 2**4 - 1
SECP_N = int("FFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEBAAEDCE6AF48A03BBFD25E8CD0364141", 16)
SECP_GX = int("79BE667EF9DCBBAC55A06295CE870B07029BFCDB2DCE28D959F2815B16F81798", 16)


def sqrt_mod(a, p):
    for y in range(p):
        if y * y % p == a % p:
            return y
    return None


def add(P, Q, p, a=0):
    if P is None:
        return Q
    if Q is None:
        return P
    if P[0] == Q[0] and (P[1] + Q[1]) % p == 0:
        return None
    if P == Q:
        lam = (3 * P[0] * P[0] + a) * pow(2 * P[1], -1, p) % p
    else:
        lam = (Q[1] - P[1]) * pow(Q[0] - P[0], -1, p) % p
    x = (lam * lam - P[0] - Q[0]) % p
    return (x, (lam * (P[0] - x) - P[1]) % p)


def naive_mul(k, P, p):
    R = None
    for _ in range(k):
        R = add(R, P, p)
    return R


def compress(P, field_bytes):
    return bytes([2 + (P[1] & 1)]) + P[0].to_bytes(field_bytes, "big")


def h(b):
    return hashlib.sha256(b).digest()


def out(key, value):
    if isinstance(value, int):
        value = format(value, "x")
    elif isinstance(value, bytes):
        value = value.hex()
    print(f"{key} = {value}")


# secp256k1
gy2 = (SECP_GX**3 + 7) % SECP_P
gy = pow(gy2, (SECP_P + 1) // 4, SECP_P)
if gy & 1:
    gy = SECP_P - gy
G = (SECP_GX, gy)
G2 = add(G, G, SECP_P)
G3 = add(G2, G, SECP_P)
out("secp256k1.p", SECP_P)
out("secp256k1.n", SECP_N)
out("secp256k1.gx", G[0])
out("secp256k1.gy", G[1])
out("secp256k1.g2x", G2[0])
out("secp256k1.g2y", G2[1])
out("secp256k1.g3x", G3[0])
out("secp256k1.g3y", G3[1])
out("secp256k1.address_g", h(h(compress(G, 32))))
out("secp256k1.address_2g", h(h(compress(G2, 32))))

# Toy curve y^2 = x^3 + 7 over F_211: enumerate every point.
TP = 211
points = [None]
for x in range(TP):
    for y in range(TP):
        if (y * y - x**3 - 7) % TP == 0:
            points.append((x, y))
order = len(points)
assert all(order % q for q in range(2, int(order**0.5) + 1)), "group order must be prime"
TG = min(pt for pt in points[1:])
assert naive_mul(order, TG, TP) is None
out("toy.p", TP)
out("toy.a", 0)
out("toy.b", 7)
out("toy.n", order)
out("toy.h", 1)
out("toy.gx", TG[0])
out("toy.gy", TG[1])
T2 = naive_mul(2, TG, TP)
out("toy.g2x", T2[0])
out("toy.g2y", T2[1])
out("toy.address_g", h(h(compress(TG, 1))))

# Toy blind-signature vector: d = 5, k = 3, gamma = 7, delta = 11.
n = order
d, k, gamma, delta = 5, 3, 7, 11
P = naive_mul(d, TG, TP)
R = naive_mul(k, TG, TP)
A = add(add(R, naive_mul(gamma, TG, TP), TP), naive_mul(delta, P, TP), TP)
t = A[0] % n
assert t != 0
O = bytes(range(32))
v = 100000
nonce = bytes([0xA5] * 16)
m = O + v.to_bytes(8, "big") + compress(P, 1) + nonce
c = int.from_bytes(h(m + t.to_bytes(1, "big")), "big") % n
c_prime = (c - delta) % n
s_prime = (k - c_prime * d) % n
s = (s_prime + gamma) % n
out("toy.bs.d", d)
out("toy.bs.k", k)
out("toy.bs.gamma", gamma)
out("toy.bs.delta", delta)
out("toy.bs.output", O)
out("toy.bs.denomination", v)
out("toy.bs.nonce", nonce)
out("toy.bs.message", m)
out("toy.bs.rx", R[0])
out("toy.bs.ry", R[1])
out("toy.bs.t", t)
out("toy.bs.c", c)
out("toy.bs.c_prime", c_prime)
out("toy.bs.s_prime", s_prime)
out("toy.bs.s", s)
# blind_sign oracle with c' = 2.
out("toy.bs.s_prime_c2", (3 - 2 * 5) % n)

# SHA-256 vectors
out("sha256.empty", h(b""))
out("sha256.abc", h(b"abc"))
out("sha256.million_a", h(b"a" * 1000000))
out("sha256.448bit", h(b"abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq"))

# ECDSA with RFC 6979 nonces (HMAC-SHA256), no low-s normalisation.
import hmac


def fast_mul(k, P, p):
    R = None
    while k:
        if k & 1:
            R = add(R, P, p)
        P = add(P, P, p)
        k >>= 1
    return R


def rfc6979_k(x, h1, q):
    qlen = q.bit_length()
    rolen = (qlen + 7) // 8

    def bits2int(b):
        v = int.from_bytes(b, "big")
        blen = len(b) * 8
        return v >> (blen - qlen) if blen > qlen else v

    def int2octets(v):
        return v.to_bytes(rolen, "big")

    def bits2octets(b):
        return int2octets(bits2int(b) % q)

    V = b"\x01" * 32
    K = b"\x00" * 32
    K = hmac.new(K, V + b"\x00" + int2octets(x) + bits2octets(h1), hashlib.sha256).digest()
    V = hmac.new(K, V, hashlib.sha256).digest()
    K = hmac.new(K, V + b"\x01" + int2octets(x) + bits2octets(h1), hashlib.sha256).digest()
    V = hmac.new(K, V, hashlib.sha256).digest()
    while True:
        T = b""
        while len(T) * 8 < qlen:
            V = hmac.new(K, V, hashlib.sha256).digest()
            T += V
        k = bits2int(T)
        if 1 <= k < q:
            return k
        K = hmac.new(K, V + b"\x00", hashlib.sha256).digest()
        V = hmac.new(K, V, hashlib.sha256).digest()


def ecdsa(x, msg, Gp, q, p):
    h1 = h(msg)
    qlen = q.bit_length()
    e = int.from_bytes(h1, "big")
    if 256 > qlen:
        e >>= 256 - qlen
    k = rfc6979_k(x, h1, q)
    while True:
        R = fast_mul(k, Gp, p)
        r = R[0] % q
        s = pow(k, -1, q) * (e + r * x) % q
        if r and s:
            return k, r, s
        raise AssertionError("degenerate nonce; pick another vector")


k1, r1, s1 = ecdsa(1, b"Satoshi Nakamoto", G, SECP_N, SECP_P)
# Widely published secp256k1 vector for this key and message.
assert k1 == int("8F8A276C19F4149656B280621E358CCE24F5F52542772691EE69063B74F15D15", 16)
out("ecdsa.secp.key1.k", k1)
out("ecdsa.secp.key1.r", r1)
out("ecdsa.secp.key1.s", s1)
x2 = int("c9afa9d845ba75166b5c215767b1d6934e50c3db36e89b127b8a622b120f6721", 16)
k2, r2, s2 = ecdsa(x2, b"sample", G, SECP_N, SECP_P)
out("ecdsa.secp.sample.key", x2)
out("ecdsa.secp.sample.k", k2)
out("ecdsa.secp.sample.r", r2)
out("ecdsa.secp.sample.s", s2)
k3, r3, s3 = ecdsa(5, b"abc", TG, n, TP)
out("ecdsa.toy.key5.k", k3)
out("ecdsa.toy.key5.r", r3)
out("ecdsa.toy.key5.s", s3)

# Textbook RSA blind signature on N = 61 * 53, e = 17, representative 65, r = 7.
N, e_rsa = 61 * 53, 17
d_rsa = pow(e_rsa, -1, 60 * 52)
rep, r_blind = 65, 7
blinded = rep * pow(r_blind, e_rsa, N) % N
blind_sig = pow(blinded, d_rsa, N)
sig = blind_sig * pow(r_blind, -1, N) % N
assert sig == pow(rep, d_rsa, N) and pow(sig, e_rsa, N) == rep
out("rsa.toy.n", N)
out("rsa.toy.e", e_rsa)
out("rsa.toy.d", d_rsa)
out("rsa.toy.rep", rep)
out("rsa.toy.r", r_blind)
out("rsa.toy.blinded", blinded)
out("rsa.toy.blind_sig", blind_sig)
out("rsa.toy.sig", sig)
