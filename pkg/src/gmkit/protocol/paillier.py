"""Additively homomorphic cryptosystem (Paillier).

Ciphertexts are residues modulo n^2 represented as plain ints.  Plaintexts
are signed integers encoded as x mod n and decoded back into the window
(-n/2, n/2], so homomorphic sums and scalar products of moderately sized
values decrypt to exact signed results.

Homomorphic contract:

    decrypt(add(enc(a), enc(b)))        == a + b   (mod n, signed decode)
    decrypt(scalar_mul(enc(a), k))      == k * a   (mod n, signed decode)

Key sizes are configurable and default to desk scale; this module
demonstrates protocol structure, it is not hardened for production use.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from ..errors import PlaintextRangeError, ProtocolError
from .primes import generate_prime


@dataclass(frozen=True)
class AdditivePublicKey:
    modulus: int  # n = p*q

    @property
    def modulus_squared(self) -> int:
        return self.modulus * self.modulus

    @property
    def signed_bound(self) -> int:
        """Largest magnitude decodable without wrap: |x| <= (n-1)//2."""
        return (self.modulus - 1) // 2


@dataclass(frozen=True)
class AdditiveSecretKey:
    public: AdditivePublicKey
    prime_p: int
    prime_q: int


def additive_keygen(bits: int, rng: random.Random) -> tuple[AdditivePublicKey, AdditiveSecretKey]:
    """Generate an additive keypair with an approximately ``bits``-bit modulus."""
    if bits < 64:
        raise ProtocolError(f"additive modulus must be at least 64 bits, got {bits}")
    while True:
        p = generate_prime(bits // 2, rng)
        q = generate_prime(bits - bits // 2, rng)
        if p != q and math.gcd(p * q, (p - 1) * (q - 1)) == 1:
            break
    public = AdditivePublicKey(p * q)
    return public, AdditiveSecretKey(public, p, q)


def _encode(pk: AdditivePublicKey, value: int) -> int:
    if abs(value) > pk.signed_bound:
        raise PlaintextRangeError(f"plaintext {value} outside the signed window +/-{pk.signed_bound}")
    return value % pk.modulus


def _decode(pk: AdditivePublicKey, residue: int) -> int:
    return residue - pk.modulus if residue > pk.modulus // 2 else residue


def additive_encrypt(pk: AdditivePublicKey, value: int, rng: random.Random) -> int:
    """Encrypt a signed integer: c = (1 + m*n) * r^n mod n^2 with fresh r."""
    m = _encode(pk, value)
    n, n2 = pk.modulus, pk.modulus_squared
    while True:
        r = rng.randrange(1, n)
        if math.gcd(r, n) == 1:
            break
    return (1 + m * n) * pow(r, n, n2) % n2


def additive_decrypt(sk: AdditiveSecretKey, ciphertext: int) -> int:
    """Decrypt to a signed integer in (-n/2, n/2]. CRT-accelerated."""
    pk = sk.public
    p, q = sk.prime_p, sk.prime_q
    mp = _partial_decrypt(ciphertext, p, q)
    mq = _partial_decrypt(ciphertext, q, p)
    # combine residues mod p and mod q
    q_inv = pow(q, -1, p)
    diff = (mp - mq) * q_inv % p
    return _decode(pk, mq + diff * q)


def _partial_decrypt(ciphertext: int, prime: int, other_prime: int) -> int:
    prime_sq = prime * prime
    u = pow(ciphertext, prime - 1, prime_sq)
    l_value = (u - 1) // prime
    # with g = 1 + n, L(g^(p-1) mod p^2) = (p-1) * q mod p
    denom = (prime - 1) * other_prime % prime
    return l_value * pow(denom, -1, prime) % prime


def additive_add(pk: AdditivePublicKey, c1: int, c2: int) -> int:
    """Ciphertext of the sum of the two underlying plaintexts."""
    return c1 * c2 % pk.modulus_squared


def additive_scalar_mul(pk: AdditivePublicKey, ciphertext: int, k: int) -> int:
    """Ciphertext of k times the underlying plaintext (k any signed int)."""
    n2 = pk.modulus_squared
    k_red = k % pk.modulus
    if k_red > pk.modulus // 2:
        k_red -= pk.modulus  # negative exponent keeps the magnitude small
    return pow(ciphertext, k_red, n2)
