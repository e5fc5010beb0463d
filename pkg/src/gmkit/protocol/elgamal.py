"""Multiplicatively homomorphic cryptosystem (ElGamal over Z_p^*).

The modulus is a safe prime and the generator spans the quadratic residues.
Plaintexts are nonzero residues 1..p-1; multiplying two ciphertexts
componentwise multiplies the plaintexts, and multiplying by a fresh
encryption of 1 rerandomizes a ciphertext without changing its plaintext.
Desk-scale parameters, not a production cryptosystem.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from ..errors import PlaintextRangeError, ProtocolError
from .primes import generate_safe_prime


@dataclass(frozen=True)
class MultiplicativePublicKey:
    modulus: int  # safe prime p
    generator: int
    point: int  # h = g^x

    @property
    def subgroup_order(self) -> int:
        return (self.modulus - 1) // 2


@dataclass(frozen=True)
class MultiplicativeSecretKey:
    public: MultiplicativePublicKey
    exponent: int


@dataclass(frozen=True)
class MultiplicativeCiphertext:
    c1: int
    c2: int


def mult_keygen(bits: int, rng: random.Random) -> tuple[MultiplicativePublicKey, MultiplicativeSecretKey]:
    """Generate a multiplicative keypair over a ``bits``-bit safe prime."""
    if bits < 64:
        raise ProtocolError(f"multiplicative modulus must be at least 64 bits, got {bits}")
    p = generate_safe_prime(bits, rng)
    while True:
        g = pow(rng.randrange(2, p - 1), 2, p)  # quadratic residue
        if g != 1:
            break
    q = (p - 1) // 2
    x = rng.randrange(2, q)
    return_key = MultiplicativePublicKey(p, g, pow(g, x, p))
    return return_key, MultiplicativeSecretKey(return_key, x)


def _check_plaintext(pk: MultiplicativePublicKey, m: int) -> None:
    if not 1 <= m < pk.modulus:
        raise PlaintextRangeError(f"plaintext must lie in [1, {pk.modulus - 1}], got {m}")


def mult_encrypt(pk: MultiplicativePublicKey, m: int, rng: random.Random) -> MultiplicativeCiphertext:
    _check_plaintext(pk, m)
    r = rng.randrange(1, pk.subgroup_order)
    return MultiplicativeCiphertext(pow(pk.generator, r, pk.modulus), m * pow(pk.point, r, pk.modulus) % pk.modulus)


def mult_decrypt(sk: MultiplicativeSecretKey, c: MultiplicativeCiphertext) -> int:
    p = sk.public.modulus
    shared = pow(c.c1, sk.exponent, p)
    return c.c2 * pow(shared, -1, p) % p


def mult_multiply(pk: MultiplicativePublicKey, a: MultiplicativeCiphertext, b: MultiplicativeCiphertext) -> MultiplicativeCiphertext:
    p = pk.modulus
    return MultiplicativeCiphertext(a.c1 * b.c1 % p, a.c2 * b.c2 % p)


def mult_rerandomize_by_one(pk: MultiplicativePublicKey, c: MultiplicativeCiphertext, rng: random.Random) -> MultiplicativeCiphertext:
    """Fresh ciphertext of the same plaintext: multiply by an encryption of 1.

    The blinding exponent is drawn from [1, q-1], so the first component is
    guaranteed to change.
    """
    return mult_multiply(pk, c, mult_encrypt(pk, 1, rng))
