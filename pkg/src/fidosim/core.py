"""Crypto primitives, identifiers and the seeded RNG shared by every entity.

The hash is SHA-256 and the MAC is HMAC-SHA-256; both are fixed build
constants. Signature schemes:

* ``STRONG_EC``  -- Ed25519 (deterministic signatures, seedable keys)
* ``STRONG_RSA`` -- RSASSA-PKCS1-v1_5 / SHA-256 over a 2048-bit modulus whose
  primes are drawn from the scenario RNG
* ``WEAK_TOY``   -- ``sig = hash(data || public)``. Anyone holding the public
  key can produce a valid signature (:func:`forge_weak`). It stands in for an
  algorithm with a practical forgery and must never be chosen unless an RP
  advertises it.
"""

from __future__ import annotations

import builtins
import enum
import hashlib
import hmac as _hmac
import random
from dataclasses import dataclass, field
from functools import lru_cache
from math import gcd

import gmpy2
from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives import hashes, serialization
from cryptography.hazmat.primitives.asymmetric import ed25519, padding, rsa

from .errors import CounterOverflow, UnknownAlgorithm

DIGEST_SIZE = 32
MAC_SIZE = 32
KEY_SIZE = 32
CHALLENGE_SIZE = 32
CREDENTIAL_ID_SIZE = 16
U32_MAX = 2**32 - 1
RSA_BITS = 2048


class _Fixed32(bytes):
    """Immutable 32-byte value."""

    __slots__ = ()

    def __new__(cls, value: bytes = b""):
        value = bytes(value)
        if len(value) != 32:
            raise ValueError(f"{cls.__name__} must be 32 bytes, got {len(value)}")
        return super().__new__(cls, value)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.hex()[:16]}...)"


class Digest(_Fixed32):
    __slots__ = ()


class MacTag(_Fixed32):
    __slots__ = ()


class SymmetricKey(_Fixed32):
    __slots__ = ()

    def __repr__(self) -> str:
        return "SymmetricKey(<redacted>)"


class SigAlg(enum.IntEnum):
    """Signature algorithms; the integer value is the strength rank."""

    WEAK_TOY = 1
    STRONG_RSA = 2
    STRONG_EC = 3

    @property
    def strength_rank(self) -> int:
        return int(self)

    @classmethod
    def strongest_first(cls) -> list[SigAlg]:
        return sorted(cls, reverse=True)


class EntityKind(enum.IntEnum):
    RP = 1
    CLIENT = 2
    HSK = 3
    VERIFIER = 4
    ATTEST_SERVICE = 5
    USER = 6
    ADVERSARY = 7


@dataclass(frozen=True, order=True)
class EntityId:
    kind: EntityKind
    name: str

    def __str__(self) -> str:
        return f"{self.kind.name}:{self.name}"

    def __hash__(self) -> int:
        # the generated hash would pick up this module's digest function
        return builtins.hash((self.kind, self.name))


def make_rng(seed: int) -> random.Random:
    """The one RNG a scenario owns; everything random is drawn from it."""
    return random.Random(seed)


def hash(data: bytes) -> Digest:  # noqa: A001 - mirrors the protocol vocabulary
    return Digest(hashlib.sha256(data).digest())


def mac_tag(key: SymmetricKey, data: bytes) -> MacTag:
    return MacTag(_hmac.new(bytes(key), data, hashlib.sha256).digest())


def mac_verify(key: SymmetricKey, data: bytes, tag: bytes) -> bool:
    return _hmac.compare_digest(mac_tag(key, data), bytes(tag))


def u32(value: int) -> int:
    if not 0 <= value <= U32_MAX:
        raise CounterOverflow(f"counter {value} outside u32")
    return value


# -- signatures ----------------------------------------------------------------


@dataclass(frozen=True)
class KeyPair:
    alg: SigAlg
    public: bytes
    private: bytes = field(repr=False)


def _rsa_prime(rng: random.Random, bits: int) -> int:
    while True:
        candidate = rng.getrandbits(bits) | (1 << (bits - 1)) | 1
        p = int(gmpy2.next_prime(candidate))
        if p.bit_length() == bits and gcd(p - 1, 65537) == 1:
            return p


def _rsa_from_rng(rng: random.Random) -> rsa.RSAPrivateKey:
    e = 65537
    p = _rsa_prime(rng, RSA_BITS // 2)
    q = _rsa_prime(rng, RSA_BITS // 2)
    while q == p:
        q = _rsa_prime(rng, RSA_BITS // 2)
    d = pow(e, -1, (p - 1) * (q - 1))
    numbers = rsa.RSAPrivateNumbers(
        p=p,
        q=q,
        d=d,
        dmp1=rsa.rsa_crt_dmp1(d, p),
        dmq1=rsa.rsa_crt_dmq1(d, q),
        iqmp=rsa.rsa_crt_iqmp(p, q),
        public_numbers=rsa.RSAPublicNumbers(e, p * q),
    )
    return numbers.private_key()


def generate_keypair(alg: SigAlg, rng: random.Random) -> KeyPair:
    if alg is SigAlg.STRONG_EC:
        seed = rng.randbytes(32)
        pub = _ed_private(seed).public_key()
        return KeyPair(alg, pub.public_bytes_raw(), seed)
    if alg is SigAlg.STRONG_RSA:
        key = _rsa_from_rng(rng)
        public = key.public_key().public_bytes(
            serialization.Encoding.DER, serialization.PublicFormat.SubjectPublicKeyInfo
        )
        private = key.private_bytes(
            serialization.Encoding.DER,
            serialization.PrivateFormat.PKCS8,
            serialization.NoEncryption(),
        )
        return KeyPair(alg, public, private)
    if alg is SigAlg.WEAK_TOY:
        secret = rng.randbytes(32)
        return KeyPair(alg, bytes(hash(b"toy-public" + secret)), secret)
    raise UnknownAlgorithm(alg)


# parsed key objects are cached so repeated ceremonies skip re-parsing
@lru_cache(maxsize=4096)
def _ed_private(seed: bytes) -> ed25519.Ed25519PrivateKey:
    return ed25519.Ed25519PrivateKey.from_private_bytes(seed)


@lru_cache(maxsize=4096)
def _ed_public(raw: bytes) -> ed25519.Ed25519PublicKey:
    return ed25519.Ed25519PublicKey.from_public_bytes(raw)


@lru_cache(maxsize=256)
def _rsa_private(der: bytes):
    return serialization.load_der_private_key(der, password=None)


@lru_cache(maxsize=256)
def _rsa_public(der: bytes):
    return serialization.load_der_public_key(der)


def sign(kp: KeyPair, data: bytes) -> bytes:
    if kp.alg is SigAlg.STRONG_EC:
        return _ed_private(kp.private).sign(data)
    if kp.alg is SigAlg.STRONG_RSA:
        return _rsa_private(kp.private).sign(data, padding.PKCS1v15(), hashes.SHA256())
    if kp.alg is SigAlg.WEAK_TOY:
        return forge_weak(kp.public, data)
    raise UnknownAlgorithm(kp.alg)


def verify(alg: SigAlg, public: bytes, data: bytes, sig: bytes) -> bool:
    try:
        alg = SigAlg(alg)
    except ValueError:
        raise UnknownAlgorithm(alg) from None
    try:
        if alg is SigAlg.STRONG_EC:
            _ed_public(bytes(public)).verify(sig, data)
            return True
        if alg is SigAlg.STRONG_RSA:
            _rsa_public(bytes(public)).verify(sig, data, padding.PKCS1v15(), hashes.SHA256())
            return True
    except (InvalidSignature, ValueError):
        return False
    return _hmac.compare_digest(forge_weak(public, data), sig)


def forge_weak(public: bytes, data: bytes) -> bytes:
    """Produce a verifying WEAK_TOY signature from public material alone."""
    return bytes(hash(data + public))


@dataclass
class Clock:
    """Scenario calendar in whole days; cookies and remember periods expire on it."""

    day: int = 0

    def advance(self, days: int) -> None:
        self.day += days
