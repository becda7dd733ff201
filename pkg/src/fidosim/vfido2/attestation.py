"""Enclave measurement, attestation reports and key agreement.

A Verifier proves its code identity with a report signed by the attestation
service. The report binds an ephemeral X25519 public key, so the party that
checked it can derive a channel key only that enclave can also derive.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.asymmetric import x25519
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

from .. import core
from ..core import Digest, EntityId, SigAlg, SymmetricKey
from ..envelope import pack_fields
from ..errors import BadServiceSignature, MeasurementMismatch

VERIFIER_IDENTITY = "fidosim-verifier"
VERIFIER_VERSION = "1.0"


def measurement_of(identity: str, version: str) -> Digest:
    return core.hash(pack_fields(identity.encode(), version.encode()))


EXPECTED_MEASUREMENT = measurement_of(VERIFIER_IDENTITY, VERIFIER_VERSION)


@dataclass(frozen=True)
class AttestationReport:
    measurement: Digest
    verifier_kex_public: bytes
    platform_id: str
    service_signature: bytes = b""

    def signed_data(self) -> bytes:
        return pack_fields(self.measurement, self.verifier_kex_public, self.platform_id.encode())

    def to_bytes(self) -> bytes:
        return self.signed_data() + pack_fields(self.service_signature)


class AttestationService:
    """Signs quotes from genuine enclaves; anyone can check with its public key."""

    def __init__(self, rng: random.Random):
        self._root = core.generate_keypair(SigAlg.STRONG_EC, rng)
        self.public_key = self._root.public

    def sign_quote(self, report: AttestationReport) -> AttestationReport:
        sig = core.sign(self._root, report.signed_data())
        return AttestationReport(report.measurement, report.verifier_kex_public, report.platform_id, sig)

    def verify_report(self, report: AttestationReport) -> bool:
        return core.verify(SigAlg.STRONG_EC, self.public_key, report.signed_data(), report.service_signature)


def check_report(
    report: AttestationReport,
    service_public: bytes,
    expected: Digest = EXPECTED_MEASUREMENT,
) -> None:
    if not core.verify(SigAlg.STRONG_EC, service_public, report.signed_data(), report.service_signature):
        raise BadServiceSignature(f"report for {report.platform_id} not signed by the service")
    if report.measurement != expected:
        raise MeasurementMismatch(f"unexpected enclave measurement {report.measurement.hex()[:16]}")


def x25519_keypair(rng: random.Random) -> tuple[x25519.X25519PrivateKey, bytes]:
    priv = x25519.X25519PrivateKey.from_private_bytes(rng.randbytes(32))
    return priv, priv.public_key().public_bytes_raw()


def derive_channel_key(
    priv: x25519.X25519PrivateKey, peer_public: bytes, platform_id: str, party: EntityId
) -> SymmetricKey:
    shared = priv.exchange(x25519.X25519PublicKey.from_public_bytes(peer_public))
    info = pack_fields(b"fidosim channel", platform_id.encode(), str(party).encode())
    okm = HKDF(algorithm=hashes.SHA256(), length=32, salt=None, info=info).derive(shared)
    return SymmetricKey(okm)
