"""Establishing the RP and authenticator keys of a Verifier."""

from __future__ import annotations

import random

from ..core import SymmetricKey
from ..errors import BadServiceSignature, MeasurementMismatch, NoTee
from ..fido2.relying_party import RelyingParty
from .attestation import (
    EXPECTED_MEASUREMENT,
    AttestationService,
    check_report,
    derive_channel_key,
    x25519_keypair,
)
from .display import DisplayAuthenticator
from .verifier import Verifier


def attest(
    party: RelyingParty | DisplayAuthenticator,
    verifier: Verifier | None,
    service: AttestationService,
    rng: random.Random,
    *,
    expected=EXPECTED_MEASUREMENT,
) -> SymmetricKey:
    """Remote-attest ``verifier`` to ``party`` and install the resulting key on both.

    The RP hands the report to the service for a verdict; an authenticator has
    no network of its own and checks the service signature with the public key
    it ships with. Keys are cached per (host, party).
    """
    if verifier is None:
        raise NoTee("client has no trusted execution environment")
    cached = party.channel_keys.get(verifier.host)
    if cached is not None:
        return cached
    report = verifier.attestation_report(service)
    if isinstance(party, RelyingParty):
        if not service.verify_report(report):
            raise BadServiceSignature("attestation service rejected the report")
        if report.measurement != expected:
            raise MeasurementMismatch(f"unexpected enclave measurement {report.measurement.hex()[:16]}")
        origin = party.origin
    else:
        check_report(report, service.public_key, expected)
        origin = None
    priv, pub = x25519_keypair(rng)
    key = derive_channel_key(priv, report.verifier_kex_public, report.platform_id, party.id)
    verifier.complete_attestation(report, party.id, pub, origin)
    party.channel_keys[verifier.host] = key
    return key
