"""The hardened protocol: enclave Verifier, keyed channels, display and acks."""

from .attestation import (
    EXPECTED_MEASUREMENT,
    AttestationReport,
    AttestationService,
    check_report,
    measurement_of,
)
from .channels import attest
from .display import AckStatus, DisplayAuthenticator, DisplayPanel, hsk_verify_ack
from .verifier import (
    BuiltinCredential,
    Negotiated,
    SealedBlob,
    Verifier,
    VerifierState,
    fallback_negotiation,
)

__all__ = [
    "AckStatus",
    "AttestationReport",
    "AttestationService",
    "BuiltinCredential",
    "DisplayAuthenticator",
    "DisplayPanel",
    "EXPECTED_MEASUREMENT",
    "Negotiated",
    "SealedBlob",
    "Verifier",
    "VerifierState",
    "attest",
    "check_report",
    "fallback_negotiation",
    "hsk_verify_ack",
    "measurement_of",
]
