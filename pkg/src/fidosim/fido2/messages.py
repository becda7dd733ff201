"""Typed message bodies exchanged by RP, client and authenticator.

Every body is a plain dataclass; :mod:`fidosim.envelope` turns it into the
canonical payload bytes. The ``*_data`` helpers give the exact byte strings
that signatures cover.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .. import core
from ..core import Digest, SigAlg
from ..envelope import pack_fields


class RequestType(enum.IntEnum):
    CREATE = 1
    GET = 2


@dataclass(frozen=True)
class RegistrationRequest:
    challenge: bytes
    rp_id: str
    rp_name: str
    username: str
    alg_list: list[SigAlg]
    requires_user_presence: bool = True
    is_first_authenticator: bool = True


@dataclass(frozen=True)
class AuthRequest:
    challenge: bytes
    rp_id: str
    allowed_credential_ids: list[bytes] = field(default_factory=list)


@dataclass(frozen=True)
class CtapRegistrationRequest:
    inner: RegistrationRequest
    origin: str
    request_type: RequestType = RequestType.CREATE


@dataclass(frozen=True)
class CtapAuthRequest:
    inner: AuthRequest
    origin: str
    request_type: RequestType = RequestType.GET


@dataclass(frozen=True)
class AttestationResponse:
    credential_id: bytes
    public_key: bytes
    alg: SigAlg
    rp_id_hash: Digest
    counter: int
    attestation_sig: bytes
    client_data_hash: Digest
    attestation_public: bytes
    make_model: str


@dataclass(frozen=True)
class AssertionResponse:
    credential_id: bytes
    counter: int
    signature: bytes
    client_data_hash: Digest
    rp_id_hash: Digest
    stored_challenge_hash: Digest | None = None


@dataclass(frozen=True)
class RegistrationAck:
    response_hash: Digest


@dataclass(frozen=True)
class Notice:
    """Out-of-ceremony message: session grants, cookies and error reports."""

    kind: str
    username: str = ""
    token: bytes = b""
    code: str = ""
    text: str = ""


def client_data_hash(request_type: RequestType, challenge: bytes, origin: str) -> Digest:
    return core.hash(pack_fields(bytes([int(request_type)]), challenge, origin.encode("utf-8")))


def attestation_data(resp_fields: dict) -> bytes:
    return pack_fields(
        resp_fields["rp_id_hash"],
        resp_fields["credential_id"],
        resp_fields["public_key"],
        resp_fields["counter"].to_bytes(4, "big"),
        resp_fields["client_data_hash"],
        bytes([int(resp_fields["alg"])]),
    )


def attestation_data_of(resp: AttestationResponse) -> bytes:
    return attestation_data(resp.__dict__)


def assertion_data(
    rp_id_hash: bytes, counter: int, cdh: bytes, stored: bytes | None
) -> bytes:
    parts = [rp_id_hash, counter.to_bytes(4, "big"), cdh]
    if stored is not None:
        parts.append(stored)
    return pack_fields(*parts)


def assertion_data_of(resp: AssertionResponse) -> bytes:
    return assertion_data(
        resp.rp_id_hash, resp.counter, resp.client_data_hash, resp.stored_challenge_hash
    )
