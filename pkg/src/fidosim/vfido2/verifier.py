"""The Verifier: an enclave on the client host that relays WebAuthn traffic.

It holds one key per RP (shared with that RP through attestation) and one per
authenticator. Requests are origin-checked and MAC-checked under the RP key,
then re-tagged under the authenticator key; responses go the other way. It can
also act as a built-in authenticator whose signing key only exists sealed.

Nothing outside this class reads its keys. The simulated enclave boundary is
the public method surface; the adversary interface never receives a Verifier.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from .. import core
from ..core import Digest, EntityId, EntityKind, KeyPair, SigAlg, SymmetricKey
from ..envelope import MessageEnvelope, MsgType, check, decode_body, encode_body, seal
from ..errors import (
    ApprovalRequired,
    FidoSimError,
    MacFailure,
    NoTee,
    OriginMismatch,
    SealCorrupted,
)
from ..events import Detector, EventLog
from ..fido2.messages import (
    AssertionResponse,
    AuthRequest,
    Notice,
    RequestType,
    assertion_data,
    client_data_hash,
)
from ..fido2.relying_party import BuiltinRegistration
from .attestation import (
    VERIFIER_IDENTITY,
    VERIFIER_VERSION,
    AttestationReport,
    AttestationService,
    derive_channel_key,
    measurement_of,
    x25519_keypair,
)


class Negotiated(enum.Enum):
    VFIDO2 = "VFIDO2"
    LEGACY = "LEGACY"


def fallback_negotiation(client_has_tee: bool) -> Negotiated:
    return Negotiated.VFIDO2 if client_has_tee else Negotiated.LEGACY


@dataclass(frozen=True)
class SealedBlob:
    nonce: bytes
    ciphertext: bytes


@dataclass
class BuiltinCredential:
    rp_id: str
    username: str
    credential_id: bytes
    public_key: bytes
    sealed: SealedBlob
    counter: int = 0


@dataclass
class RpChannel:
    rp: EntityId
    origin: str
    key: SymmetricKey = field(repr=False)


@dataclass
class VerifierState:
    measurement: Digest
    platform_id: str
    seal_key: SymmetricKey = field(repr=False)
    sk1: dict[str, RpChannel] = field(default_factory=dict, repr=False)
    sk2: dict[EntityId, SymmetricKey] = field(default_factory=dict, repr=False)
    sealed_builtin: dict[bytes, BuiltinCredential] = field(default_factory=dict)
    expected_origin: str | None = None
    top_level_origin: str | None = None
    pin_top_level: bool = False


class Verifier:
    def __init__(
        self,
        platform_id: str,
        rng: random.Random,
        *,
        identity: str = VERIFIER_IDENTITY,
        version: str = VERIFIER_VERSION,
        events: EventLog | None = None,
        macs: bool = True,
        pin_top_level: bool = False,
        host: EntityId | None = None,
    ):
        self._state = VerifierState(
            measurement=measurement_of(identity, version),
            platform_id=platform_id,
            seal_key=SymmetricKey(rng.randbytes(32)),
            pin_top_level=pin_top_level,
        )
        self._rng = rng
        self._kex: dict[bytes, object] = {}
        self.events = events if events is not None else EventLog()
        self.macs = macs
        self.host = host or EntityId(EntityKind.CLIENT, platform_id)

    @property
    def measurement(self) -> Digest:
        return self._state.measurement

    @property
    def platform_id(self) -> str:
        return self._state.platform_id

    @property
    def expected_origin(self) -> str | None:
        return self._state.expected_origin

    # -- attestation -----------------------------------------------------------

    def attestation_report(self, service: AttestationService) -> AttestationReport:
        priv, pub = x25519_keypair(self._rng)
        self._kex[pub] = priv
        quote = AttestationReport(self._state.measurement, pub, self._state.platform_id)
        return service.sign_quote(quote)

    def complete_attestation(
        self, report: AttestationReport, party: EntityId, party_public: bytes, origin: str | None = None
    ) -> None:
        priv = self._kex.pop(report.verifier_kex_public)
        key = derive_channel_key(priv, party_public, self._state.platform_id, party)
        if party.kind is EntityKind.RP:
            self._state.sk1[origin] = RpChannel(party, origin, key)
        else:
            self._state.sk2[party] = key

    def has_channel(self, origin: str) -> bool:
        return origin in self._state.sk1

    def has_hsk(self, hsk: EntityId) -> bool:
        return hsk in self._state.sk2

    def set_top_level(self, origin: str) -> None:
        self._state.top_level_origin = origin

    # -- relaying --------------------------------------------------------------

    def _fail(self, exc: FidoSimError) -> FidoSimError:
        self.events.detect(Detector.RP, EntityId(EntityKind.VERIFIER, self._state.platform_id), exc.code, str(exc))
        return exc

    def _channel(self, origin: str) -> RpChannel:
        ch = self._state.sk1.get(origin)
        if ch is None:
            raise self._fail(MacFailure(f"no attested channel for {origin}"))
        return ch

    def _tag(self, env: MessageEnvelope, key: SymmetricKey | None) -> MessageEnvelope:
        env = env.replace(mac=None)
        return seal(env, key) if key is not None and self.macs else env

    def _verify(self, env: MessageEnvelope, key: SymmetricKey | None) -> None:
        if self.macs and (key is None or not check(env, key)):
            raise self._fail(MacFailure(f"MAC check failed on {env.msg_type.name} from {env.sender}"))

    def relay_request(self, env: MessageEnvelope, context_origin: str, hsk: EntityId) -> MessageEnvelope:
        st = self._state
        expected = st.top_level_origin if st.pin_top_level else context_origin
        if env.origin != expected:
            raise self._fail(OriginMismatch(f"request for {env.origin} while expecting {expected}"))
        ch = self._channel(env.origin)
        self._verify(env, ch.key)
        st.expected_origin = expected
        if env.msg_type is MsgType.AUTH_REQUEST:
            req = decode_body(AuthRequest, env.payload)
            for cid in req.allowed_credential_ids:
                cred = st.sealed_builtin.get(bytes(cid))
                if cred is not None and cred.rp_id == req.rp_id:
                    return self._builtin_assert(cred, req, env.origin, ch)
        out = env.replace(sender=self.host, receiver=hsk)
        return self._tag(out, st.sk2.get(hsk))

    def relay_response(self, env: MessageEnvelope, rp: EntityId) -> MessageEnvelope:
        self._verify(env, self._state.sk2.get(env.sender))
        ch = self._channel(env.origin)
        return self._tag(env.replace(sender=self.host, receiver=ch.rp), ch.key)

    def relay_ack(self, env: MessageEnvelope, hsk: EntityId) -> MessageEnvelope:
        ch = self._channel(env.origin)
        self._verify(env, ch.key)
        return self._tag(env.replace(sender=self.host, receiver=hsk), self._state.sk2.get(hsk))

    def error_report(self, env: MessageEnvelope, exc: FidoSimError) -> MessageEnvelope | None:
        ch = self._state.sk1.get(env.origin)
        if ch is None or exc.code is None:
            return None
        notice = Notice("error", "", b"", exc.code.value, str(exc))
        out = MessageEnvelope(MsgType.NOTIFY, self.host, ch.rp, env.origin, encode_body(notice))
        return self._tag(out, ch.key)

    # -- built-in authenticator ------------------------------------------------

    def _seal(self, secret: bytes) -> SealedBlob:
        nonce = self._rng.randbytes(12)
        ct = AESGCM(bytes(self._state.seal_key)).encrypt(nonce, secret, bytes(self._state.measurement))
        return SealedBlob(nonce, ct)

    def _unseal(self, blob: SealedBlob) -> bytes:
        try:
            return AESGCM(bytes(self._state.seal_key)).decrypt(
                blob.nonce, blob.ciphertext, bytes(self._state.measurement)
            )
        except InvalidTag:
            raise SealCorrupted("sealed key does not belong to this enclave") from None

    def register_builtin(self, rp, username: str, approval_token: bytes | None) -> bytes:
        """Enroll this enclave as an authenticator for ``username`` at ``rp``.

        ``approval_token`` is what the RP hands out after a fresh assertion from
        an already-registered external key.
        """
        if not approval_token:
            raise ApprovalRequired("tap a registered security key to approve this device")
        if not self.has_channel(rp.origin):
            raise NoTee("no attested channel to this RP")
        ch = self._state.sk1[rp.origin]
        kp = core.generate_keypair(SigAlg.STRONG_EC, self._rng)
        cred_id = self._rng.randbytes(core.CREDENTIAL_ID_SIZE)
        reg = BuiltinRegistration(username, cred_id, kp.public, SigAlg.STRONG_EC, approval_token)
        body = encode_body(reg)
        mac = core.mac_tag(ch.key, body) if self.macs else None
        rp.register_builtin(self.host, body, mac)
        blob = self._seal(kp.private)
        self._state.sealed_builtin[cred_id] = BuiltinCredential(rp.rp_id, username, cred_id, kp.public, blob)
        return cred_id

    def authenticate_builtin(self, req: AuthRequest, origin: str) -> AssertionResponse:
        for cid in req.allowed_credential_ids:
            cred = self._state.sealed_builtin.get(bytes(cid))
            if cred is not None and cred.rp_id == req.rp_id:
                break
        else:
            raise ApprovalRequired("no built-in credential registered for this RP")
        private = self._unseal(cred.sealed)
        cred.counter = core.u32(cred.counter + 1)
        rp_id_hash = core.hash(req.rp_id.encode())
        cdh = client_data_hash(RequestType.GET, req.challenge, origin)
        sig = core.sign(KeyPair(SigAlg.STRONG_EC, cred.public_key, private), assertion_data(rp_id_hash, cred.counter, cdh, None))
        return AssertionResponse(cred.credential_id, cred.counter, sig, cdh, rp_id_hash, None)

    def _builtin_assert(self, cred: BuiltinCredential, req: AuthRequest, origin: str, ch: RpChannel) -> MessageEnvelope:
        resp = self.authenticate_builtin(req, origin)
        out = MessageEnvelope(MsgType.AUTH_RESPONSE, self.host, ch.rp, origin, encode_body(resp))
        return self._tag(out, ch.key)

    def export_sealed(self, credential_id: bytes) -> BuiltinCredential:
        """The sealed record as it would sit on disk; useless without this enclave."""
        return self._state.sealed_builtin[credential_id]

    def import_sealed(self, cred: BuiltinCredential) -> None:
        self._state.sealed_builtin[cred.credential_id] = cred

    def builtin_ids(self) -> list[bytes]:
        return list(self._state.sealed_builtin)

    def snapshot(self) -> dict:
        st = self._state
        return {
            "platform_id": st.platform_id,
            "measurement": st.measurement.hex(),
            "channels": sorted(st.sk1),
            "hsks": sorted(str(h) for h in st.sk2),
            "builtin": sorted(c.hex() for c in st.sealed_builtin),
            "expected_origin": st.expected_origin,
        }
