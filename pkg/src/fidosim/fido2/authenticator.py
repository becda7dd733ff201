"""Hardware security key: credential store, counters, attestation and assertion."""

from __future__ import annotations

import copy
import enum
import random
from collections.abc import Callable
from dataclasses import dataclass, field

from .. import core, hashlist
from ..core import Digest, EntityId, EntityKind, KeyPair, SigAlg
from ..envelope import MessageEnvelope, MsgType, decode_body, encode_body
from ..errors import FidoSimError, NoAcceptableAlgorithm, UnknownCredential, UserPresenceDenied
from ..events import EventLog
from ..hashlist import HskChallengeSlot
from .messages import (
    AssertionResponse,
    AttestationResponse,
    AuthRequest,
    CtapAuthRequest,
    CtapRegistrationRequest,
    RegistrationRequest,
    RequestType,
    assertion_data,
    attestation_data,
    client_data_hash,
)


class CounterMode(enum.Enum):
    PER_CREDENTIAL = "PER_CREDENTIAL"
    GLOBAL = "GLOBAL"


@dataclass
class HskCredential:
    credential_id: bytes
    rp_id: str
    username: str
    keypair: KeyPair
    counter: int = 0
    slot: HskChallengeSlot = field(default_factory=HskChallengeSlot)


@dataclass
class HskState:
    device_id: str
    attestation_keypair: KeyPair
    make_model: str = "SimKey 5 NFC"
    credentials: dict[bytes, HskCredential] = field(default_factory=dict)
    counter_mode: CounterMode = CounterMode.PER_CREDENTIAL
    global_counter: int | None = None
    supported_algs: tuple[SigAlg, ...] = tuple(SigAlg)
    stores_challenge_hash: bool = True

    def __post_init__(self):
        if self.counter_mode is CounterMode.GLOBAL and self.global_counter is None:
            self.global_counter = 0


@dataclass(frozen=True)
class PresencePrompt:
    hsk: EntityId
    action: str  # "register" or "login"
    rp_id: str
    display: object | None = None


PresenceOracle = Callable[[PresencePrompt], bool]


def always_tap(prompt: PresencePrompt) -> bool:
    return True


def choose_alg(alg_list: list[SigAlg], supported: tuple[SigAlg, ...]) -> SigAlg:
    usable = [a for a in alg_list if a in supported]
    if not usable:
        raise NoAcceptableAlgorithm(f"none of {alg_list} supported")
    return max(usable, key=lambda a: a.strength_rank)


class Authenticator:
    """A roaming authenticator reachable through the client.

    ``presence`` is asked whenever a request needs a user-presence tap; the
    default taps unconditionally, which is how an attacker-owned key behaves.
    """

    def __init__(
        self,
        state: HskState,
        rng: random.Random,
        presence: PresenceOracle | None = None,
        events: EventLog | None = None,
    ):
        self.state = state
        self.rng = rng
        self.presence = presence or always_tap
        self.events = events if events is not None else EventLog()
        self.id = EntityId(EntityKind.HSK, state.device_id)

    # -- ceremonies ------------------------------------------------------------

    def handle_registration(
        self, req: CtapRegistrationRequest, user_taps: bool
    ) -> AttestationResponse:
        inner = req.inner
        if inner.requires_user_presence and not user_taps:
            raise UserPresenceDenied(f"user declined registration at {inner.rp_id}")
        alg = choose_alg(inner.alg_list, self.state.supported_algs)
        keypair = core.generate_keypair(alg, self.rng)
        cred = HskCredential(
            credential_id=self.rng.randbytes(core.CREDENTIAL_ID_SIZE),
            rp_id=inner.rp_id,
            username=inner.username,
            keypair=keypair,
        )
        if self.state.counter_mode is CounterMode.GLOBAL:
            counter = self.state.global_counter
        else:
            counter = cred.counter
        if self.state.stores_challenge_hash:
            hashlist.hsk_on_registration(cred.slot, inner.challenge)
        self.state.credentials[cred.credential_id] = cred
        fields = dict(
            credential_id=cred.credential_id,
            public_key=keypair.public,
            alg=alg,
            rp_id_hash=core.hash(inner.rp_id.encode()),
            counter=counter,
            client_data_hash=client_data_hash(RequestType.CREATE, inner.challenge, req.origin),
        )
        sig = core.sign(self.state.attestation_keypair, attestation_data(fields))
        return AttestationResponse(
            **fields,
            attestation_sig=sig,
            attestation_public=self.state.attestation_keypair.public,
            make_model=self.state.make_model,
        )

    def find_credential(self, inner: AuthRequest) -> HskCredential:
        for cid in inner.allowed_credential_ids:
            cred = self.state.credentials.get(bytes(cid))
            if cred is not None and cred.rp_id == inner.rp_id:
                return cred
        if not inner.allowed_credential_ids:
            for cred in self.state.credentials.values():
                if cred.rp_id == inner.rp_id:
                    return cred
        raise UnknownCredential(f"no credential for {inner.rp_id}")

    def _next_counter(self, cred: HskCredential) -> int:
        if self.state.counter_mode is CounterMode.GLOBAL:
            self.state.global_counter = core.u32(self.state.global_counter + 1)
            return self.state.global_counter
        cred.counter = core.u32(cred.counter + 1)
        return cred.counter

    def handle_authentication(self, req: CtapAuthRequest, user_taps: bool) -> AssertionResponse:
        inner = req.inner
        cred = self.find_credential(inner)
        if not user_taps:
            raise UserPresenceDenied(f"user declined login at {inner.rp_id}")
        counter = self._next_counter(cred)
        stored: Digest | None = None
        if self.state.stores_challenge_hash:
            stored = hashlist.hsk_on_authentication(cred.slot, inner.challenge)
        rp_id_hash = core.hash(inner.rp_id.encode())
        cdh = client_data_hash(RequestType.GET, inner.challenge, req.origin)
        sig = core.sign(cred.keypair, assertion_data(rp_id_hash, counter, cdh, stored))
        return AssertionResponse(cred.credential_id, counter, sig, cdh, rp_id_hash, stored)

    # -- message handling ------------------------------------------------------

    def _check_envelope(self, env: MessageEnvelope) -> bool:
        """Authenticate the incoming envelope; True when it came over a keyed channel."""
        return False

    def _display(self, action: str, inner, env: MessageEnvelope, secure: bool):
        return None

    def _finish(self, req_env: MessageEnvelope, out: MessageEnvelope, secure: bool) -> MessageEnvelope:
        return out

    def _ack(self, env: MessageEnvelope) -> list[MessageEnvelope]:
        return []

    def _ask(self, action: str, rp_id: str, display) -> bool:
        return bool(self.presence(PresencePrompt(self.id, action, rp_id, display)))

    def receive(self, env: MessageEnvelope) -> list[MessageEnvelope]:
        try:
            if env.msg_type is MsgType.REG_ACK:
                return self._ack(env)
            secure = self._check_envelope(env)
            if env.msg_type is MsgType.REG_REQUEST:
                inner = decode_body(RegistrationRequest, env.payload)
                display = self._display("register", inner, env, secure)
                taps = self._ask("register", inner.rp_id, display) if inner.requires_user_presence else True
                resp = self.handle_registration(CtapRegistrationRequest(inner, env.origin), taps)
                out_type = MsgType.REG_RESPONSE
            elif env.msg_type is MsgType.AUTH_REQUEST:
                inner = decode_body(AuthRequest, env.payload)
                self.find_credential(inner)
                display = self._display("login", inner, env, secure)
                taps = self._ask("login", inner.rp_id, display)
                resp = self.handle_authentication(CtapAuthRequest(inner, env.origin), taps)
                out_type = MsgType.AUTH_RESPONSE
            else:
                return []
        except FidoSimError as exc:
            self.events.reject(self.id, type(exc).__name__, str(exc))
            return []
        out = MessageEnvelope(out_type, self.id, env.sender, env.origin, encode_body(resp))
        return [self._finish(env, out, secure)]

    def on_idle(self) -> list[MessageEnvelope]:
        return []

    # -- physical access -------------------------------------------------------

    def clone(self, device_id: str | None = None) -> Authenticator:
        """Bit-for-bit copy of the credential state under a new network identity."""
        state = copy.deepcopy(self.state)
        state.device_id = device_id or f"{self.state.device_id}-clone"
        return Authenticator(state, self.rng, events=self.events)

    def snapshot(self) -> dict:
        return {
            "device_id": self.state.device_id,
            "global_counter": self.state.global_counter,
            "credentials": {
                cid.hex(): {
                    "rp_id": c.rp_id,
                    "counter": c.counter,
                    "hash_c": c.slot.hash_c.hex() if c.slot.hash_c else None,
                }
                for cid, c in sorted(self.state.credentials.items())
            },
        }
