"""Relying party: accounts, ceremonies, clone checks, cookies and policy gates."""

from __future__ import annotations

import enum
import random
from collections.abc import Callable
from dataclasses import dataclass, field

from .. import core, hashlist
from ..core import Clock, Digest, EntityId, EntityKind, SigAlg, SymmetricKey
from ..envelope import MessageEnvelope, MsgType, check, decode_body, encode_body, seal
from ..errors import (
    ApprovalRequired,
    AttestationRequiredButInvalid,
    BadSignature,
    ChallengeMismatch,
    CloneSuspected,
    ErrorCode,
    ExpiredCookie,
    FidoSimError,
    MacFailure,
    MaxHsksReached,
    NoAcceptableAlgorithm,
    PasswordRequired,
    PolicyDenied,
    RememberExpired,
    UnknownCookie,
    UnknownCredential,
)
from ..events import Detector, EventLog
from ..hashlist import HashListState, ListVerdict
from .messages import (
    AssertionResponse,
    AttestationResponse,
    AuthRequest,
    Notice,
    RegistrationAck,
    RegistrationRequest,
    RequestType,
    assertion_data_of,
    attestation_data_of,
    client_data_hash,
)
from .policy import AuthBeforeAdd, CloneMode, RememberMode, RpPolicy, RpPreset


class Purpose(enum.Enum):
    LOGIN = "LOGIN"
    STEP_UP = "STEP_UP"


class Channel(enum.Enum):
    EMAIL = "EMAIL"


@dataclass
class Notification:
    channel: Channel
    body: str
    mentions_make_model: bool
    mentions_total_hsk_count: bool
    username: str = ""
    kind: str = "registration"
    make_model: str | None = None
    total_hsks: int | None = None


@dataclass
class RememberCookie:
    value: bytes
    account: str
    expiry_days: int
    issued_day: int = 0

    def expired(self, today: int) -> bool:
        return today >= self.issued_day + self.expiry_days


@dataclass
class RpCredential:
    credential_id: bytes
    public_key: bytes
    alg: SigAlg
    counter: int
    hash_list: HashListState | None
    nickname: str
    make_model: str
    registered_day: int = 0
    frozen: bool = False
    builtin_client: EntityId | None = None


@dataclass
class Session:
    token: bytes
    username: str
    client: EntityId
    via: str
    challenge: bytes | None = None


@dataclass
class RpAccount:
    username: str
    credentials: dict[bytes, RpCredential] = field(default_factory=dict)
    cookies: dict[bytes, RememberCookie] = field(default_factory=dict)
    notification_outbox: list[Notification] = field(default_factory=list)
    sessions: dict[bytes, Session] = field(default_factory=dict)
    step_up_tokens: set[bytes] = field(default_factory=set)

    def external_credentials(self) -> list[RpCredential]:
        return [c for c in self.credentials.values() if c.builtin_client is None]


@dataclass(frozen=True)
class AuthEvidence:
    password_ok: bool = False
    step_up_token: bytes | None = None


@dataclass
class Pending:
    kind: MsgType
    username: str
    client: EntityId
    challenge: bytes
    request: RegistrationRequest | AuthRequest
    expected_cdh: Digest
    purpose: Purpose = Purpose.LOGIN
    remember: bool = False


@dataclass(frozen=True)
class BuiltinRegistration:
    username: str
    credential_id: bytes
    public_key: bytes
    alg: SigAlg
    approval_token: bytes


_DETECTING = (CloneSuspected, MacFailure)


class RelyingParty:
    def __init__(
        self,
        preset: RpPreset,
        rng: random.Random,
        *,
        events: EventLog | None = None,
        clock: Clock | None = None,
        clone_mode: CloneMode = CloneMode.COUNTER,
        policy: RpPolicy | None = None,
        trusted_attestation_keys: tuple[bytes, ...] = (),
        hashlist_capacity: int | None = hashlist.DEFAULT_CAPACITY,
        mailer: Callable[[Notification], None] | None = None,
        macs: bool = True,
    ):
        self.preset = preset
        self.rp_id = preset.rp_id
        self.name = preset.name
        self.origin = preset.origin
        self.policy = policy or preset.policy
        self.rng = rng
        self.events = events if events is not None else EventLog()
        self.clock = clock or Clock()
        self.clone_mode = clone_mode
        self.trusted_attestation_keys = set(trusted_attestation_keys)
        self.hashlist_capacity = hashlist_capacity
        self.mailer = mailer
        self.macs = macs
        self.id = EntityId(EntityKind.RP, preset.rp_id)
        self.accounts: dict[str, RpAccount] = {}
        self.pending: dict[bytes, Pending] = {}
        self.channel_keys: dict[EntityId, SymmetricKey] = {}
        self.session_log: list[Session] = []

    # -- accounts --------------------------------------------------------------

    def create_account(self, username: str) -> RpAccount:
        return self.accounts.setdefault(username, RpAccount(username))

    def account(self, username: str) -> RpAccount:
        try:
            return self.accounts[username]
        except KeyError:
            raise UnknownCredential(f"no account {username!r} at {self.rp_id}") from None

    def lockout(self, username: str) -> None:
        """Account recovery after a user report: every credential and session is revoked."""
        acct = self.account(username)
        acct.credentials.clear()
        acct.sessions.clear()
        acct.cookies.clear()
        acct.step_up_tokens.clear()
        self.pending = {k: p for k, p in self.pending.items() if p.username != username}
        self.events.note(self.id, "LOCKOUT", username)

    def session_valid(self, username: str, token: bytes) -> bool:
        acct = self.accounts.get(username)
        return acct is not None and bytes(token) in acct.sessions

    # -- channel helpers -------------------------------------------------------

    def _out(self, env: MessageEnvelope) -> MessageEnvelope:
        key = self.channel_keys.get(env.receiver)
        if key is not None and self.macs:
            return seal(env, key)
        return env

    def _authenticate(self, env: MessageEnvelope) -> None:
        key = self.channel_keys.get(env.sender)
        if key is not None and self.macs and not check(env, key):
            raise MacFailure(f"bad channel MAC from {env.sender}")

    def _mail(self, acct: RpAccount, note: Notification) -> None:
        acct.notification_outbox.append(note)
        if self.mailer is not None:
            self.mailer(note)

    def _notice(self, client: EntityId, notice: Notice) -> MessageEnvelope:
        env = MessageEnvelope(MsgType.NOTIFY, self.id, client, self.origin, encode_body(notice))
        return self._out(env)

    # -- registration ----------------------------------------------------------

    def add_additional_hsk(self, username: str, evidence: AuthEvidence | None) -> bool:
        acct = self.account(username)
        rule = self.policy.auth_before_additional_hsk
        evidence = evidence or AuthEvidence()
        if rule is AuthBeforeAdd.NONE:
            return True
        if rule is AuthBeforeAdd.PASSWORD:
            if evidence.password_ok:
                return True
            raise PolicyDenied("password required before adding a security key")
        token = evidence.step_up_token
        if token is not None and bytes(token) in acct.step_up_tokens:
            acct.step_up_tokens.discard(bytes(token))
            return True
        raise PolicyDenied("authenticate with a registered security key first")

    def registration_request(
        self, username: str, client: EntityId, evidence: AuthEvidence | None = None
    ) -> RegistrationRequest:
        acct = self.account(username)
        existing = acct.external_credentials()
        if self.policy.max_hsks is not None and len(existing) >= self.policy.max_hsks:
            raise MaxHsksReached(f"{self.name} allows {self.policy.max_hsks} security key(s)")
        if existing:
            self.add_additional_hsk(username, evidence)
        req = RegistrationRequest(
            challenge=self.rng.randbytes(core.CHALLENGE_SIZE),
            rp_id=self.rp_id,
            rp_name=self.name,
            username=username,
            alg_list=self.policy.advertised_algs(),
            requires_user_presence=True,
            is_first_authenticator=not existing,
        )
        cdh = client_data_hash(RequestType.CREATE, req.challenge, self.origin)
        self.pending[req.challenge] = Pending(
            MsgType.REG_REQUEST, username, client, req.challenge, req, cdh
        )
        return req

    def begin_registration(
        self, username: str, client: EntityId, evidence: AuthEvidence | None = None
    ) -> MessageEnvelope:
        req = self.registration_request(username, client, evidence)
        env = MessageEnvelope(MsgType.REG_REQUEST, self.id, client, self.origin, encode_body(req))
        return self._out(env)

    def _match_pending(self, kind: MsgType, cdh: bytes, client: EntityId) -> Pending:
        for challenge, p in self.pending.items():
            if p.kind is kind and p.expected_cdh == cdh and p.client == client:
                del self.pending[challenge]
                return p
        raise ChallengeMismatch("response does not answer an outstanding challenge")

    def finish_registration(self, env: MessageEnvelope, resp: AttestationResponse) -> list[MessageEnvelope]:
        p = self._match_pending(MsgType.REG_REQUEST, resp.client_data_hash, env.sender)
        if resp.rp_id_hash != core.hash(self.rp_id.encode()):
            raise ChallengeMismatch("response bound to another RP")
        if not core.verify(SigAlg.STRONG_EC, resp.attestation_public, attestation_data_of(resp), resp.attestation_sig):
            raise BadSignature("attestation signature invalid")
        if self.policy.require_attestation and resp.attestation_public not in self.trusted_attestation_keys:
            raise AttestationRequiredButInvalid("attestation key is not from a known vendor")
        if resp.alg not in p.request.alg_list:
            raise NoAcceptableAlgorithm(f"{resp.alg.name} was not offered")
        acct = self.account(p.username)
        hl = None
        if self.clone_mode is CloneMode.HASHLIST:
            hl = hashlist.initial_list(p.challenge, self.hashlist_capacity)
        nth = len(acct.external_credentials()) + 1
        acct.credentials[bytes(resp.credential_id)] = RpCredential(
            credential_id=bytes(resp.credential_id),
            public_key=bytes(resp.public_key),
            alg=resp.alg,
            counter=resp.counter,
            hash_list=hl,
            nickname=f"Security key {nth}",
            make_model=resp.make_model,
            registered_day=self.clock.day,
        )
        self.events.note(self.id, "REGISTERED", f"{p.username} {resp.credential_id.hex()[:8]}")
        if self.policy.sends_registration_email:
            self._mail(acct, self._registration_email(acct, resp.make_model))
        out = []
        if self.channel_keys.get(env.sender) is not None:
            ack = RegistrationAck(core.hash(env.payload))
            out.append(self._out(MessageEnvelope(MsgType.REG_ACK, self.id, env.sender, self.origin, encode_body(ack))))
        return out

    def _registration_email(self, acct: RpAccount, make_model: str) -> Notification:
        total = len(acct.external_credentials())
        if self.policy.email_includes_make_model:
            body = (
                f"A security key ({make_model}) was added to your {self.name} account. "
                f"You now have {total} security key(s) registered."
            )
            return Notification(Channel.EMAIL, body, True, True, acct.username, "registration", make_model, total)
        body = f"A security key was added to your {self.name} account."
        return Notification(Channel.EMAIL, body, False, False, acct.username, "registration")

    # -- authentication --------------------------------------------------------

    def authentication_request(
        self,
        username: str,
        client: EntityId,
        *,
        password_ok: bool = True,
        purpose: Purpose = Purpose.LOGIN,
        remember: bool = False,
        use_builtin: bool = False,
    ) -> AuthRequest:
        acct = self.account(username)
        if purpose is Purpose.LOGIN and not password_ok:
            raise PasswordRequired("password check failed")
        if use_builtin:
            creds = [c for c in acct.credentials.values() if c.builtin_client == client]
            if creds and all(
                self.clock.day >= c.registered_day + self.policy.remember_device_days for c in creds
            ):
                raise RememberExpired("remembered device has expired")
        else:
            creds = acct.external_credentials()
        creds = [c for c in creds if not c.frozen]
        if not creds:
            raise UnknownCredential(f"{username} has no usable credential at {self.rp_id}")
        req = AuthRequest(
            challenge=self.rng.randbytes(core.CHALLENGE_SIZE),
            rp_id=self.rp_id,
            allowed_credential_ids=[c.credential_id for c in creds],
        )
        for c in creds:
            if c.hash_list is not None:
                hashlist.rp_on_send(c.hash_list, req.challenge)
        cdh = client_data_hash(RequestType.GET, req.challenge, self.origin)
        self.pending[req.challenge] = Pending(
            MsgType.AUTH_REQUEST, username, client, req.challenge, req, cdh, purpose, remember
        )
        return req

    def begin_authentication(self, username: str, client: EntityId, **kw) -> MessageEnvelope:
        req = self.authentication_request(username, client, **kw)
        env = MessageEnvelope(MsgType.AUTH_REQUEST, self.id, client, self.origin, encode_body(req))
        return self._out(env)

    def _clone_check(self, acct: RpAccount, cred: RpCredential, resp: AssertionResponse) -> None:
        if not self.policy.detects_clones:
            cred.counter = resp.counter
            return
        use_list = (
            self.clone_mode is CloneMode.HASHLIST
            and resp.stored_challenge_hash is not None
            and cred.hash_list is not None
        )
        if use_list:
            if hashlist.rp_on_response(cred.hash_list, resp.stored_challenge_hash) is ListVerdict.CLONE_DETECTED:
                cred.frozen = True
                self._mail(acct, Notification(
                    Channel.EMAIL,
                    f"Sign-in with {cred.nickname} was blocked. {self.policy.clone_error_text() or ''}".strip(),
                    False, False, acct.username, "clone",
                ))
                raise CloneSuspected("returned challenge hash is not outstanding")
        elif not (resp.counter == 0 and cred.counter == 0) and resp.counter <= cred.counter:
            raise CloneSuspected(f"counter {resp.counter} not above stored {cred.counter}")
        cred.counter = resp.counter

    def finish_authentication(self, env: MessageEnvelope, resp: AssertionResponse) -> list[MessageEnvelope]:
        p = self._match_pending(MsgType.AUTH_REQUEST, resp.client_data_hash, env.sender)
        acct = self.account(p.username)
        cred = acct.credentials.get(bytes(resp.credential_id))
        if cred is None or bytes(resp.credential_id) not in p.request.allowed_credential_ids:
            raise UnknownCredential("credential not registered to this account")
        if cred.frozen:
            raise PolicyDenied("credential frozen after clone detection")
        if resp.rp_id_hash != core.hash(self.rp_id.encode()):
            raise ChallengeMismatch("assertion bound to another RP")
        if not core.verify(cred.alg, cred.public_key, assertion_data_of(resp), resp.signature):
            raise BadSignature("assertion signature invalid")
        self._clone_check(acct, cred, resp)
        return self._grant(acct, p, cred, env.sender)

    def _grant(self, acct: RpAccount, p: Pending, cred: RpCredential, client: EntityId) -> list[MessageEnvelope]:
        if p.purpose is Purpose.STEP_UP:
            token = self.rng.randbytes(32)
            acct.step_up_tokens.add(token)
            self.events.note(self.id, "STEP_UP", acct.username)
            return [self._notice(client, Notice("step_up", acct.username, token))]
        via = "builtin" if cred.builtin_client is not None else "hsk"
        out = [self._notice(client, self._open_session(acct, client, via, p.challenge))]
        if p.remember and via == "hsk":
            if self.policy.remember_mode is RememberMode.COOKIE:
                cookie = self.issue_remember_cookie(acct.username)
                out.append(self._notice(client, Notice("remember", acct.username, cookie.value)))
            else:
                token = self.rng.randbytes(32)
                acct.step_up_tokens.add(token)
                self.events.note(self.id, "BUILTIN_APPROVED", acct.username)
                out.append(self._notice(client, Notice("builtin_approval", acct.username, token)))
        return out

    def _open_session(self, acct: RpAccount, client: EntityId, via: str, challenge: bytes | None) -> Notice:
        token = self.rng.randbytes(32)
        session = Session(token, acct.username, client, via, challenge)
        acct.sessions[token] = session
        self.session_log.append(session)
        self.events.note(self.id, "SESSION", f"{acct.username} via {via} for {client}")
        return Notice("session", acct.username, token)

    # -- remember-this-device --------------------------------------------------

    def issue_remember_cookie(self, username: str) -> RememberCookie:
        acct = self.account(username)
        cookie = RememberCookie(
            self.rng.randbytes(32), username, self.policy.remember_device_days, self.clock.day
        )
        acct.cookies[cookie.value] = cookie
        return cookie

    def accept_cookie(self, username: str, value: bytes, password_ok: bool, client: EntityId) -> bytes:
        """Log in with password plus remember cookie; no authenticator involved."""
        acct = self.account(username)
        cookie = acct.cookies.get(bytes(value))
        if cookie is None:
            raise UnknownCookie("cookie not recognised")
        if cookie.expired(self.clock.day):
            raise ExpiredCookie(f"cookie expired after {cookie.expiry_days} days")
        if not password_ok:
            raise PasswordRequired("password check failed")
        return self._open_session(acct, client, "cookie", None).token

    def register_builtin(self, client: EntityId, body: bytes, mac: bytes | None) -> None:
        """Enroll a Verifier's built-in key; ``body`` is an encoded BuiltinRegistration."""
        key = self.channel_keys.get(client)
        if key is None:
            raise MacFailure("built-in registration needs an attested channel")
        if self.macs and (mac is None or not core.mac_verify(key, body, mac)):
            raise MacFailure("built-in registration MAC invalid")
        reg = decode_body(BuiltinRegistration, body)
        acct = self.account(reg.username)
        if bytes(reg.approval_token) not in acct.step_up_tokens:
            raise ApprovalRequired("built-in authenticator needs approval from a registered key")
        acct.step_up_tokens.discard(bytes(reg.approval_token))
        acct.credentials[bytes(reg.credential_id)] = RpCredential(
            credential_id=bytes(reg.credential_id),
            public_key=bytes(reg.public_key),
            alg=reg.alg,
            counter=0,
            hash_list=None,
            nickname="This device",
            make_model="built-in",
            registered_day=self.clock.day,
            builtin_client=client,
        )
        self.events.note(self.id, "BUILTIN_REGISTERED", reg.username)

    # -- network ---------------------------------------------------------------

    def receive(self, env: MessageEnvelope) -> list[MessageEnvelope]:
        try:
            self._authenticate(env)
            if env.msg_type is MsgType.REG_RESPONSE:
                return self.finish_registration(env, decode_body(AttestationResponse, env.payload))
            if env.msg_type is MsgType.AUTH_RESPONSE:
                return self.finish_authentication(env, decode_body(AssertionResponse, env.payload))
            if env.msg_type is MsgType.NOTIFY:
                notice = decode_body(Notice, env.payload)
                if notice.kind == "error" and notice.code:
                    self.events.detect(Detector.RP, self.id, notice.code, f"reported by {env.sender}")
            return []
        except FidoSimError as exc:
            return self._refuse(env, exc)

    def _refuse(self, env: MessageEnvelope, exc: FidoSimError) -> list[MessageEnvelope]:
        name = type(exc).__name__
        if isinstance(exc, _DETECTING):
            self.events.detect(Detector.RP, self.id, exc.code, str(exc))
        else:
            self.events.reject(self.id, name, str(exc))
        if isinstance(exc, CloneSuspected):
            text = self.policy.clone_error_text() or ""
            code = ErrorCode.DEVICE_CLONING_DETECTED.value
        else:
            text, code = str(exc), (exc.code.value if exc.code else name)
        if env.sender.kind not in (EntityKind.CLIENT, EntityKind.ADVERSARY):
            return []
        return [self._notice(env.sender, Notice("error", "", b"", code, text))]

    def on_idle(self) -> list[MessageEnvelope]:
        return []

    def snapshot(self) -> dict:
        return {
            "rp_id": self.rp_id,
            "pending": sorted(c.hex() for c in self.pending),
            "accounts": {
                u: {
                    "credentials": {
                        cid.hex(): {
                            "counter": c.counter,
                            "frozen": c.frozen,
                            "hash_list": c.hash_list.dump() if c.hash_list is not None else None,
                        }
                        for cid, c in sorted(a.credentials.items())
                    },
                    "sessions": len(a.sessions),
                }
                for u, a in sorted(self.accounts.items())
            },
        }
