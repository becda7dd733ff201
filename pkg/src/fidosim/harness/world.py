"""Wiring of RPs, hosts and users onto one network, plus ceremony drivers.

A ``World`` owns the seeded RNG, the event log and the network. Drivers run a
ceremony to quiescence and then let the account holder react to whatever the
ceremony produced: emails, login errors and the authenticator's ack display.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .. import core
from ..core import Clock, EntityKind, SigAlg
from ..envelope import decode_body
from ..errors import ErrorCode, FidoSimError
from ..events import Detector, EventLog
from ..fido2.authenticator import Authenticator, HskState, PresencePrompt
from ..fido2.client import Client
from ..fido2.messages import AuthRequest, RegistrationRequest
from ..fido2.policy import CloneMode, RpPreset
from ..fido2.relying_party import AuthEvidence, Purpose, RelyingParty
from ..vfido2.attestation import AttestationService
from ..vfido2.channels import attest
from ..vfido2.display import DisplayAuthenticator
from ..vfido2.verifier import Verifier
from ..adversary.user import Action, AckStimulus, Intent, LoginError, NotificationDelivery, User
from ..network import DropRule, Network


class ProtocolKind(enum.Enum):
    FIDO2 = "FIDO2"
    VFIDO2 = "VFIDO2"


@dataclass
class Host:
    """A computer with a browser, maybe an enclave, and a plugged-in key."""

    name: str
    client: Client
    hsk: Authenticator | None
    verifier: Verifier | None = None
    user: User | None = None
    adversary: bool = False


@dataclass
class CeremonyResult:
    ok: bool
    challenge: bytes | None = None
    token: bytes | None = None
    reaction: Action | None = None
    error: str | None = None


@dataclass
class _Seen:
    outbox: dict[tuple[str, str], int] = field(default_factory=dict)


class World:
    def __init__(
        self,
        seed: int,
        protocol: ProtocolKind = ProtocolKind.FIDO2,
        clone_mode: CloneMode = CloneMode.COUNTER,
        *,
        macs: bool = True,
        pin_top_level: bool = False,
        drop: list[int] | DropRule | None = None,
        steps_budget: int = 10_000,
    ):
        self.seed = seed
        self.protocol = protocol
        self.clone_mode = clone_mode
        self.macs = macs
        self.pin_top_level = pin_top_level
        self.rng = core.make_rng(seed)
        self.clock = Clock()
        self.events = EventLog()
        self.network = Network(self.events, drop=drop, steps_budget=steps_budget)
        self.vendor_key = core.generate_keypair(SigAlg.STRONG_EC, self.rng)
        self.service = AttestationService(self.rng) if protocol is ProtocolKind.VFIDO2 else None
        self.rps: dict[str, RelyingParty] = {}
        self.hosts: dict[str, Host] = {}
        self.believed_keys: dict[tuple[str, str], int] = {}
        self._seen = _Seen()

    @property
    def hardened(self) -> bool:
        return self.protocol is ProtocolKind.VFIDO2

    # -- construction ----------------------------------------------------------

    def add_rp(self, preset: RpPreset, **policy_overrides) -> RelyingParty:
        policy = preset.policy.replace(**policy_overrides)
        if self.hardened:
            policy = policy.hardened()
        rp = RelyingParty(
            preset,
            self.rng,
            events=self.events,
            clock=self.clock,
            clone_mode=self.clone_mode,
            policy=policy,
            trusted_attestation_keys=(self.vendor_key.public,),
            macs=self.macs,
        )
        self.rps[rp.rp_id] = rp
        self.network.attach(rp)
        return rp

    def add_host(
        self,
        name: str,
        *,
        user: User | None = None,
        tee: bool | None = None,
        adversary: bool = False,
        software_key: bool = False,
        make_model: str = "SimKey 5 NFC",
    ) -> Host:
        if tee is None:
            tee = self.hardened and not adversary
        kind = EntityKind.ADVERSARY if adversary else EntityKind.CLIENT
        verifier = None
        if tee and self.service is not None:
            verifier = Verifier(
                name, self.rng, events=self.events, macs=self.macs,
                pin_top_level=self.pin_top_level, host=core.EntityId(kind, name),
            )
        attestation = (
            core.generate_keypair(SigAlg.STRONG_EC, self.rng) if software_key else self.vendor_key
        )
        state = HskState(f"{name}-key", attestation, make_model=make_model)
        presence = user.presence if user is not None else None
        if self.hardened and not software_key:
            hsk: Authenticator = DisplayAuthenticator(state, self.rng, presence, self.events, macs=self.macs)
        else:
            hsk = Authenticator(state, self.rng, presence, self.events)
        client = Client(name, hsk=hsk.id, verifier=verifier, events=self.events, kind=kind)
        if user is not None:
            user.on_mismatch = self._display_mismatch(user)
        host = Host(name, client, hsk, verifier, user, adversary)
        self.hosts[name] = host
        self.network.attach(client)
        self.network.attach(hsk)
        return host

    def add_device(self, hsk: Authenticator) -> None:
        self.network.attach(hsk)

    def _display_mismatch(self, user: User):
        def flag(prompt: PresencePrompt) -> None:
            self.events.detect(
                Detector.HSK_DISPLAY,
                core.EntityId(EntityKind.USER, user.name),
                "DISPLAY_MISMATCH",
                f"declined {prompt.action} shown as {prompt.display.rp_name}",
            )

        return flag

    # -- channels --------------------------------------------------------------

    def pair_hsk(self, verifier: Verifier | None, hsk: Authenticator | None) -> None:
        if verifier is None or not isinstance(hsk, DisplayAuthenticator):
            return
        attest(hsk, verifier, self.service, self.rng)

    def connect(self, host: Host, rp: RelyingParty, *, top_level: bool = True) -> None:
        if top_level:
            host.client.open_page(rp.id, rp.origin)
        else:
            host.client.know_rp(rp.id, rp.origin)
        if host.verifier is not None:
            attest(rp, host.verifier, self.service, self.rng)
            self.pair_hsk(host.verifier, host.hsk)

    # -- ceremonies ------------------------------------------------------------

    def register(
        self,
        host: Host,
        rp: RelyingParty,
        username: str,
        *,
        evidence: AuthEvidence | None = None,
        react: bool = True,
    ) -> CeremonyResult:
        acct = rp.create_account(username)
        believed = self.believed_keys.get((rp.rp_id, username), 0)
        if host.user is not None:
            host.user.intend(Intent(
                "register", rp.rp_id, rp.name, username,
                is_first=believed == 0,
                expects_secure=host.verifier is not None,
                make_model=host.hsk.state.make_model if host.hsk else None,
                expected_total=believed + 1,
            ))
        self.connect(host, rp)
        notices = len(host.client.notices)
        try:
            env = rp.begin_registration(username, host.client.id, evidence)
        except FidoSimError as exc:
            self.events.reject(rp.id, type(exc).__name__, str(exc))
            return self._after(host, rp, username, notices, CeremonyResult(False, error=type(exc).__name__), react)
        challenge = decode_body(RegistrationRequest, env.payload).challenge
        self.network.send(env)
        self.network.run()
        own = set(host.hsk.state.credentials) if host.hsk else set()
        ok = any(cid in own for cid in acct.credentials)
        if ok:
            self.believed_keys[(rp.rp_id, username)] = believed + 1
        return self._after(host, rp, username, notices, CeremonyResult(ok, challenge), react)

    def login(
        self,
        host: Host,
        rp: RelyingParty,
        username: str,
        *,
        password_ok: bool = True,
        purpose: Purpose = Purpose.LOGIN,
        remember: bool = False,
        react: bool = True,
        retries: int = 1,
    ) -> CeremonyResult:
        if host.user is not None:
            host.user.intend(Intent(
                "login", rp.rp_id, rp.name, username, expects_secure=host.verifier is not None
            ))
        self.connect(host, rp)
        notices = len(host.client.notices)
        acct = rp.accounts.get(username)
        use_builtin = acct is not None and any(
            c.builtin_client == host.client.id for c in acct.credentials.values()
        )
        try:
            env = rp.begin_authentication(
                username, host.client.id,
                password_ok=password_ok, purpose=purpose, remember=remember, use_builtin=use_builtin,
            )
        except FidoSimError as exc:
            self.events.reject(rp.id, type(exc).__name__, str(exc))
            return self._after(host, rp, username, notices, CeremonyResult(False, error=type(exc).__name__), react)
        challenge = decode_body(AuthRequest, env.payload).challenge
        self.network.send(env)
        self.network.run()
        result = self._grant_result(host, rp, challenge, purpose, notices)
        if result.ok and remember and host.verifier is not None:
            self._enroll_builtin(host, rp, username)
        result = self._after(host, rp, username, notices, result, react)
        if not result.ok and result.reaction is Action.RETRY and retries > 0:
            return self.login(
                host, rp, username,
                password_ok=password_ok, purpose=purpose, remember=remember, react=react, retries=retries - 1,
            )
        return result

    def _grant_result(
        self, host: Host, rp: RelyingParty, challenge: bytes, purpose: Purpose, notices: int
    ) -> CeremonyResult:
        if purpose is Purpose.STEP_UP:
            for origin, n in host.client.notices[notices:]:
                if n.kind == "step_up" and origin == rp.origin:
                    return CeremonyResult(True, challenge, n.token)
            return CeremonyResult(False, challenge)
        for s in reversed(rp.session_log):
            if s.challenge == challenge and s.client == host.client.id:
                return CeremonyResult(True, challenge, s.token)
        return CeremonyResult(False, challenge)

    def _enroll_builtin(self, host: Host, rp: RelyingParty, username: str) -> None:
        approval = host.client.jar.get(rp.origin, "builtin_approval")
        if approval is None:
            return
        try:
            host.verifier.register_builtin(rp, username, approval)
        except FidoSimError as exc:
            self.events.reject(host.client.id, type(exc).__name__, str(exc))
        host.client.jar.entries.get(rp.origin, {}).pop("builtin_approval", None)

    # -- user reactions --------------------------------------------------------

    def _after(
        self, host: Host, rp: RelyingParty, username: str, notices: int, result: CeremonyResult, react: bool
    ) -> CeremonyResult:
        if react and host.user is not None:
            result.reaction = self.react(host, rp, username, notices)
        return result

    def report(self, rp: RelyingParty, username: str, detector: Detector, user: User, code: str, detail: str) -> None:
        self.events.detect(detector, core.EntityId(EntityKind.USER, user.name), code, detail)
        if username in rp.accounts:
            rp.lockout(username)

    def react(self, host: Host, rp: RelyingParty, username: str, notices_from: int = 0) -> Action | None:
        """Show the user everything new and act on the first alarming item."""
        user = host.user
        intent = user.intent
        reaction: Action | None = None
        for r in sorted(self.rps.values(), key=lambda r: r.rp_id):
            acct = r.accounts.get(username)
            if acct is None:
                continue
            key = (r.rp_id, username)
            start = self._seen.outbox.get(key, 0)
            self._seen.outbox[key] = len(acct.notification_outbox)
            for note in acct.notification_outbox[start:]:
                relevant = intent if intent is not None and intent.rp_id == r.rp_id else None
                action = user.decide(NotificationDelivery(note, relevant))
                if action is Action.REPORT:
                    self.report(r, username, Detector.USER_NOTIFICATION, user, "NOTIFICATION_ANOMALY", note.body)
                    user.intend(None)
                    return action
        for origin, notice in host.client.notices[notices_from:]:
            if notice.kind != "error" or origin != rp.origin:
                continue
            action = user.decide(LoginError(notice.text))
            if action is Action.REPORT:
                self.report(rp, username, Detector.USER_NOTIFICATION, user,
                            ErrorCode.DEVICE_CLONING_DETECTED.value, notice.text)
                user.intend(None)
                return action
            if intent is not None and intent.action == "login":
                reaction = action
        if intent is not None and intent.action == "register" and intent.expects_secure:
            action = user.decide(AckStimulus(self._ack_status(host, intent), intent))
            if action is Action.REPORT:
                self.report(rp, username, Detector.HSK_DISPLAY, user, ErrorCode.ACK_MISSING.value,
                            f"no success acknowledgment for {intent.rp_name}")
                user.intend(None)
                return action
        user.intend(None)
        return reaction

    @staticmethod
    def _ack_status(host: Host, intent: Intent):
        hsk = host.hsk
        if not isinstance(hsk, DisplayAuthenticator):
            return None
        for panel in reversed(hsk.history):
            if panel.rp_name == intent.rp_name and panel.username == intent.username:
                return panel.ack_status
        return None

    # -- inspection ------------------------------------------------------------

    def trace_lines(self) -> list[str]:
        return self.network.trace_lines()
