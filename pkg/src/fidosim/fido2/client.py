"""WebAuthn client (browser): frames, origin stamping, relaying and cookie jar."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..core import EntityId, EntityKind
from ..envelope import MessageEnvelope, MsgType, decode_body
from ..errors import CrossOriginRefused, FidoSimError
from ..events import EventLog
from .messages import AuthRequest, CtapAuthRequest, CtapRegistrationRequest, Notice, RegistrationRequest


@dataclass
class Frame:
    origin: str
    top_level: bool = True
    allow_attribute: bool = False
    permissions_header: bool = False

    def may_use_webauthn(self) -> bool:
        return self.top_level or (self.allow_attribute and self.permissions_header)


def client_forward(
    req: RegistrationRequest | AuthRequest, page_origin: str
) -> CtapRegistrationRequest | CtapAuthRequest:
    """Wrap an RP request for the authenticator, stamping the page origin."""
    if isinstance(req, RegistrationRequest):
        return CtapRegistrationRequest(req, page_origin)
    return CtapAuthRequest(req, page_origin)


@dataclass
class CookieJar:
    entries: dict[str, dict[str, bytes]] = field(default_factory=dict)

    def put(self, origin: str, kind: str, value: bytes) -> None:
        self.entries.setdefault(origin, {})[kind] = bytes(value)

    def get(self, origin: str, kind: str) -> bytes | None:
        return self.entries.get(origin, {}).get(kind)


class Client:
    """Relays between RPs and one paired authenticator.

    With a ``verifier`` attached and a keyed channel to the RP, requests and
    responses pass through it; otherwise the client stamps the origin itself.
    """

    def __init__(
        self,
        name: str,
        *,
        hsk: EntityId | None = None,
        verifier=None,
        events: EventLog | None = None,
        kind: EntityKind = EntityKind.CLIENT,
    ):
        self.id = EntityId(kind, name)
        self.hsk = hsk
        self.verifier = verifier
        self.events = events if events is not None else EventLog()
        self.frames: dict[str, Frame] = {}
        self.rp_by_origin: dict[str, EntityId] = {}
        self.origin_by_rp: dict[EntityId, str] = {}
        self.responder: dict[str, EntityId] = {}
        self.jar = CookieJar()
        self.notices: list[tuple[str, Notice]] = []
        self.legacy_only = False

    # -- pages -----------------------------------------------------------------

    def know_rp(self, rp_id: EntityId, origin: str) -> None:
        self.rp_by_origin[origin] = rp_id
        self.origin_by_rp[rp_id] = origin

    def open_page(self, rp_id: EntityId, origin: str) -> Frame:
        self.know_rp(rp_id, origin)
        frame = self.frames[origin] = Frame(origin, top_level=True)
        if self.verifier is not None:
            self.verifier.set_top_level(origin)
        return frame

    def open_iframe(
        self, rp_id: EntityId, origin: str, *, allow_attribute=False, permissions_header=False
    ) -> Frame:
        self.know_rp(rp_id, origin)
        frame = self.frames[origin] = Frame(origin, False, allow_attribute, permissions_header)
        return frame

    def _uses_verifier(self, origin: str) -> bool:
        return (
            self.verifier is not None
            and not self.legacy_only
            and self.verifier.has_channel(origin)
        )

    # -- relaying --------------------------------------------------------------

    def receive(self, env: MessageEnvelope) -> list[MessageEnvelope]:
        try:
            if env.msg_type in (MsgType.REG_REQUEST, MsgType.AUTH_REQUEST):
                return self._from_rp(env)
            if env.msg_type in (MsgType.REG_RESPONSE, MsgType.AUTH_RESPONSE):
                return self._from_hsk(env)
            if env.msg_type is MsgType.REG_ACK:
                return self._ack(env)
            if env.msg_type is MsgType.NOTIFY:
                return self._notify(env)
        except FidoSimError as exc:
            self.events.reject(self.id, type(exc).__name__, str(exc))
            report = self._report(env, exc)
            return [report] if report is not None else []
        return []

    def _report(self, env: MessageEnvelope, exc: FidoSimError) -> MessageEnvelope | None:
        if self.verifier is not None and exc.code is not None:
            return self.verifier.error_report(env, exc)
        return None

    def _from_rp(self, env: MessageEnvelope) -> list[MessageEnvelope]:
        origin = self.origin_by_rp.get(env.sender)
        frame = self.frames.get(origin) if origin else None
        if frame is None or not frame.may_use_webauthn():
            raise CrossOriginRefused(f"frame {origin} may not call WebAuthn")
        if self.hsk is None:
            return []
        if self._uses_verifier(env.origin):
            return [self.verifier.relay_request(env, frame.origin, self.hsk)]
        body_type = RegistrationRequest if env.msg_type is MsgType.REG_REQUEST else AuthRequest
        ctap = client_forward(decode_body(body_type, env.payload), frame.origin)
        return [env.replace(sender=self.id, receiver=self.hsk, origin=ctap.origin, mac=None)]

    def _from_hsk(self, env: MessageEnvelope) -> list[MessageEnvelope]:
        rp = self.rp_by_origin.get(env.origin)
        if rp is None:
            return []
        self.responder[env.origin] = env.sender
        if self._uses_verifier(env.origin):
            return [self.verifier.relay_response(env, rp)]
        return [env.replace(sender=self.id, receiver=rp, mac=None)]

    def _ack(self, env: MessageEnvelope) -> list[MessageEnvelope]:
        hsk = self.responder.get(env.origin, self.hsk)
        if hsk is None or not self._uses_verifier(env.origin):
            return []
        return [self.verifier.relay_ack(env, hsk)]

    def _notify(self, env: MessageEnvelope) -> list[MessageEnvelope]:
        notice = decode_body(Notice, env.payload)
        self.notices.append((env.origin, notice))
        if notice.kind in ("session", "remember", "step_up", "builtin_approval"):
            self.jar.put(env.origin, notice.kind, notice.token)
        return []

    def on_idle(self) -> list[MessageEnvelope]:
        return []

    def last_error(self, origin: str) -> Notice | None:
        for o, n in reversed(self.notices):
            if o == origin and n.kind == "error":
                return n
        return None
