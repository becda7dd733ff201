"""Security key with a display, a channel to the Verifier and registration acks."""

from __future__ import annotations

import enum
import random
from dataclasses import asdict, dataclass

from .. import core
from ..core import Digest, EntityId, SymmetricKey
from ..envelope import MessageEnvelope, MsgType, check, decode_body, seal
from ..errors import ErrorCode, MacFailure
from ..events import Detector, EventLog
from ..fido2.authenticator import Authenticator, HskState, PresenceOracle
from ..fido2.messages import RegistrationAck


class AckStatus(enum.Enum):
    PENDING = "PENDING"
    SUCCESS = "SUCCESS"
    WARNING = "WARNING"


@dataclass
class DisplayPanel:
    rp_name: str
    username: str | None
    is_first_authenticator: bool
    secure_enclave: bool
    ack_status: AckStatus | None = None

    def as_dict(self) -> dict:
        d = asdict(self)
        d["ack_status"] = self.ack_status.value if self.ack_status else None
        return d


def hsk_verify_ack(
    key: SymmetricKey | None, env: MessageEnvelope, own_response: Digest | None, macs: bool = True
) -> AckStatus:
    """SUCCESS only for an authentic ack naming exactly the response we sent."""
    if macs and (key is None or not check(env, key)):
        raise MacFailure("registration ack failed MAC check")
    ack = decode_body(RegistrationAck, env.payload)
    if own_response is not None and ack.response_hash == own_response:
        return AckStatus.SUCCESS
    return AckStatus.WARNING


class DisplayAuthenticator(Authenticator):
    """Shows what it is about to sign and expects an ack after each registration.

    A MAC-tagged request is only displayed once the tag verifies under the key
    shared with the sending host's Verifier. Untagged requests are still served,
    with the secure-enclave indicator off.
    """

    def __init__(
        self,
        state: HskState,
        rng: random.Random,
        presence: PresenceOracle | None = None,
        events: EventLog | None = None,
        macs: bool = True,
    ):
        super().__init__(state, rng, presence, events)
        self.macs = macs
        self.channel_keys: dict[EntityId, SymmetricKey] = {}
        self.display: DisplayPanel | None = None
        self.history: list[DisplayPanel] = []
        self._awaiting: tuple[EntityId, Digest, DisplayPanel] | None = None

    def _mac_failure(self, msg: str) -> MacFailure:
        self.events.detect(Detector.HSK_DISPLAY, self.id, ErrorCode.MAC_FAILURE, msg)
        return MacFailure(msg)

    def _check_envelope(self, env: MessageEnvelope) -> bool:
        key = self.channel_keys.get(env.sender)
        if env.mac is not None:
            if key is None or (self.macs and not check(env, key)):
                raise self._mac_failure(f"{env.msg_type.name} from {env.sender} failed MAC check")
            return True
        return key is not None and not self.macs

    def _display(self, action: str, inner, env: MessageEnvelope, secure: bool) -> DisplayPanel:
        if action == "register":
            panel = DisplayPanel(inner.rp_name, inner.username, inner.is_first_authenticator, secure,
                                 AckStatus.PENDING if secure else None)
        else:
            panel = DisplayPanel(inner.rp_id, None, False, secure)
        self.display = panel
        self.history.append(panel)
        return panel

    def _finish(self, req_env: MessageEnvelope, out: MessageEnvelope, secure: bool) -> MessageEnvelope:
        if not secure:
            return out
        key = self.channel_keys[req_env.sender]
        if self.macs:
            out = seal(out, key)
        if out.msg_type is MsgType.REG_RESPONSE:
            self._awaiting = (req_env.sender, core.hash(out.payload), self.display)
        return out

    def _ack(self, env: MessageEnvelope) -> list[MessageEnvelope]:
        try:
            own = self._awaiting[1] if self._awaiting else None
            status = hsk_verify_ack(self.channel_keys.get(env.sender), env, own, self.macs)
        except MacFailure as exc:
            self.events.detect(Detector.HSK_DISPLAY, self.id, ErrorCode.MAC_FAILURE, str(exc))
            status = AckStatus.WARNING
        self._settle(status)
        return []

    def _settle(self, status: AckStatus) -> None:
        panel = self._awaiting[2] if self._awaiting else self.display
        self._awaiting = None
        if panel is None:
            panel = DisplayPanel("", None, False, False)
            self.history.append(panel)
        panel.ack_status = status
        self.display = panel
        if status is AckStatus.WARNING:
            self.events.detect(Detector.HSK_DISPLAY, self.id, ErrorCode.ACK_MISSING,
                               f"no valid acknowledgment for registration at {panel.rp_name}")
        else:
            self.events.note(self.id, "ACK_SUCCESS", panel.rp_name)

    def on_idle(self) -> list[MessageEnvelope]:
        # the ack deadline is the point where nothing is left in flight
        if self._awaiting is not None:
            self._settle(AckStatus.WARNING)
        return []

    def snapshot(self) -> dict:
        snap = super().snapshot()
        snap["display"] = self.display.as_dict() if self.display else None
        return snap
