"""How the account holder reacts to prompts, emails, errors and acks.

Reactions are a pure function of a policy and a stimulus, so a scenario's
outcome never depends on chance.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from ..fido2.authenticator import PresencePrompt
from ..fido2.policy import SPECIFIC_CLONE_TEXT
from ..fido2.relying_party import Notification
from ..vfido2.display import AckStatus, DisplayPanel


class TapRule(enum.Enum):
    ALWAYS = "ALWAYS"
    ONLY_IF_DISPLAY_MATCHES_INTENT = "ONLY_IF_DISPLAY_MATCHES_INTENT"


@dataclass(frozen=True)
class UserPolicy:
    verifies_display: bool
    taps_when_prompted: TapRule
    reads_notifications: bool
    retries_on_double_prompt: bool


VIGILANT = UserPolicy(True, TapRule.ONLY_IF_DISPLAY_MATCHES_INTENT, True, False)
NEGLIGENT = UserPolicy(False, TapRule.ALWAYS, False, True)

USER_POLICIES = {"VIGILANT": VIGILANT, "NEGLIGENT": NEGLIGENT}


class Action(enum.Enum):
    TAP = "TAP"
    DECLINE = "DECLINE"
    READ = "READ"
    IGNORE = "IGNORE"
    RETRY = "RETRY"
    REPORT = "REPORT"


@dataclass(frozen=True)
class Intent:
    """What the user is trying to do right now."""

    action: str  # "register" or "login"
    rp_id: str
    rp_name: str
    username: str
    is_first: bool = False
    expects_secure: bool = False
    make_model: str | None = None
    expected_total: int | None = None


# -- stimuli -------------------------------------------------------------------


@dataclass(frozen=True)
class PresenceStimulus:
    prompt: PresencePrompt
    intent: Intent | None
    prior_taps: int = 0


@dataclass(frozen=True)
class NotificationDelivery:
    notification: Notification
    intent: Intent | None


@dataclass(frozen=True)
class LoginError:
    text: str


@dataclass(frozen=True)
class AckStimulus:
    status: AckStatus | None
    intent: Intent


Stimulus = PresenceStimulus | NotificationDelivery | LoginError | AckStimulus


def display_matches(panel: DisplayPanel, action: str, intent: Intent) -> bool:
    if action != intent.action:
        return False
    if panel.rp_name not in (intent.rp_name, intent.rp_id):
        return False
    if panel.username is not None and panel.username != intent.username:
        return False
    if intent.expects_secure and not panel.secure_enclave:
        return False
    if action == "register" and intent.is_first and not panel.is_first_authenticator:
        return False
    return True


def _presence(policy: UserPolicy, s: PresenceStimulus) -> Action:
    if policy.taps_when_prompted is TapRule.ALWAYS:
        return Action.TAP
    if s.intent is None:
        return Action.DECLINE
    panel = s.prompt.display
    if isinstance(panel, DisplayPanel) and policy.verifies_display:
        return Action.TAP if display_matches(panel, s.prompt.action, s.intent) else Action.DECLINE
    if s.prior_taps == 0 or policy.retries_on_double_prompt:
        return Action.TAP
    return Action.DECLINE


def _notification(policy: UserPolicy, s: NotificationDelivery) -> Action:
    if not policy.reads_notifications:
        return Action.IGNORE
    note, intent = s.notification, s.intent
    if note.kind == "clone":
        return Action.REPORT
    if note.kind != "registration":
        return Action.READ
    if intent is None or intent.action != "register" or note.username != intent.username:
        return Action.REPORT
    if note.mentions_make_model and intent.make_model is not None and note.make_model != intent.make_model:
        return Action.REPORT
    if note.mentions_total_hsk_count and intent.expected_total is not None and note.total_hsks != intent.expected_total:
        return Action.REPORT
    return Action.READ


def user_step(policy: UserPolicy, stimulus: Stimulus) -> Action:
    if isinstance(stimulus, PresenceStimulus):
        return _presence(policy, stimulus)
    if isinstance(stimulus, NotificationDelivery):
        return _notification(policy, stimulus)
    if isinstance(stimulus, LoginError):
        if policy.reads_notifications and stimulus.text == SPECIFIC_CLONE_TEXT:
            return Action.REPORT
        return Action.RETRY
    if isinstance(stimulus, AckStimulus):
        if not policy.verifies_display or not stimulus.intent.expects_secure:
            return Action.IGNORE
        return Action.READ if stimulus.status is AckStatus.SUCCESS else Action.REPORT
    raise TypeError(f"unknown stimulus {stimulus!r}")


@dataclass
class User:
    """A person with a policy, a current intent and a record of what they did."""

    name: str
    policy: UserPolicy
    intent: Intent | None = None
    taps: int = 0
    log: list[tuple[str, Action]] = field(default_factory=list)
    on_mismatch: object = None  # called with (prompt) when a display is declined

    def intend(self, intent: Intent | None) -> None:
        self.intent = intent
        self.taps = 0

    def decide(self, stimulus: Stimulus) -> Action:
        action = user_step(self.policy, stimulus)
        self.log.append((type(stimulus).__name__, action))
        return action

    def presence(self, prompt: PresencePrompt) -> bool:
        """Presence oracle handed to the user's own security key."""
        action = self.decide(PresenceStimulus(prompt, self.intent, self.taps))
        if action is Action.TAP:
            self.taps += 1
            return True
        if isinstance(prompt.display, DisplayPanel) and callable(self.on_mismatch):
            self.on_mismatch(prompt)
        return False
