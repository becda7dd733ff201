"""Baseline FIDO2 entities: relying party, WebAuthn client and security key."""

from .authenticator import (
    Authenticator,
    CounterMode,
    HskCredential,
    HskState,
    PresencePrompt,
    always_tap,
    choose_alg,
)
from .client import Client, CookieJar, Frame, client_forward
from .messages import (
    AssertionResponse,
    AttestationResponse,
    AuthRequest,
    CtapAuthRequest,
    CtapRegistrationRequest,
    Notice,
    RegistrationAck,
    RegistrationRequest,
    RequestType,
    client_data_hash,
)
from .policy import (
    CUSTOM,
    PRESETS,
    SPECIFIC_CLONE_TEXT,
    AuthBeforeAdd,
    CloneErrorStyle,
    CloneMode,
    RememberMode,
    RpPolicy,
    RpPreset,
    get_preset,
)
from .relying_party import (
    AuthEvidence,
    BuiltinRegistration,
    Channel,
    Notification,
    Purpose,
    RelyingParty,
    RememberCookie,
    RpAccount,
    RpCredential,
    Session,
)

__all__ = [
    "AssertionResponse",
    "AttestationResponse",
    "AuthBeforeAdd",
    "AuthEvidence",
    "AuthRequest",
    "Authenticator",
    "BuiltinRegistration",
    "CUSTOM",
    "Channel",
    "Client",
    "CloneErrorStyle",
    "CloneMode",
    "CookieJar",
    "CounterMode",
    "CtapAuthRequest",
    "CtapRegistrationRequest",
    "Frame",
    "HskCredential",
    "HskState",
    "Notice",
    "Notification",
    "PRESETS",
    "PresencePrompt",
    "Purpose",
    "RegistrationAck",
    "RegistrationRequest",
    "RelyingParty",
    "RememberCookie",
    "RememberMode",
    "RequestType",
    "RpAccount",
    "RpCredential",
    "RpPolicy",
    "RpPreset",
    "SPECIFIC_CLONE_TEXT",
    "Session",
    "always_tap",
    "choose_alg",
    "client_data_hash",
    "client_forward",
    "get_preset",
]
