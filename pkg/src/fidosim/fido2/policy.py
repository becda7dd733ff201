"""Relying-party policy knobs and the ten shipped presets.

Preset strings for the GENERIC clone error are the messages those services
displayed; rows where no message was shown carry ``None``.
"""

from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass

from ..core import SigAlg
from ..errors import ConfigInvalid


class AuthBeforeAdd(enum.Enum):
    NONE = "NONE"
    PASSWORD = "PASSWORD"
    EXISTING_HSK = "EXISTING_HSK"


class CloneErrorStyle(enum.Enum):
    GENERIC = "GENERIC"
    SPECIFIC = "SPECIFIC"


class CloneMode(enum.Enum):
    COUNTER = "COUNTER"
    HASHLIST = "HASHLIST"


class RememberMode(enum.Enum):
    COOKIE = "COOKIE"
    BUILTIN = "BUILTIN"


SPECIFIC_CLONE_TEXT = "Your security key may have been cloned."


@dataclass(frozen=True)
class RpPolicy:
    require_attestation: bool = False
    auth_before_additional_hsk: AuthBeforeAdd = AuthBeforeAdd.NONE
    sends_registration_email: bool = False
    email_includes_make_model: bool = False
    min_alg: SigAlg = SigAlg.STRONG_RSA
    remember_device_days: int = 30
    clone_error_style: CloneErrorStyle = CloneErrorStyle.GENERIC
    max_hsks: int | None = None
    generic_clone_text: str | None = None
    detects_clones: bool = True
    remember_mode: RememberMode = RememberMode.COOKIE

    def replace(self, **changes) -> RpPolicy:
        return dataclasses.replace(self, **changes)

    def hardened(self) -> RpPolicy:
        """The recommended settings layered on top of a service's own."""
        return self.replace(
            auth_before_additional_hsk=AuthBeforeAdd.EXISTING_HSK,
            clone_error_style=CloneErrorStyle.SPECIFIC,
            email_includes_make_model=self.sends_registration_email,
            detects_clones=True,
            remember_mode=RememberMode.BUILTIN,
        )

    def clone_error_text(self) -> str | None:
        if self.clone_error_style is CloneErrorStyle.SPECIFIC:
            return SPECIFIC_CLONE_TEXT
        return self.generic_clone_text

    def advertised_algs(self) -> list[SigAlg]:
        return [a for a in SigAlg.strongest_first() if a.strength_rank >= self.min_alg.strength_rank]


@dataclass(frozen=True)
class RpPreset:
    key: str
    name: str
    rp_id: str
    policy: RpPolicy

    @property
    def origin(self) -> str:
        return f"https://{self.rp_id}"


def _preset(key, name, rp_id, **policy) -> RpPreset:
    return RpPreset(key, name, rp_id, RpPolicy(**policy))


_P = AuthBeforeAdd.PASSWORD
_EC, _RSA = SigAlg.STRONG_EC, SigAlg.STRONG_RSA

PRESETS: dict[str, RpPreset] = {
    p.key: p
    for p in [
        _preset(
            "facebook", "Facebook", "facebook.com",
            auth_before_additional_hsk=_P, min_alg=_EC, remember_device_days=730,
        ),
        _preset(
            "github", "GitHub", "github.com",
            sends_registration_email=True, min_alg=_RSA,
            generic_clone_text="Security key authentication failed",
        ),
        _preset(
            "boxcryptor", "Boxcryptor", "boxcryptor.com",
            require_attestation=True, auth_before_additional_hsk=_P, min_alg=_EC,
        ),
        _preset(
            "dropbox", "Dropbox", "dropbox.com",
            require_attestation=True, auth_before_additional_hsk=_P,
            sends_registration_email=True, min_alg=_RSA,
        ),
        _preset("twitter", "Twitter", "twitter.com", min_alg=_RSA, max_hsks=1),
        _preset(
            "cloudflare", "Cloudflare", "cloudflare.com",
            auth_before_additional_hsk=_P, min_alg=_RSA,
            generic_clone_text=(
                "Invalid security key used. Please use a security key registered to this account."
            ),
        ),
        _preset(
            "basecamp", "Basecamp", "basecamp.com",
            sends_registration_email=True, min_alg=_RSA,
            generic_clone_text=(
                "We couldn't verify this security key. Make sure you have registered it."
            ),
        ),
        _preset("logingov", "Login.gov", "login.gov", min_alg=_RSA, detects_clones=False),
        _preset(
            "shopify", "Shopify", "shopify.com",
            auth_before_additional_hsk=_P, sends_registration_email=True, min_alg=_RSA,
            generic_clone_text="Couldn't connect to your security key. Try again.",
        ),
        _preset(
            "1password", "1Password", "1password.com",
            min_alg=_EC, generic_clone_text="Unable to verify your security key.",
        ),
    ]
}

CUSTOM = "custom"


def get_preset(key: str) -> RpPreset:
    k = key.lower().replace(".", "").replace("-", "")
    if k == CUSTOM:
        return RpPreset(CUSTOM, "Example", "example.com", RpPolicy())
    try:
        return PRESETS[k]
    except KeyError:
        raise ConfigInvalid(f"unknown RP preset {key!r}") from None
