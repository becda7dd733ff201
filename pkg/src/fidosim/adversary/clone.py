"""Physical-access toolkit: copy a security key, then run its counter ahead."""

from __future__ import annotations

from ..core import CHALLENGE_SIZE
from ..fido2.authenticator import Authenticator
from ..fido2.messages import AuthRequest, CtapAuthRequest


def a2_clone(hsk: Authenticator, device_id: str | None = None) -> Authenticator:
    """Extract every credential, counter and stored challenge hash into a new key."""
    return hsk.clone(device_id)


def a2_inflate(hsk: Authenticator, y: int) -> None:
    """Send ``y`` dummy assertions straight to the original key, one per credential.

    Run with the key on the adversary's own reader, so the requests never
    reach an RP. Each credential's counter ends ``y`` higher, which is the head
    start the clone may later burn through without tripping a counter check.
    """
    for cred in list(hsk.state.credentials.values()):
        for _ in range(y):
            req = AuthRequest(hsk.rng.randbytes(CHALLENGE_SIZE), cred.rp_id, [cred.credential_id])
            hsk.handle_authentication(CtapAuthRequest(req, f"https://{cred.rp_id}"), True)


def counter_window_open(y: int, m: int) -> bool:
    """Whether ``m`` clone logins stay hidden after inflating the original by ``y``.

    The victim's next assertion carries ``c + y + 1`` against a stored ``c + m``,
    so it passes exactly when ``m <= y``.
    """
    return m <= y


__all__ = ["a2_clone", "a2_inflate", "counter_window_open"]
