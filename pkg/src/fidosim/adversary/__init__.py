"""Attack programs, the confined adversary context and the user model."""

from .attacks import AttackId
from .clone import a2_clone, a2_inflate, counter_window_open
from .interceptor import AdversaryContext, DeviceView, RpView
from .user import NEGLIGENT, USER_POLICIES, VIGILANT, Action, TapRule, User, UserPolicy, user_step

__all__ = [
    "Action", "AdversaryContext", "AttackId", "DeviceView", "NEGLIGENT", "RpView", "TapRule",
    "USER_POLICIES", "User", "UserPolicy", "VIGILANT", "a2_clone", "a2_inflate",
    "counter_window_open", "user_step",
]
