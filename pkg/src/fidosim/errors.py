"""Exception hierarchy and the standardized error codes carried to clients."""

from __future__ import annotations

import enum


class ErrorCode(str, enum.Enum):
    DEVICE_CLONING_DETECTED = "DEVICE_CLONING_DETECTED"
    MAC_FAILURE = "MAC_FAILURE"
    ORIGIN_MISMATCH = "ORIGIN_MISMATCH"
    DOWNGRADE_BLOCKED = "DOWNGRADE_BLOCKED"
    ACK_MISSING = "ACK_MISSING"
    POLICY_DENIED = "POLICY_DENIED"


class FidoSimError(Exception):
    """Base class. ``code`` is set when the failure maps to a standardized code."""

    code: ErrorCode | None = None


class MalformedEnvelope(FidoSimError):
    pass


class UnknownAlgorithm(FidoSimError):
    pass


class CounterOverflow(FidoSimError):
    pass


# -- baseline ceremony failures ------------------------------------------------


class MaxHsksReached(FidoSimError):
    pass


class UserPresenceDenied(FidoSimError):
    pass


class NoAcceptableAlgorithm(FidoSimError):
    pass


class BadSignature(FidoSimError):
    pass


class AttestationRequiredButInvalid(FidoSimError):
    pass


class ChallengeMismatch(FidoSimError):
    pass


class CloneSuspected(FidoSimError):
    code = ErrorCode.DEVICE_CLONING_DETECTED


class UnknownCredential(FidoSimError):
    pass


class ExpiredCookie(FidoSimError):
    pass


class UnknownCookie(FidoSimError):
    pass


class PolicyDenied(FidoSimError):
    code = ErrorCode.POLICY_DENIED


class CrossOriginRefused(FidoSimError):
    pass


class PasswordRequired(FidoSimError):
    pass


# -- hashed challenge list -----------------------------------------------------


class Uninitialized(FidoSimError):
    pass


# -- v-FIDO2 -------------------------------------------------------------------


class MeasurementMismatch(FidoSimError):
    pass


class BadServiceSignature(FidoSimError):
    pass


class NoTee(FidoSimError):
    pass


class MacFailure(FidoSimError):
    code = ErrorCode.MAC_FAILURE


class OriginMismatch(FidoSimError):
    code = ErrorCode.ORIGIN_MISMATCH


class ApprovalRequired(FidoSimError):
    pass


class SealCorrupted(FidoSimError):
    pass


class RememberExpired(FidoSimError):
    pass


# -- adversary / harness -------------------------------------------------------


class ConfinementError(FidoSimError):
    """Raised when adversary code reaches for state outside its interface."""


class ConfigInvalid(FidoSimError):
    pass


class StepBudgetExceeded(FidoSimError):
    pass
