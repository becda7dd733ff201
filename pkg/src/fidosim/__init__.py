"""Deterministic simulator of FIDO2 and its hardened v-FIDO2 variant under attack."""

from . import core, envelope, errors, events, hashlist

__version__ = "0.1.0"

__all__ = ["core", "envelope", "errors", "events", "hashlist", "__version__"]
