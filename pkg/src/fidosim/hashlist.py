"""Hashed challenge list clone detection.

The authenticator keeps one slot per credential holding the hash of the last
challenge it answered. The relying party keeps a FIFO of hashes of every
challenge it sent. Each response carries the authenticator's previous slot
value; the RP accepts it only if it is still in the list and then discards
everything up to and including it. A copied authenticator therefore replays a
hash the original has already spent (or the other way round).

Dropped requests leave unanswered hashes in the list and dropped responses mean
the next response skips ahead; head-trimming tolerates both.
"""

from __future__ import annotations

import enum
import logging
from collections import deque
from dataclasses import dataclass, field

from . import core
from .core import Digest
from .errors import Uninitialized

log = logging.getLogger(__name__)

DEFAULT_CAPACITY = 1024


class ListVerdict(enum.Enum):
    OK = "OK"
    CLONE_DETECTED = "CLONE_DETECTED"


@dataclass
class HskChallengeSlot:
    hash_c: Digest | None = None


@dataclass
class HashListState:
    entries: deque[Digest] = field(default_factory=deque)
    capacity: int | None = DEFAULT_CAPACITY
    evictions: int = 0

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, item: object) -> bool:
        return item in self.entries

    def dump(self) -> list[str]:
        return [d.hex() for d in self.entries]


def hsk_on_registration(slot: HskChallengeSlot, challenge: bytes) -> None:
    slot.hash_c = core.hash(challenge)


def hsk_on_authentication(slot: HskChallengeSlot, challenge: bytes) -> Digest:
    """Return the stored hash for the response, then remember this challenge."""
    if slot.hash_c is None:
        raise Uninitialized("challenge slot used before registration")
    previous = slot.hash_c
    slot.hash_c = core.hash(challenge)
    return previous


def rp_on_send(state: HashListState, challenge: bytes) -> None:
    state.entries.append(core.hash(challenge))
    if state.capacity is not None and len(state.entries) > state.capacity:
        evicted = state.entries.popleft()
        state.evictions += 1
        # an evicted hash may still be answered later, which would then read as a clone
        log.warning("hash list over capacity %d, evicted %s", state.capacity, evicted.hex()[:16])


def rp_on_response(state: HashListState, returned: bytes) -> ListVerdict:
    if returned not in state.entries:
        return ListVerdict.CLONE_DETECTED
    while state.entries.popleft() != returned:
        pass
    return ListVerdict.OK


def initial_list(reg_challenge: bytes, capacity: int | None = DEFAULT_CAPACITY) -> HashListState:
    return HashListState(deque([core.hash(reg_challenge)]), capacity)
