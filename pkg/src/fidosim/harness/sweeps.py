"""Exhaustive checks of the hashed challenge list against loss and cloning.

Both sweeps enumerate schedules on full worlds (RP, client, authenticator and
network). Shared prefixes are executed once: the world is pickled at each
branch point and every branch resumes from its own copy.
"""

from __future__ import annotations

import itertools
import pickle
from collections.abc import Iterator
from dataclasses import dataclass

from ..core import EntityKind
from ..envelope import MessageEnvelope, MsgType
from ..errors import ErrorCode
from ..fido2.policy import CloneMode, get_preset
from .world import Host, ProtocolKind, World

USERNAME = "alice"
CLONE_CODE = ErrorCode.DEVICE_CLONING_DETECTED.value


class LossPlan:
    """Drop rule deciding, login by login, whether the request or the response is lost."""

    def __init__(self) -> None:
        self.drop_request = False
        self.drop_response = False

    def __call__(self, index: int, env: MessageEnvelope) -> bool:
        if env.msg_type is MsgType.AUTH_REQUEST and env.sender.kind is EntityKind.RP:
            return self.drop_request
        if env.msg_type is MsgType.AUTH_RESPONSE and env.receiver.kind is EntityKind.RP:
            return self.drop_response
        return False


def _clone_events(world: World) -> int:
    return sum(e.code == CLONE_CODE for e in world.events.entries)


def _registered_world(seed: int, clone_mode: CloneMode, plan: LossPlan | None = None) -> World:
    world = World(seed, ProtocolKind.FIDO2, clone_mode, drop=plan)
    rp = world.add_rp(get_preset("github"))
    host = world.add_host("victim-pc")
    world.register(host, rp, USERNAME)
    return world


def _login(world: World, host_name: str) -> bool:
    return world.login(world.hosts[host_name], world.rps["github.com"], USERNAME).ok


@dataclass
class LossSweep:
    patterns: int
    logins: int
    clone_detections: int
    failing: list[tuple[tuple[bool, bool], ...]]


def loss_sweep(length: int = 6, seed: int = 1, clone_mode: CloneMode = CloneMode.HASHLIST) -> LossSweep:
    """Every request/response loss pattern over ``length`` honest logins.

    Each pattern is followed by one loss-free login, so a stale list entry
    left behind by the losses would surface there. Shorter chains are prefixes
    of the enumerated ones and are checked along the way.
    """
    plan = LossPlan()
    root = _registered_world(seed, clone_mode, plan)
    result = LossSweep(0, 0, 0, [])

    def walk(world: World, plan: LossPlan, prefix: tuple) -> None:
        if len(prefix) == length:
            _login(world, "victim-pc")
            result.logins += 1
            found = _clone_events(world)
            result.patterns += 1
            result.clone_detections += found
            if found:
                result.failing.append(prefix)
            return
        snap = pickle.dumps((world, plan), pickle.HIGHEST_PROTOCOL)
        for step in itertools.product((False, True), repeat=2):
            child, child_plan = pickle.loads(snap)
            child_plan.drop_request, child_plan.drop_response = step
            _login(child, "victim-pc")
            result.logins += 1
            child_plan.drop_request = child_plan.drop_response = False
            walk(child, child_plan, prefix + (step,))

    walk(root, plan, ())
    return result


# -- cloning ---------------------------------------------------------------------


@dataclass
class CloneCase:
    clone_point: int
    schedule: str  # "A" attacker login, "V" victim login, in order
    outcomes: list[tuple[str, bool, bool]]  # (who, session granted, clone detected on this login)

    @property
    def first_victim(self) -> int:
        return self.schedule.index("V")

    @property
    def victim_detects(self) -> bool:
        """The victim's first login after the copy raises the clone alarm."""
        return self.outcomes[self.first_victim][2]

    @property
    def attacker_locked_out(self) -> bool:
        """No attacker login after the victim's first one gets a session."""
        return not any(ok for who, ok, _ in self.outcomes[self.first_victim + 1 :] if who == "A")

    @property
    def holds(self) -> bool:
        return self.victim_detects or self.attacker_locked_out


def schedules(attackers: int, victims: int) -> Iterator[str]:
    """All orderings of ``attackers`` A's and ``victims`` V's."""
    n = attackers + victims
    for slots in itertools.combinations(range(n), attackers):
        yield "".join("A" if i in slots else "V" for i in range(n))


def _play(world: World, clone_point: int, schedule: str) -> CloneCase:
    victim: Host = world.hosts["victim-pc"]
    attacker = world.add_host("attacker-pc", adversary=True)
    copy = victim.hsk.clone()
    world.add_device(copy)
    attacker.hsk = copy
    attacker.client.hsk = copy.id
    outcomes = []
    for who in schedule:
        before = _clone_events(world)
        ok = _login(world, "attacker-pc" if who == "A" else "victim-pc")
        outcomes.append((who, ok, _clone_events(world) > before))
    return CloneCase(clone_point, schedule, outcomes)


def clone_sweep(
    max_chain: int = 5,
    max_attacker: int = 3,
    max_victim: int = 3,
    seed: int = 1,
    clone_mode: CloneMode = CloneMode.HASHLIST,
) -> list[CloneCase]:
    """Copy the key after 0..``max_chain`` honest logins, then try every interleaving."""
    world = _registered_world(seed, clone_mode)
    cases = []
    for point in range(max_chain + 1):
        snap = pickle.dumps(world, pickle.HIGHEST_PROTOCOL)
        for a in range(1, max_attacker + 1):
            for v in range(1, max_victim + 1):
                for schedule in schedules(a, v):
                    cases.append(_play(pickle.loads(snap), point, schedule))
        _login(world, "victim-pc")
    return cases
