"""Extra bytes the keyed channels put on the wire, per role and ceremony."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from ..core import EntityKind
from ..envelope import WEBAUTHN_TYPES
from ..adversary.user import NEGLIGENT, User
from ..fido2.policy import CloneMode, get_preset
from .world import ProtocolKind, World

ROLES = {EntityKind.RP: "RP", EntityKind.CLIENT: "CLIENT", EntityKind.HSK: "HSK"}


def _by_role(world: World) -> Counter[str]:
    out: Counter[str] = Counter()
    net = world.network
    for counter in (net.bytes_sent, net.bytes_received):
        for (eid, msg_type), n in counter.items():
            if msg_type in WEBAUTHN_TYPES and eid.kind in ROLES:
                out[ROLES[eid.kind]] += n
    return out


def ceremony_bytes(seed: int, macs: bool, rp_preset: str = "github") -> dict[str, dict[str, int]]:
    """Bytes each role sends plus receives for one registration and one login."""
    world = World(seed, ProtocolKind.VFIDO2, CloneMode.HASHLIST, macs=macs)
    rp = world.add_rp(get_preset(rp_preset))
    host = world.add_host("client", user=User("alice", NEGLIGENT))
    world.register(host, rp, "alice")
    after_reg = _by_role(world)
    world.login(host, rp, "alice")
    after_auth = _by_role(world)
    return {
        "registration": {r: after_reg[r] for r in ROLES.values()},
        "authentication": {r: after_auth[r] - after_reg[r] for r in ROLES.values()},
    }


@dataclass
class OverheadReport:
    with_macs: dict[str, dict[str, int]]
    without_macs: dict[str, dict[str, int]]

    @property
    def deltas(self) -> dict[str, dict[str, int]]:
        return {
            phase: {role: self.with_macs[phase][role] - self.without_macs[phase][role] for role in ROLES.values()}
            for phase in self.with_macs
        }

    def as_dict(self) -> dict:
        return {"with_macs": self.with_macs, "without_macs": self.without_macs, "deltas": self.deltas}


def measure_overhead(seed: int = 1, *, rp_preset: str = "github", macs: tuple[bool, bool] = (True, False)) -> OverheadReport:
    """Paired runs with the same seed; ``macs`` picks the two settings to compare."""
    return OverheadReport(ceremony_bytes(seed, macs[0], rp_preset), ceremony_bytes(seed, macs[1], rp_preset))
