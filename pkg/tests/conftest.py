import pytest

from fidosim.adversary.user import NEGLIGENT, VIGILANT, User
from fidosim.fido2.policy import CloneMode, get_preset
from fidosim.harness.world import ProtocolKind, World


@pytest.fixture
def make_world():
    """World with the GitHub preset RP and one honest host, optionally with a user."""

    def build(protocol=ProtocolKind.FIDO2, clone_mode=CloneMode.COUNTER, *, user=None, seed=1,
              preset="github", **overrides):
        world = World(seed, protocol, clone_mode)
        rp = world.add_rp(get_preset(preset), **overrides)
        policy = {"VIGILANT": VIGILANT, "NEGLIGENT": NEGLIGENT}.get(user)
        host = world.add_host("victim-pc", user=User("alice", policy) if policy else None)
        return world, rp, host

    return build
