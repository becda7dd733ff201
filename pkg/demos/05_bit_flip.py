"""
One flipped bit
===============

The extension cannot recompute MACs it has no key for. Flip a single bit in
an authentication request and the Verifier drops it before anything else
happens.
"""

from fidosim.errors import MacFailure
from fidosim.fido2.policy import CloneMode, get_preset
from fidosim.harness import ProtocolKind, World

world = World(seed=3, protocol=ProtocolKind.VFIDO2, clone_mode=CloneMode.HASHLIST)
rp = world.add_rp(get_preset("github"))
laptop = world.add_host("laptop")
world.register(laptop, rp, "alice")

request = rp.begin_authentication("alice", laptop.client.id)
print("request body", len(request.payload), "bytes, tag", request.mac.hex()[:16], "...")

# untouched: relayed and re-tagged for the security key
relayed = laptop.verifier.relay_request(request, rp.origin, laptop.hsk.id)
print("relayed to", relayed.receiver, "same body:", relayed.payload == request.payload)

body = bytearray(request.payload)
body[20] ^= 0x01
try:
    laptop.verifier.relay_request(request.replace(payload=bytes(body)), rp.origin, laptop.hsk.id)
except MacFailure as exc:
    print("tampered:", type(exc).__name__, "-", exc)
print("events:", world.events.codes("DETECTION"))
