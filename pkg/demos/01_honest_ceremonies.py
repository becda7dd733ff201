"""
Registering and logging in, with and without the Verifier
=========================================================

One user, one security key, one relying party. We run the same ceremonies
twice, once as plain FIDO2 and once with the enclave relay in the browser,
and look at what crossed the wire.
"""

from fidosim.fido2.policy import CloneMode, get_preset
from fidosim.harness import ProtocolKind, World

for protocol in ProtocolKind:
    world = World(seed=1, protocol=protocol, clone_mode=CloneMode.HASHLIST)
    rp = world.add_rp(get_preset("github"))
    laptop = world.add_host("laptop")

    print(f"--- {protocol.value}")
    print("register:", world.register(laptop, rp, "alice").ok)
    for i in range(3):
        result = world.login(laptop, rp, "alice")
        print(f"login {i}:", result.ok, "session", result.token.hex()[:12])

    # every delivered envelope, with its size and whether it carried a MAC
    for env in world.network.delivered[:6]:
        print(f"  {env.msg_type.name:<13} {str(env.sender):<20} -> {str(env.receiver):<20} "
              f"{env.size:>4} B  mac={env.mac is not None}")

    # the RP's credential record: counter plus the outstanding challenge hashes
    (cred,) = rp.account("alice").credentials.values()
    print("counter", cred.counter, "| hashes pending", len(cred.hash_list))
