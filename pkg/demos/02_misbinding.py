"""
Swapping the attestation on its way to the RP
=============================================

A browser extension sits between the page and the security key. During
registration it replaces the victim's new public key with one from its own
key. Plain FIDO2 cannot tell; with the Verifier the swap breaks a MAC.
"""

from fidosim.adversary import AttackId
from fidosim.fido2.policy import CloneMode
from fidosim.harness import ProtocolKind, ScenarioConfig, run_scenario

for protocol in ProtocolKind:
    report = run_scenario(ScenarioConfig(
        seed=1, protocol=protocol, clone_mode=CloneMode.HASHLIST,
        attack=AttackId.MISBIND, user="VIGILANT",
    ))
    o = report.outcome
    print(f"{protocol.value:<7} cell={report.cell.value:<10} detected_by={sorted(d.value for d in o.detected_by)}")
    for line in o.evidence:
        print("   ", line)

# the lax RP happily registers whatever key answered; the strict one wants a vendor attestation
strict = run_scenario(ScenarioConfig(attack=AttackId.MISBIND, rp_preset="dropbox",
                                     options=(("software_key", True),)))
print("dropbox + software key:", strict.cell.value,
      [e["code"] for e in strict.events if e["kind"] == "REJECT"])
