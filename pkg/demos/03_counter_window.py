"""
How far a cloned key can go before anyone notices
=================================================

Copy the key, then send the original y dummy assertions so its counter runs
ahead. The copy can now log in m times; the victim's next login only looks
wrong to a counter check once m > y. The hashed challenge list has no such
slack: the victim's key answers with a hash the RP never issued.
"""

from fidosim.adversary import AttackId, counter_window_open
from fidosim.fido2.policy import CloneMode
from fidosim.harness import ScenarioConfig, run_scenario


def detected(mode, y, m):
    report = run_scenario(ScenarioConfig(
        clone_mode=mode, attack=AttackId.CLONE_STEALTH, options=(("x", 2), ("y", y), ("m", m)),
    ))
    return any(e["code"] == "DEVICE_CLONING_DETECTED" for e in report.events)


print("  y  m   window  counter  hashlist")
for y in (1, 3, 5):
    for m in range(y + 2):
        print(f"{y:>3} {m:>2} {str(counter_window_open(y, m)):>8} "
              f"{str(detected(CloneMode.COUNTER, y, m)):>8} {str(detected(CloneMode.HASHLIST, y, m)):>9}")
