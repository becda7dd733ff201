"""Scenario scripts: who does what, in which order, for each attack.

Every script receives a prepared :class:`Stage` and drives the victim's
ceremonies, the attack program and the adversary's final attempt to use what
it gained. None of them decides the outcome; that is read from RP state.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

from ..adversary.attacks import (
    AttackId,
    a1_cookie_steal,
    a1_doublebind_reg,
    a1_doublebind_session,
    a1_downgrade,
    a1_misbind,
    a1_mitm_transplant,
    a1_record_transcripts,
    a1_sync_login,
    forge_login,
)
from ..adversary.clone import a2_clone, a2_inflate
from ..adversary.interceptor import AdversaryContext
from ..fido2.policy import RpPreset
from ..fido2.relying_party import RelyingParty
from .world import Host, World

SECOND_RP = RpPreset("chase", "Chase", "chase.com", None)  # policy filled in from the main RP


@dataclass
class Stage:
    world: World
    rp: RelyingParty
    victim: Host
    device: Host
    ctx: AdversaryContext
    username: str
    options: dict


def _final_login(s: Stage) -> None:
    s.ctx.device.login(s.ctx.rp(s.rp.rp_id), s.username, password_ok=s.ctx.knows_password)


def honest(s: Stage) -> None:
    s.world.register(s.victim, s.rp, s.username)
    for _ in range(s.options.get("logins", 3)):
        s.world.login(s.victim, s.rp, s.username)


def misbind(s: Stage) -> None:
    cuckoo = s.options.get("cuckoo", False)
    a1_misbind(s.ctx, s.rp.rp_id, cuckoo=cuckoo)
    if cuckoo:
        s.world.register(s.victim, s.rp, s.username, react=False)
        s.ctx.device.register(s.ctx.rp(s.rp.rp_id), s.username)
        s.world.react(s.victim, s.rp, s.username)
    else:
        s.world.register(s.victim, s.rp, s.username)
    _final_login(s)


def doublebind_reg(s: Stage) -> None:
    if s.options.get("order", "first") == "second":
        s.world.register(s.victim, s.rp, s.username)
        a1_doublebind_session(s.ctx, s.rp.rp_id)
        s.world.react(s.victim, s.rp, s.username)
    else:
        a1_doublebind_reg(s.ctx, s.rp.rp_id)
        s.world.register(s.victim, s.rp, s.username)
    _final_login(s)


def doublebind_session(s: Stage) -> None:
    s.world.register(s.victim, s.rp, s.username)
    s.world.login(s.victim, s.rp, s.username)
    a1_doublebind_session(s.ctx, s.rp.rp_id)
    s.world.react(s.victim, s.rp, s.username)
    _final_login(s)


def sync_login(s: Stage) -> None:
    preset = RpPreset(SECOND_RP.key, SECOND_RP.name, SECOND_RP.rp_id, s.rp.preset.policy)
    other = s.world.add_rp(preset, **s.options.get("policy_overrides", {}))
    s.world.register(s.victim, s.rp, s.username)
    s.world.register(s.victim, other, s.username)
    flags = s.options.get("iframe_flags", True)
    a1_sync_login(
        s.ctx, s.rp.rp_id, other.rp_id, allow_attribute=flags, permissions_header=flags
    )
    s.world.login(s.victim, s.rp, s.username)


def mitm_transplant(s: Stage) -> None:
    s.world.register(s.victim, s.rp, s.username)
    a1_mitm_transplant(s.ctx, s.rp.rp_id)
    s.world.login(s.victim, s.rp, s.username)


def sig_downgrade(s: Stage) -> None:
    a1_downgrade(s.ctx, s.rp.rp_id)
    s.world.register(s.victim, s.rp, s.username)
    forge_login(s.ctx, s.rp.rp_id)


def cookie_steal(s: Stage) -> None:
    a1_record_transcripts(s.ctx, s.rp.rp_id)
    s.world.register(s.victim, s.rp, s.username)
    s.world.login(s.victim, s.rp, s.username, remember=True)
    s.world.clock.advance(s.options.get("days_before_theft", 1))
    s.world.login(s.victim, s.rp, s.username)
    a1_cookie_steal(s.ctx, s.rp.rp_id)


def clone_stealth(s: Stage) -> None:
    x, y, m = (s.options.get(k, d) for k, d in (("x", 2), ("y", 5), ("m", 3)))
    s.world.register(s.victim, s.rp, s.username)
    for _ in range(x):
        s.world.login(s.victim, s.rp, s.username)
    clone = a2_clone(s.victim.hsk)
    a2_inflate(s.victim.hsk, y)
    s.ctx.note("HSK_CLONED", f"inflated by {y}")
    s.ctx.device.use_hsk(clone)
    for _ in range(m):
        _final_login(s)
    s.world.login(s.victim, s.rp, s.username)


SCRIPTS: dict[AttackId | None, Callable[[Stage], None]] = {
    None: honest,
    AttackId.MISBIND: misbind,
    AttackId.DOUBLEBIND_REG: doublebind_reg,
    AttackId.DOUBLEBIND_SESSION: doublebind_session,
    AttackId.SYNC_LOGIN: sync_login,
    AttackId.MITM_TRANSPLANT: mitm_transplant,
    AttackId.SIG_DOWNGRADE: sig_downgrade,
    AttackId.COOKIE_STEAL: cookie_steal,
    AttackId.CLONE_STEALTH: clone_stealth,
}
