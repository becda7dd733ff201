import pytest
from hypothesis import given
from hypothesis import strategies as st

from fidosim.adversary import (
    NEGLIGENT,
    VIGILANT,
    Action,
    AttackId,
    a2_clone,
    a2_inflate,
    counter_window_open,
    user_step,
)
from fidosim.adversary.attacks import (
    a1_cookie_steal,
    a1_doublebind_reg,
    a1_doublebind_session,
    a1_downgrade,
    a1_misbind,
    forge_login,
)
from fidosim.adversary.user import AckStimulus, Intent, LoginError, NotificationDelivery, PresenceStimulus
from fidosim.core import EntityId, EntityKind, KeyPair, SigAlg
from fidosim.errors import ConfinementError
from fidosim.events import Detector
from fidosim.fido2.authenticator import PresencePrompt
from fidosim.fido2.policy import SPECIFIC_CLONE_TEXT, AuthBeforeAdd, CloneMode
from fidosim.fido2.relying_party import Channel, Notification
from fidosim.harness.scenario import Cell, ScenarioConfig, build_stage, run_scenario
from fidosim.harness.world import ProtocolKind
from fidosim.vfido2.display import AckStatus, DisplayPanel
from fidosim.vfido2.verifier import Verifier

F, V = ProtocolKind.FIDO2, ProtocolKind.VFIDO2


def stage(protocol=F, clone_mode=CloneMode.COUNTER, *, preset="github", user="NEGLIGENT", attack=None, **options):
    return build_stage(ScenarioConfig(
        protocol=protocol, clone_mode=clone_mode, rp_preset=preset, user=user, attack=attack,
        options=tuple(options.items()),
    ))


def run(attack, protocol=F, clone_mode=CloneMode.COUNTER, *, preset="github", user="NEGLIGENT", **options):
    return run_scenario(ScenarioConfig(
        protocol=protocol, clone_mode=clone_mode, rp_preset=preset, user=user, attack=attack,
        options=tuple(options.items()),
    ))


def codes(report, kind=None):
    return [e["code"] for e in report.events if kind is None or e["kind"] == kind]


# -- confinement -----------------------------------------------------------------


@pytest.mark.parametrize("name", ["verifier", "victim_verifier", "hsk_state", "channel_keys", "world"])
def test_context_exposes_no_enclave_or_key(name):
    s = stage(V)
    with pytest.raises(ConfinementError):
        getattr(s.ctx, name)


@pytest.mark.parametrize("name", ["accounts", "channel_keys", "policy", "pending", "events"])
def test_rp_view_is_web_facing_only(name):
    s = stage(V)
    with pytest.raises(ConfinementError):
        getattr(s.ctx.rp("github.com"), name)


def test_device_view_has_no_foreign_parts():
    s = stage(V)
    with pytest.raises(ConfinementError):
        s.ctx.device.verifier
    with pytest.raises(ConfinementError):
        s.ctx.device.victim


def test_public_surface_never_hands_out_secrets():
    s = stage(V)
    s.world.register(s.victim, s.rp, "alice")
    views = [s.ctx, s.ctx.rp("github.com"), s.ctx.device]
    for view in views:
        for name in dir(view):
            if name.startswith("_") or callable(getattr(type(view), name, None)):
                continue
            value = getattr(view, name)
            assert not isinstance(value, (Verifier, KeyPair)), name
    # the adversary's own key is fair game; the victim's is not reachable
    assert s.ctx.device.hsk is not s.victim.hsk


# -- misbinding ------------------------------------------------------------------


def test_misbind_registers_adversary_key_at_lax_rp():
    s = stage()
    a1_misbind(s.ctx, "github.com")
    s.world.register(s.victim, s.rp, "alice")
    (cred,) = s.rp.account("alice").credentials.values()
    assert cred.credential_id in s.device.hsk.state.credentials
    assert not s.world.login(s.victim, s.rp, "alice").ok
    assert s.ctx.device.login(s.ctx.rp("github.com"), "alice").ok


def test_misbind_with_software_key_meets_attestation():
    report = run(AttackId.MISBIND, preset="dropbox", software_key=True)
    assert "AttestationRequiredButInvalid" in codes(report, "REJECT")
    assert report.cell is Cell.PREVENTED


def test_misbind_under_mac_protection():
    report = run(AttackId.MISBIND, V, CloneMode.HASHLIST)
    assert "MAC_FAILURE" in codes(report, "DETECTION") and not report.outcome.succeeded


def test_cuckoo_misbind_leaves_victim_without_ack():
    s = stage(V, CloneMode.HASHLIST, user="VIGILANT", cuckoo=True)
    assert s.device.verifier is not None
    report = run(AttackId.MISBIND, V, CloneMode.HASHLIST, user="VIGILANT", cuckoo=True)
    assert "ACK_MISSING" in codes(report, "DETECTION")
    assert Detector.HSK_DISPLAY in report.outcome.detected_by


# -- double binding --------------------------------------------------------------


def test_doublebind_at_registration():
    s = stage()
    a1_doublebind_reg(s.ctx, "github.com")
    s.world.register(s.victim, s.rp, "alice")
    acct = s.rp.account("alice")
    assert len(acct.credentials) == 2
    assert {c for c in acct.credentials} & set(s.device.hsk.state.credentials)
    bodies = [n.body for n in acct.notification_outbox]
    assert len(bodies) == 2 and bodies[0] == bodies[1]


def test_doublebind_in_session_with_password_policy():
    s = stage(policy_overrides={"auth_before_additional_hsk": AuthBeforeAdd.PASSWORD})
    s.world.register(s.victim, s.rp, "alice")
    assert a1_doublebind_session(s.ctx, "github.com")
    assert set(s.rp.account("alice").credentials) & set(s.device.hsk.state.credentials)


def test_doublebind_in_session_needs_existing_key_when_hardened():
    s = stage(V, CloneMode.HASHLIST)
    s.world.register(s.victim, s.rp, "alice")
    assert not a1_doublebind_session(s.ctx, "github.com")
    assert s.ctx.failures == ["PolicyDenied"]


# -- synchronized login ----------------------------------------------------------


def test_sync_login_two_taps():
    report = run(AttackId.SYNC_LOGIN)
    assert report.cell is Cell.SUCCEEDS
    assert any("chase.com" in line for line in report.outcome.evidence)


def test_sync_login_frame_without_permission():
    report = run(AttackId.SYNC_LOGIN, iframe_flags=False)
    assert "CrossOriginRefused" in codes(report, "REJECT") and not report.outcome.succeeded


def test_sync_login_vigilant_declines_foreign_display():
    report = run(AttackId.SYNC_LOGIN, V, CloneMode.HASHLIST, user="VIGILANT")
    assert "DISPLAY_MISMATCH" in codes(report, "DETECTION")
    assert "UserPresenceDenied" in codes(report, "REJECT")
    assert report.cell is Cell.PREVENTED


def test_sync_login_origin_routing():
    report = run_scenario(ScenarioConfig(
        protocol=V, clone_mode=CloneMode.HASHLIST, attack=AttackId.SYNC_LOGIN, user="NEGLIGENT",
        sync_routing="origin"))
    assert "ORIGIN_MISMATCH" in codes(report, "DETECTION") and not report.outcome.succeeded


# -- transplant, downgrade, cookies ----------------------------------------------


def test_transplant_baseline_and_hardened():
    report = run(AttackId.MITM_TRANSPLANT)
    assert report.cell is Cell.SUCCEEDS and "ASSERTION_EXFILTRATED" in codes(report, "NOTE")
    report = run(AttackId.MITM_TRANSPLANT, V, CloneMode.HASHLIST)
    assert "MAC_FAILURE" in codes(report, "DETECTION") and not report.outcome.succeeded


def test_downgrade_then_forge():
    s = stage(attack=AttackId.SIG_DOWNGRADE)
    a1_downgrade(s.ctx, "github.com")
    s.world.register(s.victim, s.rp, "alice")
    (cred,) = s.rp.account("alice").credentials.values()
    assert cred.alg is SigAlg.WEAK_TOY
    assert forge_login(s.ctx, "github.com")
    assert any(x.client == s.device.client.id for x in s.rp.session_log)


def test_downgrade_without_weak_option_is_a_no_op():
    s = stage(policy_overrides={"min_alg": SigAlg.STRONG_EC})
    a1_downgrade(s.ctx, "github.com")
    s.world.register(s.victim, s.rp, "alice")
    (cred,) = s.rp.account("alice").credentials.values()
    assert cred.alg is SigAlg.STRONG_EC
    assert "ALG_LIST_PRUNED" not in s.world.events.codes("NOTE")
    assert not forge_login(s.ctx, "github.com")


def test_downgrade_under_mac_protection():
    report = run(AttackId.SIG_DOWNGRADE, V, CloneMode.HASHLIST)
    assert "MAC_FAILURE" in codes(report, "DETECTION") and not report.outcome.succeeded


def test_cookie_theft_skips_the_key():
    s = stage(preset="facebook")
    s.world.register(s.victim, s.rp, "alice")
    s.world.login(s.victim, s.rp, "alice", remember=True)
    start = len(s.world.network.delivered)
    assert a1_cookie_steal(s.ctx, "facebook.com")
    assert len(s.world.network.delivered) == start


def test_stolen_cookie_past_expiry():
    report = run(AttackId.COOKIE_STEAL, preset="facebook", days_before_theft=731)
    assert "ExpiredCookie" in codes(report, "REJECT") and not report.outcome.succeeded


def test_builtin_transcript_replay_fails():
    report = run(AttackId.COOKIE_STEAL, V, CloneMode.HASHLIST, preset="facebook")
    assert "TRANSCRIPT_REPLAYED" in codes(report, "NOTE")
    assert "ChallengeMismatch" in codes(report, "REJECT") and not report.outcome.succeeded


# -- cloning ---------------------------------------------------------------------


@pytest.mark.parametrize("mode,detected", [(CloneMode.COUNTER, False), (CloneMode.HASHLIST, True)])
def test_inflated_clone(mode, detected):
    report = run(AttackId.CLONE_STEALTH, F, mode, x=2, y=5, m=3)
    assert report.outcome.succeeded
    assert ("DEVICE_CLONING_DETECTED" in codes(report, "DETECTION")) is detected


@pytest.mark.parametrize("mode", list(CloneMode))
def test_plain_clone_victim_first(mode):
    s = stage(clone_mode=mode)
    s.world.register(s.victim, s.rp, "alice")
    s.ctx.device.use_hsk(a2_clone(s.victim.hsk))
    assert s.world.login(s.victim, s.rp, "alice").ok
    assert not s.ctx.device.login(s.ctx.rp("github.com"), "alice").ok
    assert "DEVICE_CLONING_DETECTED" in s.world.events.codes("DETECTION")


def test_inflate_moves_only_the_original():
    s = stage()
    s.world.register(s.victim, s.rp, "alice")
    copy = a2_clone(s.victim.hsk)
    a2_inflate(s.victim.hsk, 4)
    ours = [c.counter for c in s.victim.hsk.state.credentials.values()]
    theirs = [c.counter for c in copy.state.credentials.values()]
    assert ours == [t + 4 for t in theirs]


@given(st.integers(0, 50), st.integers(0, 50))
def test_window_is_the_counter_algebra(y, m):
    x = 3
    stored, victim_next = x + m, x + y + 1
    assert counter_window_open(y, m) == (victim_next > stored)


# -- the user --------------------------------------------------------------------

GH = Intent("login", "github.com", "GitHub", "alice", expects_secure=True)


def panel(name, secure=True, username=None):
    return DisplayPanel(name, username, False, secure)


@given(st.sampled_from(["register", "login"]), st.text(max_size=12), st.booleans())
def test_negligent_always_taps(action, rp_name, secure):
    prompt = PresencePrompt(EntityId(EntityKind.HSK, "k"), action, rp_name, panel(rp_name, secure))
    assert user_step(NEGLIGENT, PresenceStimulus(prompt, None)) is Action.TAP


def test_vigilant_checks_the_display():
    ok = PresencePrompt(EntityId(EntityKind.HSK, "k"), "login", "github.com", panel("github.com"))
    foreign = PresencePrompt(EntityId(EntityKind.HSK, "k"), "login", "chase.com", panel("chase.com"))
    insecure = PresencePrompt(EntityId(EntityKind.HSK, "k"), "login", "github.com", panel("github.com", False))
    assert user_step(VIGILANT, PresenceStimulus(ok, GH)) is Action.TAP
    assert user_step(VIGILANT, PresenceStimulus(foreign, GH)) is Action.DECLINE
    assert user_step(VIGILANT, PresenceStimulus(insecure, GH)) is Action.DECLINE


def test_vigilant_flags_second_identical_email():
    intent = Intent("register", "github.com", "GitHub", "alice", is_first=True,
                    make_model="SimKey 5 NFC", expected_total=1)
    note = Notification(Channel.EMAIL, "A security key was added", True, True, "alice",
                        make_model="SimKey 5 NFC", total_hsks=2)
    assert user_step(VIGILANT, NotificationDelivery(note, intent)) is Action.REPORT
    first = Notification(Channel.EMAIL, "A security key was added", True, True, "alice",
                         make_model="SimKey 5 NFC", total_hsks=1)
    assert user_step(VIGILANT, NotificationDelivery(first, intent)) is Action.READ
    assert user_step(NEGLIGENT, NotificationDelivery(note, intent)) is Action.IGNORE


def test_clone_errors():
    assert user_step(NEGLIGENT, LoginError("Something went wrong")) is Action.RETRY
    assert user_step(VIGILANT, LoginError("Something went wrong")) is Action.RETRY
    assert user_step(VIGILANT, LoginError(SPECIFIC_CLONE_TEXT)) is Action.REPORT


def test_ack_reactions():
    reg = Intent("register", "github.com", "GitHub", "alice", expects_secure=True)
    assert user_step(VIGILANT, AckStimulus(AckStatus.SUCCESS, reg)) is Action.READ
    assert user_step(VIGILANT, AckStimulus(AckStatus.WARNING, reg)) is Action.REPORT
    assert user_step(VIGILANT, AckStimulus(None, reg)) is Action.REPORT
    assert user_step(NEGLIGENT, AckStimulus(AckStatus.WARNING, reg)) is Action.IGNORE
