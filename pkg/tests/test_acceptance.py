"""End-to-end acceptance checks, one test per criterion.

Each test prints a PASS/FAIL line (visible even under captured output) before
asserting, so ``pytest tests/test_acceptance.py`` doubles as a checklist.
"""

import os
import random
import subprocess
import sys
import time

import pytest

from fidosim import core, hashlist
from fidosim.adversary import AttackId, a2_clone, a2_inflate, counter_window_open
from fidosim.core import EntityKind
from fidosim.envelope import MessageEnvelope, MsgType
from fidosim.errors import MacFailure
from fidosim.events import Detector
from fidosim.fido2.policy import CloneMode, get_preset
from fidosim.harness import (
    Cell,
    InterceptorHook,
    ProtocolKind,
    ScenarioConfig,
    World,
    detection_matrix,
    load_golden,
    measure_overhead,
    run_scenario,
)
from fidosim.harness.matrix import cell_key
from fidosim.harness.scenario import build_stage
from fidosim.harness.sweeps import clone_sweep, loss_sweep

F, V = ProtocolKind.FIDO2, ProtocolKind.VFIDO2
CLONE_CODE = "DEVICE_CLONING_DETECTED"


@pytest.fixture
def verdict(capsys):
    def emit(number: int, title: str, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} -- {detail}")
        assert ok, detail

    return emit


def test_1_baseline_attacks_succeed_unnoticed(verdict):
    start = time.perf_counter()
    bad = []
    for attack in AttackId:
        o = run_scenario(ScenarioConfig(seed=1, protocol=F, rp_preset="github", attack=attack, user="NEGLIGENT")).outcome
        if not (o.succeeded and o.detected_by == {Detector.NONE}):
            bad.append(f"{attack.value}: succeeded={o.succeeded} detected_by={sorted(d.value for d in o.detected_by)}")
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 1.0
    verdict(1, "baseline FIDO2 attacks succeed undetected", ok,
            f"{len(AttackId) - len(bad)}/{len(AttackId)} in {elapsed:.2f}s" + (f"; {bad}" if bad else ""))


EXPECTED_HARDENED = {
    AttackId.MISBIND: Cell.PREVENTED,
    AttackId.MITM_TRANSPLANT: Cell.PREVENTED,
    AttackId.SIG_DOWNGRADE: Cell.PREVENTED,
    AttackId.DOUBLEBIND_REG: Cell.PREVENTED,
    AttackId.DOUBLEBIND_SESSION: Cell.PREVENTED,
    AttackId.SYNC_LOGIN: Cell.PREVENTED,
    AttackId.COOKIE_STEAL: Cell.PREVENTED,
    AttackId.CLONE_STEALTH: Cell.DETECTED,
}


def test_2_hardened_matrix_matches_golden(verdict):
    matrix = detection_matrix(seed=1)
    diffs = matrix.mismatches(load_golden())
    for attack, want in EXPECTED_HARDENED.items():
        key = cell_key(attack, V, CloneMode.HASHLIST, "VIGILANT")
        if matrix.cells[key] is not want:
            diffs.append(f"{key}: expected {want.value} got {matrix.cells[key].value}")
    verdict(2, "v-FIDO2 vigilant cells and golden matrix", not diffs,
            f"{len(matrix.cells)} cells, {len(diffs)} mismatches" + (f"; {diffs[:4]}" if diffs else ""))


def test_3_clone_interleavings(verdict):
    start = time.perf_counter()
    cases = clone_sweep(max_chain=5, max_attacker=3, max_victim=3)
    elapsed = time.perf_counter() - start
    violations = [c for c in cases if not c.holds]
    # independent restatement: the victim trips the alarm exactly when the clone was used first
    disagree = [c for c in cases if c.victim_detects != ("A" in c.schedule[: c.first_victim])]
    ok = len(cases) >= 100 and not violations and not disagree and elapsed < 5.0
    verdict(3, "cloned key caught or locked out in every interleaving", ok,
            f"{len(cases)} cases, {len(violations)} violations, {len(disagree)} oracle disagreements, {elapsed:.2f}s")


# -- single-bit tampering ------------------------------------------------------------


def _capture_hardened_traffic():
    world = World(1, V, CloneMode.HASHLIST)
    rp = world.add_rp(get_preset("github"))
    host = world.add_host("victim-pc")
    captured: list[MessageEnvelope] = []
    world.network.install(InterceptorHook(lambda e: e.mac is not None, lambda e: captured.append(e) or [e], "tap"))
    builtin: list[tuple] = []
    real = rp.register_builtin
    rp.register_builtin = lambda client, body, mac: (builtin.append((client, body, mac)), real(client, body, mac))[1]
    assert world.register(host, rp, "alice").ok
    assert world.login(host, rp, "alice").ok
    assert world.login(host, rp, "alice", remember=True).ok
    assert world.login(host, rp, "alice").ok  # served by the built-in key
    del rp.register_builtin
    probe = rp.begin_authentication("alice", host.client.id)
    captured.append(host.verifier.error_report(probe, MacFailure("probe")))
    return world, rp, host, captured, builtin


def _positions(nbytes: int, rng: random.Random) -> list[int]:
    bits = nbytes * 8
    return list(range(bits)) if bits <= 512 else rng.sample(range(bits), 128)


def _flip(data: bytes, bit: int) -> bytes:
    out = bytearray(data)
    out[bit // 8] ^= 1 << (bit % 8)
    return bytes(out)


def _feed(world, rp, host, env: MessageEnvelope):
    """Hand ``env`` to the next honest party; return (mac_failure_seen, state_before, state_after)."""
    mark = world.events.mark()
    hsk, verifier = host.hsk, host.verifier
    if env.receiver.kind is EntityKind.RP:
        before = rp.snapshot()
        rp.receive(env)
        after = rp.snapshot()
        caught = any(e.code == "MAC_FAILURE" for e in world.events.since(mark))
        return caught, before, after
    if env.receiver.kind is EntityKind.HSK:
        view = lambda: {k: v for k, v in hsk.snapshot().items() if env.msg_type is not MsgType.REG_ACK or k != "display"}
        before = view()
        hsk.receive(env)
        after = view()
        caught = any(e.code == "MAC_FAILURE" for e in world.events.since(mark))
        return caught, before, after
    before = verifier.snapshot()
    try:
        if env.sender.kind is EntityKind.HSK:
            verifier.relay_response(env, rp.id)
        elif env.msg_type is MsgType.REG_ACK:
            verifier.relay_ack(env, hsk.id)
        else:
            verifier.relay_request(env, rp.origin, hsk.id)
        caught = False
    except MacFailure:
        caught = True
    return caught, before, verifier.snapshot()


def test_4_single_bit_flips_are_caught(verdict):
    world, rp, host, captured, builtin = _capture_hardened_traffic()
    rng = random.Random(4)
    flips, misses, kinds = 0, [], set()
    for env in captured:
        if env.msg_type is MsgType.NOTIFY and env.receiver.kind is not EntityKind.RP:
            continue  # no honest party checks notices on their way to the browser
        kinds.add((env.msg_type.name, env.sender.kind.name, env.receiver.kind.name))
        for bit in _positions(len(env.payload), rng):
            flips += 1
            caught, before, after = _feed(world, rp, host, env.replace(payload=_flip(env.payload, bit)))
            if not caught or before != after:
                misses.append((env.msg_type.name, str(env.receiver), bit, caught))
    for client, body, mac in builtin:
        kinds.add(("BUILTIN_REGISTRATION", "VERIFIER", "RP"))
        for bit in _positions(len(body), rng):
            flips += 1
            before = rp.snapshot()
            try:
                rp.register_builtin(client, _flip(body, bit), mac)
                caught = False
            except MacFailure:
                caught = True
            if not caught or rp.snapshot() != before:
                misses.append(("BUILTIN_REGISTRATION", "RP", bit, caught))
    ok = flips > 0 and not misses and len(kinds) >= 9
    verdict(4, "every single-bit flip of a MAC'd body is rejected first", ok,
            f"{flips} flips over {len(kinds)} message kinds, {len(misses)} misses" + (f"; {misses[:3]}" if misses else ""))


def test_5_lossy_chains_raise_no_clone_alarm(verdict):
    start = time.perf_counter()
    sweep = loss_sweep(length=6)
    elapsed = time.perf_counter() - start
    ok = sweep.patterns == 4**6 and sweep.clone_detections == 0 and elapsed < 10.0
    verdict(5, "no false clone alarms under request/response loss", ok,
            f"{sweep.patterns} patterns, {sweep.logins} logins, {sweep.clone_detections} detections, {elapsed:.2f}s")


# -- the counter window --------------------------------------------------------------


def _counter_window_case(mode: CloneMode, y: int, m: int) -> tuple[bool, bool, list[int]]:
    """Clone after two logins, run the original y ahead, let the copy log in m times, then the victim."""
    s = build_stage(ScenarioConfig(protocol=F, clone_mode=mode, attack=AttackId.CLONE_STEALTH))
    world, rp = s.world, s.rp
    world.register(s.victim, rp, "alice")
    for _ in range(2):
        world.login(s.victim, rp, "alice")
    copy_ = a2_clone(s.victim.hsk)
    a2_inflate(s.victim.hsk, y)
    s.ctx.device.use_hsk(copy_)
    mark = world.events.mark()
    for _ in range(m):
        s.ctx.device.login(s.ctx.rp(rp.rp_id), "alice")
    early = any(e.code == CLONE_CODE for e in world.events.since(mark))
    mark = world.events.mark()
    world.login(s.victim, rp, "alice", react=False, retries=0)
    at_victim = any(e.code == CLONE_CODE for e in world.events.since(mark))
    counters = [c.counter for c in rp.account("alice").credentials.values()]
    return early, at_victim, counters


def test_6_counter_window(verdict):
    wrong = []
    cases = 0
    x = 2
    for y in range(1, 6):
        for m in range(0, y + 2):  # m = y + 1 is the first count past the window
            cases += 1
            early, at_victim, _ = _counter_window_case(CloneMode.COUNTER, y, m)
            # the victim's next counter is x + y + 1 against a stored x + m
            algebra_detects = not (x + y + 1 > x + m)
            if early or at_victim != algebra_detects or algebra_detects == counter_window_open(y, m):
                wrong.append(f"COUNTER y={y} m={m}: early={early} victim={at_victim}")
            early, at_victim, _ = _counter_window_case(CloneMode.HASHLIST, y, m)
            if early or not at_victim:
                wrong.append(f"HASHLIST y={y} m={m}: early={early} victim={at_victim}")
    verdict(6, "counter window matches the algebra; hash list always catches the victim's login", not wrong,
            f"{cases} (y, m) pairs per mode, {len(wrong)} disagreements" + (f"; {wrong[:4]}" if wrong else ""))


def test_7_mac_overhead(verdict):
    report = measure_overhead(seed=1)
    want = {"RP": 64, "HSK": 64, "CLIENT": 128}
    control = measure_overhead(seed=1, macs=(False, False)).deltas
    ok = all(d == want for d in report.deltas.values()) and all(
        all(v == 0 for v in d.values()) for d in control.values())
    verdict(7, "MAC bytes per round trip", ok, f"deltas {report.deltas}, MACs-off control {control}")


def test_8_random_digests_never_match(verdict):
    rng = random.Random(8)
    state = hashlist.initial_list(rng.randbytes(32), capacity=None)
    for _ in range(9):
        hashlist.rp_on_send(state, rng.randbytes(32))
    assert len(state) == 10
    snapshot = list(state.entries)
    accepted = sum(
        hashlist.rp_on_response(state, rng.randbytes(core.DIGEST_SIZE)) is hashlist.ListVerdict.OK
        for _ in range(100_000)
    )
    ok = accepted == 0 and list(state.entries) == snapshot
    verdict(8, "random digests against a 10-entry list", ok, f"100000 tries, {accepted} accepted")


def test_9_matrix_traces_are_reproducible(verdict, tmp_path):
    first = "\n".join(detection_matrix(seed=1).trace_lines()).encode()
    second = "\n".join(detection_matrix(seed=1).trace_lines()).encode()
    out = tmp_path / "matrix.jsonl"
    env = dict(os.environ, PYTHONHASHSEED="99")
    proc = subprocess.run(
        [sys.executable, "-m", "fidosim", "matrix", "--seed", "1", "--out", str(out)],
        env=env, capture_output=True, check=False,
    )
    third = out.read_bytes().rstrip(b"\n") if out.exists() else b""
    ok = proc.returncode == 0 and first == second == third and len(first) > 0
    verdict(9, "full-matrix traces byte-identical across runs and processes", ok,
            f"{len(first)} bytes, in-process equal={first == second}, subprocess equal={first == third}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
