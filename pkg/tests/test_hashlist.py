import random
from collections import deque

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fidosim import core, hashlist
from fidosim.errors import Uninitialized
from fidosim.hashlist import HashListState, HskChallengeSlot, ListVerdict

h = core.hash


def reference_check(entries: list, returned) -> tuple[bool, list]:
    """Plain-list restatement of the RP rule: accept if present, drop through the match."""
    if returned not in entries:
        return False, entries
    return True, entries[entries.index(returned) + 1 :]


def test_registration_sets_slot_to_latest():
    slot = HskChallengeSlot()
    hashlist.hsk_on_registration(slot, b"c0")
    assert slot.hash_c == h(b"c0")
    hashlist.hsk_on_registration(slot, b"c1")
    assert slot.hash_c == h(b"c1")


def test_authentication_returns_previous_hash():
    slot = HskChallengeSlot()
    hashlist.hsk_on_registration(slot, b"c0")
    assert hashlist.hsk_on_authentication(slot, b"c1") == h(b"c0")
    assert slot.hash_c == h(b"c1")


def test_chain_returns_shifted_sequence():
    slot = HskChallengeSlot()
    cs = [bytes([i]) * 32 for i in range(4)]
    hashlist.hsk_on_registration(slot, cs[0])
    returned = [hashlist.hsk_on_authentication(slot, c) for c in cs[1:]]
    assert returned == [h(c) for c in cs[:-1]]


def test_uninitialized_slot():
    with pytest.raises(Uninitialized):
        hashlist.hsk_on_authentication(HskChallengeSlot(), b"c")


def test_copied_slot_returns_same_hash():
    slot = HskChallengeSlot()
    hashlist.hsk_on_registration(slot, b"c0")
    hashlist.hsk_on_authentication(slot, b"c1")
    twin = HskChallengeSlot(slot.hash_c)
    assert hashlist.hsk_on_authentication(slot, b"x") == hashlist.hsk_on_authentication(twin, b"y") == h(b"c1")


def test_send_appends_at_tail():
    state = hashlist.initial_list(b"c0")
    hashlist.rp_on_send(state, b"c1")
    hashlist.rp_on_send(state, b"c2")
    assert list(state.entries) == [h(b"c0"), h(b"c1"), h(b"c2")]


def test_lost_request_keeps_its_hash():
    state = hashlist.initial_list(b"c0")
    hashlist.rp_on_send(state, b"c1")
    assert len(state) == 2 and h(b"c1") in state


def test_head_match():
    state = HashListState(deque([h(b"0"), h(b"1"), h(b"2")]))
    assert hashlist.rp_on_response(state, h(b"0")) is ListVerdict.OK
    assert list(state.entries) == [h(b"1"), h(b"2")]


def test_skip_ahead_trims_older_entries():
    state = HashListState(deque([h(b"0"), h(b"1"), h(b"2")]))
    assert hashlist.rp_on_response(state, h(b"1")) is ListVerdict.OK
    assert list(state.entries) == [h(b"2")]


def test_consumed_hash_reads_as_clone_and_leaves_list_alone():
    state = HashListState(deque([h(b"1"), h(b"2")]))
    assert hashlist.rp_on_response(state, h(b"0")) is ListVerdict.CLONE_DETECTED
    assert list(state.entries) == [h(b"1"), h(b"2")]


def test_capacity_evicts_oldest_and_counts():
    state = hashlist.initial_list(b"c0", capacity=2)
    hashlist.rp_on_send(state, b"c1")
    hashlist.rp_on_send(state, b"c2")
    assert list(state.entries) == [h(b"c1"), h(b"c2")] and state.evictions == 1


def test_dump_is_hex():
    assert hashlist.initial_list(b"c").dump() == [h(b"c").hex()]


@settings(max_examples=200)
@given(st.lists(st.tuples(st.booleans(), st.booleans()), max_size=200), st.integers(0, 2**32))
def test_honest_chains_with_losses_never_flag(steps, seed):
    """Requests or responses may vanish; the next delivered response must still be accepted."""
    rng = random.Random(seed)
    slot = HskChallengeSlot()
    reg = rng.randbytes(32)
    hashlist.hsk_on_registration(slot, reg)
    state = hashlist.initial_list(reg, capacity=None)
    model = [h(reg)]
    for lose_request, lose_response in steps:
        c = rng.randbytes(32)
        hashlist.rp_on_send(state, c)
        model.append(h(c))
        if lose_request:
            continue
        returned = hashlist.hsk_on_authentication(slot, c)
        if lose_response:
            continue
        ok, model = reference_check(model, returned)
        assert ok
        assert hashlist.rp_on_response(state, returned) is ListVerdict.OK
        assert list(state.entries) == model


@settings(max_examples=100)
@given(st.lists(st.binary(min_size=1, max_size=8), min_size=1, max_size=20, unique=True), st.data())
def test_rule_agrees_with_plain_list_model(challenges, data):
    state = HashListState(deque(h(c) for c in challenges), capacity=None)
    model = [h(c) for c in challenges]
    for _ in range(10):
        probe = h(data.draw(st.sampled_from(challenges + [b"never sent"])))
        ok, model = reference_check(model, probe)
        assert (hashlist.rp_on_response(state, probe) is ListVerdict.OK) == ok
        assert list(state.entries) == model


def test_replaying_an_accepted_response_is_flagged():
    state = hashlist.initial_list(b"c0")
    hashlist.rp_on_send(state, b"c1")
    assert hashlist.rp_on_response(state, h(b"c0")) is ListVerdict.OK
    assert hashlist.rp_on_response(state, h(b"c0")) is ListVerdict.CLONE_DETECTED
