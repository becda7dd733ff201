import random
import struct

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fidosim import core
from fidosim.core import EntityId, EntityKind, MacTag, SigAlg, SymmetricKey
from fidosim.envelope import (
    MessageEnvelope,
    MsgType,
    check,
    decode,
    decode_body,
    encode,
    encode_body,
    mac_input,
    seal,
)
from fidosim.errors import MalformedEnvelope
from fidosim.fido2.messages import (
    AssertionResponse,
    AttestationResponse,
    AuthRequest,
    Notice,
    RegistrationAck,
    RegistrationRequest,
)

names = st.text(st.characters(blacklist_categories=("Cs",)), max_size=20)
entity_ids = st.builds(EntityId, st.sampled_from(list(EntityKind)), names)
macs = st.none() | st.binary(min_size=32, max_size=32).map(MacTag)
envelopes = st.builds(
    MessageEnvelope,
    st.sampled_from(list(MsgType)),
    entity_ids,
    entity_ids,
    names,
    st.binary(max_size=300),
    macs,
)


def header_size(env: MessageEnvelope) -> int:
    """Fixed part of the wire layout, counted field by field."""
    s, r, o = (x.encode() for x in (env.sender.name, env.receiver.name, env.origin))
    return 2 + 1 + 1 + 1 + (2 + len(s)) + 1 + (2 + len(r)) + (2 + len(o)) + 4 + 1


@settings(max_examples=300)
@given(envelopes)
def test_encode_decode_identity(env):
    assert decode(encode(env)) == env


@settings(max_examples=200)
@given(envelopes)
def test_size_is_header_plus_payload_plus_mac(env):
    assert env.size == header_size(env) + len(env.payload) + (32 if env.mac else 0)


@settings(max_examples=200)
@given(envelopes, envelopes)
def test_encoding_is_canonical(a, b):
    assert (encode(a) == encode(b)) == (a == b)


def test_mac_adds_exactly_32_bytes():
    env = MessageEnvelope(MsgType.AUTH_REQUEST, EntityId(EntityKind.RP, "github.com"),
                          EntityId(EntityKind.CLIENT, "pc"), "https://github.com", b"body")
    tagged = seal(env, SymmetricKey(bytes(32)))
    assert tagged.size - env.size == 32


def test_random_bytes_are_rejected():
    rng = random.Random(0)
    for _ in range(200):
        with pytest.raises(MalformedEnvelope):
            decode(rng.randbytes(16))


def test_truncation_and_trailing_bytes_are_rejected():
    env = MessageEnvelope(MsgType.NOTIFY, EntityId(EntityKind.RP, "a"), EntityId(EntityKind.CLIENT, "b"), "o", b"xyz")
    raw = encode(env)
    for cut in range(len(raw)):
        with pytest.raises(MalformedEnvelope):
            decode(raw[:cut])
    with pytest.raises(MalformedEnvelope):
        decode(raw + b"\0")


def test_bad_mac_flag_and_type_are_rejected():
    env = MessageEnvelope(MsgType.NOTIFY, EntityId(EntityKind.RP, "a"), EntityId(EntityKind.CLIENT, "b"), "o", b"")
    raw = bytearray(encode(env))
    raw[-1] = 7
    with pytest.raises(MalformedEnvelope):
        decode(bytes(raw))
    raw = bytearray(encode(env))
    raw[3] = 0xEE
    with pytest.raises(MalformedEnvelope):
        decode(bytes(raw))


def test_mac_covers_body_but_not_addressing():
    key = SymmetricKey(bytes(range(32)))
    env = seal(MessageEnvelope(MsgType.AUTH_RESPONSE, EntityId(EntityKind.CLIENT, "pc"),
                               EntityId(EntityKind.RP, "github.com"), "https://github.com", b"sig"), key)
    assert check(env, key)
    assert check(env.replace(sender=EntityId(EntityKind.VERIFIER, "pc")), key)
    assert not check(env.replace(origin="https://evil.com"), key)
    assert not check(env.replace(msg_type=MsgType.REG_RESPONSE), key)
    assert not check(env.replace(mac=None), key)
    assert mac_input(env).startswith(struct.pack(">I", 1))


def _body_samples():
    rng = random.Random(2)
    d = core.hash(b"x")
    return [
        RegistrationRequest(rng.randbytes(32), "github.com", "GitHub", "alice",
                            [SigAlg.STRONG_EC, SigAlg.STRONG_RSA], True, False),
        AuthRequest(rng.randbytes(32), "github.com", [rng.randbytes(16), rng.randbytes(16)]),
        AuthRequest(rng.randbytes(32), "github.com", []),
        AttestationResponse(rng.randbytes(16), b"pk", SigAlg.WEAK_TOY, d, 7, b"sig", d, b"att", "Key"),
        AssertionResponse(rng.randbytes(16), 2**32 - 1, b"s", d, d, None),
        AssertionResponse(rng.randbytes(16), 0, b"s", d, d, d),
        RegistrationAck(d),
        Notice("session", "alice", b"t"),
    ]


@pytest.mark.parametrize("body", _body_samples(), ids=lambda b: type(b).__name__)
def test_body_round_trip(body):
    assert decode_body(type(body), encode_body(body)) == body


def test_body_decode_rejects_wrong_field_count_and_widths():
    raw = encode_body(RegistrationAck(core.hash(b"")))
    with pytest.raises(MalformedEnvelope):
        decode_body(AuthRequest, raw)
    with pytest.raises(MalformedEnvelope):
        decode_body(RegistrationAck, raw[:-1])
    bad_alg = encode_body(AttestationResponse(b"c", b"p", SigAlg.STRONG_EC, core.hash(b""), 0, b"", core.hash(b""), b"", ""))
    bad_alg = bad_alg.replace(b"\x00\x00\x00\x01\x03", b"\x00\x00\x00\x01\x09", 1)
    with pytest.raises(MalformedEnvelope):
        decode_body(AttestationResponse, bad_alg)
