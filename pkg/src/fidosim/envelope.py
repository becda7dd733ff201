"""Canonical byte encoding for message bodies and the wire envelope.

Bodies are dataclasses encoded field by field in declaration order. Every field
is framed with a 4-byte big-endian length. Scalars:

=============  ==============================================
``bytes``      raw
``str``        UTF-8
``bool``       one byte, 0 or 1
``int``        4-byte big-endian (u32)
``IntEnum``    one byte
``list[T]``    concatenation of framed items
``T | None``   empty for ``None``, else ``0x01`` + encoding
dataclass      nested body encoding
=============  ==============================================

Envelope layout::

    "FE" | ver u8 | type u8 | sender kind u8 | sender u16+utf8
         | receiver kind u8 | receiver u16+utf8 | origin u16+utf8
         | payload u32+bytes | mac flag u8 | [mac 32]
"""

from __future__ import annotations

import dataclasses
import enum
import struct
import types
import typing
from dataclasses import dataclass
from functools import cached_property, lru_cache

from . import core
from .core import EntityId, EntityKind, MacTag, SymmetricKey
from .errors import MalformedEnvelope

MAGIC = b"FE"
VERSION = 1


class MsgType(enum.IntEnum):
    REG_REQUEST = 1
    REG_RESPONSE = 2
    AUTH_REQUEST = 3
    AUTH_RESPONSE = 4
    REG_ACK = 5
    ATTEST = 6
    NOTIFY = 7


WEBAUTHN_TYPES = frozenset(
    {MsgType.REG_REQUEST, MsgType.REG_RESPONSE, MsgType.AUTH_REQUEST, MsgType.AUTH_RESPONSE}
)


# -- body codec ----------------------------------------------------------------


def frame(data: bytes) -> bytes:
    return struct.pack(">I", len(data)) + data


def unframe_all(data: bytes) -> list[bytes]:
    out, pos = [], 0
    while pos < len(data):
        if pos + 4 > len(data):
            raise MalformedEnvelope("truncated frame header")
        (n,) = struct.unpack_from(">I", data, pos)
        pos += 4
        if pos + n > len(data):
            raise MalformedEnvelope("truncated frame body")
        out.append(data[pos : pos + n])
        pos += n
    return out


def pack_fields(*items: bytes) -> bytes:
    return b"".join(frame(i) for i in items)


@lru_cache(maxsize=None)
def _hints(cls: type) -> tuple[tuple[str, object], ...]:
    hints = typing.get_type_hints(cls)
    return tuple((f.name, hints[f.name]) for f in dataclasses.fields(cls))


def _optional_arg(tp):
    origin = typing.get_origin(tp)
    if origin in (typing.Union, types.UnionType):
        args = [a for a in typing.get_args(tp) if a is not type(None)]
        if len(args) == 1:
            return args[0]
    return None


def _check_width(raw: bytes, n: int, what: str) -> None:
    if len(raw) != n:
        raise MalformedEnvelope(f"bad {what} width")


def _bool_dec(raw: bytes) -> bool:
    if raw not in (b"\x00", b"\x01"):
        raise MalformedEnvelope("bad bool")
    return raw == b"\x01"


def _u32_dec(raw: bytes) -> int:
    _check_width(raw, 4, "u32")
    return struct.unpack(">I", raw)[0]


def _str_dec(raw: bytes) -> str:
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedEnvelope(str(exc)) from exc


@lru_cache(maxsize=None)
def _codec(tp) -> tuple:
    """(encoder, decoder) for one field type, built once per type."""
    inner = _optional_arg(tp)
    if inner is not None:
        enc_i, dec_i = _codec(inner)

        def dec_opt(raw: bytes):
            if raw == b"":
                return None
            if raw[:1] != b"\x01":
                raise MalformedEnvelope("bad optional marker")
            return dec_i(raw[1:])

        return (lambda v: b"" if v is None else b"\x01" + enc_i(v)), dec_opt
    if typing.get_origin(tp) is list:
        (item,) = typing.get_args(tp)
        enc_i, dec_i = _codec(item)
        return (
            lambda v: b"".join(frame(enc_i(x)) for x in v),
            lambda raw: [dec_i(r) for r in unframe_all(raw)],
        )
    if isinstance(tp, type):
        if dataclasses.is_dataclass(tp):
            return encode_body, lambda raw: decode_body(tp, raw)
        if issubclass(tp, bool):
            return (lambda v: b"\x01" if v else b"\x00"), _bool_dec
        if issubclass(tp, enum.IntEnum):

            def dec_enum(raw: bytes):
                _check_width(raw, 1, "enum")
                try:
                    return tp(raw[0])
                except ValueError as exc:
                    raise MalformedEnvelope(str(exc)) from exc

            return (lambda v: bytes([int(v)])), dec_enum
        if issubclass(tp, int):
            return (lambda v: struct.pack(">I", core.u32(v))), _u32_dec
        if issubclass(tp, str):
            return (lambda v: v.encode("utf-8")), _str_dec
        if issubclass(tp, bytes):

            def dec_bytes(raw: bytes):
                try:
                    return tp(raw)
                except ValueError as exc:
                    raise MalformedEnvelope(str(exc)) from exc

            return bytes, dec_bytes
    raise TypeError(f"no codec for {tp!r}")


@lru_cache(maxsize=None)
def _fields(cls: type) -> tuple[tuple[str, object, object], ...]:
    return tuple((name, *_codec(tp)) for name, tp in _hints(cls))


def encode_body(obj) -> bytes:
    return b"".join(frame(enc(getattr(obj, name))) for name, enc, _ in _fields(type(obj)))


def decode_body(cls, data: bytes):
    fields = _fields(cls)
    raws = unframe_all(data)
    if len(raws) != len(fields):
        raise MalformedEnvelope(f"{cls.__name__}: expected {len(fields)} fields, got {len(raws)}")
    return cls(**{name: dec(raw) for (name, _, dec), raw in zip(fields, raws)})


# -- envelope ------------------------------------------------------------------


@dataclass(frozen=True)
class MessageEnvelope:
    msg_type: MsgType
    sender: EntityId
    receiver: EntityId
    origin: str
    payload: bytes
    mac: MacTag | None = None

    def replace(self, **changes) -> MessageEnvelope:
        return dataclasses.replace(self, **changes)

    @cached_property
    def size(self) -> int:
        return len(encode(self))


def _str16(s: str) -> bytes:
    raw = s.encode("utf-8")
    if len(raw) > 0xFFFF:
        raise ValueError("string too long for envelope header")
    return struct.pack(">H", len(raw)) + raw


def encode(env: MessageEnvelope) -> bytes:
    parts = [
        MAGIC,
        bytes([VERSION, int(env.msg_type), int(env.sender.kind)]),
        _str16(env.sender.name),
        bytes([int(env.receiver.kind)]),
        _str16(env.receiver.name),
        _str16(env.origin),
        struct.pack(">I", len(env.payload)),
        env.payload,
    ]
    if env.mac is None:
        parts.append(b"\x00")
    else:
        parts += [b"\x01", bytes(env.mac)]
    return b"".join(parts)


class _Reader:
    def __init__(self, data: bytes):
        self.data, self.pos = data, 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise MalformedEnvelope("truncated envelope")
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def u8(self) -> int:
        return self.take(1)[0]

    def str16(self) -> str:
        (n,) = struct.unpack(">H", self.take(2))
        try:
            return self.take(n).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedEnvelope("bad utf-8") from exc


def decode(data: bytes) -> MessageEnvelope:
    r = _Reader(bytes(data))
    if r.take(2) != MAGIC:
        raise MalformedEnvelope("bad magic")
    if r.u8() != VERSION:
        raise MalformedEnvelope("unsupported version")
    try:
        msg_type = MsgType(r.u8())
        sender = EntityId(EntityKind(r.u8()), r.str16())
        receiver_kind = EntityKind(r.u8())
    except ValueError as exc:
        raise MalformedEnvelope(str(exc)) from exc
    receiver = EntityId(receiver_kind, r.str16())
    origin = r.str16()
    (n,) = struct.unpack(">I", r.take(4))
    payload = r.take(n)
    flag = r.u8()
    if flag == 0:
        mac = None
    elif flag == 1:
        mac = MacTag(r.take(32))
    else:
        raise MalformedEnvelope("bad mac flag")
    if r.pos != len(r.data):
        raise MalformedEnvelope("trailing bytes")
    return MessageEnvelope(msg_type, sender, receiver, origin, payload, mac)


# -- authenticated channel -----------------------------------------------------


def mac_input(env: MessageEnvelope) -> bytes:
    """Bytes covered by the channel MAC: type, origin and body, not addressing."""
    return pack_fields(bytes([int(env.msg_type)]), env.origin.encode("utf-8"), env.payload)


def seal(env: MessageEnvelope, key: SymmetricKey) -> MessageEnvelope:
    return env.replace(mac=core.mac_tag(key, mac_input(env)))


def check(env: MessageEnvelope, key: SymmetricKey) -> bool:
    return env.mac is not None and core.mac_verify(key, mac_input(env), env.mac)
