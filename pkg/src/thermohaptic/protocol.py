"""Binary datagram codec for the host-device UDP link.

Frames are fixed size per message type: a 16-byte header (magic 0xFA
0x57, version, type, sequence number, microsecond timestamp), a
type-specific payload of IEEE-754 binary32 fields, and a CRC-16 over
everything before it.  All integers and floats are little-endian.

The codec is pure; sequence acceptance keeps one integer of state per
stream and uses 32-bit serial-number arithmetic so the counter can wrap.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from typing import Union

MAGIC = b"\xfa\x57"
VERSION = 1

_HEADER = struct.Struct("<2sBBIQ")
HEADER_SIZE = _HEADER.size  # 16
CRC_SIZE = 2

TYPE_INDENTATION = 1
TYPE_TEMP_SETPOINT = 2
TYPE_TELEMETRY = 3
TYPE_HOLD_PRESSURE = 4
TYPE_ACK = 5

_SEQ_MOD = 1 << 32
_SEQ_HALF = 1 << 31


class ProtocolError(Exception):
    """Base for every frame validation failure."""


class ShortFrameError(ProtocolError):
    pass


class BadMagicError(ProtocolError):
    pass


class BadVersionError(ProtocolError):
    pass


class UnknownTypeError(ProtocolError):
    pass


class FrameLengthError(ProtocolError):
    """Buffer length does not match the fixed size for its type."""


class BadCrcError(ProtocolError):
    pass


@dataclass(frozen=True)
class IndentationUpdate:
    """Host -> device: fingertip indentation depths in mm."""

    index_mm: float
    thumb_mm: float


@dataclass(frozen=True)
class TempSetpoint:
    """Host -> device: per-finger temperature targets; NaN turns a heater off."""

    index_c: float
    thumb_c: float


@dataclass(frozen=True)
class Telemetry:
    """Device -> host: sensed temperatures, pouch pressures, heater duties."""

    index_temp_c: float
    thumb_temp_c: float
    index_pressure_kpa: float
    thumb_pressure_kpa: float
    index_duty: float
    thumb_duty: float


@dataclass(frozen=True)
class HoldPressure:
    """Host -> device: constant pouch pressure override in kPa."""

    kpa: float


@dataclass(frozen=True)
class Ack:
    """Device -> host: confirms receipt of the frame with this sequence number."""

    acked_seq: int


Payload = Union[IndentationUpdate, TempSetpoint, Telemetry, HoldPressure, Ack]

_PAYLOAD_STRUCTS: dict[int, struct.Struct] = {
    TYPE_INDENTATION: struct.Struct("<ff"),
    TYPE_TEMP_SETPOINT: struct.Struct("<ff"),
    TYPE_TELEMETRY: struct.Struct("<6f"),
    TYPE_HOLD_PRESSURE: struct.Struct("<f"),
    TYPE_ACK: struct.Struct("<I"),
}

_TYPE_OF_PAYLOAD: dict[type, int] = {
    IndentationUpdate: TYPE_INDENTATION,
    TempSetpoint: TYPE_TEMP_SETPOINT,
    Telemetry: TYPE_TELEMETRY,
    HoldPressure: TYPE_HOLD_PRESSURE,
    Ack: TYPE_ACK,
}

_PAYLOAD_OF_TYPE: dict[int, type] = {v: k for k, v in _TYPE_OF_PAYLOAD.items()}

FRAME_SIZES: dict[int, int] = {
    t: HEADER_SIZE + s.size + CRC_SIZE for t, s in _PAYLOAD_STRUCTS.items()
}


@dataclass(frozen=True)
class Frame:
    seq: int
    timestamp_us: int
    payload: Payload

    @property
    def frame_type(self) -> int:
        return _TYPE_OF_PAYLOAD[type(self.payload)]


def _crc_table() -> tuple[int, ...]:
    table = []
    for byte in range(256):
        acc = byte << 8
        for _ in range(8):
            acc = ((acc << 1) ^ 0x1021 if acc & 0x8000 else acc << 1) & 0xFFFF
        table.append(acc)
    return tuple(table)


_CRC_TABLE = _crc_table()


def crc16(data: bytes) -> int:
    """CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, no reflection, no xorout."""
    acc = 0xFFFF
    for byte in data:
        acc = ((acc << 8) & 0xFFFF) ^ _CRC_TABLE[(acc >> 8) ^ byte]
    return acc


def encode(frame: Frame) -> bytes:
    ptype = _TYPE_OF_PAYLOAD.get(type(frame.payload))
    if ptype is None:
        raise UnknownTypeError(f"cannot encode payload {type(frame.payload).__name__}")
    if not 0 <= frame.seq < _SEQ_MOD:
        raise ValueError("seq must fit in u32")
    if not 0 <= frame.timestamp_us < 1 << 64:
        raise ValueError("timestamp_us must fit in u64")
    header = _HEADER.pack(MAGIC, VERSION, ptype, frame.seq, frame.timestamp_us)
    p = frame.payload
    if isinstance(p, Ack):
        body = _PAYLOAD_STRUCTS[ptype].pack(p.acked_seq)
    else:
        fields = [getattr(p, f) for f in p.__dataclass_fields__]
        body = _PAYLOAD_STRUCTS[ptype].pack(*fields)
    raw = header + body
    return raw + struct.pack("<H", crc16(raw))


def decode(buf: bytes) -> Frame:
    if len(buf) < HEADER_SIZE + CRC_SIZE:
        raise ShortFrameError(f"{len(buf)} bytes is below the minimum frame size")
    magic, version, ptype, seq, timestamp_us = _HEADER.unpack_from(buf)
    if magic != MAGIC:
        raise BadMagicError(f"bad magic {magic.hex()}")
    if version != VERSION:
        raise BadVersionError(f"unsupported version {version}")
    payload_struct = _PAYLOAD_STRUCTS.get(ptype)
    if payload_struct is None:
        raise UnknownTypeError(f"unknown frame type {ptype}")
    expected = FRAME_SIZES[ptype]
    if len(buf) != expected:
        raise FrameLengthError(f"type {ptype} frame must be {expected} bytes, got {len(buf)}")
    (stored_crc,) = struct.unpack_from("<H", buf, expected - CRC_SIZE)
    computed = crc16(buf[: expected - CRC_SIZE])
    if stored_crc != computed:
        raise BadCrcError(f"crc {stored_crc:#06x} != computed {computed:#06x}")
    fields = payload_struct.unpack_from(buf, HEADER_SIZE)
    payload = _PAYLOAD_OF_TYPE[ptype](*fields)
    return Frame(seq=seq, timestamp_us=timestamp_us, payload=payload)


@dataclass(frozen=True)
class SeqState:
    """Last-kept sequence number for one frame stream, or fresh (keep anything)."""

    last: int | None = None


def accept(state: SeqState, seq: int) -> tuple[bool, SeqState]:
    """Serial-number acceptance: keep iff seq is newer than the last kept.

    Newer means the forward 32-bit distance from last to seq is in
    (0, 2^31); everything else is a duplicate or stale reordering.
    Returns (keep, next state).
    """
    if not 0 <= seq < _SEQ_MOD:
        raise ValueError("seq must fit in u32")
    if state.last is None:
        return True, SeqState(last=seq)
    diff = (seq - state.last) % _SEQ_MOD
    if 0 < diff < _SEQ_HALF:
        return True, SeqState(last=seq)
    return False, state


def heater_off(setpoint_c: float) -> bool:
    """A NaN setpoint encodes heater-off in TempSetpoint frames."""
    return math.isnan(setpoint_c)
