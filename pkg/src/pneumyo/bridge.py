"""Framed serial protocol between the gesture host and the actuation controller.

Frame layout before stuffing: [type u8][seq u8][len u8][body...][crc u16 LE]
with the CRC (CRC-16/CCITT-FALSE) over type..body. The whole payload is
COBS-encoded and terminated with a single 0x00, so a receiver can always
resynchronize on the next delimiter after line garbage.

Body layouts are little-endian:

* 0x01 Heartbeat: empty
* 0x02 SetTarget: [channel u8][setpoint u16, 0.1 kPa units]
* 0x03 Actuate:   [channel u8][action u8: 0 hold, 1 inflate, 2 vent]
* 0x04 Telemetry: [channel u8][pressure u16, 0.1 kPa][pump_on u8][valve_mask u8][seq_echo u8]
* 0x05 Ack:       [seq_echo u8]
* 0x06 Nack:      [seq_echo u8][code u8]
* 0x07 Fault:     [code u8]
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import Enum, IntEnum

from ._kernels import cobs_decode, cobs_encode, crc16_ccitt
from .errors import (BodyTooLong, CobsMalformed, CrcMismatch, LengthMismatch,
                     NonMonotonicTime, UnknownType)

MAX_BODY_LEN = 64
DELIMITER = b"\x00"
# header (3) + max body + crc (2), plus one COBS code byte at these lengths
MAX_STUFFED_LEN = 3 + MAX_BODY_LEN + 2 + 1

DECI_KPA = 10.0  # wire pressure unit: 0.1 kPa


class MsgType(IntEnum):
    HEARTBEAT = 0x01
    SET_TARGET = 0x02
    ACTUATE = 0x03
    TELEMETRY = 0x04
    ACK = 0x05
    NACK = 0x06
    FAULT = 0x07


@dataclass(frozen=True)
class Heartbeat:
    pass


@dataclass(frozen=True)
class SetTarget:
    channel: int
    setpoint_decikpa: int


@dataclass(frozen=True)
class Actuate:
    channel: int
    action: int

    def __post_init__(self):
        if self.action not in (0, 1, 2):
            raise ValueError(f"action code {self.action} outside 0..2")


@dataclass(frozen=True)
class Telemetry:
    channel: int
    pressure_decikpa: int
    pump_on: bool
    valve_mask: int
    seq_echo: int

    @property
    def pressure_kpa(self) -> float:
        return self.pressure_decikpa / DECI_KPA


@dataclass(frozen=True)
class Ack:
    seq_echo: int


@dataclass(frozen=True)
class Nack:
    seq_echo: int
    code: int


@dataclass(frozen=True)
class Fault:
    code: int


BridgeMessage = Heartbeat | SetTarget | Actuate | Telemetry | Ack | Nack | Fault

_BODY_STRUCTS: dict[MsgType, struct.Struct | None] = {
    MsgType.HEARTBEAT: None,
    MsgType.SET_TARGET: struct.Struct("<BH"),
    MsgType.ACTUATE: struct.Struct("<BB"),
    MsgType.TELEMETRY: struct.Struct("<BHBBB"),
    MsgType.ACK: struct.Struct("<B"),
    MsgType.NACK: struct.Struct("<BB"),
    MsgType.FAULT: struct.Struct("<B"),
}


def _pack_body(msg: BridgeMessage) -> tuple[MsgType, bytes]:
    if isinstance(msg, Heartbeat):
        return MsgType.HEARTBEAT, b""
    if isinstance(msg, SetTarget):
        return MsgType.SET_TARGET, _BODY_STRUCTS[MsgType.SET_TARGET].pack(
            msg.channel, msg.setpoint_decikpa)
    if isinstance(msg, Actuate):
        return MsgType.ACTUATE, _BODY_STRUCTS[MsgType.ACTUATE].pack(msg.channel, msg.action)
    if isinstance(msg, Telemetry):
        return MsgType.TELEMETRY, _BODY_STRUCTS[MsgType.TELEMETRY].pack(
            msg.channel, msg.pressure_decikpa, 1 if msg.pump_on else 0,
            msg.valve_mask, msg.seq_echo)
    if isinstance(msg, Ack):
        return MsgType.ACK, _BODY_STRUCTS[MsgType.ACK].pack(msg.seq_echo)
    if isinstance(msg, Nack):
        return MsgType.NACK, _BODY_STRUCTS[MsgType.NACK].pack(msg.seq_echo, msg.code)
    if isinstance(msg, Fault):
        return MsgType.FAULT, _BODY_STRUCTS[MsgType.FAULT].pack(msg.code)
    raise TypeError(f"not a bridge message: {msg!r}")


def _unpack_body(msg_type: MsgType, body: bytes) -> BridgeMessage:
    fmt = _BODY_STRUCTS[msg_type]
    expected = 0 if fmt is None else fmt.size
    if len(body) != expected:
        raise LengthMismatch(
            f"{msg_type.name} body must be {expected} bytes, got {len(body)}")
    if msg_type is MsgType.HEARTBEAT:
        return Heartbeat()
    fields = fmt.unpack(body)
    if msg_type is MsgType.SET_TARGET:
        return SetTarget(*fields)
    if msg_type is MsgType.ACTUATE:
        channel, action = fields
        if action > 2:
            raise LengthMismatch(f"actuate action code {action} outside 0..2")
        return Actuate(channel, action)
    if msg_type is MsgType.TELEMETRY:
        channel, pressure, pump_on, valve_mask, seq_echo = fields
        return Telemetry(channel, pressure, bool(pump_on), valve_mask, seq_echo)
    if msg_type is MsgType.ACK:
        return Ack(*fields)
    if msg_type is MsgType.NACK:
        return Nack(*fields)
    return Fault(*fields)


def encode_frame(msg: BridgeMessage, seq: int) -> bytes:
    """Serialize, checksum, COBS-stuff and 0x00-terminate one message."""
    if not 0 <= seq <= 255:
        raise ValueError(f"sequence number {seq} outside u8 range")
    msg_type, body = _pack_body(msg)
    if len(body) > MAX_BODY_LEN:
        raise BodyTooLong(f"body of {len(body)} bytes exceeds {MAX_BODY_LEN}")
    raw = bytes([msg_type, seq, len(body)]) + body
    raw += struct.pack("<H", crc16_ccitt(raw))
    return cobs_encode(raw) + DELIMITER


def decode_frame(data: bytes) -> tuple[BridgeMessage, int]:
    """Decode one complete 0x00-terminated frame back to (message, seq)."""
    if not data.endswith(DELIMITER):
        raise CobsMalformed("frame is not 0x00-terminated")
    return decode_payload(data[:-1])


def decode_payload(chunk: bytes) -> tuple[BridgeMessage, int]:
    """Decode the stuffed bytes between delimiters (no trailing 0x00)."""
    try:
        raw = cobs_decode(chunk)
    except ValueError as exc:
        raise CobsMalformed(str(exc)) from exc
    if len(raw) < 5:
        raise LengthMismatch(f"frame of {len(raw)} bytes is shorter than header + crc")
    stored_crc = struct.unpack_from("<H", raw, len(raw) - 2)[0]
    if crc16_ccitt(raw[:-2]) != stored_crc:
        raise CrcMismatch("frame checksum mismatch")
    type_code, seq, body_len = raw[0], raw[1], raw[2]
    body = raw[3:-2]
    if body_len != len(body):
        raise LengthMismatch(f"length field {body_len} != body length {len(body)}")
    try:
        msg_type = MsgType(type_code)
    except ValueError as exc:
        raise UnknownType(f"unknown frame type 0x{type_code:02x}") from exc
    return _unpack_body(msg_type, body), seq


@dataclass
class LinkStats:
    frames_ok: int = 0
    crc_mismatch: int = 0
    cobs_malformed: int = 0
    length_mismatch: int = 0
    unknown_type: int = 0

    @property
    def errors(self) -> int:
        return (self.crc_mismatch + self.cobs_malformed
                + self.length_mismatch + self.unknown_type)

    def count(self, exc: Exception):
        if isinstance(exc, CrcMismatch):
            self.crc_mismatch += 1
        elif isinstance(exc, CobsMalformed):
            self.cobs_malformed += 1
        elif isinstance(exc, LengthMismatch):
            self.length_mismatch += 1
        elif isinstance(exc, UnknownType):
            self.unknown_type += 1
        else:
            raise exc


class FrameSplitter:
    """Incremental stream decoder: buffers bytes, splits on 0x00, tallies
    decode errors, and recovers after line garbage.

    A frame carries its delimiter only at the end, so a garbage burst that
    contains no zero byte runs straight into the next frame's chunk. When a
    chunk fails to decode whole, the splitter retries its suffixes (bounded
    by the maximum stuffed frame length), which salvages a valid frame glued
    to leading garbage; the discarded garbage still counts as one error.
    """

    def __init__(self):
        self._buf = bytearray()
        self.stats = LinkStats()

    def feed(self, data: bytes) -> list[tuple[BridgeMessage, int]]:
        """Consume bytes, return every complete message they finish."""
        self._buf += data
        out = []
        while True:
            idx = self._buf.find(0)
            if idx < 0:
                break
            chunk = bytes(self._buf[:idx])
            del self._buf[:idx + 1]
            if not chunk:
                continue  # idle delimiter padding between frames
            try:
                out.append(decode_payload(chunk))
                self.stats.frames_ok += 1
            except Exception as exc:
                self.stats.count(exc)
                salvaged = self._salvage_suffix(chunk)
                if salvaged is not None:
                    out.append(salvaged)
                    self.stats.frames_ok += 1
        return out

    @staticmethod
    def _salvage_suffix(chunk: bytes) -> tuple[BridgeMessage, int] | None:
        for start in range(max(1, len(chunk) - MAX_STUFFED_LEN), len(chunk)):
            try:
                return decode_payload(chunk[start:])
            except (CrcMismatch, CobsMalformed, LengthMismatch, UnknownType):
                continue
        return None


class LinkStateKind(Enum):
    DISCONNECTED = "disconnected"
    SYNCING = "syncing"
    UP = "up"
    FAULT = "fault"


@dataclass(frozen=True)
class LinkConfig:
    heartbeat_ms: float = 100.0
    timeout_ms: float = 500.0
    nack_fault_threshold: int = 3

    def __post_init__(self):
        if self.heartbeat_ms <= 0 or self.timeout_ms <= 0:
            raise ValueError("heartbeat_ms and timeout_ms must be positive")
        if self.nack_fault_threshold < 1:
            raise ValueError("nack_fault_threshold must be >= 1")


@dataclass
class LinkState:
    state: LinkStateKind = LinkStateKind.DISCONNECTED
    last_rx_ms: float | None = None
    consecutive_nacks: int = 0
    last_tx_ms: float | None = None
    last_tick_ms: float | None = None


class LinkSupervisor:
    """Heartbeat-based link supervision for one endpoint.

    Disconnected -> Syncing on any valid frame, Syncing -> Up on a
    heartbeat, Up -> Disconnected after rx silence beyond the timeout.
    Reaching the Nack threshold latches Fault until an explicit reset.
    Heartbeats are emitted in every non-fault state so two idle endpoints
    can bootstrap each other to Up.
    """

    def __init__(self, cfg: LinkConfig | None = None):
        self.cfg = cfg or LinkConfig()
        self.link = LinkState()

    @property
    def state(self) -> LinkStateKind:
        return self.link.state

    def on_frame(self, msg: BridgeMessage, now_ms: float):
        link = self.link
        if link.state is LinkStateKind.FAULT:
            return
        link.last_rx_ms = now_ms
        if isinstance(msg, Nack):
            link.consecutive_nacks += 1
            if link.consecutive_nacks >= self.cfg.nack_fault_threshold:
                link.state = LinkStateKind.FAULT
            return
        link.consecutive_nacks = 0
        if link.state is LinkStateKind.DISCONNECTED:
            link.state = LinkStateKind.SYNCING
        if link.state is LinkStateKind.SYNCING and isinstance(msg, Heartbeat):
            link.state = LinkStateKind.UP

    def on_tick(self, now_ms: float) -> bool:
        """Advance timers; True when this endpoint should send a heartbeat."""
        link = self.link
        if link.last_tick_ms is not None and now_ms < link.last_tick_ms:
            raise NonMonotonicTime(f"link tick went backwards: {now_ms} < {link.last_tick_ms}")
        link.last_tick_ms = now_ms
        if link.state is LinkStateKind.FAULT:
            return False
        if (link.state is LinkStateKind.UP and link.last_rx_ms is not None
                and now_ms - link.last_rx_ms > self.cfg.timeout_ms):
            link.state = LinkStateKind.DISCONNECTED
        if link.last_tx_ms is None or now_ms - link.last_tx_ms >= self.cfg.heartbeat_ms:
            link.last_tx_ms = now_ms
            return True
        return False

    def reset(self):
        self.link = LinkState()
