"""Wire codec for the Thalmic armband's BLE notifications and commands.

Layouts follow the vendor's published GATT protocol header so that real
capture files stay decodable:

* EMG notification: 16 bytes = two consecutive samples of 8 signed int8
  channels (raw ADC counts, 200 Hz stream, 2 samples per packet).
* IMU notification: 20 bytes = ten little-endian int16: quaternion w,x,y,z
  then accel x,y,z then gyro x,y,z. Scale divisors 16384 / 2048 / 16.
* Classifier notification: byte0 event type, bytes1..2 pose code (u16 LE,
  meaningful for pose events only).
* Commands are [command, payload_len, payload...].

Decoders are total over correct-length input: unrecognized event or pose
codes become Unknown variants (raw codes preserved) so capture replay
never halts on firmware quirks.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import IntEnum

from .errors import WrongLength

EMG_FRAME_LEN = 16
IMU_FRAME_LEN = 20
CLASSIFIER_EVENT_LEN = 3

ORIENTATION_SCALE = 16384.0
ACCEL_SCALE = 2048.0
GYRO_SCALE = 16.0

_EMG_STRUCT = struct.Struct("<16b")
_IMU_STRUCT = struct.Struct("<10h")
_CLASSIFIER_STRUCT = struct.Struct("<BH")


class EventKind(IntEnum):
    ARM_SYNCED = 0x01
    ARM_UNSYNCED = 0x02
    POSE_CHANGED = 0x03
    UNLOCKED = 0x04
    LOCKED = 0x05


class Pose(IntEnum):
    REST = 0x0000
    FIST = 0x0001
    WAVE_IN = 0x0002
    WAVE_OUT = 0x0003
    FINGERS_SPREAD = 0x0004
    DOUBLE_TAP = 0x0005
    UNKNOWN = 0xFFFF


class EmgMode(IntEnum):
    NONE = 0x00
    SEND = 0x02
    SEND_RAW = 0x03


class ImuMode(IntEnum):
    NONE = 0x00
    SEND_DATA = 0x01
    SEND_EVENTS = 0x02
    SEND_ALL = 0x03
    SEND_RAW = 0x04


class ClassifierMode(IntEnum):
    DISABLED = 0x00
    ENABLED = 0x01


@dataclass(frozen=True)
class EmgSample:
    """One 8-channel raw EMG sample, values in -128..127."""

    channels: tuple[int, ...]

    def __post_init__(self):
        if len(self.channels) != 8:
            raise ValueError("EMG sample needs exactly 8 channels")
        for v in self.channels:
            if not -128 <= v <= 127:
                raise ValueError(f"EMG value {v} outside int8 range")


@dataclass(frozen=True)
class EmgFrame:
    """Two consecutive EMG samples as carried by one notification."""

    first: EmgSample
    second: EmgSample


@dataclass(frozen=True)
class ImuFrame:
    """Raw IMU notification; scaled views are derived properties."""

    raw: tuple[int, ...]  # w,x,y,z, ax,ay,az, gx,gy,gz as int16

    def __post_init__(self):
        if len(self.raw) != 10:
            raise ValueError("IMU frame needs exactly 10 raw fields")
        for v in self.raw:
            if not -32768 <= v <= 32767:
                raise ValueError(f"IMU raw value {v} outside int16 range")

    @property
    def orientation(self) -> tuple[float, float, float, float]:
        """Unit quaternion (w, x, y, z)."""
        w, x, y, z = self.raw[0:4]
        return (w / ORIENTATION_SCALE, x / ORIENTATION_SCALE,
                y / ORIENTATION_SCALE, z / ORIENTATION_SCALE)

    @property
    def accel(self) -> tuple[float, float, float]:
        """Acceleration in g."""
        ax, ay, az = self.raw[4:7]
        return (ax / ACCEL_SCALE, ay / ACCEL_SCALE, az / ACCEL_SCALE)

    @property
    def gyro(self) -> tuple[float, float, float]:
        """Angular rate in deg/s."""
        gx, gy, gz = self.raw[7:10]
        return (gx / GYRO_SCALE, gy / GYRO_SCALE, gz / GYRO_SCALE)


@dataclass(frozen=True)
class ClassifierEvent:
    """Decoded classifier notification with raw codes preserved.

    ``kind_code``/``pose_code`` are the wire values; ``kind`` is None for
    unrecognized event types and ``pose`` maps out-of-range codes to
    ``Pose.UNKNOWN``. The pose is meaningful only for pose-changed events.
    """

    kind_code: int
    pose_code: int

    @property
    def kind(self) -> EventKind | None:
        try:
            return EventKind(self.kind_code)
        except ValueError:
            return None

    @property
    def pose(self) -> Pose:
        try:
            return Pose(self.pose_code)
        except ValueError:
            return Pose.UNKNOWN

    @classmethod
    def pose_changed(cls, pose: Pose) -> "ClassifierEvent":
        return cls(EventKind.POSE_CHANGED, int(pose))


@dataclass(frozen=True)
class SetMode:
    emg_mode: int
    imu_mode: int
    classifier_mode: int

    def __post_init__(self):
        EmgMode(self.emg_mode)
        ImuMode(self.imu_mode)
        ClassifierMode(self.classifier_mode)


@dataclass(frozen=True)
class Vibrate:
    pattern: int

    def __post_init__(self):
        if not 0 <= self.pattern <= 3:
            raise ValueError(f"vibration pattern {self.pattern} outside 0..3")


@dataclass(frozen=True)
class Unlock:
    kind: int

    def __post_init__(self):
        if not 0 <= self.kind <= 255:
            raise ValueError(f"unlock kind {self.kind} outside u8 range")


@dataclass(frozen=True)
class DeepSleep:
    pass


MyoCommand = SetMode | Vibrate | Unlock | DeepSleep


def decode_emg(data: bytes) -> EmgFrame:
    """Decode a 16-byte EMG notification into its two samples."""
    if len(data) != EMG_FRAME_LEN:
        raise WrongLength(f"EMG notification must be {EMG_FRAME_LEN} bytes, got {len(data)}")
    values = _EMG_STRUCT.unpack(data)
    return EmgFrame(EmgSample(values[0:8]), EmgSample(values[8:16]))


def encode_emg(frame: EmgFrame) -> bytes:
    """Re-encode an EMG frame to its 16-byte notification."""
    return _EMG_STRUCT.pack(*frame.first.channels, *frame.second.channels)


def decode_imu(data: bytes) -> ImuFrame:
    """Decode a 20-byte IMU notification."""
    if len(data) != IMU_FRAME_LEN:
        raise WrongLength(f"IMU notification must be {IMU_FRAME_LEN} bytes, got {len(data)}")
    return ImuFrame(_IMU_STRUCT.unpack(data))


def encode_imu(frame: ImuFrame) -> bytes:
    """Re-encode an IMU frame to its 20-byte notification."""
    return _IMU_STRUCT.pack(*frame.raw)


def decode_classifier(data: bytes) -> ClassifierEvent:
    """Decode a classifier notification (first 3 bytes of the payload)."""
    if len(data) < CLASSIFIER_EVENT_LEN:
        raise WrongLength(f"classifier notification needs >= {CLASSIFIER_EVENT_LEN} bytes, got {len(data)}")
    kind_code, pose_code = _CLASSIFIER_STRUCT.unpack_from(data)
    return ClassifierEvent(kind_code, pose_code)


def encode_classifier(event: ClassifierEvent) -> bytes:
    """Re-encode a classifier event to its 3-byte notification."""
    return _CLASSIFIER_STRUCT.pack(event.kind_code, event.pose_code)


def encode_command(cmd: MyoCommand) -> bytes:
    """Encode a control command as [command, payload_len, payload...]."""
    if isinstance(cmd, SetMode):
        return bytes([0x01, 0x03, cmd.emg_mode, cmd.imu_mode, cmd.classifier_mode])
    if isinstance(cmd, Vibrate):
        return bytes([0x03, 0x01, cmd.pattern])
    if isinstance(cmd, DeepSleep):
        return bytes([0x04, 0x00])
    if isinstance(cmd, Unlock):
        return bytes([0x0A, 0x01, cmd.kind])
    raise TypeError(f"not a command: {cmd!r}")
