"""Armband trace ingestion for deterministic replay.

Trace files are plain CSV lines ``t_ms,kind,fields...`` sorted by time:

* ``emg``: 8 ints in -128..127 (one 200 Hz sample)
* ``pose``: one of rest, fist, wave_in, wave_out, fingers_spread, double_tap
* ``imu``: 10 raw int16 fields (quaternion, accel, gyro)

Blank lines and ``#`` comments are allowed. Validation is strict and every
error names the offending line.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .errors import NonMonotonicTime, TraceMalformed
from .myo import Pose

POSE_NAMES: dict[str, Pose] = {
    "rest": Pose.REST,
    "fist": Pose.FIST,
    "wave_in": Pose.WAVE_IN,
    "wave_out": Pose.WAVE_OUT,
    "fingers_spread": Pose.FINGERS_SPREAD,
    "double_tap": Pose.DOUBLE_TAP,
}


class TraceKind(Enum):
    EMG = "emg"
    POSE = "pose"
    IMU = "imu"


@dataclass(frozen=True)
class TraceRecord:
    t_ms: int
    kind: TraceKind
    emg: tuple[int, ...] | None = None
    pose: Pose | None = None
    imu_raw: tuple[int, ...] | None = None


def _parse_int(text: str, line_no: int, what: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise TraceMalformed(f"line {line_no}: {what} {text!r} is not an integer") from None


def parse_trace_line(line: str, line_no: int) -> TraceRecord:
    parts = [p.strip() for p in line.split(",")]
    if len(parts) < 2:
        raise TraceMalformed(f"line {line_no}: expected 't_ms,kind,fields...'")
    t_ms = _parse_int(parts[0], line_no, "timestamp")
    if t_ms < 0:
        raise TraceMalformed(f"line {line_no}: timestamp {t_ms} is negative")
    kind_name = parts[1].lower()
    fields = parts[2:]
    if kind_name == "emg":
        if len(fields) != 8:
            raise TraceMalformed(f"line {line_no}: emg record needs 8 values, got {len(fields)}")
        values = tuple(_parse_int(f, line_no, "emg value") for f in fields)
        for v in values:
            if not -128 <= v <= 127:
                raise TraceMalformed(f"line {line_no}: emg value {v} outside -128..127")
        return TraceRecord(t_ms, TraceKind.EMG, emg=values)
    if kind_name == "pose":
        if len(fields) != 1:
            raise TraceMalformed(f"line {line_no}: pose record needs 1 name, got {len(fields)}")
        name = fields[0].lower()
        if name not in POSE_NAMES:
            raise TraceMalformed(f"line {line_no}: unknown pose {fields[0]!r}")
        return TraceRecord(t_ms, TraceKind.POSE, pose=POSE_NAMES[name])
    if kind_name == "imu":
        if len(fields) != 10:
            raise TraceMalformed(f"line {line_no}: imu record needs 10 values, got {len(fields)}")
        values = tuple(_parse_int(f, line_no, "imu value") for f in fields)
        for v in values:
            if not -32768 <= v <= 32767:
                raise TraceMalformed(f"line {line_no}: imu value {v} outside int16 range")
        return TraceRecord(t_ms, TraceKind.IMU, imu_raw=values)
    raise TraceMalformed(f"line {line_no}: unknown record kind {parts[1]!r}")


def parse_trace(text: str) -> list[TraceRecord]:
    records = []
    last_t = None
    last_line = 0
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        record = parse_trace_line(stripped, line_no)
        if last_t is not None and record.t_ms < last_t:
            raise NonMonotonicTime(
                f"line {line_no}: timestamp {record.t_ms} before line {last_line}'s {last_t}")
        last_t = record.t_ms
        last_line = line_no
        records.append(record)
    return records


def ingest_trace(path: str | Path) -> list[TraceRecord]:
    """Load and strictly validate a trace file."""
    return parse_trace(Path(path).read_text())
