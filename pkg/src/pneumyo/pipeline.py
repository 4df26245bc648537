"""End-to-end harness: trace -> codec -> gestures -> controller -> bridge ->
simulated plant -> telemetry, under a fixed-tick deterministic scheduler.

Both wire endpoints run against the real frame codec through an in-process
loopback transport, so every actuation command and telemetry reading takes
the same path it would over a physical serial link:

* the host endpoint decodes armband records, debounces gestures, runs the
  per-channel homeostasis controllers, and emits Actuate frames;
* the device endpoint applies actuations to the simulated bladders, samples
  the pressure sensor on its own schedule, and streams Telemetry frames
  back (plus Acks, Nacks for bad channels, and heartbeats).

Given the same (config, trace, seed) the telemetry output is bit-identical
between runs; a single seeded generator drives all sensor noise.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from random import Random

from .bridge import (Ack, Actuate, FrameSplitter, Heartbeat, LinkStateKind,
                     LinkSupervisor, Nack, SetTarget, Telemetry, encode_frame)
from .config import RunConfig
from .errors import ConfigInvalid
from .gestures import ActuationIntent, GestureEngine, NO_INTENT
from .homeostasis import (ControllerState, Mode, control_step, note_telemetry,
                          to_bridge)
from .myo import (ClassifierEvent, EmgFrame, EmgSample, ImuFrame,
                  decode_classifier, decode_emg, decode_imu,
                  encode_classifier, encode_emg, encode_imu, Pose)
from .plant import Action, PlantState, read_sensor, run as plant_run
from .trace import TraceKind, TraceRecord

TELEMETRY_HEADER = "t_ms,channel,pressure_kpa,setpoint_kpa,action,mode,link_state"

NACK_BAD_CHANNEL = 0x01

_ACTION_NAMES = {Action.HOLD: "hold", Action.INFLATE: "inflate", Action.VENT: "vent"}


@dataclass(frozen=True)
class TelemetryRecord:
    t_ms: int
    channel: int
    pressure_kpa: float
    setpoint_kpa: float
    action: Action
    mode: Mode
    link_state: LinkStateKind

    def to_line(self) -> str:
        return (f"{self.t_ms},{self.channel},{self.pressure_kpa:.3f},"
                f"{self.setpoint_kpa:.3f},{_ACTION_NAMES[self.action]},"
                f"{self.mode.value},{self.link_state.value}")


@dataclass
class ChannelSummary:
    final_mode: Mode
    band_entry_s: float | None = None
    ticks_after_entry: int = 0
    ticks_in_band: int = 0

    @property
    def band_occupancy(self) -> float:
        if self.ticks_after_entry == 0:
            return 0.0
        return self.ticks_in_band / self.ticks_after_entry


@dataclass
class RunSummary:
    ticks: int
    duration_s: float
    seed: int
    records_total: int
    records_consumed: int
    records_after_window: int
    channels: list[ChannelSummary]
    host_link: LinkStateKind
    device_link: LinkStateKind
    plant_time_s: float

    @property
    def faulted(self) -> bool:
        return (any(c.final_mode is Mode.FAULTED for c in self.channels)
                or self.host_link is LinkStateKind.FAULT
                or self.device_link is LinkStateKind.FAULT)

    @property
    def exit_code(self) -> int:
        return 1 if self.faulted else 0

    def describe(self) -> str:
        lines = [
            f"ticks={self.ticks} duration={self.duration_s}s seed={self.seed}",
            f"trace records: {self.records_consumed}/{self.records_total} consumed"
            f" ({self.records_after_window} after window)",
            f"link: host={self.host_link.value} device={self.device_link.value}",
        ]
        for i, ch in enumerate(self.channels):
            entry = "never" if ch.band_entry_s is None else f"{ch.band_entry_s:.2f}s"
            lines.append(
                f"channel {i}: mode={ch.final_mode.value} band_entry={entry}"
                f" occupancy={ch.band_occupancy:.3f}")
        return "\n".join(lines)


class HostEndpoint:
    """Gesture-host side: armband decode, intents, controllers, frame tx."""

    def __init__(self, cfg: RunConfig, trace: list[TraceRecord]):
        self.cfg = cfg
        self.engine = GestureEngine(cfg.envelope, cfg.pose_map)
        self.controllers = [ControllerState() for _ in range(cfg.channels)]
        self.measured: list[float | None] = [None] * cfg.channels
        self.splitter = FrameSplitter()
        self.link = LinkSupervisor(cfg.link)
        self.trace = trace
        self.trace_pos = 0
        self.records_consumed = 0
        self._seq = 0
        self._pending_emg: EmgSample | None = None

    def _next_seq(self) -> int:
        seq = self._seq
        self._seq = (self._seq + 1) & 0xFF
        return seq

    def handle_bytes(self, data: bytes, now_ms: int):
        for msg, _seq in self.splitter.feed(data):
            self.link.on_frame(msg, now_ms)
            if isinstance(msg, Telemetry) and msg.channel < self.cfg.channels:
                self.measured[msg.channel] = msg.pressure_kpa
                note_telemetry(self.controllers[msg.channel], now_ms)

    def deliver_trace(self, now_ms: int) -> Pose | None:
        """Route due trace records through the armband codec; return the last
        debounced pose, if any."""
        emitted = None
        while self.trace_pos < len(self.trace) and self.trace[self.trace_pos].t_ms <= now_ms:
            rec = self.trace[self.trace_pos]
            self.trace_pos += 1
            self.records_consumed += 1
            if rec.kind is TraceKind.EMG:
                sample = EmgSample(rec.emg)
                if self._pending_emg is None:
                    self._pending_emg = sample
                else:
                    frame = decode_emg(encode_emg(EmgFrame(self._pending_emg, sample)))
                    self._pending_emg = None
                    self.engine.push_sample(frame.first)
                    self.engine.push_sample(frame.second)
            elif rec.kind is TraceKind.POSE:
                if self.cfg.use_classifier:
                    event = decode_classifier(
                        encode_classifier(ClassifierEvent.pose_changed(rec.pose)))
                    pose = self.engine.debounce_pose(event, rec.t_ms)
                    if pose is not None:
                        emitted = pose
            else:
                decode_imu(encode_imu(ImuFrame(rec.imu_raw)))  # decoded, unused by default
        return emitted

    def intent_for_tick(self, pose: Pose | None) -> ActuationIntent:
        if pose is not None:
            return self.engine.intent_for_pose(pose)
        if self.cfg.use_effort:
            return self.engine.intent_for_effort()
        return NO_INTENT

    def control_tick(self, now_ms: int, intent: ActuationIntent) -> tuple[bytes, list[tuple[Action, float]]]:
        """Run every channel controller; return tx bytes and (action, setpoint)."""
        out = bytearray()
        decisions = []
        for ch in range(self.cfg.channels):
            state = self.controllers[ch]
            action = control_step(self.cfg.channel_configs[ch], state,
                                  self.measured[ch], now_ms, intent)
            decisions.append((action, state.last_setpoint))
            out += encode_frame(to_bridge(action, ch), self._next_seq())
        if self.link.on_tick(now_ms):
            out += encode_frame(Heartbeat(), self._next_seq())
        return bytes(out), decisions


class DeviceEndpoint:
    """Actuation-controller side: plants, sensor sampling, telemetry tx."""

    def __init__(self, cfg: RunConfig, rng: Random):
        self.cfg = cfg
        self.rng = rng
        self.plants = [PlantState.initial(cfg.plant) for _ in range(cfg.channels)]
        self.actions = [Action.HOLD] * cfg.channels
        self.targets: list[int | None] = [None] * cfg.channels
        self.splitter = FrameSplitter()
        self.link = LinkSupervisor(cfg.link)
        self._seq = 0
        self._last_host_seq = 0
        self._substeps = 0  # global plant substep counter, for sensor scheduling

    def _next_seq(self) -> int:
        seq = self._seq
        self._seq = (self._seq + 1) & 0xFF
        return seq

    def handle_bytes(self, data: bytes, now_ms: int) -> bytes:
        out = bytearray()
        for msg, seq in self.splitter.feed(data):
            self.link.on_frame(msg, now_ms)
            self._last_host_seq = seq
            if isinstance(msg, Actuate):
                if msg.channel < self.cfg.channels:
                    self.actions[msg.channel] = Action(msg.action)
                    out += encode_frame(Ack(seq), self._next_seq())
                else:
                    out += encode_frame(Nack(seq, NACK_BAD_CHANNEL), self._next_seq())
            elif isinstance(msg, SetTarget):
                if msg.channel < self.cfg.channels:
                    self.targets[msg.channel] = msg.setpoint_decikpa
                    out += encode_frame(Ack(seq), self._next_seq())
                else:
                    out += encode_frame(Nack(seq, NACK_BAD_CHANNEL), self._next_seq())
        return bytes(out)

    def tick(self, now_ms: int) -> bytes:
        """Advance all plants one control period, sampling the sensor on its
        own grid and streaming readings back as telemetry frames."""
        cfg = self.cfg
        out = bytearray()
        remaining = cfg.steps_per_tick
        while remaining > 0:
            until_sample = cfg.sensor_period_steps - (self._substeps % cfg.sensor_period_steps)
            segment = min(remaining, until_sample)
            for ch in range(cfg.channels):
                self.plants[ch] = plant_run(self.plants[ch], cfg.plant,
                                            self.actions[ch], segment)
            self._substeps += segment
            remaining -= segment
            if self._substeps % cfg.sensor_period_steps == 0:
                for ch in range(cfg.channels):
                    out += self._telemetry_frame(ch)
        if self.link.on_tick(now_ms):
            out += encode_frame(Heartbeat(), self._next_seq())
        return bytes(out)

    def _telemetry_frame(self, ch: int) -> bytes:
        reading = read_sensor(self.plants[ch], self.cfg.plant, self.cfg.sensor, self.rng)
        deci = min(0xFFFF, round(reading * 10.0))
        action = self.actions[ch]
        msg = Telemetry(channel=ch, pressure_decikpa=deci,
                        pump_on=action is Action.INFLATE,
                        valve_mask=1 if action is Action.VENT else 0,
                        seq_echo=self._last_host_seq)
        return encode_frame(msg, self._next_seq())


def run_simulation(cfg: RunConfig, trace: list[TraceRecord], duration_s: float,
                   seed: int) -> tuple[list[TelemetryRecord], RunSummary]:
    """Run the closed loop for ``duration_s`` simulated seconds."""
    if duration_s <= 0:
        raise ConfigInvalid(f"duration must be positive, got {duration_s}")
    ticks = round(duration_s * cfg.tick_hz)
    host = HostEndpoint(cfg, trace)
    device = DeviceEndpoint(cfg, Random(seed))
    summaries = [ChannelSummary(final_mode=Mode.BREATHING) for _ in range(cfg.channels)]
    records: list[TelemetryRecord] = []
    device_to_host = b""
    for k in range(ticks):
        now_ms = k * cfg.tick_ms
        host.handle_bytes(device_to_host, now_ms)
        pose = host.deliver_trace(now_ms)
        intent = host.intent_for_tick(pose)
        host_bytes, decisions = host.control_tick(now_ms, intent)
        replies = device.handle_bytes(host_bytes, now_ms)
        device_to_host = replies + device.tick(now_ms)
        for ch, (action, setpoint_kpa) in enumerate(decisions):
            measured = host.measured[ch]
            state = host.controllers[ch]
            summary = summaries[ch]
            if measured is not None:
                in_band = abs(measured - setpoint_kpa) <= cfg.channel_configs[ch].deadband
                if summary.band_entry_s is None and in_band:
                    summary.band_entry_s = now_ms / 1000.0
                if summary.band_entry_s is not None:
                    summary.ticks_after_entry += 1
                    summary.ticks_in_band += 1 if in_band else 0
            records.append(TelemetryRecord(
                t_ms=now_ms, channel=ch,
                pressure_kpa=measured if measured is not None else 0.0,
                setpoint_kpa=setpoint_kpa, action=action,
                mode=state.mode, link_state=host.link.state))
    for ch in range(cfg.channels):
        summaries[ch].final_mode = host.controllers[ch].mode
    run_summary = RunSummary(
        ticks=ticks, duration_s=duration_s, seed=seed,
        records_total=len(trace),
        records_consumed=host.records_consumed,
        records_after_window=len(trace) - host.records_consumed,
        channels=summaries,
        host_link=host.link.state, device_link=device.link.state,
        plant_time_s=device.plants[0].t if device.plants else 0.0)
    return records, run_summary


def write_telemetry(records: list[TelemetryRecord], path: str | Path):
    with open(path, "w", newline="\n") as fh:
        fh.write(TELEMETRY_HEADER + "\n")
        for record in records:
            fh.write(record.to_line() + "\n")
