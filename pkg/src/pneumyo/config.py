"""Run configuration: defaults for every subsystem plus a flat config file.

The file format is hand-authorable ``key = value`` lines with ``#``
comments. Keys are flat and fully enumerated below; unknown keys are
errors. ``channel.<field>`` sets a value for all channels and
``channel.<index>.<field>`` overrides one channel.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

from .bridge import LinkConfig
from .errors import ConfigInvalid
from .gestures import DEFAULT_POSE_MAP, EnvelopeConfig, IntentKind
from .homeostasis import ChannelConfig
from .myo import Pose
from .plant import PlantConfig, SensorModel

MAX_CHANNELS = 4

_INTENT_NAMES = {k.value: k for k in IntentKind}
_POSE_KEYS = {
    "rest": Pose.REST,
    "fist": Pose.FIST,
    "wave_in": Pose.WAVE_IN,
    "wave_out": Pose.WAVE_OUT,
    "fingers_spread": Pose.FINGERS_SPREAD,
    "double_tap": Pose.DOUBLE_TAP,
}

# config key -> dataclass field, per config section
_ENVELOPE_KEYS = {
    "envelope.window_samples": ("window_samples", int),
    "envelope.theta_on": ("theta_on", float),
    "envelope.theta_off": ("theta_off", float),
    "envelope.debounce_count": ("debounce_count", int),
    "envelope.cooldown_ms": ("cooldown_ms", float),
}
_CHANNEL_KEYS = {
    "base_setpoint_kpa": ("base_setpoint", float),
    "breathing_amplitude_kpa": ("breathing_amplitude", float),
    "breathing_period_s": ("breathing_period_s", float),
    "deadband_kpa": ("deadband", float),
    "p_max_kpa": ("p_max", float),
    "p_safe_kpa": ("p_safe", float),
    "min_dwell_ms": ("min_dwell_ms", float),
    "telemetry_stale_ms": ("telemetry_stale_ms", float),
}
_PLANT_KEYS = {
    "plant.v0_m3": ("v0", float),
    "plant.compliance_kpa": ("compliance", float),
    "plant.p_atm_kpa": ("p_atm", float),
    "plant.temperature_k": ("temperature", float),
    "plant.p_stall_kpa": ("p_stall", float),
    "plant.pump_conductance": ("g_pump", float),
    "plant.vent_conductance": ("g_vent", float),
    "plant.leak_conductance0": ("g_leak0", float),
    "plant.leak_tau_s": ("tau_decay", float),
    "plant.dt_s": ("dt", float),
    "plant.gas_constant": ("r_gas", float),
}
_SENSOR_KEYS = {
    "sensor.full_scale_kpa": ("full_scale", float),
    "sensor.bits": ("bits", int),
    "sensor.noise_sigma_kpa": ("noise_sigma", float),
    "sensor.rate_hz": ("rate_hz", float),
}
_LINK_KEYS = {
    "bridge.heartbeat_ms": ("heartbeat_ms", float),
    "bridge.timeout_ms": ("timeout_ms", float),
    "bridge.nack_fault_threshold": ("nack_fault_threshold", int),
}


@dataclass(frozen=True)
class RunConfig:
    channels: int = 2
    tick_hz: int = 50
    use_classifier: bool = True
    use_effort: bool = True
    envelope: EnvelopeConfig = field(default_factory=EnvelopeConfig)
    channel_configs: tuple[ChannelConfig, ...] = ()
    plant: PlantConfig = field(default_factory=PlantConfig)
    sensor: SensorModel = field(default_factory=SensorModel)
    link: LinkConfig = field(default_factory=LinkConfig)
    pose_map: dict[Pose, IntentKind] = field(default_factory=lambda: dict(DEFAULT_POSE_MAP))

    def __post_init__(self):
        if not 1 <= self.channels <= MAX_CHANNELS:
            raise ConfigInvalid(f"channels must be 1..{MAX_CHANNELS}, got {self.channels}")
        if self.tick_hz < 1 or 1000 % self.tick_hz != 0:
            raise ConfigInvalid(f"tick_hz must divide 1000, got {self.tick_hz}")
        if not self.channel_configs:
            object.__setattr__(self, "channel_configs",
                               tuple(ChannelConfig() for _ in range(self.channels)))
        if len(self.channel_configs) != self.channels:
            raise ConfigInvalid("channel_configs length must match channels")
        # the control tick must subdivide into whole plant steps
        tick_s = 1.0 / self.tick_hz
        steps = round(tick_s / self.plant.dt)
        if steps < 1 or abs(steps * self.plant.dt - tick_s) > 1e-9:
            raise ConfigInvalid(
                f"plant dt {self.plant.dt} does not subdivide the {self.tick_hz} Hz tick")
        # sensor sampling must land on plant step boundaries
        period_steps = round(1.0 / (self.sensor.rate_hz * self.plant.dt))
        if period_steps < 1 or abs(period_steps * self.plant.dt - 1.0 / self.sensor.rate_hz) > 1e-9:
            raise ConfigInvalid(
                f"sensor rate {self.sensor.rate_hz} Hz does not align with plant dt {self.plant.dt}")

    @property
    def ticks_per_second(self) -> int:
        return self.tick_hz

    @property
    def tick_ms(self) -> int:
        return 1000 // self.tick_hz

    @property
    def steps_per_tick(self) -> int:
        return round((1.0 / self.tick_hz) / self.plant.dt)

    @property
    def sensor_period_steps(self) -> int:
        return round(1.0 / (self.sensor.rate_hz * self.plant.dt))


def _parse_bool(text: str) -> bool:
    lowered = text.lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _cast(key: str, text: str, kind):
    try:
        if kind is bool:
            return _parse_bool(text)
        return kind(text)
    except ValueError as exc:
        raise ConfigInvalid(f"key {key!r}: {exc}") from exc


def parse_config(text: str) -> RunConfig:
    entries: dict[str, str] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigInvalid(f"line {line_no}: expected 'key = value'")
        key, _, value = stripped.partition("=")
        key = key.strip().lower()
        value = value.strip()
        if not key or not value:
            raise ConfigInvalid(f"line {line_no}: expected 'key = value'")
        if key in entries:
            raise ConfigInvalid(f"line {line_no}: duplicate key {key!r}")
        entries[key] = value
    return build_config(entries)


def build_config(entries: dict[str, str]) -> RunConfig:
    """Assemble a RunConfig from flat key/value strings; unknown keys are errors."""
    entries = dict(entries)

    def take(key: str, kind, default):
        if key in entries:
            return _cast(key, entries.pop(key), kind)
        return default

    channels = take("channels", int, 2)
    tick_hz = take("tick_hz", int, 50)
    use_classifier = take("gesture.use_classifier", bool, True)
    use_effort = take("gesture.use_effort", bool, True)

    def section(key_map, factory):
        values = {}
        for key, (field_name, kind) in key_map.items():
            if key in entries:
                values[field_name] = _cast(key, entries.pop(key), kind)
        try:
            return factory(**values)
        except ValueError as exc:
            raise ConfigInvalid(str(exc)) from exc

    envelope = section(_ENVELOPE_KEYS, EnvelopeConfig)
    plant = section(_PLANT_KEYS, PlantConfig)
    sensor = section(_SENSOR_KEYS, SensorModel)
    link = section(_LINK_KEYS, LinkConfig)

    pose_map = dict(DEFAULT_POSE_MAP)
    for name, pose in _POSE_KEYS.items():
        key = f"map.{name}"
        if key in entries:
            value = entries.pop(key).lower()
            if value not in _INTENT_NAMES:
                raise ConfigInvalid(
                    f"key {key!r}: unknown intent {value!r} (choose from {sorted(_INTENT_NAMES)})")
            pose_map[pose] = _INTENT_NAMES[value]

    if not 1 <= channels <= MAX_CHANNELS:
        raise ConfigInvalid(f"channels must be 1..{MAX_CHANNELS}, got {channels}")
    shared: dict[str, object] = {}
    per_channel: list[dict[str, object]] = [{} for _ in range(channels)]
    for key in list(entries):
        parts = key.split(".")
        if parts[0] != "channel":
            continue
        if len(parts) == 2 and parts[1] in _CHANNEL_KEYS:
            field_name, kind = _CHANNEL_KEYS[parts[1]]
            shared[field_name] = _cast(key, entries.pop(key), kind)
        elif len(parts) == 3 and parts[1].isdigit() and parts[2] in _CHANNEL_KEYS:
            index = int(parts[1])
            if index >= channels:
                raise ConfigInvalid(f"key {key!r}: channel index {index} >= channels {channels}")
            field_name, kind = _CHANNEL_KEYS[parts[2]]
            per_channel[index][field_name] = _cast(key, entries.pop(key), kind)

    if entries:
        unknown = ", ".join(sorted(entries))
        raise ConfigInvalid(f"unknown config keys: {unknown}")

    try:
        channel_configs = tuple(
            replace(ChannelConfig(**shared), **per_channel[i]) for i in range(channels))
    except ValueError as exc:
        raise ConfigInvalid(str(exc)) from exc

    try:
        return RunConfig(
            channels=channels, tick_hz=tick_hz,
            use_classifier=use_classifier, use_effort=use_effort,
            envelope=envelope, channel_configs=channel_configs,
            plant=plant, sensor=sensor, link=link, pose_map=pose_map)
    except ValueError as exc:
        raise ConfigInvalid(str(exc)) from exc


def load_config(path: str | Path) -> RunConfig:
    """Parse a config file; missing keys fall back to defaults."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def config_keys() -> list[str]:
    """Every recognized flat config key (documentation helper)."""
    keys = ["channels", "tick_hz", "gesture.use_classifier", "gesture.use_effort"]
    keys += list(_ENVELOPE_KEYS)
    keys += [f"map.{name}" for name in _POSE_KEYS]
    keys += [f"channel.{k}" for k in _CHANNEL_KEYS]
    keys += [f"channel.<i>.{k}" for k in _CHANNEL_KEYS]
    keys += list(_PLANT_KEYS) + list(_SENSOR_KEYS) + list(_LINK_KEYS)
    return keys
