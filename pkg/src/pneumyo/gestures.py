"""Turn decoded armband data into actuation intents.

Two input paths feed the sculpture controller:

* a continuous muscle-effort envelope (sliding-window RMS over the raw EMG
  stream, normalized to [0, 1] with an on/off hysteresis gate), and
* discrete poses from the armband's onboard classifier, debounced and
  rate-limited before they are mapped to intents.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import NonMonotonicTime
from .myo import ClassifierEvent, EmgSample, EventKind, Pose


@dataclass(frozen=True)
class EnvelopeConfig:
    window_samples: int = 40          # 200 ms at the 200 Hz EMG rate
    theta_on: float = 0.15
    theta_off: float = 0.08
    debounce_count: int = 3
    cooldown_ms: float = 500.0

    def __post_init__(self):
        if self.window_samples < 1:
            raise ValueError("window_samples must be >= 1")
        if not 0.0 <= self.theta_off < self.theta_on <= 1.0:
            raise ValueError("need 0 <= theta_off < theta_on <= 1")
        if self.debounce_count < 1:
            raise ValueError("debounce_count must be >= 1")
        if self.cooldown_ms < 0:
            raise ValueError("cooldown_ms must be >= 0")


@dataclass(frozen=True)
class Activation:
    """Per-channel RMS envelope scaled to [0, 1], plus its mean."""

    per_channel: tuple[float, ...]
    mean: float


class IntentKind(Enum):
    NONE = "none"
    SET_EFFORT = "set_effort"
    INFLATE_BURST = "inflate_burst"
    VENT = "vent"
    TOGGLE_BREATHING = "toggle_breathing"
    EMERGENCY_VENT = "emergency_vent"


@dataclass(frozen=True)
class ActuationIntent:
    kind: IntentKind
    level: float = 0.0


NO_INTENT = ActuationIntent(IntentKind.NONE)

# Chosen for safety (spread fingers = emergency vent); overridable in the
# run configuration.
DEFAULT_POSE_MAP: dict[Pose, IntentKind] = {
    Pose.REST: IntentKind.NONE,
    Pose.FIST: IntentKind.INFLATE_BURST,
    Pose.WAVE_IN: IntentKind.SET_EFFORT,
    Pose.WAVE_OUT: IntentKind.VENT,
    Pose.FINGERS_SPREAD: IntentKind.EMERGENCY_VENT,
    Pose.DOUBLE_TAP: IntentKind.TOGGLE_BREATHING,
}


def classify_effort(activation: Activation, cfg: EnvelopeConfig, prev_active: bool) -> bool:
    """Hysteresis gate on the envelope mean: on above theta_on, off below theta_off."""
    if activation.mean > cfg.theta_on:
        return True
    if activation.mean < cfg.theta_off:
        return False
    return prev_active


def map_to_intent(pose_or_effort, mapping: dict[Pose, IntentKind] | None = None,
                  effort_level: float = 0.0) -> ActuationIntent:
    """Map a debounced pose (or a raw effort level) to an actuation intent.

    Poses missing from the mapping are inert. The set-effort intent carries
    ``effort_level`` (for the pose path, the caller passes the current
    envelope mean).
    """
    if isinstance(pose_or_effort, Pose):
        table = DEFAULT_POSE_MAP if mapping is None else mapping
        kind = table.get(pose_or_effort, IntentKind.NONE)
        if kind is IntentKind.SET_EFFORT:
            return ActuationIntent(kind, _clamp01(effort_level))
        return ActuationIntent(kind)
    return ActuationIntent(IntentKind.SET_EFFORT, _clamp01(float(pose_or_effort)))


def _clamp01(x: float) -> float:
    return 0.0 if x < 0.0 else 1.0 if x > 1.0 else x


class GestureEngine:
    """Single-owner engine state: envelope windows, effort gate, pose debouncer."""

    def __init__(self, cfg: EnvelopeConfig | None = None,
                 pose_map: dict[Pose, IntentKind] | None = None):
        self.cfg = cfg or EnvelopeConfig()
        self.pose_map = DEFAULT_POSE_MAP if pose_map is None else pose_map
        # ring buffer of squared samples per channel; integer sums are exact
        self._squares = [[0] * self.cfg.window_samples for _ in range(8)]
        self._sum_sq = [0] * 8
        self._pos = 0
        self.activation = Activation((0.0,) * 8, 0.0)
        self.effort_active = False
        self._streak_pose: Pose | None = None
        self._streak_len = 0
        self._last_emit_ms: float | None = None
        self._last_event_ms: float | None = None

    def push_sample(self, sample: EmgSample) -> Activation:
        """Fold one EMG sample into the sliding-window RMS envelope.

        The window is zero-padded during warm-up, so early envelopes can
        only undershoot. Also advances the effort hysteresis gate.
        """
        cfg = self.cfg
        pos = self._pos
        per_channel = []
        for ch in range(8):
            sq = sample.channels[ch] * sample.channels[ch]
            self._sum_sq[ch] += sq - self._squares[ch][pos]
            self._squares[ch][pos] = sq
            rms = math.sqrt(self._sum_sq[ch] / cfg.window_samples) / 127.0
            per_channel.append(rms if rms < 1.0 else 1.0)
        self._pos = (pos + 1) % cfg.window_samples
        self.activation = Activation(tuple(per_channel), sum(per_channel) / 8.0)
        self.effort_active = classify_effort(self.activation, cfg, self.effort_active)
        return self.activation

    def debounce_pose(self, event: ClassifierEvent, now_ms: float) -> Pose | None:
        """Emit a pose after ``debounce_count`` identical consecutive pose
        events, at most once per cooldown window. Rest never emits; other
        event kinds are link status and leave the streak alone.
        """
        if self._last_event_ms is not None and now_ms < self._last_event_ms:
            raise NonMonotonicTime(f"classifier event time went backwards: {now_ms} < {self._last_event_ms}")
        self._last_event_ms = now_ms
        if event.kind is not EventKind.POSE_CHANGED:
            return None
        pose = event.pose
        if pose == self._streak_pose:
            self._streak_len += 1
        else:
            self._streak_pose = pose
            self._streak_len = 1
        if pose is Pose.REST:
            return None
        if self._streak_len < self.cfg.debounce_count:
            return None
        if self._last_emit_ms is not None and now_ms - self._last_emit_ms < self.cfg.cooldown_ms:
            return None
        self._last_emit_ms = now_ms
        return pose

    def intent_for_pose(self, pose: Pose) -> ActuationIntent:
        return map_to_intent(pose, self.pose_map, effort_level=self.activation.mean)

    def intent_for_effort(self) -> ActuationIntent:
        """Continuous path: set-effort at the current envelope mean while the
        hysteresis gate is on, otherwise no intent."""
        if self.effort_active:
            return ActuationIntent(IntentKind.SET_EFFORT, _clamp01(self.activation.mean))
        return NO_INTENT
