"""Per-channel pressure regulation: breathing setpoint, hysteresis band,
gesture intents, and hard safety latching.

The regulator is a two-threshold hysteresis controller for binary
pump/valve actuators: crossing below the band arms Inflate, crossing above
arms Vent, and the armed drive holds until pressure is back at the
setpoint itself. Driving to the center (rather than just inside the band
edge) is what keeps occupancy high while the breathing oscillation slews
the setpoint.

Safety rules dominate everything: measured pressure at or above ``p_max``
(or an emergency-vent intent) forces Vent and latches the Faulted mode,
which only an explicit clear below ``p_safe`` releases. Stale telemetry
degrades to Hold and, after a full second, to Vent.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from math import pi, sin

from .bridge import Actuate
from .errors import NonMonotonicTime
from .gestures import ActuationIntent, IntentKind, NO_INTENT
from .plant import Action

BURST_OFFSET_KPA = 1.0     # temporary setpoint raise for an inflate burst
BURST_DURATION_S = 2.0
STALE_VENT_MS = 1000.0     # telemetry silence beyond this fails toward Vent


class Mode(Enum):
    BREATHING = "breathing"
    DIRECT = "direct"
    FAULTED = "faulted"


@dataclass(frozen=True)
class ChannelConfig:
    base_setpoint: float = 1.5         # gauge kPa
    breathing_amplitude: float = 0.5   # kPa
    breathing_period_s: float = 8.0
    deadband: float = 0.3              # kPa
    p_max: float = 5.0                 # hard ceiling, kPa
    p_safe: float = 1.0                # fault clears only below this, kPa
    min_dwell_ms: float = 50.0
    telemetry_stale_ms: float = 300.0

    def __post_init__(self):
        if self.deadband <= 0:
            raise ValueError("deadband must be positive")
        if self.base_setpoint + self.breathing_amplitude + BURST_OFFSET_KPA >= self.p_max:
            raise ValueError("setpoint range plus burst headroom must stay below p_max")
        if not 0 < self.p_safe < self.base_setpoint:
            raise ValueError("need 0 < p_safe < base_setpoint")
        if self.breathing_period_s <= 0 or self.min_dwell_ms < 0 or self.telemetry_stale_ms <= 0:
            raise ValueError("periods and dwell must be positive")


@dataclass
class ControllerState:
    mode: Mode = Mode.BREATHING
    effort: float = 0.0
    last_action: Action = Action.HOLD
    last_transition_ms: float | None = None
    last_telemetry_ms: float | None = None
    last_step_ms: float | None = None
    burst_until_ms: float | None = None
    drive: Action | None = None            # armed hysteresis drive
    last_setpoint: float = 0.0             # effective setpoint of the last step


def setpoint(cfg: ChannelConfig, state: ControllerState, t_s: float) -> float:
    """Mode setpoint at simulated time ``t_s`` (burst overlay excluded).

    Breathing: base + A*sin(2*pi*t/T). Direct: effort 0 anchors at base,
    effort 1 just under the safety ceiling.
    """
    if state.mode is Mode.DIRECT:
        return cfg.base_setpoint + state.effort * (cfg.p_max - cfg.deadband - cfg.base_setpoint)
    return cfg.base_setpoint + cfg.breathing_amplitude * sin(2.0 * pi * t_s / cfg.breathing_period_s)


def note_telemetry(state: ControllerState, now_ms: float):
    """Record that fresh telemetry for this channel arrived."""
    state.last_telemetry_ms = now_ms


def clear_fault(cfg: ChannelConfig, state: ControllerState, measured_p: float) -> bool:
    """Explicitly release the fault latch; only allowed below ``p_safe``."""
    if state.mode is not Mode.FAULTED or measured_p >= cfg.p_safe:
        return False
    state.mode = Mode.BREATHING
    state.drive = None
    state.burst_until_ms = None
    return True


def control_step(cfg: ChannelConfig, state: ControllerState,
                 measured_p: float | None, now_ms: float,
                 intent: ActuationIntent = NO_INTENT) -> Action:
    """One control tick; mutates ``state`` and returns the emitted action."""
    if state.last_step_ms is not None and now_ms < state.last_step_ms:
        raise NonMonotonicTime(f"control time went backwards: {now_ms} < {state.last_step_ms}")
    state.last_step_ms = now_ms

    # intents update state before the action is chosen; fault mode ignores
    # everything except effort bookkeeping
    kind = intent.kind
    if kind is IntentKind.SET_EFFORT:
        state.effort = min(1.0, max(0.0, intent.level))
    elif kind is IntentKind.TOGGLE_BREATHING and state.mode is not Mode.FAULTED:
        state.mode = Mode.DIRECT if state.mode is Mode.BREATHING else Mode.BREATHING
    elif kind is IntentKind.INFLATE_BURST and state.mode is not Mode.FAULTED:
        state.burst_until_ms = now_ms + BURST_DURATION_S * 1000.0
    elif kind is IntentKind.EMERGENCY_VENT:
        state.mode = Mode.FAULTED

    if measured_p is not None and measured_p >= cfg.p_max:
        state.mode = Mode.FAULTED

    s = setpoint(cfg, state, now_ms / 1000.0)
    if state.burst_until_ms is not None:
        if now_ms < state.burst_until_ms:
            s += BURST_OFFSET_KPA
        else:
            state.burst_until_ms = None
    state.last_setpoint = s

    if state.mode is Mode.FAULTED:
        state.drive = None
        return _emit(cfg, state, Action.VENT, now_ms, safety=True)

    staleness = now_ms - state.last_telemetry_ms if state.last_telemetry_ms is not None else now_ms
    if measured_p is None or staleness > cfg.telemetry_stale_ms:
        state.drive = None
        if staleness > STALE_VENT_MS:
            return _emit(cfg, state, Action.VENT, now_ms, safety=True)
        return _emit(cfg, state, Action.HOLD, now_ms)

    if measured_p < s - cfg.deadband:
        state.drive = Action.INFLATE
    elif measured_p > s + cfg.deadband:
        state.drive = Action.VENT
    elif state.drive is Action.INFLATE and measured_p >= s:
        state.drive = None
    elif state.drive is Action.VENT and measured_p <= s:
        state.drive = None
    want = state.drive if state.drive is not None else Action.HOLD
    return _emit(cfg, state, want, now_ms)


def _emit(cfg: ChannelConfig, state: ControllerState, action: Action,
          now_ms: float, safety: bool = False) -> Action:
    """Apply the minimum-dwell gate and record the emitted action.

    Dropping to Hold is always allowed (de-energizing is free); switching
    to a pump or valve drive within the dwell window of the last change is
    suppressed to Hold. Safety vents are never suppressed.
    """
    if action == state.last_action:
        return action
    if (action is not Action.HOLD and not safety
            and state.last_transition_ms is not None
            and now_ms - state.last_transition_ms < cfg.min_dwell_ms):
        action = Action.HOLD
        if action == state.last_action:
            return action
    state.last_transition_ms = now_ms
    state.last_action = action
    return action


def to_bridge(action: Action, channel: int) -> Actuate:
    """Wrap an emitted action as the wire message for ``channel``."""
    return Actuate(channel, int(action))
