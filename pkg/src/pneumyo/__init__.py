"""Armband-driven pneumatic sculpture control stack.

Decodes the discontinued myoelectric armband's wire protocol, interprets
gestures, bridges intents over a framed serial protocol, and regulates a
simulated latex-bladder pneumatic plant - fully hardware-optional and
deterministic for replay.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .bridge import (Ack, Actuate, BridgeMessage, Fault, FrameSplitter,
                     Heartbeat, LinkConfig, LinkStateKind, LinkSupervisor,
                     Nack, SetTarget, Telemetry, decode_frame, encode_frame)
from .config import RunConfig, load_config, parse_config
from .errors import (BodyTooLong, CobsMalformed, ConfigInvalid, CrcMismatch,
                     DomainError, LengthMismatch, NoConvergence,
                     NonMonotonicTime, PneumyoError, TraceMalformed,
                     UnknownType, WrongLength)
from .gestures import (Activation, ActuationIntent, EnvelopeConfig,
                       GestureEngine, IntentKind, classify_effort,
                       map_to_intent)
from .homeostasis import (ChannelConfig, ControllerState, Mode, clear_fault,
                          control_step, note_telemetry, setpoint, to_bridge)
from .myo import (ClassifierEvent, DeepSleep, EmgFrame, EmgSample, EventKind,
                  ImuFrame, MyoCommand, Pose, SetMode, Unlock, Vibrate,
                  decode_classifier, decode_emg, decode_imu, encode_classifier,
                  encode_command, encode_emg, encode_imu)
from .pipeline import (RunSummary, TelemetryRecord, run_simulation,
                       write_telemetry)
from .plant import (Action, PlantConfig, PlantState, SensorModel,
                    gauge_pressure, membrane_dp, read_sensor,
                    solve_equilibrium, step)
from .trace import TraceKind, TraceRecord, ingest_trace, parse_trace

__version__ = "0.1.0"
