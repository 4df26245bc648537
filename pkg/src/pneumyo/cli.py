"""Command-line interface.

Exit codes: 0 clean, 1 fault-latched end state or decode failure,
2 usage/config error, 3 trace error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from random import Random

from . import bridge, myo
from .config import RunConfig, load_config
from .errors import ConfigInvalid, NonMonotonicTime, PneumyoError, TraceMalformed
from .pipeline import run_simulation, write_telemetry
from .plant import Action, PlantState, gauge_pressure, read_sensor, run as plant_run
from .trace import ingest_trace

EXIT_OK = 0
EXIT_FAULT = 1
EXIT_USAGE = 2
EXIT_TRACE = 3

_ACTION_NAMES = {"hold": Action.HOLD, "inflate": Action.INFLATE, "vent": Action.VENT}


def _parse_hex(text: str, parser: argparse.ArgumentParser) -> bytes:
    cleaned = text.replace(" ", "").replace("_", "")
    try:
        return bytes.fromhex(cleaned)
    except ValueError:
        parser.error(f"invalid hex string: {text!r}")
        raise AssertionError  # parser.error exits


def _cmd_simulate(args, parser) -> int:
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        trace = ingest_trace(args.trace) if args.trace else []
    except (TraceMalformed, NonMonotonicTime) as exc:
        print(f"trace error: {exc}", file=sys.stderr)
        return EXIT_TRACE
    except OSError as exc:
        print(f"trace error: {exc}", file=sys.stderr)
        return EXIT_TRACE
    try:
        records, summary = run_simulation(cfg, trace, args.duration, args.seed)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.log:
        write_telemetry(records, args.log)
    print(summary.describe())
    return summary.exit_code


def _cmd_codec(args, parser) -> int:
    data = _parse_hex(args.hex, parser)
    try:
        if args.codec_command == "decode-emg":
            frame = myo.decode_emg(data)
            print(f"sample 1: {list(frame.first.channels)}")
            print(f"sample 2: {list(frame.second.channels)}")
        elif args.codec_command == "decode-imu":
            frame = myo.decode_imu(data)
            w, x, y, z = frame.orientation
            ax, ay, az = frame.accel
            gx, gy, gz = frame.gyro
            print(f"orientation: w={w:.4f} x={x:.4f} y={y:.4f} z={z:.4f}")
            print(f"accel (g): x={ax:.4f} y={ay:.4f} z={az:.4f}")
            print(f"gyro (deg/s): x={gx:.3f} y={gy:.3f} z={gz:.3f}")
        elif args.codec_command == "decode-classifier":
            event = myo.decode_classifier(data)
            kind = event.kind.name if event.kind is not None else f"Unknown(0x{event.kind_code:02x})"
            if event.kind is myo.EventKind.POSE_CHANGED:
                print(f"{kind} pose={event.pose.name.lower()} (code 0x{event.pose_code:04x})")
            else:
                print(kind)
        else:  # decode-bridge
            msg, seq = bridge.decode_frame(data)
            fields = ""
            if not isinstance(msg, bridge.Heartbeat):
                pairs = ((k, v) for k, v in vars(msg).items())
                fields = " " + " ".join(f"{k}={v}" for k, v in pairs)
            print(f"{type(msg).__name__} seq={seq}{fields}")
    except PneumyoError as exc:
        print(f"decode error: {exc}", file=sys.stderr)
        return EXIT_FAULT
    return EXIT_OK


def _cmd_bridge_loopback(args, parser) -> int:
    rng = Random(args.seed)
    splitter = bridge.FrameSplitter()
    sent = []
    wire = bytearray()
    for i in range(args.frames):
        msg = _random_message(rng)
        sent.append((msg, i & 0xFF))
        wire += bridge.encode_frame(msg, i & 0xFF)
    # deliver in randomized chunk sizes to exercise reassembly
    received = []
    pos = 0
    while pos < len(wire):
        size = rng.randint(1, 17)
        received += splitter.feed(bytes(wire[pos:pos + size]))
        pos += size
    ok = received == sent
    print(f"frames sent={len(sent)} received={len(received)} "
          f"errors={splitter.stats.errors} {'ok' if ok else 'MISMATCH'}")
    return EXIT_OK if ok else EXIT_FAULT


def _random_message(rng: Random) -> bridge.BridgeMessage:
    choice = rng.randrange(7)
    if choice == 0:
        return bridge.Heartbeat()
    if choice == 1:
        return bridge.SetTarget(rng.randrange(256), rng.randrange(65536))
    if choice == 2:
        return bridge.Actuate(rng.randrange(256), rng.randrange(3))
    if choice == 3:
        return bridge.Telemetry(rng.randrange(256), rng.randrange(65536),
                                bool(rng.randrange(2)), rng.randrange(256),
                                rng.randrange(256))
    if choice == 4:
        return bridge.Ack(rng.randrange(256))
    if choice == 5:
        return bridge.Nack(rng.randrange(256), rng.randrange(256))
    return bridge.Fault(rng.randrange(256))


def _cmd_plant_step_response(args, parser) -> int:
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        schedule = _load_schedule(args.schedule)
    except ValueError as exc:
        print(f"schedule error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    rng = Random(args.seed)
    state = PlantState.initial(cfg.plant)
    out = sys.stdout if args.out is None else open(args.out, "w", newline="\n")
    try:
        out.write("t_s,action,stretch,pressure_kpa,reading_kpa\n")
        sample_steps = cfg.sensor_period_steps
        for action, duration_s in schedule:
            steps = round(duration_s / cfg.plant.dt)
            done = 0
            while done < steps:
                segment = min(sample_steps, steps - done)
                state = plant_run(state, cfg.plant, action, segment)
                done += segment
                reading = read_sensor(state, cfg.plant, cfg.sensor, rng)
                out.write(f"{state.t:.3f},{_action_name(action)},{state.stretch:.6f},"
                          f"{gauge_pressure(state, cfg.plant):.4f},{reading:.4f}\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def _action_name(action: Action) -> str:
    return action.name.lower()


def _load_schedule(path: str) -> list[tuple[Action, float]]:
    """Schedule file: one 'action,duration_s' per line."""
    schedule = []
    for line_no, line in enumerate(Path(path).read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = [p.strip() for p in stripped.split(",")]
        if len(parts) != 2 or parts[0].lower() not in _ACTION_NAMES:
            raise ValueError(f"line {line_no}: expected 'hold|inflate|vent,duration_s'")
        try:
            duration = float(parts[1])
        except ValueError:
            raise ValueError(f"line {line_no}: bad duration {parts[1]!r}") from None
        if duration <= 0:
            raise ValueError(f"line {line_no}: duration must be positive")
        schedule.append((_ACTION_NAMES[parts[0].lower()], duration))
    if not schedule:
        raise ValueError("schedule file has no entries")
    return schedule


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pneumyo",
        description="Armband-driven pneumatic sculpture control stack "
                    "(hardware-optional: ships with a simulated plant).")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run the closed loop against the simulated plant")
    sim.add_argument("--config", help="config file (defaults apply if omitted)")
    sim.add_argument("--trace", help="armband trace CSV (empty trace if omitted)")
    sim.add_argument("--duration", type=float, required=True, help="simulated seconds")
    sim.add_argument("--seed", type=int, required=True, help="seed for all stochastic elements")
    sim.add_argument("--log", help="telemetry log output path")

    codec = sub.add_parser("codec", help="decode hex dumps of wire frames")
    codec_sub = codec.add_subparsers(dest="codec_command", required=True)
    for name, help_text in [
            ("decode-emg", "16-byte EMG notification"),
            ("decode-imu", "20-byte IMU notification"),
            ("decode-classifier", "classifier notification (>= 3 bytes)"),
            ("decode-bridge", "one 0x00-terminated bridge frame")]:
        p = codec_sub.add_parser(name, help=help_text)
        p.add_argument("hex", help="hex bytes, spaces allowed")

    br = sub.add_parser("bridge", help="bridge link utilities")
    br_sub = br.add_subparsers(dest="bridge_command", required=True)
    loop = br_sub.add_parser("loopback-test", help="round-trip random frames through the codec")
    loop.add_argument("--frames", type=int, default=1000)
    loop.add_argument("--seed", type=int, default=0)

    plant_p = sub.add_parser("plant", help="plant model utilities")
    plant_sub = plant_p.add_subparsers(dest="plant_command", required=True)
    step = plant_sub.add_parser("step-response", help="run a scripted action schedule, emit CSV")
    step.add_argument("--config", help="config file (defaults apply if omitted)")
    step.add_argument("--schedule", required=True, help="schedule file: action,duration_s lines")
    step.add_argument("--seed", type=int, default=0)
    step.add_argument("--out", help="output CSV path (stdout if omitted)")

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "simulate":
            return _cmd_simulate(args, parser)
        if args.command == "codec":
            return _cmd_codec(args, parser)
        if args.command == "bridge":
            return _cmd_bridge_loopback(args, parser)
        return _cmd_plant_step_response(args, parser)
    except BrokenPipeError:
        # downstream consumer (head, less) closed the pipe
        sys.stderr.close()
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
