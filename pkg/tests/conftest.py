"""Shared test helpers: random message generators for the wire codecs."""

from random import Random

from pneumyo import bridge
from pneumyo.myo import ClassifierEvent, EmgFrame, EmgSample, ImuFrame


def random_emg_frame(rng: Random) -> EmgFrame:
    return EmgFrame(
        EmgSample(tuple(rng.randint(-128, 127) for _ in range(8))),
        EmgSample(tuple(rng.randint(-128, 127) for _ in range(8))))


def random_imu_frame(rng: Random) -> ImuFrame:
    return ImuFrame(tuple(rng.randint(-32768, 32767) for _ in range(10)))


def random_classifier_event(rng: Random) -> ClassifierEvent:
    return ClassifierEvent(rng.randrange(256), rng.randrange(65536))


def random_bridge_message(rng: Random) -> bridge.BridgeMessage:
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


def build_frame_corpus(seed: int, count: int) -> list[bytes]:
    rng = Random(seed)
    return [bridge.encode_frame(random_bridge_message(rng), rng.randrange(256))
            for _ in range(count)]
