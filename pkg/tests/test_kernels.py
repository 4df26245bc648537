"""Kernel correctness against independent references, plus backend parity."""

import math
from random import Random

import pytest
from hypothesis import given, strategies as st

import pneumyo._kernels as kernels
import pneumyo._kernels._py as py_kernels

try:
    import pneumyo._kernels._ext as ext_kernels
except ImportError:
    ext_kernels = None

needs_ext = pytest.mark.skipif(ext_kernels is None, reason="compiled kernels not built")


# -- CRC-16/CCITT-FALSE ------------------------------------------------------

def crc16_bitwise_ref(data: bytes) -> int:
    """Independent bit-at-a-time reference (the kernels are table-driven)."""
    crc = 0xFFFF
    for byte in data:
        crc ^= byte << 8
        for _ in range(8):
            crc = ((crc << 1) ^ 0x1021) & 0xFFFF if crc & 0x8000 else (crc << 1) & 0xFFFF
    return crc


def test_crc_check_value():
    # published check value for CRC-16/CCITT-FALSE
    assert kernels.crc16_ccitt(b"123456789") == 0x29B1
    assert crc16_bitwise_ref(b"123456789") == 0x29B1


def test_crc_empty_is_init():
    assert kernels.crc16_ccitt(b"") == 0xFFFF


@given(st.binary(max_size=300))
def test_crc_matches_bitwise_reference(data):
    assert kernels.crc16_ccitt(data) == crc16_bitwise_ref(data)


def test_crc_detects_all_single_bit_flips_in_protected_data():
    rng = Random(11)
    data = bytes(rng.randrange(256) for _ in range(24))
    crc = kernels.crc16_ccitt(data)
    for i in range(len(data)):
        for bit in range(8):
            corrupted = bytearray(data)
            corrupted[i] ^= 1 << bit
            assert kernels.crc16_ccitt(bytes(corrupted)) != crc


# -- COBS ---------------------------------------------------------------------

def cobs_encode_ref(data: bytes) -> bytes:
    """Independent streaming reference following the classic stuffing loop."""
    out = bytearray()
    code_idx = len(out)
    out.append(0)  # placeholder code byte
    code = 1
    for byte in data:
        if byte == 0:
            out[code_idx] = code
            code_idx = len(out)
            out.append(0)
            code = 1
        else:
            out.append(byte)
            code += 1
            if code == 0xFF:
                out[code_idx] = code
                code_idx = len(out)
                out.append(0)
                code = 1
    out[code_idx] = code
    return bytes(out)


# unambiguous published stuffing examples
COBS_VECTORS = [
    (b"", bytes([0x01])),
    (b"\x00", bytes([0x01, 0x01])),
    (b"\x00\x00", bytes([0x01, 0x01, 0x01])),
    (b"\x11\x22\x00\x33", bytes([0x03, 0x11, 0x22, 0x02, 0x33])),
    (b"\x11\x22\x33\x44", bytes([0x05, 0x11, 0x22, 0x33, 0x44])),
    (b"\x11\x00\x00\x00", bytes([0x02, 0x11, 0x01, 0x01, 0x01])),
]


@pytest.mark.parametrize("plain,stuffed", COBS_VECTORS)
def test_cobs_known_vectors(plain, stuffed):
    assert kernels.cobs_encode(plain) == stuffed
    assert kernels.cobs_decode(stuffed) == plain


@given(st.binary(max_size=600))
def test_cobs_round_trip_and_zero_freedom(data):
    encoded = kernels.cobs_encode(data)
    assert 0 not in encoded
    assert kernels.cobs_decode(encoded) == data
    assert encoded == cobs_encode_ref(data)


@given(st.binary(max_size=600))
def test_cobs_overhead_bound(data):
    # one code byte per started 254-byte run, plus one for the leading group
    encoded = kernels.cobs_encode(data)
    assert len(encoded) <= len(data) + 1 + max(1, math.ceil(len(data) / 254))


def test_cobs_decode_malformed():
    with pytest.raises(ValueError):
        kernels.cobs_decode(b"")
    with pytest.raises(ValueError):
        kernels.cobs_decode(b"\x05\x11")  # group overruns block
    with pytest.raises(ValueError):
        kernels.cobs_decode(b"\x03\x11\x00")  # embedded zero
    with pytest.raises(ValueError):
        kernels.cobs_decode(b"\x00\x11")  # zero code byte


def test_cobs_254_boundary_round_trip():
    for size in (253, 254, 255, 508, 509):
        data = bytes((i % 255) + 1 for i in range(size))
        assert kernels.cobs_decode(kernels.cobs_encode(data)) == data


# -- equilibrium solver kernel -------------------------------------------------

SOLVER_ARGS = dict(v0=5e-5, c=4.0, p_atm=101.325, rt=8.314 * 293.15)


def test_solve_stretch_at_unstretched_fill():
    n_min = SOLVER_ARGS["p_atm"] * SOLVER_ARGS["v0"] / SOLVER_ARGS["rt"]
    lam = kernels.solve_stretch(n_min, hint=1.0, rel_tol=1e-10, max_iter=200, **SOLVER_ARGS)
    assert lam == pytest.approx(1.0, abs=1e-9)


def test_solve_stretch_below_fill_raises():
    n_min = SOLVER_ARGS["p_atm"] * SOLVER_ARGS["v0"] / SOLVER_ARGS["rt"]
    with pytest.raises(ValueError):
        kernels.solve_stretch(0.5 * n_min, hint=1.0, rel_tol=1e-10, max_iter=200, **SOLVER_ARGS)


@given(st.floats(min_value=1.0001, max_value=60.0))
def test_solve_stretch_residual_and_hint_independence(ratio):
    n_min = SOLVER_ARGS["p_atm"] * SOLVER_ARGS["v0"] / SOLVER_ARGS["rt"]
    n = ratio * n_min
    lam = kernels.solve_stretch(n, hint=1.0, rel_tol=1e-10, max_iter=200, **SOLVER_ARGS)
    target = n * SOLVER_ARGS["rt"]
    lam7 = lam ** 7
    dp = SOLVER_ARGS["c"] * (1.0 / lam - 1.0 / lam7)
    residual = (SOLVER_ARGS["p_atm"] + dp) * SOLVER_ARGS["v0"] * lam ** 3 - target
    assert abs(residual) <= 1e-10 * target
    # warm starts converge to the same tolerance band
    lam2 = kernels.solve_stretch(n, hint=lam, rel_tol=1e-10, max_iter=200, **SOLVER_ARGS)
    assert lam2 == pytest.approx(lam, rel=1e-9)


# -- backend parity -------------------------------------------------------------

@needs_ext
def test_backends_agree_on_bytes_kernels():
    rng = Random(7)
    for _ in range(500):
        data = bytes(rng.randrange(256) for _ in range(rng.randrange(0, 300)))
        assert py_kernels.crc16_ccitt(data) == ext_kernels.crc16_ccitt(data)
        enc_py = py_kernels.cobs_encode(data)
        assert enc_py == ext_kernels.cobs_encode(data)
        assert py_kernels.cobs_decode(enc_py) == ext_kernels.cobs_decode(enc_py) == data


@needs_ext
def test_backends_bit_identical_trajectories():
    args = dict(dt=1e-3, v0=5e-5, c=4.0, p_atm=101.325, rt=8.314 * 293.15,
                n_min=101.325 * 5e-5 / (8.314 * 293.15), p_stall=30.0,
                g_pump=2e-7, g_vent=4e-7, g_leak0=1e-9, tau_decay=3600.0,
                rel_tol=1e-10, max_iter=200)
    state_py = (args["n_min"], 1.0, 0.0)
    state_ext = state_py
    for action, steps in [(1, 3000), (0, 2000), (2, 3000), (1, 500)]:
        out_py = py_kernels.run_steps(*state_py, action, steps, **args)
        out_ext = ext_kernels.run_steps(*state_ext, action, steps, **args)
        assert out_py == out_ext  # exact float equality, by construction
        state_py = out_py[:3]
        state_ext = out_ext[:3]


def test_active_backend_exposes_expected_surface():
    assert kernels.BACKEND in ("ext", "python")
    for name in ("crc16_ccitt", "cobs_encode", "cobs_decode", "solve_stretch", "run_steps"):
        assert callable(getattr(kernels, name))
