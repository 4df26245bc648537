"""Pure-Python kernels: CRC-16, COBS framing, and the bladder equilibrium core.

This module is the fallback twin of the compiled extension ``_ext``. Both
implement the same operations with the same floating-point evaluation order,
so trajectories are bit-identical whichever backend is active. Keep any
change here mirrored in ``_ext.pyx``.
"""

import math

BACKEND_NAME = "python"

# CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, no reflection, xorout 0.
_CRC_TABLE = []
for _b in range(256):
    _crc = _b << 8
    for _ in range(8):
        _crc = ((_crc << 1) ^ 0x1021) & 0xFFFF if _crc & 0x8000 else (_crc << 1) & 0xFFFF
    _CRC_TABLE.append(_crc)


def crc16_ccitt(data):
    """CRC-16/CCITT-FALSE of a bytes-like object."""
    crc = 0xFFFF
    for byte in data:
        crc = ((crc << 8) & 0xFFFF) ^ _CRC_TABLE[(crc >> 8) ^ byte]
    return crc


def cobs_encode(data):
    """COBS-stuff ``data`` so the result contains no zero bytes."""
    out = bytearray()
    block = bytearray()
    for byte in data:
        if byte == 0:
            out.append(len(block) + 1)
            out += block
            block.clear()
        else:
            block.append(byte)
            if len(block) == 254:
                out.append(255)
                out += block
                block.clear()
    out.append(len(block) + 1)
    out += block
    return bytes(out)


def cobs_decode(data):
    """Invert :func:`cobs_encode`. Raises ValueError on malformed input."""
    out = bytearray()
    i = 0
    n = len(data)
    if n == 0:
        raise ValueError("empty COBS block")
    while i < n:
        code = data[i]
        if code == 0:
            raise ValueError("zero byte inside COBS block")
        end = i + code
        if end > n:
            raise ValueError("COBS group overruns block")
        for j in range(i + 1, end):
            if data[j] == 0:
                raise ValueError("zero byte inside COBS block")
            out.append(data[j])
        i = end
        if code != 0xFF and i < n:
            out.append(0)
    return bytes(out)


def _membrane_dp(lam, c):
    # inline-expanded powers; mirrored exactly in the compiled twin
    lam2 = lam * lam
    lam4 = lam2 * lam2
    lam7 = lam4 * lam2 * lam
    return c * (1.0 / lam - 1.0 / lam7)


def _residual(lam, target, v0, c, p_atm):
    lam3 = lam * lam * lam
    return (p_atm + _membrane_dp(lam, c)) * v0 * lam3 - target


def solve_stretch(n, v0, c, p_atm, rt, hint, rel_tol, max_iter):
    """Stretch ratio at gas/membrane equilibrium for gas amount ``n``.

    Root of (p_atm + dP(lam)) * v0 * lam^3 = n*rt on lam >= 1, by Newton
    steps guarded with a shrinking bracket. Raises ValueError below the
    unstretched fill and ArithmeticError if tolerance is not met.
    """
    target = n * rt
    lo = 1.0
    f_lo = p_atm * v0 - target
    if f_lo > rel_tol * target:
        raise ValueError("gas amount below the unstretched fill")
    hi = math.pow(target / (p_atm * v0), 1.0 / 3.0)
    if hi < 1.0:
        hi = 1.0
    x = hint
    if not (lo <= x <= hi):
        x = 0.5 * (lo + hi)
    for _ in range(max_iter):
        fx = _residual(x, target, v0, c, p_atm)
        if abs(fx) <= rel_tol * target:
            return x
        if fx > 0.0:
            hi = x
        else:
            lo = x
        x2 = x * x
        x5 = x2 * x2 * x
        deriv = v0 * (3.0 * p_atm * x2 + c * (2.0 * x + 4.0 / x5))
        x_new = x - fx / deriv
        if not (lo < x_new < hi):
            x_new = 0.5 * (lo + hi)
        x = x_new
    raise ArithmeticError("equilibrium solve did not converge")


def run_steps(n, lam, t, action, steps, dt, v0, c, p_atm, rt, n_min,
              p_stall, g_pump, g_vent, g_leak0, tau_decay, rel_tol, max_iter):
    """Advance the plant ``steps`` fixed steps under one action code.

    Action codes: 0 hold, 1 inflate, 2 vent. Flows are evaluated at the
    pre-step pressure; equilibrium is re-solved after each gas update.
    Returns (n, lam, t, leaked) with ``leaked`` the moles lost to leakage
    during this batch.
    """
    leaked = 0.0
    for _ in range(steps):
        pg = _membrane_dp(lam, c)
        if pg < 0.0:
            pg = 0.0
        flow = 0.0
        if action == 1:
            head = p_stall - pg
            if head > 0.0:
                flow += g_pump * head
        elif action == 2:
            flow -= g_vent * pg
        leak = g_leak0 * (1.0 + t / tau_decay) * pg
        n = n + (flow - leak) * dt
        if n < n_min:
            n = n_min
        t = t + dt
        lam = solve_stretch(n, v0, c, p_atm, rt, lam, rel_tol, max_iter)
        leaked += leak * dt
    return n, lam, t, leaked
