# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: CRC-16, COBS framing, and the bladder equilibrium core.

Twin of ``_py``; keep the floating-point evaluation order identical so both
backends produce bit-identical trajectories.
"""

from libc.math cimport fabs, pow
from libc.stdint cimport uint8_t, uint16_t

BACKEND_NAME = "ext"

cdef uint16_t[256] _CRC_TABLE

cdef void _init_crc_table() noexcept:
    cdef int b, i
    cdef uint16_t crc
    for b in range(256):
        crc = <uint16_t> (b << 8)
        for i in range(8):
            if crc & 0x8000:
                crc = <uint16_t> ((crc << 1) ^ 0x1021)
            else:
                crc = <uint16_t> (crc << 1)
        _CRC_TABLE[b] = crc

_init_crc_table()


def crc16_ccitt(data):
    """CRC-16/CCITT-FALSE of a bytes-like object."""
    cdef const uint8_t[:] buf = bytes(data)
    cdef Py_ssize_t i, n = buf.shape[0]
    cdef uint16_t crc = 0xFFFF
    for i in range(n):
        crc = <uint16_t> ((crc << 8) ^ _CRC_TABLE[(crc >> 8) ^ buf[i]])
    return crc


def cobs_encode(data):
    """COBS-stuff ``data`` so the result contains no zero bytes."""
    cdef const uint8_t[:] buf = bytes(data)
    cdef Py_ssize_t i, n = buf.shape[0]
    cdef bytearray out = bytearray()
    cdef bytearray block = bytearray()
    cdef uint8_t byte
    for i in range(n):
        byte = buf[i]
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
    cdef const uint8_t[:] buf = bytes(data)
    cdef Py_ssize_t i = 0, j, end, n = buf.shape[0]
    cdef bytearray out = bytearray()
    cdef uint8_t code
    if n == 0:
        raise ValueError("empty COBS block")
    while i < n:
        code = buf[i]
        if code == 0:
            raise ValueError("zero byte inside COBS block")
        end = i + code
        if end > n:
            raise ValueError("COBS group overruns block")
        for j in range(i + 1, end):
            if buf[j] == 0:
                raise ValueError("zero byte inside COBS block")
            out.append(buf[j])
        i = end
        if code != 0xFF and i < n:
            out.append(0)
    return bytes(out)


cdef inline double _membrane_dp(double lam, double c) noexcept:
    cdef double lam2 = lam * lam
    cdef double lam4 = lam2 * lam2
    cdef double lam7 = lam4 * lam2 * lam
    return c * (1.0 / lam - 1.0 / lam7)


cdef inline double _residual(double lam, double target, double v0, double c,
                             double p_atm) noexcept:
    cdef double lam3 = lam * lam * lam
    return (p_atm + _membrane_dp(lam, c)) * v0 * lam3 - target


cdef double _solve_stretch(double n, double v0, double c, double p_atm,
                           double rt, double hint, double rel_tol,
                           int max_iter) except -1.0:
    cdef double target = n * rt
    cdef double lo = 1.0
    cdef double f_lo = p_atm * v0 - target
    cdef double hi, x, fx, x2, x5, deriv, x_new
    cdef int i
    if f_lo > rel_tol * target:
        raise ValueError("gas amount below the unstretched fill")
    hi = pow(target / (p_atm * v0), 1.0 / 3.0)
    if hi < 1.0:
        hi = 1.0
    x = hint
    if not (lo <= x <= hi):
        x = 0.5 * (lo + hi)
    for i in range(max_iter):
        fx = _residual(x, target, v0, c, p_atm)
        if fabs(fx) <= rel_tol * target:
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


def solve_stretch(double n, double v0, double c, double p_atm, double rt,
                  double hint, double rel_tol, int max_iter):
    """Stretch ratio at gas/membrane equilibrium for gas amount ``n``."""
    return _solve_stretch(n, v0, c, p_atm, rt, hint, rel_tol, max_iter)


def run_steps(double n, double lam, double t, int action, long steps,
              double dt, double v0, double c, double p_atm, double rt,
              double n_min, double p_stall, double g_pump, double g_vent,
              double g_leak0, double tau_decay, double rel_tol, int max_iter):
    """Advance the plant ``steps`` fixed steps under one action code."""
    cdef double leaked = 0.0
    cdef double pg, flow, head, leak
    cdef long i
    for i in range(steps):
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
        lam = _solve_stretch(n, v0, c, p_atm, rt, lam, rel_tol, max_iter)
        leaked += leak * dt
    return n, lam, t, leaked
