"""Deterministic latex-bladder plant model.

A spherical neo-Hookean membrane around an isothermal ideal gas charge:

* membrane gauge pressure  dP(lam) = C * (lam^-1 - lam^-7), which rises to
  a peak at lam = 7^(1/6) and falls beyond it (the familiar balloon
  instability),
* equilibrium stretch from (p_atm + dP(lam)) * V0 * lam^3 = n*R*T, unique
  on lam >= 1 because the left side is strictly increasing there,
* linearized pump/vent/leak orifice flows evaluated at the pre-step
  pressure, with the leak conductance growing linearly in simulated time
  to model material decay.

Pressures are gauge kPa throughout; the p*V products keep kPa units, so
gas amounts are consistent internal units rather than strict SI moles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import IntEnum
from random import Random

from . import _kernels
from .errors import DomainError, NoConvergence

R_GAS_DEFAULT = 8.314

EQUILIBRIUM_REL_TOL = 1e-10
SOLVER_MAX_ITER = 200


class Action(IntEnum):
    """Actuation states; values double as the wire action codes."""

    HOLD = 0
    INFLATE = 1
    VENT = 2


@dataclass(frozen=True)
class PlantConfig:
    v0: float = 5e-5              # unstretched volume, m^3
    compliance: float = 4.0       # membrane coefficient C, kPa
    p_atm: float = 101.325        # absolute atmospheric pressure, kPa
    temperature: float = 293.15   # K
    p_stall: float = 30.0         # pump stall gauge pressure, kPa
    g_pump: float = 2e-7          # pump conductance per kPa of head
    g_vent: float = 4e-7          # vent conductance per kPa of gauge
    g_leak0: float = 1e-9         # initial leak conductance per kPa
    tau_decay: float = 3600.0     # leak growth time constant, s
    dt: float = 1e-3              # integration step, s
    r_gas: float = R_GAS_DEFAULT

    def __post_init__(self):
        if self.v0 <= 0 or self.compliance <= 0 or self.dt <= 0:
            raise ValueError("v0, compliance and dt must be positive")
        if self.p_atm <= 0 or self.temperature <= 0 or self.r_gas <= 0:
            raise ValueError("p_atm, temperature and r_gas must be positive")
        if min(self.g_pump, self.g_vent, self.g_leak0) < 0:
            raise ValueError("conductances must be >= 0")
        if self.p_stall <= 0 or self.tau_decay <= 0:
            raise ValueError("p_stall and tau_decay must be positive")

    @property
    def rt(self) -> float:
        return self.r_gas * self.temperature

    @property
    def n_min(self) -> float:
        """Gas amount of the unstretched, unpressurized fill."""
        return self.p_atm * self.v0 / self.rt


@dataclass(frozen=True)
class PlantState:
    stretch: float = 1.0   # lambda, current radius over unstretched radius
    n: float = 0.0         # gas amount
    t: float = 0.0         # simulated time, s
    leaked: float = 0.0    # cumulative gas lost to leakage

    @classmethod
    def initial(cls, cfg: PlantConfig) -> "PlantState":
        return cls(stretch=1.0, n=cfg.n_min, t=0.0, leaked=0.0)


@dataclass(frozen=True)
class SensorModel:
    full_scale: float = 40.0   # gauge kPa
    bits: int = 10
    noise_sigma: float = 0.05  # kPa
    rate_hz: float = 100.0

    def __post_init__(self):
        if not 8 <= self.bits <= 16:
            raise ValueError("sensor bits must be in 8..16")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        if self.full_scale <= 0 or self.rate_hz <= 0:
            raise ValueError("full_scale and rate_hz must be positive")

    @property
    def quant_step(self) -> float:
        return self.full_scale / (1 << self.bits)


def membrane_dp(stretch: float, compliance: float) -> float:
    """Gauge pressure across the membrane at stretch ratio ``stretch``."""
    if stretch < 1.0:
        raise DomainError(f"stretch ratio {stretch} below 1")
    lam2 = stretch * stretch
    lam4 = lam2 * lam2
    lam7 = lam4 * lam2 * stretch
    return compliance * (1.0 / stretch - 1.0 / lam7)


def gauge_pressure(state: PlantState, cfg: PlantConfig) -> float:
    return membrane_dp(state.stretch, cfg.compliance)


def solve_equilibrium(n: float, cfg: PlantConfig, hint: float = 0.0) -> float:
    """Stretch ratio at which the gas charge ``n`` balances the membrane.

    Newton iteration guarded by a shrinking bracket, polished to a relative
    residual of 1e-10; ``hint`` warm-starts from a nearby solution.
    """
    if n < cfg.n_min * (1.0 - 1e-12):
        raise DomainError(f"gas amount {n} below the unstretched fill {cfg.n_min}")
    try:
        return _kernels.solve_stretch(n, cfg.v0, cfg.compliance, cfg.p_atm, cfg.rt,
                                      hint, EQUILIBRIUM_REL_TOL, SOLVER_MAX_ITER)
    except ValueError as exc:
        raise DomainError(str(exc)) from exc
    except ArithmeticError as exc:
        raise NoConvergence(str(exc)) from exc


def equilibrium_residual(stretch: float, n: float, cfg: PlantConfig) -> float:
    """Relative residual of the equilibrium equation at (stretch, n)."""
    lam3 = stretch * stretch * stretch
    target = n * cfg.rt
    return ((cfg.p_atm + membrane_dp(stretch, cfg.compliance)) * cfg.v0 * lam3 - target) / target


def step(state: PlantState, cfg: PlantConfig, action: Action) -> PlantState:
    """Advance one fixed step ``cfg.dt`` under ``action``."""
    return run(state, cfg, action, 1)


def run(state: PlantState, cfg: PlantConfig, action: Action, steps: int) -> PlantState:
    """Advance ``steps`` fixed steps under a constant action."""
    try:
        n, lam, t, leaked = _kernels.run_steps(
            state.n, state.stretch, state.t, int(action), steps,
            cfg.dt, cfg.v0, cfg.compliance, cfg.p_atm, cfg.rt, cfg.n_min,
            cfg.p_stall, cfg.g_pump, cfg.g_vent, cfg.g_leak0, cfg.tau_decay,
            EQUILIBRIUM_REL_TOL, SOLVER_MAX_ITER)
    except ArithmeticError as exc:
        raise NoConvergence(str(exc)) from exc
    return replace(state, n=n, stretch=lam, t=t, leaked=state.leaked + leaked)


def read_sensor(state: PlantState, cfg: PlantConfig, sensor: SensorModel, rng: Random) -> float:
    """One quantized, noisy gauge-pressure reading.

    Gaussian noise then clamp to [0, full_scale] then midtread quantization
    at 2^bits levels. Deterministic for a given generator state.
    """
    noisy = gauge_pressure(state, cfg) + rng.gauss(0.0, sensor.noise_sigma)
    if noisy < 0.0:
        noisy = 0.0
    elif noisy > sensor.full_scale:
        noisy = sensor.full_scale
    code = math.floor(noisy / sensor.quant_step + 0.5)
    max_code = (1 << sensor.bits) - 1
    if code > max_code:
        code = max_code
    return code * sensor.quant_step
