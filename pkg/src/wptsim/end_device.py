"""Energy-neutral device: buffer sizing, MCU load and the buffer-voltage recurrence.

Per step of length ``dt`` the buffer sees net power ``p_b = p_eh - p_mcu``,
where the MCU load depends on the voltage at the start of the step. The new
voltage is

* 0 if ``v**2 + 2 p_b dt / C`` is negative (buffer depleted),
* unchanged if ``p_b > 0`` but the harvester voltage does not exceed it,
* ``sqrt(v**2 + 2 p_b dt / C)`` otherwise, capped at the harvester voltage
  while charging.

The MCU wakes when the buffer reaches ``v_mcu_th``, then draws ``p_active``
until the pilot completes or the buffer falls below ``v_bod`` (brown-out,
which aborts the pilot).
"""
from __future__ import annotations

import io
import math
from decimal import Decimal
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import _kernels
from .errors import ConfigError
from .harvester import HarvestTrace

__all__ = [
    "McuLoadCurve",
    "EndDeviceConfig",
    "BufferState",
    "DeviceEvents",
    "Trajectory",
    "IDEAL_MCU",
    "REALISTIC_MCU",
    "size_buffer",
    "pilot_energy",
    "mcu_power",
    "step_buffer",
    "simulate_device",
]


@dataclass(frozen=True)
class McuLoadCurve:
    """Sub-threshold MCU draw.

    ``kind="ideal"`` draws nothing below threshold. ``kind="realistic"``
    interpolates ``points`` (volt, watt) linearly and holds the end values
    outside their range.
    """

    kind: str = "ideal"
    points: tuple = ()

    def __post_init__(self):
        if self.kind not in ("ideal", "realistic"):
            raise ConfigError(f"unknown MCU load kind {self.kind!r}")
        pts = tuple((float(v), float(p)) for v, p in self.points)
        if self.kind == "realistic":
            if not pts:
                raise ConfigError("realistic MCU load needs at least one point")
            vs = [v for v, _ in pts]
            if any(b <= a for a, b in zip(vs, vs[1:])):
                raise ConfigError("MCU load voltages must be strictly increasing")
            if any(p < 0 for _, p in pts):
                raise ConfigError("MCU load powers must be >= 0")
        object.__setattr__(self, "points", pts)

    @property
    def voltages(self) -> np.ndarray:
        return np.array([v for v, _ in self.points]) if self.kind == "realistic" else np.empty(0)

    @property
    def powers(self) -> np.ndarray:
        return np.array([p for _, p in self.points]) if self.kind == "realistic" else np.empty(0)


IDEAL_MCU = McuLoadCurve("ideal")
# Placeholder sub-threshold draw ("several microwatts"); replace with a measured
# curve when one is available.
REALISTIC_MCU = McuLoadCurve("realistic", (
    (0.0, 0.0), (0.5, 1e-6), (1.0, 3e-6), (1.55, 6e-6), (1.7499, 8e-6),
))


@dataclass(frozen=True)
class EndDeviceConfig:
    c_b: float = 100e-6
    v_mcu_th: float = 1.75
    v_bod: float = 1.55
    pilot_bytes: int = 10
    baud: float = 1000.0
    p_active: float = 380e-6
    v_supply_nominal: float = 1.8
    lo_offset: float = 512e3  # informational only
    mcu_load: McuLoadCurve = REALISTIC_MCU

    def __post_init__(self):
        if not 0 < self.v_bod < self.v_mcu_th <= 2.0:
            raise ConfigError("need 0 < v_bod < v_mcu_th <= 2.0 V")
        if not self.c_b > 0:
            raise ConfigError("buffer capacitance must be > 0")
        if not self.baud > 0:
            raise ConfigError("baud rate must be > 0")
        if self.pilot_bytes < 0:
            raise ConfigError("pilot length must be >= 0 bytes")
        if not self.p_active >= 0:
            raise ConfigError("active power must be >= 0")

    def with_load(self, mcu_load: McuLoadCurve) -> "EndDeviceConfig":
        return replace(self, mcu_load=mcu_load)


@dataclass(frozen=True)
class BufferState:
    v_b: float = 0.0
    t: float = 0.0
    mcu_active: bool = False
    pilot_progress: float = 0.0


@dataclass
class DeviceEvents:
    woke_at: Optional[float] = None
    pilot_sent_at: Optional[float] = None
    brownouts: list = field(default_factory=list)

    @property
    def response_time(self) -> Optional[float]:
        return self.pilot_sent_at


@dataclass(frozen=True)
class Trajectory:
    """Buffer state after every step. ``t[i]`` is the end of step ``i``."""

    t: np.ndarray = field(repr=False)
    v_b: np.ndarray = field(repr=False)
    mcu_active: np.ndarray = field(repr=False)
    case: np.ndarray = field(repr=False)  # see _kernels.CASE_*
    pilot_progress: np.ndarray = field(repr=False)
    start_v: float = 0.0

    def __len__(self):
        return self.t.size

    def __getitem__(self, i) -> BufferState:
        return BufferState(float(self.v_b[i]), float(self.t[i]), bool(self.mcu_active[i]),
                           float(self.pilot_progress[i]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t_s,v_b_v,mcu_active\n")
        for t, v, a in zip(self.t.tolist(), self.v_b.tolist(), self.mcu_active.tolist()):
            buf.write(f"{t!r},{v!r},{int(a)}\n")
        return buf.getvalue()


def size_buffer(e_mcu: float, v_th: float, v_bod: float) -> float:
    """Smallest capacitance that delivers ``e_mcu`` joule while sagging from v_th to v_bod."""
    if not v_th > v_bod > 0:
        raise ConfigError(f"need v_th > v_bod > 0, got v_th={v_th}, v_bod={v_bod}")
    if e_mcu < 0:
        raise ConfigError("energy must be >= 0")
    return 2.0 * e_mcu / (v_th * v_th - v_bod * v_bod)


def pilot_energy(cfg: EndDeviceConfig) -> tuple[float, float]:
    """(duration, energy) of backscattering the pilot at ``cfg.baud``."""
    duration = 8 * cfg.pilot_bytes / cfg.baud
    # multiply the decimal forms so 0.08 s * 380 uW gives the double nearest 30.4 uJ
    energy = float(Decimal(repr(duration)) * Decimal(repr(float(cfg.p_active))))
    return duration, energy


def mcu_power(curve: McuLoadCurve, v: float, v_th: float, p_active: float) -> float:
    """MCU draw at supply ``v`` for a device that is not already running."""
    if v < 0:
        raise ValueError("voltage must be >= 0")
    if v >= v_th:
        return p_active
    if curve.kind == "ideal":
        return 0.0
    return float(np.interp(v, curve.voltages, curve.powers))


def _pilot_steps(cfg, dt):
    duration, _ = pilot_energy(cfg)
    # tolerate representation error so 0.08 s at 4 ms is exactly 20 steps
    return int(math.ceil(duration / dt - 1e-9))


def step_buffer(state: BufferState, p_eh: float, v_eh: float, dt: float,
                cfg: EndDeviceConfig) -> BufferState:
    """Advance one step. Scalar form of the recurrence run by :func:`simulate_device`."""
    if not dt > 0:
        raise ValueError("dt must be > 0")
    v, active, _, _, progress, _, _ = _kernels.buffer_recurrence(
        np.array([p_eh]), np.array([v_eh]), 0, 1, dt, cfg.c_b, cfg.v_mcu_th, cfg.v_bod,
        cfg.p_active, cfg.mcu_load.voltages, cfg.mcu_load.powers, _pilot_steps(cfg, dt),
        state.v_b, False, state.mcu_active, int(round(state.pilot_progress / dt)),
    )
    return BufferState(float(v[0]), state.t + dt, bool(active[0]), float(progress[0]) * dt)


def simulate_device(harvest: HarvestTrace, cfg: EndDeviceConfig, start_v: float = 0.0,
                    start_index: int = 0, stop_at_pilot: bool = False):
    """Run the recurrence over ``harvest`` from ``start_index``.

    Returns ``(trajectory, events)``; event times are measured from the start
    of the first simulated step.
    """
    n = len(harvest)
    if n == 0:
        raise ConfigError("harvest trace is empty")
    if not 0 <= start_v <= cfg.v_mcu_th:
        raise ConfigError(f"start voltage must be within [0, {cfg.v_mcu_th}] V")
    if not 0 <= start_index < n:
        raise ConfigError(f"start index {start_index} outside trace of length {n}")
    dt = harvest.dt
    v, active, case, brown, progress, woke, sent = _kernels.buffer_recurrence(
        harvest.p_eh, harvest.v_eh, start_index, n, dt, cfg.c_b, cfg.v_mcu_th, cfg.v_bod,
        cfg.p_active, cfg.mcu_load.voltages, cfg.mcu_load.powers, _pilot_steps(cfg, dt),
        start_v, stop_at_pilot,
    )
    t = (np.arange(v.size) + 1) * dt
    traj = Trajectory(t, v, active, case, progress * dt, start_v)
    events = DeviceEvents(
        woke_at=_event_time(woke, dt),
        pilot_sent_at=_event_time(sent, dt),
        brownouts=[float(x) for x in t[brown]],
    )
    return traj, events


def _event_time(idx, dt):
    if idx == -1:
        return None
    if idx == -2:
        return 0.0
    return (idx + 1) * dt
