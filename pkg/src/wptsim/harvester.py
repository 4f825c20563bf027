"""RF-to-DC conversion: measured efficiency curves or a parametric nonlinearity."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

from .errors import ConfigError
from .excitation import PowerEnvelope

__all__ = [
    "EfficiencyCurve",
    "ParametricNonlinearity",
    "HarvesterModel",
    "HarvestTrace",
    "SINGLE_TONE_CURVE",
    "MULTI_TONE_CURVE",
    "rf_to_dc",
    "harvest_envelope",
    "harvester_voltage",
    "concat_traces",
]

# Mean RF input and mean DC output per 30-minute measurement, in uW, one row per
# USRP gain 75..85 dB. Digitised from the published efficiency figure data.
_SINGLE_TONE_UW = (
    (3.3811171551552, 0.563309137141809),
    (3.832819324565, 0.617264728440383),
    (5.17649837949025, 1.19676419772738),
    (6.48721963079147, 1.62401733676224),
    (7.85706322014636, 2.42358335144312),
    (10.5238226401887, 3.41778224120492),
    (12.4856654643546, 4.62544215112466),
    (15.1302972269924, 6.1594953739722),
    (16.5619840572225, 6.88141549103359),
    (21.0765063168423, 10.2900477634388),
    (24.6765328148914, 12.5641747503154),
)
_MULTI_TONE_UW = (
    (3.1382763220479, 0.456691991671377),
    (3.84886589919538, 0.63950951171412),
    (4.81378016660812, 0.921566281708466),
    (6.04560337368143, 1.26602254753809),
    (7.3304940846566, 1.66476190894102),
    (9.38295576066426, 2.14176685947878),
    (11.3880508544913, 2.63355270233796),
    (13.9698884109967, 3.10860562078332),
    (17.0795044737649, 3.8525379597825),
    (21.0162069983013, 6.26595860409853),
    (25.0036933829554, 8.04211120327822),
)
# efficiency series [%] plotted alongside the power curves, same row order
SINGLE_TONE_EFFICIENCY_PCT = (
    16.6604442050442, 16.1047176026342, 23.1191842437171, 25.034104426708,
    30.8459189335373, 32.4766233531244, 37.0460202087734, 40.7096786108317,
    41.5494633206863, 48.8223598766744, 50.9154784611124,
)
MULTI_TONE_EFFICIENCY_PCT = (
    14.5523193245571, 16.6155311321138, 19.1443366712323, 20.9412108152764,
    22.7100914306107, 22.8261425728725, 23.1255790476148, 22.2521864837253,
    22.5564972666521, 29.8148881223192, 32.1636930996778,
)


@dataclass(frozen=True)
class EfficiencyCurve:
    """Knots of mean DC output versus mean RF input, both in watt."""

    p_rf: np.ndarray
    p_dc: np.ndarray

    def __post_init__(self):
        rf = np.array(self.p_rf, dtype=float).ravel()
        dc = np.array(self.p_dc, dtype=float).ravel()
        if rf.size == 0 or rf.size != dc.size:
            raise ConfigError("efficiency curve needs equal, non-zero numbers of RF and DC points")
        if np.any(rf <= 0) or np.any(np.diff(rf) <= 0):
            raise ConfigError("curve RF powers must be > 0 and strictly increasing")
        if np.any(dc < 0) or np.any(dc > rf):
            raise ConfigError("curve DC powers must satisfy 0 <= p_dc <= p_rf")
        if np.any(np.diff(dc) < 0):
            raise ConfigError("curve DC powers must be non-decreasing")
        rf.setflags(write=False)
        dc.setflags(write=False)
        object.__setattr__(self, "p_rf", rf)
        object.__setattr__(self, "p_dc", dc)

    @property
    def efficiency(self) -> np.ndarray:
        return self.p_dc / self.p_rf

    @classmethod
    def from_csv(cls, source) -> "EfficiencyCurve":
        """Load ``p_rf_w,p_dc_w`` rows from a path or text."""
        if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source):
            text = Path(source).read_text(encoding="utf-8")
        else:
            text = source if isinstance(source, str) else source.read()
        rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]
        if not rows or [c.strip() for c in rows[0]] != ["p_rf_w", "p_dc_w"]:
            raise ConfigError("efficiency CSV must start with header 'p_rf_w,p_dc_w'")
        try:
            pts = np.array([[float(a), float(b)] for a, b in rows[1:]])
        except ValueError as exc:
            raise ConfigError(f"bad efficiency row: {exc}") from None
        return cls(pts[:, 0], pts[:, 1])

    def to_csv(self) -> str:
        lines = ["p_rf_w,p_dc_w"] + [f"{a!r},{b!r}" for a, b in zip(self.p_rf.tolist(), self.p_dc.tolist())]
        return "\n".join(lines) + "\n"


SINGLE_TONE_CURVE = EfficiencyCurve(*(np.array(_SINGLE_TONE_UW).T * 1e-6))
MULTI_TONE_CURVE = EfficiencyCurve(*(np.array(_MULTI_TONE_UW).T * 1e-6))


@dataclass(frozen=True)
class ParametricNonlinearity:
    """Memoryless threshold/saturation rectifier.

    Below ``sensitivity`` nothing is harvested. With ``transition="smooth"``
    the efficiency rises as a cubic smoothstep in log-power from 0 at
    ``sensitivity`` to ``peak_efficiency`` at ``saturation``; with
    ``"hard"`` it jumps straight to ``peak_efficiency``. Above ``saturation``
    the DC output stays at ``peak_efficiency * saturation``.
    """

    sensitivity: float = 5e-6
    peak_efficiency: float = 0.5
    saturation: float = 1e-3
    transition: str = "smooth"

    def __post_init__(self):
        if not 0 < self.sensitivity < self.saturation:
            raise ConfigError("need 0 < sensitivity < saturation")
        if not 0 < self.peak_efficiency <= 1:
            raise ConfigError("peak efficiency must be in (0, 1]")
        if self.transition not in ("smooth", "hard"):
            raise ConfigError(f"unknown transition {self.transition!r}")


@dataclass(frozen=True)
class HarvesterModel:
    mode: Union[EfficiencyCurve, ParametricNonlinearity] = SINGLE_TONE_CURVE
    v_max: float = 2.0
    averaging_window: float = 1e-3
    load_resistance: float = 324e3

    def __post_init__(self):
        if not self.v_max > 0:
            raise ConfigError("v_max must be > 0")
        if not self.averaging_window > 0:
            raise ConfigError("averaging window must be > 0")
        if not self.load_resistance > 0:
            raise ConfigError("load resistance must be > 0")


@dataclass(frozen=True)
class HarvestTrace:
    sample_rate: float
    p_eh: np.ndarray = field(repr=False)
    v_eh: np.ndarray = field(repr=False)

    def __post_init__(self):
        p = np.asarray(self.p_eh, dtype=float)
        v = np.asarray(self.v_eh, dtype=float)
        if p.shape != v.shape or p.ndim != 1:
            raise ValueError("p_eh and v_eh must be 1-D and equally long")
        if np.any(p < 0) or np.any(v < 0):
            raise ValueError("harvest trace values must be >= 0")
        if not self.sample_rate > 0:
            raise ValueError("sample_rate must be > 0")
        object.__setattr__(self, "p_eh", p)
        object.__setattr__(self, "v_eh", v)

    def __len__(self):
        return self.p_eh.size

    @property
    def dt(self) -> float:
        return 1.0 / self.sample_rate


def _curve_dc(curve: EfficiencyCurve, p):
    out = np.zeros_like(p)
    lo, hi = curve.p_rf[0], curve.p_rf[-1]
    inside = (p >= lo) & (p <= hi)
    if np.any(inside):
        out[inside] = np.exp(np.interp(np.log(p[inside]), np.log(curve.p_rf), np.log(curve.p_dc)))
        # knots come back exactly rather than through exp(log(x))
        at_knot = np.searchsorted(curve.p_rf, p[inside])
        at_knot = np.minimum(at_knot, curve.p_rf.size - 1)
        exact = curve.p_rf[at_knot] == p[inside]
        vals = out[inside]
        vals[exact] = curve.p_dc[at_knot[exact]]
        out[inside] = vals
    above = p > hi
    out[above] = p[above] * (curve.p_dc[-1] / hi)
    return out


def _parametric_dc(par: ParametricNonlinearity, p):
    out = np.zeros_like(p)
    on = p >= par.sensitivity
    if not np.any(on):
        return out
    pc = np.minimum(p[on], par.saturation)
    if par.transition == "hard":
        eta = np.full(pc.shape, par.peak_efficiency)
    else:
        x = (np.log(pc) - math.log(par.sensitivity)) / (math.log(par.saturation) - math.log(par.sensitivity))
        eta = par.peak_efficiency * x * x * (3.0 - 2.0 * x)
    out[on] = eta * pc
    return out


def rf_to_dc(model: HarvesterModel, p_rf):
    """Harvested DC power for RF input ``p_rf`` (scalar or array, watt)."""
    scalar = np.ndim(p_rf) == 0
    p = np.atleast_1d(np.asarray(p_rf, dtype=float))
    if np.any(p < 0):
        raise ValueError("RF power must be >= 0")
    mode = model.mode
    if isinstance(mode, EfficiencyCurve):
        out = _curve_dc(mode, p)
    else:
        out = _parametric_dc(mode, p)
    return float(out[0]) if scalar else out


def harvester_voltage(model: HarvesterModel, p_dc, load_resistance=None):
    """Quasi-static output voltage sqrt(P R), clamped at ``model.v_max``."""
    r = model.load_resistance if load_resistance is None else load_resistance
    if not r > 0:
        raise ValueError("load resistance must be > 0")
    v = np.minimum(np.sqrt(np.asarray(p_dc, dtype=float) * r), model.v_max)
    return float(v) if np.ndim(v) == 0 else v


def harvest_envelope(model: HarvesterModel, env: PowerEnvelope) -> HarvestTrace:
    """Rectify ``env`` sample by sample, then block-average onto the device time base.

    The averaging window must hold a whole number of envelope samples. A
    trailing partial window is dropped.
    """
    per = env.sample_rate * model.averaging_window
    m = int(round(per))
    if m < 1 or abs(per - m) > 1e-9 * per:
        raise ConfigError(
            f"averaging window {model.averaging_window} s is not a whole number of samples "
            f"at {env.sample_rate} Hz")
    p_dc = rf_to_dc(model, env.samples)
    n_blocks = p_dc.size // m
    p_eh = p_dc[: n_blocks * m].reshape(n_blocks, m).mean(axis=1)
    return HarvestTrace(env.sample_rate / m, p_eh, harvester_voltage(model, p_eh))


def concat_traces(traces) -> HarvestTrace:
    traces = list(traces)
    if not traces:
        raise ValueError("nothing to concatenate")
    rate = traces[0].sample_rate
    if any(t.sample_rate != rate for t in traces):
        raise ValueError("cannot concatenate traces with different sample rates")
    return HarvestTrace(rate, np.concatenate([t.p_eh for t in traces]),
                        np.concatenate([t.v_eh for t in traces]))
