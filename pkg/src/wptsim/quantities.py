"""Power/voltage carriers, dBm conversions and the transmit-gain calibration."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, OutOfRangeError

__all__ = [
    "PowerQuantity",
    "VoltageQuantity",
    "GainCalibration",
    "DEFAULT_CALIBRATION",
    "dbm_to_watt",
    "watt_to_dbm",
    "combine_equal_sources",
    "gain_to_power",
]


def dbm_to_watt(p_dbm):
    """Convert dBm to watt. Works elementwise on arrays."""
    if np.ndim(p_dbm):
        return 1e-3 * np.power(10.0, np.asarray(p_dbm, dtype=float) / 10.0)
    return 1e-3 * 10.0 ** (float(p_dbm) / 10.0)


def watt_to_dbm(p_w):
    if np.ndim(p_w):
        return 10.0 * np.log10(np.asarray(p_w, dtype=float) / 1e-3)
    if p_w <= 0:
        return -math.inf
    return 10.0 * math.log10(p_w / 1e-3)


def combine_equal_sources(p_per_antenna_dbm: float, n: int) -> float:
    """Total power of ``n`` equal, uncorrelated sources in dBm."""
    if n < 1:
        raise ConfigError(f"need at least one source, got n={n}")
    return p_per_antenna_dbm + 10.0 * math.log10(n)


@dataclass(frozen=True)
class PowerQuantity:
    """A non-negative power, stored in watt."""

    watt: float

    def __post_init__(self):
        if not (self.watt >= 0.0) or math.isinf(self.watt):
            raise ValueError(f"power must be finite and >= 0 W, got {self.watt!r}")

    @classmethod
    def from_dbm(cls, p_dbm: float) -> "PowerQuantity":
        return cls(dbm_to_watt(p_dbm))

    @property
    def dbm(self) -> float:
        return watt_to_dbm(self.watt)

    def __add__(self, other: "PowerQuantity") -> "PowerQuantity":
        return PowerQuantity(self.watt + other.watt)

    def __mul__(self, factor: float) -> "PowerQuantity":
        return PowerQuantity(self.watt * factor)

    __rmul__ = __mul__


@dataclass(frozen=True)
class VoltageQuantity:
    volt: float

    def __post_init__(self):
        if not math.isfinite(self.volt):
            raise ValueError(f"voltage must be finite, got {self.volt!r}")


# USRP gain [dB] -> calibrated output power per antenna [dBm]
_TABLE_ROWS = (
    (75, 9.1), (76, 9.96), (77, 10.82), (78, 11.68), (79, 12.54), (80, 13.4),
    (81, 14.2), (82, 15.0), (83, 15.8), (84, 16.6), (85, 17.4),
)


@dataclass(frozen=True)
class GainCalibration:
    """Transmit gain setting to radiated power per antenna.

    ``entries`` is a tuple of ``(gain_db, p_dbm)`` pairs with strictly
    increasing gain. Queries between entries are interpolated linearly in dB.
    """

    entries: tuple

    def __post_init__(self):
        entries = tuple((float(g), float(p)) for g, p in self.entries)
        if not entries:
            raise ConfigError("calibration table is empty")
        gains = [g for g, _ in entries]
        if any(b <= a for a, b in zip(gains, gains[1:])):
            raise ConfigError("calibration gains must be strictly increasing")
        if not all(math.isfinite(g) and math.isfinite(p) for g, p in entries):
            raise ConfigError("calibration table contains non-finite values")
        object.__setattr__(self, "entries", entries)

    @property
    def gains(self) -> np.ndarray:
        return np.array([g for g, _ in self.entries])

    @property
    def powers_dbm(self) -> np.ndarray:
        return np.array([p for _, p in self.entries])

    def power_dbm(self, gain_db: float) -> float:
        return gain_to_power(self, gain_db)

    @classmethod
    def from_csv(cls, source) -> "GainCalibration":
        """Load from a CSV with header ``gain_db,p_dbm`` (path or text stream)."""
        if isinstance(source, (str, Path)) and Path(source).exists():
            text = Path(source).read_text(encoding="utf-8")
        elif isinstance(source, str):
            text = source
        else:
            text = source.read()
        reader = csv.reader(io.StringIO(text))
        rows = [r for r in reader if r and not r[0].lstrip().startswith("#")]
        if not rows or [c.strip() for c in rows[0]] != ["gain_db", "p_dbm"]:
            raise ConfigError("calibration CSV must start with header 'gain_db,p_dbm'")
        try:
            entries = tuple((float(g), float(p)) for g, p in rows[1:])
        except ValueError as exc:
            raise ConfigError(f"bad calibration row: {exc}") from None
        return cls(entries)

    def to_csv(self) -> str:
        lines = ["gain_db,p_dbm"] + [f"{g!r},{p!r}" for g, p in self.entries]
        return "\n".join(lines) + "\n"


DEFAULT_CALIBRATION = GainCalibration(_TABLE_ROWS)


def gain_to_power(cal: GainCalibration, gain_db: float) -> float:
    """Per-antenna output power [dBm] for a transmit gain setting [dB]."""
    gains = cal.gains
    if not (gains[0] <= gain_db <= gains[-1]):
        raise OutOfRangeError(
            f"gain {gain_db} dB outside calibrated range [{gains[0]}, {gains[-1]}] dB")
    for g, p in cal.entries:
        if g == gain_db:
            return p
    return float(np.interp(gain_db, gains, cal.powers_dbm))
