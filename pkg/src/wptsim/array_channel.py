"""Array geometry and narrowband per-antenna channel gains."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError

SPEED_OF_LIGHT = 299_792_458.0
DEFAULT_CARRIER_HZ = 920e6

__all__ = [
    "ArrayGeometry",
    "FadingConfig",
    "ChannelRealization",
    "free_space_gain",
    "sample_channel",
    "ceiling_grid",
]


@dataclass(frozen=True)
class ArrayGeometry:
    positions: np.ndarray  # (n, 3) metres
    carrier_frequency: float = DEFAULT_CARRIER_HZ

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 3 or pos.shape[0] < 1:
            raise ConfigError(f"antenna positions must be shaped (n>=1, 3), got {pos.shape}")
        if not np.all(np.isfinite(pos)):
            raise ConfigError("antenna positions must be finite")
        if not self.carrier_frequency > 0:
            raise ConfigError("carrier frequency must be > 0")
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)

    @property
    def n_antennas(self) -> int:
        return self.positions.shape[0]

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_frequency

    @classmethod
    def from_csv(cls, source, carrier_frequency=DEFAULT_CARRIER_HZ) -> "ArrayGeometry":
        """Read ``antenna_id,x_m,y_m,z_m`` rows; output is ordered by antenna id."""
        if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source):
            text = Path(source).read_text(encoding="utf-8")
        else:
            text = source if isinstance(source, str) else source.read()
        rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]
        if not rows or [c.strip() for c in rows[0]] != ["antenna_id", "x_m", "y_m", "z_m"]:
            raise ConfigError("geometry CSV must start with header 'antenna_id,x_m,y_m,z_m'")
        try:
            parsed = sorted((int(r[0]), float(r[1]), float(r[2]), float(r[3])) for r in rows[1:])
        except (ValueError, IndexError) as exc:
            raise ConfigError(f"bad geometry row: {exc}") from None
        ids = [p[0] for p in parsed]
        if len(set(ids)) != len(ids):
            raise ConfigError("duplicate antenna_id in geometry CSV")
        return cls(np.array([p[1:] for p in parsed]), carrier_frequency)

    def to_csv(self) -> str:
        lines = ["antenna_id,x_m,y_m,z_m"]
        lines += [f"{i},{x!r},{y!r},{z!r}" for i, (x, y, z) in enumerate(self.positions.tolist())]
        return "\n".join(lines) + "\n"


def ceiling_grid(nx=7, ny=12, width=4.0, length=8.0, height=2.4,
                 carrier_frequency=DEFAULT_CARRIER_HZ) -> ArrayGeometry:
    """Rectangular ceiling grid; the defaults give 84 antennas over 4 m x 8 m."""
    if nx < 1 or ny < 1:
        raise ConfigError("grid needs at least one row and column")
    xs = np.linspace(0.0, width, nx) if nx > 1 else np.array([width / 2])
    ys = np.linspace(0.0, length, ny) if ny > 1 else np.array([length / 2])
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    pos = np.column_stack([gx.ravel(), gy.ravel(), np.full(gx.size, float(height))])
    return ArrayGeometry(pos, carrier_frequency)


@dataclass(frozen=True)
class FadingConfig:
    kind: str = "none"  # none | rician | rayleigh
    k_factor_db: float = 10.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("none", "rician", "rayleigh"):
            raise ConfigError(f"unknown fading kind {self.kind!r}")
        if not math.isfinite(self.k_factor_db):
            raise ConfigError("Rician K-factor must be finite")


@dataclass(frozen=True)
class ChannelRealization:
    gains: np.ndarray = field(repr=False)  # complex voltage gain per antenna

    def __post_init__(self):
        g = np.array(self.gains, dtype=np.complex128).ravel()
        if not np.all(np.isfinite(g)):
            raise ValueError("channel gains must be finite")
        g.setflags(write=False)
        object.__setattr__(self, "gains", g)

    @property
    def n_antennas(self) -> int:
        return self.gains.size

    @property
    def power_gains(self) -> np.ndarray:
        return np.abs(self.gains) ** 2


def free_space_gain(distance, frequency):
    """Friis voltage gain lambda/(4 pi d) with propagation phase -2 pi d/lambda.

    Accepts scalars or arrays of distances.
    """
    d = np.asarray(distance, dtype=float)
    if np.any(~(d > 0)):
        raise ConfigError("distance must be > 0")
    if not frequency > 0:
        raise ConfigError("frequency must be > 0")
    lam = SPEED_OF_LIGHT / frequency
    # reduce phase in wavelengths first to keep it accurate for large d
    cycles = np.mod(d / lam, 1.0)
    g = lam / (4 * np.pi * d) * np.exp(-2j * np.pi * cycles)
    return complex(g) if g.ndim == 0 else g


def sample_channel(geometry: ArrayGeometry, device_position, fading: FadingConfig | None = None
                   ) -> ChannelRealization:
    """Per-antenna complex gain at ``device_position``.

    Rician/Rayleigh draws scale a unit-mean-power complex Gaussian by the
    free-space gain, so E|g|^2 equals the free-space power gain.
    """
    fading = fading or FadingConfig()
    dev = np.asarray(device_position, dtype=float).reshape(3)
    d = np.linalg.norm(geometry.positions - dev, axis=1)
    if np.any(d <= 0):
        raise ConfigError("device position coincides with an antenna position")
    los = free_space_gain(d, geometry.carrier_frequency)
    los = np.atleast_1d(los)
    if fading.kind == "none":
        return ChannelRealization(los)
    rng = np.random.default_rng(fading.seed)
    scatter = (rng.standard_normal(d.size) + 1j * rng.standard_normal(d.size)) / math.sqrt(2.0)
    if fading.kind == "rayleigh":
        h = scatter
    else:
        k = 10.0 ** (fading.k_factor_db / 10.0)
        h = math.sqrt(k / (k + 1.0)) + math.sqrt(1.0 / (k + 1.0)) * scatter
    return ChannelRealization(los * h)
