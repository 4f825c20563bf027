"""Excitation plans (adaptive single-tone, multi-tone) and received-envelope synthesis.

The received complex baseband at the device is

    s(t) = sum_k a_k * g_k * exp(j * (2 pi df_k t + phi_k(t)))

and the envelope power is |s(t)|^2. Phases are piecewise constant over
epochs; within one epoch, if every offset is an integer multiple of a common
fundamental whose period spans a whole number of samples, the envelope is
computed for one period and tiled.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from . import _kernels
from .array_channel import ChannelRealization
from .errors import ConfigError

TWO_PI = 2.0 * math.pi
DEFAULT_DWELL_S = 5.0
DEFAULT_SPACING_HZ = 100.0
DEFAULT_ENVELOPE_RATE_HZ = 100e3

__all__ = [
    "ExcitationPlan",
    "PowerEnvelope",
    "adaptive_single_tone_plan",
    "multi_tone_plan",
    "synthesize_envelope",
    "iter_envelope_chunks",
    "mean_received_power",
]


@dataclass(frozen=True)
class ExcitationPlan:
    """Per-antenna amplitude, frequency offset and phase schedule.

    ``phases[e, k]`` is antenna ``k``'s phase during epoch ``e``, which starts
    at ``epoch_starts[e]`` and lasts until the next start (the last epoch runs
    forever). Amplitudes are in sqrt(W).
    """

    amplitudes: np.ndarray
    frequency_offsets: np.ndarray
    epoch_starts: np.ndarray
    phases: np.ndarray = field(repr=False)

    def __post_init__(self):
        amp = np.array(self.amplitudes, dtype=float).ravel()
        off = np.array(self.frequency_offsets, dtype=float).ravel()
        starts = np.array(self.epoch_starts, dtype=float).ravel()
        ph = np.array(self.phases, dtype=float)
        if amp.size == 0:
            raise ConfigError("plan needs at least one antenna")
        if off.size != amp.size:
            raise ConfigError("frequency offsets and amplitudes differ in length")
        if np.any(amp < 0) or not np.all(np.isfinite(amp)):
            raise ConfigError("amplitudes must be finite and >= 0")
        if not np.all(np.isfinite(off)):
            raise ConfigError("frequency offsets must be finite")
        if starts.size == 0 or np.any(np.diff(starts) <= 0):
            raise ConfigError("epoch starts must be non-empty and strictly increasing")
        if ph.shape != (starts.size, amp.size):
            raise ConfigError(f"phases must be shaped (epochs, antennas) = {(starts.size, amp.size)}")
        if np.any(ph < 0) or np.any(ph >= TWO_PI):
            raise ConfigError("phases must lie in [0, 2*pi)")
        for a in (amp, off, starts, ph):
            a.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)
        object.__setattr__(self, "frequency_offsets", off)
        object.__setattr__(self, "epoch_starts", starts)
        object.__setattr__(self, "phases", ph)

    @property
    def n_antennas(self) -> int:
        return self.amplitudes.size

    @property
    def n_epochs(self) -> int:
        return self.epoch_starts.size

    def coefficients(self, channel: ChannelRealization, epoch: int) -> np.ndarray:
        return self.amplitudes * channel.gains * np.exp(1j * self.phases[epoch])


@dataclass(frozen=True)
class PowerEnvelope:
    sample_rate: float
    samples: np.ndarray = field(repr=False)  # instantaneous received power, W
    start_time: float = 0.0

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if not self.sample_rate > 0:
            raise ValueError("sample_rate must be > 0")
        if not np.all(np.isfinite(s)) or np.any(s < 0):
            raise ValueError("envelope samples must be finite and >= 0")
        object.__setattr__(self, "samples", s)

    @property
    def times(self) -> np.ndarray:
        return self.start_time + np.arange(self.samples.size) / self.sample_rate

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t_s,p_rf_w\n")
        for t, p in zip(self.times.tolist(), self.samples.tolist()):
            buf.write(f"{t!r},{p!r}\n")
        return buf.getvalue()


def _check_count(n_antennas):
    if n_antennas < 1:
        raise ConfigError(f"need at least one antenna, got {n_antennas}")


def adaptive_single_tone_plan(n_antennas: int, amplitude: float, dwell: float = DEFAULT_DWELL_S,
                              duration: float = 1800.0, seed: int = 0) -> ExcitationPlan:
    """All antennas on the carrier; every antenna re-draws a uniform phase each dwell."""
    _check_count(n_antennas)
    if not dwell > 0:
        raise ConfigError("dwell must be > 0")
    if not duration >= dwell:
        raise ConfigError("duration must be >= dwell")
    n_epochs = math.ceil(duration / dwell - 1e-9)
    rng = np.random.default_rng(seed)
    phases = rng.uniform(0.0, TWO_PI, size=(n_epochs, n_antennas))
    return ExcitationPlan(
        amplitudes=np.full(n_antennas, float(amplitude)),
        frequency_offsets=np.zeros(n_antennas),
        epoch_starts=np.arange(n_epochs) * float(dwell),
        phases=phases,
    )


def multi_tone_plan(n_antennas: int, amplitude: float, spacing: float = DEFAULT_SPACING_HZ,
                    seed: int = 0) -> ExcitationPlan:
    """Antenna ``k`` transmits at offset ``k * spacing`` with a fixed random phase."""
    _check_count(n_antennas)
    if not spacing > 0:
        raise ConfigError("tone spacing must be > 0")
    rng = np.random.default_rng(seed)
    return ExcitationPlan(
        amplitudes=np.full(n_antennas, float(amplitude)),
        frequency_offsets=np.arange(n_antennas) * float(spacing),
        epoch_starts=np.zeros(1),
        phases=rng.uniform(0.0, TWO_PI, size=(1, n_antennas)),
    )


def _fundamental(freqs, resolution=1e-3):
    """Largest f0 with every offset an integer multiple of f0, or None."""
    scaled = np.abs(freqs) / resolution
    ints = np.round(scaled)
    if np.any(np.abs(scaled - ints) > 1e-6 * np.maximum(1.0, scaled)):
        return None
    nz = [int(v) for v in ints if v != 0]
    if not nz:
        return 0.0
    return reduce(math.gcd, nz) * resolution


def _segment_power(t, coeffs, freqs, sample_rate, use_periodicity):
    n = t.size
    if not use_periodicity:
        return _kernels.envelope_power(t, coeffs, freqs)
    f0 = _fundamental(freqs)
    if f0 == 0.0:
        s = coeffs.sum()
        return np.full(n, s.real * s.real + s.imag * s.imag)
    if f0 is not None:
        period = sample_rate / f0
        p_int = round(period)
        if abs(period - p_int) <= 1e-9 * period and p_int < n:
            one = _kernels.envelope_power(t[:p_int], coeffs, freqs)
            return np.resize(one, n)
    return _kernels.envelope_power(t, coeffs, freqs)


def synthesize_envelope(plan: ExcitationPlan, channel: ChannelRealization, duration: float,
                        sample_rate: float = DEFAULT_ENVELOPE_RATE_HZ, start_time: float = 0.0,
                        use_periodicity: bool = True) -> PowerEnvelope:
    """Sample |s(t)|^2 at ``start_time + n / sample_rate`` for ``duration`` seconds.

    Raises ``ConfigError`` on an antenna-count mismatch, when ``sample_rate``
    is below 4x the largest offset, or when ``duration`` holds no sample.
    """
    if plan.n_antennas != channel.n_antennas:
        raise ConfigError(
            f"plan has {plan.n_antennas} antennas but channel has {channel.n_antennas}")
    if not sample_rate > 0:
        raise ConfigError("sample_rate must be > 0")
    f_max = float(np.max(np.abs(plan.frequency_offsets)))
    if sample_rate < 4.0 * f_max:
        raise ConfigError(
            f"sample rate {sample_rate} Hz below 4x the largest offset ({f_max} Hz)")
    n = int(math.floor(duration * sample_rate + 1e-9))
    if n < 1:
        raise ConfigError(f"duration {duration} s holds no sample at {sample_rate} Hz")

    t = start_time + np.arange(n) / sample_rate
    out = np.empty(n)
    # a boundary within a millionth of a sample belongs to the later epoch
    epoch_of = np.searchsorted(plan.epoch_starts, t + 1e-6 / sample_rate, side="right") - 1
    np.clip(epoch_of, 0, None, out=epoch_of)
    bounds = np.flatnonzero(np.diff(epoch_of)) + 1
    edges = np.concatenate(([0], bounds, [n]))
    for i0, i1 in zip(edges[:-1], edges[1:]):
        coeffs = plan.coefficients(channel, int(epoch_of[i0]))
        out[i0:i1] = _segment_power(t[i0:i1], coeffs, plan.frequency_offsets,
                                    sample_rate, use_periodicity)
    return PowerEnvelope(sample_rate, out, start_time)


def iter_envelope_chunks(plan, channel, duration, sample_rate=DEFAULT_ENVELOPE_RATE_HZ,
                         chunk_duration=1.0):
    """Yield consecutive envelope chunks covering ``duration`` seconds.

    Chunk boundaries fall on whole samples, so concatenating the chunks gives
    the same sample times as one call to :func:`synthesize_envelope`.
    """
    n_total = int(math.floor(duration * sample_rate + 1e-9))
    n_chunk = max(1, int(round(chunk_duration * sample_rate)))
    for i0 in range(0, n_total, n_chunk):
        n = min(n_chunk, n_total - i0)
        yield synthesize_envelope(plan, channel, n / sample_rate, sample_rate,
                                  start_time=i0 / sample_rate)


def mean_received_power(plan: ExcitationPlan, channel: ChannelRealization) -> float:
    """Long-run average of |s(t)|^2 for distinct tones or uniform phases: sum a_k^2 |g_k|^2."""
    return float(np.sum(plan.amplitudes ** 2 * channel.power_gains))
