"""Energy-profiler trace ingestion, buffer reconstruction and Monte-Carlo response times.

Trace files are UTF-8 CSV with an optional ``# key=value`` comment block
(``strategy``, ``gain_db``, ``sample_rate_hz``) followed by the header
``t_s,p_dc_w,v_dc_v``.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .end_device import EndDeviceConfig, simulate_device
from .errors import DataError, TraceParseError
from .harvester import HarvestTrace

HEADER = ("t_s", "p_dc_w", "v_dc_v")
DEFAULT_TRIALS = 50

__all__ = [
    "EpTrace",
    "ResponseStats",
    "parse_ep_trace",
    "reconstruct_buffer",
    "monte_carlo_response",
    "nearest_rank",
    "cdf_points",
]


@dataclass(frozen=True)
class EpTrace:
    sample_rate: float
    t: np.ndarray = field(repr=False)
    p_dc: np.ndarray = field(repr=False)
    v_dc: np.ndarray = field(repr=False)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        p = np.asarray(self.p_dc, dtype=float)
        v = np.asarray(self.v_dc, dtype=float)
        if not (t.shape == p.shape == v.shape) or t.ndim != 1:
            raise DataError("t, p_dc and v_dc must be 1-D and equally long")
        if t.size == 0:
            raise DataError("trace is empty")
        if not self.sample_rate > 0:
            raise DataError("sample rate must be > 0")
        if np.any(p < 0) or np.any(v < 0):
            raise DataError("p_dc and v_dc must be >= 0")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(p)) and np.all(np.isfinite(v))):
            raise DataError("trace contains non-finite values")
        if t.size > 1:
            d = np.diff(t)
            period = 1.0 / self.sample_rate
            if np.any(d <= 0):
                i = int(np.flatnonzero(d <= 0)[0])
                raise DataError(f"time is not strictly increasing at sample {i + 1}")
            if np.any(d > 2 * period * (1 + 1e-9)):
                i = int(np.flatnonzero(d > 2 * period * (1 + 1e-9))[0])
                raise DataError(f"gap of {d[i]:.6g} s after sample {i} exceeds two sample periods")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "p_dc", p)
        object.__setattr__(self, "v_dc", v)

    def __len__(self):
        return self.t.size

    @property
    def dt(self) -> float:
        return 1.0 / self.sample_rate

    @property
    def duration(self) -> float:
        return len(self) * self.dt

    def as_harvest(self) -> HarvestTrace:
        return HarvestTrace(self.sample_rate, self.p_dc, self.v_dc)

    @classmethod
    def from_harvest(cls, harvest: HarvestTrace, **meta) -> "EpTrace":
        t = np.arange(len(harvest)) / harvest.sample_rate
        meta = {"sample_rate_hz": harvest.sample_rate, **meta}
        return cls(harvest.sample_rate, t, harvest.p_eh, harvest.v_eh, meta)

    def to_csv(self) -> str:
        buf = io.StringIO()
        meta = {**self.meta, "sample_rate_hz": self.sample_rate}
        for key in sorted(meta):
            buf.write(f"# {key}={meta[key]}\n")
        buf.write(",".join(HEADER) + "\n")
        for row in zip(self.t.tolist(), self.p_dc.tolist(), self.v_dc.tolist()):
            buf.write("%r,%r,%r\n" % row)
        return buf.getvalue()


def _read_text(source) -> str:
    if isinstance(source, Path):
        return source.read_text(encoding="utf-8")
    if isinstance(source, bytes):
        return source.decode("utf-8")
    if isinstance(source, str):
        if "\n" not in source and Path(source).exists():
            return Path(source).read_text(encoding="utf-8")
        return source
    data = source.read()
    return data.decode("utf-8") if isinstance(data, bytes) else data


def _parse_meta_value(key, raw):
    if key == "strategy":
        if raw not in ("single", "multi"):
            raise TraceParseError(f"strategy must be 'single' or 'multi', got {raw!r}")
        return raw
    try:
        return float(raw)
    except ValueError:
        return raw


def parse_ep_trace(source) -> EpTrace:
    """Parse and validate an energy-profiler CSV trace.

    ``source`` may be a path, the CSV text, bytes or a readable stream. The
    sample rate comes from ``# sample_rate_hz`` when present and must agree
    with the time column; otherwise it is detected from the median spacing.
    """
    text = _read_text(source)
    meta = {}
    header_seen = False
    t, p, v = [], [], []
    for lineno, line in enumerate(text.split("\n"), start=1):
        line = line.rstrip("\r")
        if not line.strip():
            continue
        if line.lstrip().startswith("#"):
            body = line.lstrip()[1:].strip()
            if "=" in body:
                key, _, raw = body.partition("=")
                key = key.strip()
                meta[key] = _parse_meta_value(key, raw.strip())
            continue
        cells = [c.strip() for c in line.split(",")]
        if not header_seen:
            if tuple(cells) != HEADER:
                raise TraceParseError(f"expected header {','.join(HEADER)!r}, got {line!r}", lineno)
            header_seen = True
            continue
        if len(cells) != 3:
            raise TraceParseError(f"expected 3 fields, got {len(cells)}", lineno)
        try:
            ti, pi, vi = (float(c) for c in cells)
        except ValueError:
            raise TraceParseError(f"non-numeric field in {line!r}", lineno) from None
        if pi < 0 or vi < 0:
            raise DataError(f"line {lineno}: p_dc and v_dc must be >= 0")
        t.append(ti)
        p.append(pi)
        v.append(vi)
    if not header_seen:
        raise TraceParseError("missing header line")
    if not t:
        raise DataError("trace has no samples")

    t = np.array(t)
    measured = None
    if t.size > 1:
        d = np.diff(t)
        if np.any(d <= 0):
            i = int(np.flatnonzero(d <= 0)[0])
            raise DataError(f"time is not strictly increasing at sample {i + 1}")
        measured = 1.0 / float(np.median(d))
    rate = meta.get("sample_rate_hz")
    if rate is not None:
        if not isinstance(rate, float) or not rate > 0:
            raise DataError(f"bad sample_rate_hz {rate!r}")
        if measured is not None and abs(measured - rate) > 0.01 * rate:
            raise DataError(
                f"declared sample rate {rate} Hz disagrees with time column ({measured:.6g} Hz)")
    elif measured is not None:
        rate = measured
    else:
        raise DataError("single-sample trace without sample_rate_hz")
    meta["sample_rate_hz"] = rate
    if "duration" not in meta:
        meta["duration"] = t.size / rate
    return EpTrace(rate, t, np.array(p), np.array(v), meta)


def reconstruct_buffer(trace: EpTrace, cfg: EndDeviceConfig, start_index: int = 0,
                       stop_at_pilot: bool = False):
    """Replay the trace's DC power and voltage into a depleted buffer from ``start_index``.

    A trial that never sends its pilot is censored: ``events.pilot_sent_at``
    is ``None`` and the remaining duration is the censoring time.
    """
    return simulate_device(trace.as_harvest(), cfg, 0.0, start_index, stop_at_pilot)


def nearest_rank(sorted_values, q) -> float:
    """Nearest-rank percentile ``q`` (0..100] of an ascending sequence."""
    n = len(sorted_values)
    if n == 0:
        raise ValueError("no values")
    rank = max(1, math.ceil(q / 100.0 * n - 1e-12))
    return sorted_values[rank - 1]


@dataclass(frozen=True)
class ResponseStats:
    """Monte-Carlo response times.

    ``response_times[i]`` is the trial's response time, or, for a censored
    trial, the remaining trace duration it was censored at. Percentiles are
    nearest-rank over all trials with censored ones ranked last; a percentile
    landing on a censored trial is ``None`` (rendered as "-").
    """

    response_times: tuple
    censored: tuple
    p50: Optional[float]
    p95: Optional[float]
    p98: Optional[float]

    @property
    def n_trials(self) -> int:
        return len(self.response_times)

    @property
    def n_uncensored(self) -> int:
        return self.n_trials - sum(self.censored)

    @property
    def uncensored_fraction(self) -> float:
        return self.n_uncensored / self.n_trials if self.n_trials else 0.0

    @property
    def censor_limit(self) -> float:
        return max(self.response_times) if self.response_times else 0.0

    @property
    def cdf(self):
        return cdf_points(self.response_times, self.censor_limit, self.censored)

    @classmethod
    def from_times(cls, times, censored) -> "ResponseStats":
        times = tuple(float(x) for x in times)
        censored = tuple(bool(c) for c in censored)
        if len(times) != len(censored):
            raise ValueError("times and censored flags differ in length")
        ranked = sorted(math.inf if c else x for x, c in zip(times, censored))
        pct = {}
        for q in (50, 95, 98):
            val = nearest_rank(ranked, q) if ranked else math.inf
            pct[q] = None if math.isinf(val) else val
        return cls(times, censored, pct[50], pct[95], pct[98])


def _trial(harvest, cfg, start):
    _, events = simulate_device(harvest, cfg, 0.0, int(start), stop_at_pilot=True)
    if events.pilot_sent_at is None:
        return (len(harvest) - int(start)) / harvest.sample_rate, True
    return events.pilot_sent_at, False


def draw_start_indices(n_samples: int, n_trials: int, seed) -> np.ndarray:
    return np.random.default_rng(seed).integers(0, n_samples, size=n_trials)


def monte_carlo_response(trace, cfg: EndDeviceConfig, n_trials: int = DEFAULT_TRIALS,
                         seed=0, starts=None) -> ResponseStats:
    """Response-time statistics over ``n_trials`` uniformly drawn start samples.

    ``trace`` may be an :class:`EpTrace` or a :class:`HarvestTrace`. Passing
    ``starts`` overrides the random draw.
    """
    harvest = trace.as_harvest() if isinstance(trace, EpTrace) else trace
    if len(harvest) == 0:
        raise DataError("trace is empty")
    if starts is None:
        if n_trials < 1:
            raise ValueError("n_trials must be >= 1")
        starts = draw_start_indices(len(harvest), n_trials, seed)
    results = [_trial(harvest, cfg, s) for s in starts]
    return ResponseStats.from_times([r[0] for r in results], [r[1] for r in results])


def cdf_points(times, censor_limit: float, censored=None):
    """Empirical CDF steps over uncensored times, as ``[(t, F), ...]``.

    Starts at ``(0, 0)``, steps up by ``1/n`` at each uncensored time and
    ends with a plateau at ``censor_limit``. Entries flagged in ``censored``,
    ``None``, infinite, or beyond ``censor_limit`` count as censored.
    """
    times = list(times)
    n = len(times)
    if n == 0:
        raise ValueError("no response times")
    flags = list(censored) if censored is not None else [False] * n
    ok = sorted(float(x) for x, c in zip(times, flags)
                if not c and x is not None and math.isfinite(x) and x <= censor_limit)
    pts = [(0.0, 0.0)]
    for i, x in enumerate(ok, start=1):
        pts.append((x, i / n))
    pts.append((float(censor_limit), len(ok) / n))
    return pts


def eval_cdf(points, t: float) -> float:
    """Value of a step CDF from :func:`cdf_points` at time ``t``."""
    f = 0.0
    for x, y in points[1:-1]:
        if x <= t:
            f = y
        else:
            break
    return f
