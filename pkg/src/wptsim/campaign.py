"""Gain sweeps over excitation strategies, and the report formats they produce.

One sweep point is the full chain plan -> channel -> envelope -> harvester ->
Monte-Carlo device response. Points are independent, so they can run in a
process pool; the report is assembled in (strategy, gain) order either way.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from .array_channel import (ArrayGeometry, ChannelRealization, FadingConfig, ceiling_grid,
                            sample_channel)
from .end_device import IDEAL_MCU, REALISTIC_MCU, EndDeviceConfig, McuLoadCurve
from .errors import ConfigError, DataError
from .excitation import (DEFAULT_DWELL_S, DEFAULT_ENVELOPE_RATE_HZ, DEFAULT_SPACING_HZ,
                         ExcitationPlan, adaptive_single_tone_plan, iter_envelope_chunks,
                         multi_tone_plan)
from .harvester import (MULTI_TONE_CURVE, SINGLE_TONE_CURVE, EfficiencyCurve, HarvesterModel,
                        HarvestTrace, ParametricNonlinearity, concat_traces, harvest_envelope)
from .quantities import (DEFAULT_CALIBRATION, GainCalibration, combine_equal_sources,
                         dbm_to_watt, gain_to_power)
from .trace_replay import (DEFAULT_TRIALS, EpTrace, ResponseStats, cdf_points,
                           draw_start_indices, monte_carlo_response, parse_ep_trace)

__all__ = [
    "CampaignConfig",
    "HarvesterSpec",
    "SweepRow",
    "SweepReport",
    "load_config",
    "config_from_dict",
    "run_point",
    "replay_point",
    "run_sweep",
    "emit_report",
    "parse_report",
    "cdf_points",
]

STRATEGIES = ("single", "multi")
MCU_MODES = ("realistic", "ideal")
DEFAULT_GAINS = tuple(float(g) for g in range(75, 86))
# Free-space propagation from the default ceiling grid overshoots the measured
# RF levels by about this much; it stands in for antenna and cable losses.
DEFAULT_RX_LOSS_DB = 10.4
DEFAULT_DEVICE_POSITION = (1.2, 3.1, 0.0)


@dataclass(frozen=True)
class HarvesterSpec:
    """Which harvester to use per strategy."""

    mode: str = "measured"  # measured | parametric
    curves: dict = field(default_factory=lambda: {"single": SINGLE_TONE_CURVE,
                                                  "multi": MULTI_TONE_CURVE})
    parametric: ParametricNonlinearity = ParametricNonlinearity()
    v_max: float = 2.0
    averaging_window: float = 1e-3
    load_resistance: float = 324e3

    def __post_init__(self):
        if self.mode not in ("measured", "parametric"):
            raise ConfigError(f"unknown harvester mode {self.mode!r}")

    def model(self, strategy: str) -> HarvesterModel:
        mode = self.curves[strategy] if self.mode == "measured" else self.parametric
        return HarvesterModel(mode, self.v_max, self.averaging_window, self.load_resistance)


@dataclass(frozen=True)
class CampaignConfig:
    geometry: ArrayGeometry = field(default_factory=ceiling_grid)
    geometry_label: str = "ceiling grid 7x12 over 4.0 m x 8.0 m at 2.4 m"
    device_position: tuple = DEFAULT_DEVICE_POSITION
    fading: FadingConfig = FadingConfig()
    rx_loss_db: float = DEFAULT_RX_LOSS_DB
    strategies: tuple = STRATEGIES
    gains_db: tuple = DEFAULT_GAINS
    duration_s: float = 1800.0
    dwell_s: float = DEFAULT_DWELL_S
    tone_spacing_hz: float = DEFAULT_SPACING_HZ
    envelope_rate_hz: float = DEFAULT_ENVELOPE_RATE_HZ
    chunk_s: float = 1.0
    harvester: HarvesterSpec = HarvesterSpec()
    device: EndDeviceConfig = EndDeviceConfig()
    mcu_modes: tuple = MCU_MODES
    n_trials: int = DEFAULT_TRIALS
    seed: int = 0
    calibration: GainCalibration = DEFAULT_CALIBRATION
    workers: int = 1
    traces: tuple = ()  # replay mode when non-empty

    def __post_init__(self):
        if not self.gains_db and not self.traces:
            raise ConfigError("gain sweep is empty")
        if not self.strategies:
            raise ConfigError("no strategies selected")
        bad = [s for s in self.strategies if s not in STRATEGIES]
        if bad:
            raise ConfigError(f"unknown strategies {bad}")
        bad = [m for m in self.mcu_modes if m not in MCU_MODES]
        if bad:
            raise ConfigError(f"unknown MCU modes {bad}")
        if not self.duration_s > 0:
            raise ConfigError("duration must be > 0")
        if self.n_trials < 1:
            raise ConfigError("n_trials must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        for p in self.traces:
            if not Path(p).exists():
                raise ConfigError(f"trace file {p} does not exist")

    @property
    def replay_mode(self) -> bool:
        return bool(self.traces)

    def device_for(self, mcu_mode: str) -> EndDeviceConfig:
        if mcu_mode == "ideal":
            return self.device.with_load(IDEAL_MCU)
        load = self.device.mcu_load if self.device.mcu_load.kind == "realistic" else REALISTIC_MCU
        return self.device.with_load(load)

    def channel(self) -> ChannelRealization:
        ch = sample_channel(self.geometry, self.device_position, self.fading)
        return ChannelRealization(ch.gains * 10.0 ** (-self.rx_loss_db / 20.0))

    def meta(self) -> dict:
        return {
            "mode": "replay" if self.replay_mode else "simulate",
            "geometry": self.geometry_label,
            "n_antennas": str(self.geometry.n_antennas),
            "carrier_hz": repr(float(self.geometry.carrier_frequency)),
            "device_position_m": ";".join(repr(float(x)) for x in self.device_position),
            "fading": f"{self.fading.kind}(K={self.fading.k_factor_db!r} dB, seed={self.fading.seed})",
            "rx_loss_db": repr(float(self.rx_loss_db)),
            "duration_s": repr(float(self.duration_s)),
            "harvester": self.harvester.mode,
            "n_trials": str(self.n_trials),
            "seed": str(self.seed),
            "mcu_modes": ";".join(self.mcu_modes),
            "feasibility_basis": "time fraction of harvester voltage above v_mcu_th",
        }


# ------------------------------------------------------------------ config

_TOP_KEYS = {
    "geometry", "device_position", "fading", "rx_loss_db", "strategies", "gains_db",
    "duration_s", "dwell_s", "tone_spacing_hz", "envelope_rate_hz", "chunk_s", "harvester",
    "device", "mcu_modes", "n_trials", "seed", "calibration_csv", "workers", "traces",
}


def _check_keys(section, allowed, where):
    unknown = set(section) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")


def _resolve(base: Path, p) -> Path:
    p = Path(p)
    return p if p.is_absolute() else base / p


def config_from_dict(data: dict, base_dir=".") -> CampaignConfig:
    """Build a :class:`CampaignConfig` from parsed YAML. Relative paths resolve against ``base_dir``."""
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    _check_keys(data, _TOP_KEYS, "config")
    base = Path(base_dir)
    kw = {}
    try:
        geo = data.get("geometry") or {}
        _check_keys(geo, {"csv", "grid", "carrier_hz"}, "geometry")
        carrier = float(geo.get("carrier_hz", 920e6))
        if "csv" in geo:
            path = _resolve(base, geo["csv"])
            if not path.exists():
                raise ConfigError(f"geometry file {path} does not exist")
            kw["geometry"] = ArrayGeometry.from_csv(path, carrier)
            kw["geometry_label"] = f"csv {path.name}"
        else:
            grid = geo.get("grid") or {}
            _check_keys(grid, {"nx", "ny", "width_m", "length_m", "height_m"}, "geometry.grid")
            args = dict(nx=int(grid.get("nx", 7)), ny=int(grid.get("ny", 12)),
                        width=float(grid.get("width_m", 4.0)), length=float(grid.get("length_m", 8.0)),
                        height=float(grid.get("height_m", 2.4)))
            kw["geometry"] = ceiling_grid(carrier_frequency=carrier, **args)
            kw["geometry_label"] = ("ceiling grid {nx}x{ny} over {width} m x {length} m at {height} m"
                                    .format(**args))
        if "device_position" in data:
            pos = tuple(float(x) for x in data["device_position"])
            if len(pos) != 3:
                raise ConfigError("device_position needs three coordinates")
            kw["device_position"] = pos
        if "fading" in data:
            fad = data["fading"] or {}
            _check_keys(fad, {"kind", "k_factor_db", "seed"}, "fading")
            kw["fading"] = FadingConfig(str(fad.get("kind", "none")), float(fad.get("k_factor_db", 10.0)),
                                        int(fad.get("seed", 0)))
        for key, conv in (("rx_loss_db", float), ("duration_s", float), ("dwell_s", float),
                          ("tone_spacing_hz", float), ("envelope_rate_hz", float), ("chunk_s", float),
                          ("n_trials", int), ("seed", int), ("workers", int)):
            if key in data:
                kw[key] = conv(data[key])
        if "strategies" in data:
            kw["strategies"] = tuple(str(s) for s in data["strategies"])
        if "mcu_modes" in data:
            kw["mcu_modes"] = tuple(str(s) for s in data["mcu_modes"])
        if "gains_db" in data:
            gains = data["gains_db"]
            if isinstance(gains, dict):
                _check_keys(gains, {"start", "stop", "step"}, "gains_db")
                start, stop, step = float(gains["start"]), float(gains["stop"]), float(gains.get("step", 1))
                n = int(math.floor((stop - start) / step + 1e-9)) + 1
                gains = [start + i * step for i in range(n)]
            kw["gains_db"] = tuple(float(g) for g in gains)
        if "calibration_csv" in data:
            path = _resolve(base, data["calibration_csv"])
            if not path.exists():
                raise ConfigError(f"calibration file {path} does not exist")
            kw["calibration"] = GainCalibration.from_csv(path)
        if "harvester" in data:
            kw["harvester"] = _harvester_from_dict(data["harvester"] or {}, base)
        if "device" in data:
            kw["device"] = _device_from_dict(data["device"] or {})
        if "traces" in data:
            kw["traces"] = tuple(str(_resolve(base, p)) for p in data["traces"])
    except (TypeError, KeyError) as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"malformed config: {exc}") from None
    return CampaignConfig(**kw)


def _harvester_from_dict(h, base):
    _check_keys(h, {"mode", "single_curve_csv", "multi_curve_csv", "sensitivity_w",
                    "peak_efficiency", "saturation_w", "transition", "v_max",
                    "averaging_window_s", "load_resistance_ohm"}, "harvester")
    curves = {"single": SINGLE_TONE_CURVE, "multi": MULTI_TONE_CURVE}
    for strat in STRATEGIES:
        key = f"{strat}_curve_csv"
        if key in h:
            path = _resolve(base, h[key])
            if not path.exists():
                raise ConfigError(f"efficiency curve file {path} does not exist")
            curves[strat] = EfficiencyCurve.from_csv(path)
    default = ParametricNonlinearity()
    par = ParametricNonlinearity(
        float(h.get("sensitivity_w", default.sensitivity)),
        float(h.get("peak_efficiency", default.peak_efficiency)),
        float(h.get("saturation_w", default.saturation)),
        str(h.get("transition", default.transition)),
    )
    return HarvesterSpec(str(h.get("mode", "measured")), curves, par,
                         float(h.get("v_max", 2.0)), float(h.get("averaging_window_s", 1e-3)),
                         float(h.get("load_resistance_ohm", 324e3)))


def _device_from_dict(d):
    _check_keys(d, {"c_b_f", "v_mcu_th_v", "v_bod_v", "pilot_bytes", "baud", "p_active_w",
                    "realistic_load"}, "device")
    kw = {}
    for key, name, conv in (("c_b_f", "c_b", float), ("v_mcu_th_v", "v_mcu_th", float),
                            ("v_bod_v", "v_bod", float), ("pilot_bytes", "pilot_bytes", int),
                            ("baud", "baud", float), ("p_active_w", "p_active", float)):
        if key in d:
            kw[name] = conv(d[key])
    if "realistic_load" in d:
        kw["mcu_load"] = McuLoadCurve("realistic", tuple(tuple(p) for p in d["realistic_load"]))
    return EndDeviceConfig(**kw)


def load_config(path) -> CampaignConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    return config_from_dict(data, path.parent)


# ------------------------------------------------------------------ sweep

@dataclass(frozen=True)
class SweepRow:
    strategy: str
    gain_db: float
    per_antenna_dbm: float
    total_dbm: float
    mean_rf_w: Optional[float]  # None when replaying DC-only traces
    mean_dc_w: float
    harvester_efficiency: Optional[float]
    overall_efficiency_ppm: float
    feasibility_pct: float
    response: dict  # mcu mode -> ResponseStats


_ROW_FIELDS = ("strategy", "gain_db", "per_antenna_dbm", "total_dbm", "mean_rf_w", "mean_dc_w",
               "harvester_efficiency", "overall_efficiency_ppm", "feasibility_pct")


@dataclass(frozen=True)
class SweepReport:
    rows: tuple
    meta: dict = field(default_factory=dict)

    @property
    def mcu_modes(self) -> tuple:
        for row in self.rows:
            return tuple(m for m in MCU_MODES if m in row.response)
        modes = self.meta.get("mcu_modes", "")
        return tuple(m for m in modes.split(";") if m)

    def row(self, strategy, gain_db) -> SweepRow:
        for r in self.rows:
            if r.strategy == strategy and r.gain_db == gain_db:
                return r
        raise KeyError((strategy, gain_db))


def _strategy_seed(seed, strategy, stream):
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(STRATEGIES.index(strategy), stream))
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def build_plan(cfg: CampaignConfig, strategy: str, per_antenna_w: float) -> ExcitationPlan:
    # plan seeds do not depend on gain, so every gain sees the same phases
    seed = _strategy_seed(cfg.seed, strategy, 0)
    amp = math.sqrt(per_antenna_w)
    n = cfg.geometry.n_antennas
    if strategy == "single":
        return adaptive_single_tone_plan(n, amp, cfg.dwell_s, max(cfg.duration_s, cfg.dwell_s), seed)
    return multi_tone_plan(n, amp, cfg.tone_spacing_hz, seed)


def simulate_harvest(cfg: CampaignConfig, strategy: str, gain_db: float):
    """Synthesize and rectify the received envelope; returns (harvest, mean_rf_w)."""
    if cfg.duration_s * cfg.envelope_rate_hz < 1.0:
        raise ConfigError(f"duration {cfg.duration_s} s is shorter than one envelope sample")
    if cfg.duration_s < cfg.harvester.averaging_window:
        raise ConfigError(f"duration {cfg.duration_s} s is shorter than one averaging window")
    per_w = dbm_to_watt(gain_to_power(cfg.calibration, gain_db))
    plan = build_plan(cfg, strategy, per_w)
    channel = cfg.channel()
    model = cfg.harvester.model(strategy)
    rf_sum = 0.0
    rf_n = 0
    parts = []
    for env in iter_envelope_chunks(plan, channel, cfg.duration_s, cfg.envelope_rate_hz, cfg.chunk_s):
        rf_sum += float(env.samples.sum())
        rf_n += env.samples.size
        parts.append(harvest_envelope(model, env))
    return concat_traces(parts), rf_sum / rf_n


def _response(cfg, strategy, harvest):
    starts = draw_start_indices(len(harvest), cfg.n_trials, _strategy_seed(cfg.seed, strategy, 1))
    return {m: monte_carlo_response(harvest, cfg.device_for(m), starts=starts) for m in cfg.mcu_modes}


def _totals(cfg, gain_db):
    per_dbm = gain_to_power(cfg.calibration, gain_db)
    total_dbm = combine_equal_sources(per_dbm, cfg.geometry.n_antennas)
    return per_dbm, total_dbm


def overall_ppm(mean_dc_w: float, total_dbm: float) -> float:
    return mean_dc_w / dbm_to_watt(total_dbm) * 1e6


def run_point(cfg: CampaignConfig, strategy: str, gain_db: float, keep_harvest=False):
    """One (strategy, gain) point. Returns the row, plus the harvest trace if asked."""
    per_dbm, total_dbm = _totals(cfg, gain_db)
    harvest, mean_rf = simulate_harvest(cfg, strategy, gain_db)
    mean_dc = float(np.mean(harvest.p_eh))
    row = SweepRow(
        strategy=strategy,
        gain_db=float(gain_db),
        per_antenna_dbm=per_dbm,
        total_dbm=total_dbm,
        mean_rf_w=mean_rf,
        mean_dc_w=mean_dc,
        harvester_efficiency=mean_dc / mean_rf if mean_rf > 0 else 0.0,
        overall_efficiency_ppm=overall_ppm(mean_dc, total_dbm),
        feasibility_pct=100.0 * float(np.mean(harvest.v_eh > cfg.device.v_mcu_th)),
        response=_response(cfg, strategy, harvest),
    )
    return (row, harvest) if keep_harvest else row


def replay_point(cfg: CampaignConfig, trace: EpTrace, strategy=None, gain_db=None) -> SweepRow:
    """Row for a measured trace; strategy and gain default to the trace metadata."""
    strategy = strategy or trace.meta.get("strategy")
    gain_db = gain_db if gain_db is not None else trace.meta.get("gain_db")
    if strategy not in STRATEGIES or gain_db is None:
        raise DataError("trace metadata must name a strategy and gain_db")
    per_dbm, total_dbm = _totals(cfg, float(gain_db))
    mean_dc = float(np.mean(trace.p_dc))
    return SweepRow(
        strategy=strategy,
        gain_db=float(gain_db),
        per_antenna_dbm=per_dbm,
        total_dbm=total_dbm,
        mean_rf_w=None,
        mean_dc_w=mean_dc,
        harvester_efficiency=None,
        overall_efficiency_ppm=overall_ppm(mean_dc, total_dbm),
        feasibility_pct=100.0 * float(np.mean(trace.v_dc > cfg.device.v_mcu_th)),
        response=_response(cfg, strategy, trace.as_harvest()),
    )


def _job(args):
    cfg, strategy, gain = args
    return run_point(cfg, strategy, gain)


def run_sweep(cfg: CampaignConfig) -> SweepReport:
    """Every (strategy, gain) point of ``cfg``, or every trace in replay mode."""
    if cfg.replay_mode:
        rows = [replay_point(cfg, parse_ep_trace(Path(p))) for p in cfg.traces]
        rows.sort(key=lambda r: (STRATEGIES.index(r.strategy), r.gain_db))
        return SweepReport(tuple(rows), cfg.meta())
    jobs = [(cfg, s, g) for s in cfg.strategies for g in cfg.gains_db]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(_job, jobs))
    else:
        rows = [_job(j) for j in jobs]
    return SweepReport(tuple(rows), cfg.meta())


# ------------------------------------------------------------------ reports

def _num(x) -> str:
    return "-" if x is None else repr(float(x))


def _unnum(s: str):
    return None if s == "-" else float(s)


def _times_cell(stats: ResponseStats) -> str:
    return ";".join((">" if c else "") + repr(t) for t, c in zip(stats.response_times, stats.censored))


def _parse_times_cell(cell: str) -> ResponseStats:
    times, censored = [], []
    for tok in filter(None, cell.split(";")):
        censored.append(tok.startswith(">"))
        times.append(float(tok.lstrip(">")))
    return ResponseStats.from_times(times, censored)


def _csv_columns(modes):
    cols = list(_ROW_FIELDS)
    for m in modes:
        cols += [f"{m}_p50_s", f"{m}_p95_s", f"{m}_p98_s", f"{m}_uncensored", f"{m}_trials",
                 f"{m}_times_s"]
    return cols


def _emit_csv(report: SweepReport) -> str:
    buf = io.StringIO()
    for key in sorted(report.meta):
        buf.write(f"# {key}={report.meta[key]}\n")
    modes = report.mcu_modes
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_csv_columns(modes))
    for r in report.rows:
        cells = [r.strategy] + [_num(getattr(r, f)) for f in _ROW_FIELDS[1:]]
        for m in modes:
            st = r.response[m]
            cells += [_num(st.p50), _num(st.p95), _num(st.p98), str(st.n_uncensored),
                      str(st.n_trials), _times_cell(st)]
        writer.writerow(cells)
    return buf.getvalue()


def _parse_csv(text: str) -> SweepReport:
    meta = {}
    lines = []
    for line in text.splitlines():
        if line.startswith("# "):
            key, _, val = line[2:].partition("=")
            meta[key] = val
        elif line:
            lines.append(line)
    reader = csv.reader(lines)
    try:
        header = next(reader)
    except StopIteration:
        raise DataError("report CSV has no header") from None
    if tuple(header[:len(_ROW_FIELDS)]) != _ROW_FIELDS:
        raise DataError("report CSV header does not match")
    modes = [h[:-len("_p50_s")] for h in header if h.endswith("_p50_s")]
    rows = []
    for cells in reader:
        rec = dict(zip(header, cells))
        vals = {f: _unnum(rec[f]) for f in _ROW_FIELDS[1:]}
        response = {m: _parse_times_cell(rec[f"{m}_times_s"]) for m in modes}
        rows.append(SweepRow(strategy=rec["strategy"], response=response, **vals))
    return SweepReport(tuple(rows), meta)


def _stats_dict(st: ResponseStats) -> dict:
    return {"p50_s": st.p50, "p95_s": st.p95, "p98_s": st.p98, "n_trials": st.n_trials,
            "n_uncensored": st.n_uncensored, "response_times_s": list(st.response_times),
            "censored": list(st.censored)}


def _emit_json(report: SweepReport) -> str:
    rows = []
    for r in report.rows:
        d = {f: getattr(r, f) for f in _ROW_FIELDS}
        d["response"] = {m: _stats_dict(st) for m, st in r.response.items()}
        rows.append(d)
    return json.dumps({"meta": report.meta, "rows": rows}, indent=2, sort_keys=True) + "\n"


def _parse_json(text: str) -> SweepReport:
    try:
        data = json.loads(text)
        rows = []
        for d in data["rows"]:
            response = {m: ResponseStats.from_times(s["response_times_s"], s["censored"])
                        for m, s in d["response"].items()}
            rows.append(SweepRow(response=response, **{f: d[f] for f in _ROW_FIELDS}))
        return SweepReport(tuple(rows), dict(data.get("meta", {})))
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise DataError(f"malformed report JSON: {exc}") from None


def _fmt(x, width, prec=1):
    return f"{'-':>{width}}" if x is None else f"{x:>{width}.{prec}f}"


def _emit_table(report: SweepReport) -> str:
    strategies = [s for s in STRATEGIES if any(r.strategy == s for r in report.rows)]
    gains = sorted({r.gain_db for r in report.rows})
    index = {(r.strategy, r.gain_db): r for r in report.rows}
    out = io.StringIO()

    out.write("Overall efficiency and feasibility of the target voltage\n")
    head = f"{'gain':>6} {'power':>7} {'total':>7}"
    units = f"{'[dB]':>6} {'[dBm]':>7} {'[dBm]':>7}"
    for s in strategies:
        head += f" | {s + '-tone':>10} {'VB>Vth':>7}"
        units += f" | {'[ppm]':>10} {'[%]':>7}"
    out.write(head + "\n" + units + "\n" + "-" * len(head) + "\n")
    for g in gains:
        ref = next(index[(s, g)] for s in strategies if (s, g) in index)
        line = f"{g:>6g} {ref.per_antenna_dbm:>7.2f} {ref.total_dbm:>7.2f}"
        for s in strategies:
            r = index.get((s, g))
            line += (f" | {r.overall_efficiency_ppm:>10.2f} {r.feasibility_pct:>7.2f}" if r
                     else f" | {'':>10} {'':>7}")
        out.write(line + "\n")

    modes = report.mcu_modes
    out.write("\nResponse time percentiles [s] (- : beyond the simulated/measured time)\n")
    head = f"{'total':>7}"
    sub = f"{'[dBm]':>7}"
    for s in strategies:
        for m in modes:
            label = f"{s}/{m}"
            head += f" | {label:^23}"
            sub += f" | {'P50':>7} {'P95':>7} {'P98':>7}"
    out.write(head + "\n" + sub + "\n" + "-" * len(sub) + "\n")
    for g in gains:
        ref = next(index[(s, g)] for s in strategies if (s, g) in index)
        line = f"{ref.total_dbm:>7.2f}"
        for s in strategies:
            r = index.get((s, g))
            for m in modes:
                st = r.response.get(m) if r else None
                if st is None:
                    line += f" | {'':>7} {'':>7} {'':>7}"
                else:
                    line += f" | {_fmt(st.p50, 7)} {_fmt(st.p95, 7)} {_fmt(st.p98, 7)}"
        out.write(line + "\n")
    if report.meta:
        out.write("\n")
        for key in sorted(report.meta):
            out.write(f"{key}: {report.meta[key]}\n")
    return out.getvalue()


_EMITTERS = {"csv": _emit_csv, "json": _emit_json, "table": _emit_table, "table-text": _emit_table}


def emit_report(report: SweepReport, fmt: str) -> bytes:
    """Serialise ``report`` as ``csv``, ``json`` or ``table`` (UTF-8 bytes)."""
    try:
        emitter = _EMITTERS[fmt]
    except KeyError:
        raise ConfigError(f"unknown report format {fmt!r}; use csv, json or table") from None
    return emitter(report).encode("utf-8")


def parse_report(data, fmt: str) -> SweepReport:
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    if fmt == "csv":
        return _parse_csv(text)
    if fmt == "json":
        return _parse_json(text)
    raise ConfigError(f"cannot parse report format {fmt!r}")


def cdf_table(stats: ResponseStats, censor_limit: float) -> str:
    lines = ["t_s,cdf"] + [f"{t!r},{f!r}" for t, f in cdf_points(stats.response_times, censor_limit,
                                                                  stats.censored)]
    return "\n".join(lines) + "\n"
