"""Command-line entry point: ``wptsim <subcommand> ...``.

Exit codes: 0 success, 2 configuration/validation error, 3 data error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .campaign import (STRATEGIES, CampaignConfig, SweepReport, cdf_table, emit_report,
                       load_config, parse_report, replay_point, run_point, run_sweep)
from .end_device import simulate_device, size_buffer
from .errors import ConfigError, DataError
from .excitation import synthesize_envelope
from .trace_replay import EpTrace, parse_ep_trace

log = logging.getLogger("wptsim")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3


def _write(path: Path, data):
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(data, str):
        data = data.encode("utf-8")
    path.write_bytes(data)


def _config(args) -> CampaignConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else CampaignConfig()
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, seed=args.seed)
    if getattr(args, "trials", None) is not None:
        cfg = replace(cfg, n_trials=args.trials)
    return cfg


def cmd_size_buffer(args):
    c = size_buffer(args.e_mcu, args.v_th, args.v_bod)
    print(f"{c:.6e} F ({c * 1e6:.2f} uF)")


def cmd_simulate(args):
    cfg = _config(args)
    strategy = args.strategy or cfg.strategies[0]
    gain = args.gain if args.gain is not None else cfg.gains_db[0]
    row, harvest = run_point(cfg, strategy, gain, keep_harvest=True)
    report = SweepReport((row,), cfg.meta())
    sys.stdout.write(emit_report(report, "table").decode())
    if args.out:
        out = Path(args.out)
        tag = f"{strategy}_{gain:g}dB"
        trace = EpTrace.from_harvest(harvest, strategy=strategy, gain_db=gain)
        _write(out / f"harvest_{tag}.csv", trace.to_csv())
        for mode in cfg.mcu_modes:
            traj, _ = simulate_device(harvest, cfg.device_for(mode))
            _write(out / f"trajectory_{tag}_{mode}.csv", traj.to_csv())
            _write(out / f"cdf_{tag}_{mode}.csv", cdf_table(row.response[mode], cfg.duration_s))
        if args.envelope_seconds > 0:
            from .campaign import build_plan
            from .quantities import dbm_to_watt, gain_to_power
            plan = build_plan(cfg, strategy, dbm_to_watt(gain_to_power(cfg.calibration, gain)))
            env = synthesize_envelope(plan, cfg.channel(), min(args.envelope_seconds, cfg.duration_s),
                                      cfg.envelope_rate_hz)
            _write(out / f"envelope_{tag}.csv", env.to_csv())
        _write(out / "report.json", emit_report(report, "json"))
        log.info("wrote outputs to %s", out)


def cmd_replay(args):
    cfg = _config(args)
    trace = parse_ep_trace(Path(args.trace))
    row = replay_point(cfg, trace, args.strategy, args.gain)
    report = SweepReport((row,), {**cfg.meta(), "mode": "replay", "trace": Path(args.trace).name})
    sys.stdout.write(emit_report(report, args.format).decode())


def cmd_sweep(args):
    cfg = _config(args)
    report = run_sweep(cfg)
    out = Path(args.out)
    _write(out / "report.csv", emit_report(report, "csv"))
    _write(out / "report.json", emit_report(report, "json"))
    _write(out / "report.txt", emit_report(report, "table"))
    limit = cfg.duration_s
    for row in report.rows:
        for mode, stats in row.response.items():
            _write(out / f"cdf_{row.strategy}_{row.gain_db:g}dB_{mode}.csv",
                   cdf_table(stats, max(limit, stats.censor_limit)))
    sys.stdout.write(emit_report(report, "table").decode())


def cmd_report(args):
    src = Path(args.inp)
    if src.is_dir():
        if (src / "report.json").exists():
            src, fmt = src / "report.json", "json"
        elif (src / "report.csv").exists():
            src, fmt = src / "report.csv", "csv"
        else:
            raise DataError(f"no report.json or report.csv in {src}")
    else:
        fmt = "csv" if src.suffix == ".csv" else "json"
    if not src.exists():
        raise DataError(f"{src} does not exist")
    report = parse_report(src.read_bytes(), fmt)
    sys.stdout.write(emit_report(report, args.format).decode())


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wptsim", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("size-buffer", help="minimum buffer capacitance for a pilot energy")
    s.add_argument("--e-mcu", type=float, required=True, help="energy per pilot [J]")
    s.add_argument("--v-th", type=float, required=True, help="MCU start threshold [V]")
    s.add_argument("--v-bod", type=float, required=True, help="brown-out threshold [V]")
    s.set_defaults(func=cmd_size_buffer)

    s = sub.add_parser("simulate", help="simulate one (strategy, gain) point")
    s.add_argument("--config")
    s.add_argument("--strategy", choices=STRATEGIES)
    s.add_argument("--gain", type=float)
    s.add_argument("--seed", type=int)
    s.add_argument("--trials", type=int)
    s.add_argument("--out", help="directory for trace/trajectory/CDF exports")
    s.add_argument("--envelope-seconds", type=float, default=0.0,
                   help="also export this much of the RF envelope (needs --out)")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("replay", help="response times from a measured energy-profiler trace")
    s.add_argument("--trace", required=True)
    s.add_argument("--config")
    s.add_argument("--trials", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--strategy", choices=STRATEGIES, help="override trace metadata")
    s.add_argument("--gain", type=float, help="override trace metadata")
    s.add_argument("--format", choices=("table", "csv", "json"), default="table")
    s.set_defaults(func=cmd_replay)

    s = sub.add_parser("sweep", help="run the full gain sweep and write reports")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("report", help="re-emit a stored sweep report")
    s.add_argument("--in", dest="inp", required=True, help="sweep output directory or report file")
    s.add_argument("--format", choices=("csv", "json", "table"), default="table")
    s.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
