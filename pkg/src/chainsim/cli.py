"""Command line entry point: ``chainsim run|sweep|validate|metrics``."""
from __future__ import annotations

import argparse
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Any, Sequence

import yaml

from chainsim import kernels
from chainsim.config import ConfigError, SimConfig, apply_overrides, config_from_dict, load_config
from chainsim.engine import EventLog
from chainsim.metrics import MetricsReport, csv_text
from chainsim.simulation import build_world, report_for, run

log = logging.getLogger("chainsim")


def _write_outputs(out_dir: Path, report: MetricsReport, events: EventLog | None) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "metrics.json").write_text(report.to_json())
    (out_dir / "summary.csv").write_text(csv_text([report.csv_row()]))
    if events is not None:
        events.write(out_dir / "events.jsonl")


def _summary_line(report: MetricsReport) -> str:
    return (
        f"blocks={report.blocks_total} main={report.blocks_main} "
        f"interval={report.avg_block_interval_minutes:.3f}min stale={report.stale_rate_percent:.2f}% "
        f"d50={report.d50_seconds:.2f}s d90={report.d90_seconds:.2f}s tps={report.tps:.3f}"
    )


def run_command(
    config_path: str | Path,
    overrides: Sequence[str] = (),
    out: str | Path | None = None,
    eventlog: bool | None = None,
) -> int:
    """Run one simulation and write its outputs. Returns a process exit status."""
    try:
        cfg = load_config(config_path, overrides)
    except ConfigError as exc:
        log.error("invalid configuration: %s", exc)
        return 2
    out_dir = Path(out) if out is not None else cfg.output_dir
    write_events = cfg.write_eventlog if eventlog is None else eventlog
    t0 = time.perf_counter()
    report, events = run(cfg)
    elapsed = time.perf_counter() - t0
    _write_outputs(out_dir, report, events if write_events else None)
    for w in report.warnings:
        log.warning(w)
    print(f"{_summary_line(report)} ({elapsed:.1f}s, kernels={kernels.BACKEND}) -> {out_dir}")
    return 0


def sweep_values(spec: str) -> list[Any]:
    """``start:stop:step`` (stop inclusive) or a comma-separated list."""
    if ":" in spec:
        try:
            start, stop, step = (Decimal(x) for x in spec.split(":"))
        except (ValueError, InvalidOperation):
            raise ConfigError(spec, "sweep range must be start:stop:step") from None
        if step <= 0 or stop < start:
            raise ConfigError(spec, "sweep range needs step > 0 and stop >= start")
        count = int((stop - start) // step) + 1
        values = [start + i * step for i in range(count)]
        as_int = all(v == v.to_integral_value() for v in (start, step))
        return [int(v) if as_int else float(v) for v in values]
    return [yaml.safe_load(v) for v in spec.split(",")]


def _sweep_point(args: tuple[dict, str, list, int, Any, Path, bool]) -> dict:
    raw, base_dir, overrides, index, value, out_dir, write_events = args
    cfg = config_from_dict(raw, base_dir)
    report, events = run(cfg)
    _write_outputs(out_dir / f"run{index:03d}", report, events if write_events else None)
    return report.csv_row()


def sweep_command(
    config_path: str | Path,
    param: str,
    overrides: Sequence[str] = (),
    out: str | Path | None = None,
    eventlog: bool | None = None,
    jobs: int = 1,
) -> int:
    """Run one independent simulation per parameter value; seeds are master_seed + index."""
    config_path = Path(config_path)
    try:
        if "=" not in param:
            raise ConfigError(param, "sweep parameter must look like key=start:stop:step")
        key, _, spec = param.partition("=")
        values = sweep_values(spec)
        raw = yaml.safe_load(config_path.read_text()) or {}
        raw = apply_overrides(raw, overrides)
        base = load_config(config_path, overrides)
        points = []
        for i, value in enumerate(values):
            point_raw = apply_overrides(raw, [(key, value), ("master_seed", base.master_seed + i)])
            config_from_dict(point_raw, config_path.parent)  # fail fast before any run
            points.append((i, value, point_raw))
    except ConfigError as exc:
        log.error("invalid configuration: %s", exc)
        return 2
    out_dir = Path(out) if out is not None else base.output_dir
    write_events = base.write_eventlog if eventlog is None else eventlog
    tasks = [(r, str(config_path.parent), list(overrides), i, v, out_dir, write_events) for i, v, r in points]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_point, tasks))
    else:
        rows = [_sweep_point(t) for t in tasks]
    for (i, value, _), row in zip(points, rows):
        row.update({"index": i, "param": key, "value": value, "master_seed": base.master_seed + i})
        print(f"[{i}] {key}={value}: blocks={row['blocks_total']} stale={row['stale_rate_percent']:.2f}%")
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "summary.csv").write_text(csv_text(rows, extra_fields=("index", "param", "value", "master_seed")))
    print(f"{len(rows)} runs -> {out_dir / 'summary.csv'}")
    return 0


def validate_command(config_path: str | Path, overrides: Sequence[str] = ()) -> int:
    try:
        cfg = load_config(config_path, overrides)
    except ConfigError as exc:
        print(f"invalid: {exc}")
        return 2
    world = build_world(cfg)
    conn = world.connectivity
    print(
        f"valid: {cfg.node_count} nodes, {len(world.edges)} edges, "
        f"{'connected' if conn.connected else f'DISCONNECTED ({conn.components} components)'}, "
        f"{cfg.total_steps} steps x {cfg.seconds_per_step}s, block interval {cfg.block_interval_steps} steps"
    )
    return 0


def metrics_command(
    eventlog_path: str | Path,
    config_path: str | Path,
    overrides: Sequence[str] = (),
    out: str | Path | None = None,
) -> int:
    """Recompute the metrics report from a saved event log."""
    try:
        cfg = load_config(config_path, overrides)
    except ConfigError as exc:
        log.error("invalid configuration: %s", exc)
        return 2
    events = EventLog.read(eventlog_path)
    world = build_world(cfg)
    report = report_for(events, cfg, world.connectivity)
    if out is None:
        sys.stdout.write(report.to_json())
    else:
        _write_outputs(Path(out), report, None)
        print(f"{_summary_line(report)} -> {out}")
    return 0


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="chainsim", description="Discrete-step blockchain network simulator")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, outputs=True):
        p.add_argument("config", help="YAML run configuration")
        p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                       help="set a config value (dotted key), applied before validation")
        if outputs:
            p.add_argument("--out", help="output directory (default: output.dir from the config)")
            p.add_argument("--no-eventlog", dest="eventlog", action="store_const", const=False, default=None,
                           help="do not write the event log")

    common(sub.add_parser("run", help="run one simulation"))
    p = sub.add_parser("sweep", help="run a parameter sweep")
    common(p)
    p.add_argument("--param", required=True, metavar="KEY=START:STOP:STEP",
                   help="parameter to sweep; range is stop-inclusive, or give a comma list")
    p.add_argument("--jobs", type=int, default=1)
    common(sub.add_parser("validate", help="check a configuration"), outputs=False)
    p = sub.add_parser("metrics", help="recompute metrics from a saved event log")
    p.add_argument("eventlog")
    p.add_argument("--config", required=True)
    p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    p.add_argument("--out")
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(levelname)s %(message)s")
    try:
        if args.command == "run":
            return run_command(args.config, args.override, args.out, args.eventlog)
        if args.command == "sweep":
            return sweep_command(args.config, args.param, args.override, args.out, args.eventlog, args.jobs)
        if args.command == "validate":
            return validate_command(args.config, args.override)
        if args.command == "metrics":
            return metrics_command(args.eventlog, args.config, args.override, args.out)
    except (OSError, ValueError) as exc:
        log.error("%s", exc)
        return 1
    return 1


if __name__ == "__main__":
    sys.exit(main())
