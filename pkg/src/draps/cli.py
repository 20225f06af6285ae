"""Command-line entry point: ``draps run|compare|dom``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional, Sequence

from .core import ResourceVector
from .demand import KnownServiceRegistry, TraceFormatError, read_trace_csv, tied_kinds
from .scenario import ConfigError, ScenarioConfig, load_scenario, parse_quantity
from .schedulers import SchedulerKind
from .sim import run

# totals of the bundled three-worker heterogeneous cluster
DEFAULT_LIMITS = "28GiB,13,437.5e6,700e6"


@dataclass(frozen=True)
class StrategyRow:
    scheduler: str
    peak_nu: float
    final_nu: float
    peak_mem_util: float
    kills: int
    worker_overloads: int
    migrations: int
    rejected: int
    heartbeat_bytes: int


@dataclass(frozen=True)
class CompareReport:
    scenario: str
    seed: int
    rows: tuple[StrategyRow, ...]
    winner: str

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        fields = list(StrategyRow.__dataclass_fields__)
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(fields)
        for r in self.rows:
            w.writerow([getattr(r, f) for f in fields])
        return buf.getvalue()


def compare_strategies(config: ScenarioConfig, schedulers: Sequence[SchedulerKind]) -> CompareReport:
    """Run the scenario once per strategy with the same seed."""
    if not schedulers:
        raise ValueError("need at least one scheduler")
    rows = []
    for kind in schedulers:
        s = run(config.replace(scheduler=kind)).summary
        rows.append(StrategyRow(
            scheduler=kind.value, peak_nu=s["peak_nu"], final_nu=s["final_nu"],
            peak_mem_util=s["peak_util_by_kind"]["Memory"], kills=s["total_kills"],
            worker_overloads=s["worker_overloads"], migrations=s["total_migrations"],
            rejected=s["rejected"], heartbeat_bytes=s["heartbeat_bytes"],
        ))
    order = {k.value: i for i, k in enumerate(SchedulerKind)}
    winner = min(rows, key=lambda r: (r.peak_nu, order[r.scheduler])).scheduler
    return CompareReport(config.name, config.seed, tuple(rows), winner)


def parse_limits(text: str) -> ResourceVector:
    parts = [p for p in text.split(",")]
    if len(parts) != 4:
        raise ValueError("--limits needs four comma-separated values: memory,cpu,network,block_io")
    return ResourceVector(*(parse_quantity(p) for p in parts))


def _fail(message: str) -> int:
    print(f"draps: error: {message}", file=sys.stderr)
    return 1


def _load(args) -> ScenarioConfig:
    cfg = load_scenario(args.scenario)
    changes = {}
    if getattr(args, "seed", None) is not None:
        changes["seed"] = args.seed
    if getattr(args, "scheduler", None):
        changes["scheduler"] = SchedulerKind.parse(args.scheduler)
    return cfg.replace(**changes) if changes else cfg


def _prepare_out(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    probe = out / ".draps-write-test"
    probe.write_text("")
    probe.unlink()
    return out


def cmd_run(args) -> int:
    try:
        cfg = _load(args)
    except (ConfigError, ValueError) as exc:
        return _fail(str(exc))
    try:
        out = _prepare_out(args.out)
    except OSError as exc:
        return _fail(f"cannot write to {args.out}: {exc.strerror or exc}")
    result = run(cfg)
    try:
        result.write(out)
    except OSError as exc:
        return _fail(f"cannot write to {args.out}: {exc.strerror or exc}")
    s = result.summary
    print(f"{cfg.name} [{s['scheduler']}, seed {s['seed']}]: peak nu {s['peak_nu']:.4f}, "
          f"final nu {s['final_nu']:.4f}, kills {s['total_kills']}, migrations {s['total_migrations']}")
    print(f"wrote metrics.csv, events.csv, summary.json to {out}")
    return 0


def cmd_compare(args) -> int:
    try:
        cfg = _load(args)
        kinds = [SchedulerKind.parse(s) for s in args.schedulers.split(",") if s.strip()]
        if not kinds:
            raise ValueError("--schedulers must name at least one strategy")
    except (ConfigError, ValueError) as exc:
        return _fail(str(exc))
    out = None
    if args.out:
        try:
            out = _prepare_out(args.out)
        except OSError as exc:
            return _fail(f"cannot write to {args.out}: {exc.strerror or exc}")
    report = compare_strategies(cfg, kinds)
    print(f"{'scheduler':<9} {'peak_nu':>8} {'final_nu':>8} {'kills':>5} {'migr':>5} {'rej':>4} {'hb_bytes':>9}")
    for r in report.rows:
        print(f"{r.scheduler:<9} {r.peak_nu:8.4f} {r.final_nu:8.4f} {r.kills:5d} "
              f"{r.migrations:5d} {r.rejected:4d} {r.heartbeat_bytes:9d}")
    print(f"winner (lowest peak nu): {report.winner}")
    if out is not None:
        (out / "compare.json").write_text(report.to_json())
        (out / "compare.csv").write_text(report.to_csv())
    return 0


def cmd_dom(args) -> int:
    try:
        records = read_trace_csv(args.trace)
    except OSError as exc:
        return _fail(f"cannot read {args.trace}: {exc.strerror or exc}")
    except TraceFormatError as exc:
        return _fail(f"{args.trace}: {exc}")
    try:
        if args.scenario:
            cfg = load_scenario(args.scenario)
            limits = ResourceVector.from_array(sum(w.capacity.as_array() for w in cfg.workers))
        else:
            limits = parse_limits(args.limits)
        if min(limits.as_tuple()) <= 0:
            raise ValueError("limits must be strictly positive")
    except (ConfigError, ValueError) as exc:
        return _fail(str(exc))

    longest = max(len(r.trace) for r in records.values())
    registry = KnownServiceRegistry(warmup_samples=1, window_samples=longest)
    for rec in records.values():
        registry.register(rec.service)
        for i, row in enumerate(rec.trace.samples):
            registry.record_usage(rec.service, rec.container, ResourceVector.from_array(row), i)

    print("service        memory_B      cpu_cores    network_Bps   block_io_Bps  dominant")
    for service in sorted({r.service for r in records.values()}):
        avg = registry.average_service_demand(service)
        kind = registry.dominant_resource(service, limits)
        print(f"{service:<12} {avg.memory:12.0f} {avg.cpu:12.4f} {avg.network:14.1f} "
              f"{avg.block_io:14.1f}  {kind.label}")
        tied = tied_kinds(avg, limits)
        if len(tied) > 1:
            names = ", ".join(k.label for k in tied)
            print(f"warning: {service}: tie between {names}; picked {kind.label} by canonical order")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="draps", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one scenario and write metrics/events/summary")
    r.add_argument("--scenario", required=True, help="scenario JSON file")
    r.add_argument("--scheduler", choices=[k.value for k in SchedulerKind],
                   help="override the scenario's strategy (default: as in the file)")
    r.add_argument("--seed", type=int, help="override the scenario seed (default: as in the file)")
    r.add_argument("--out", default="out", help="output directory (default: ./out)")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("compare", help="run the scenario under several strategies")
    c.add_argument("--scenario", required=True)
    c.add_argument("--schedulers", default="spread,draps",
                   help="comma-separated strategies (default: spread,draps)")
    c.add_argument("--seed", type=int)
    c.add_argument("--out", help="write compare.json and compare.csv here")
    c.set_defaults(func=cmd_compare)

    d = sub.add_parser("dom", help="average demand and dominant resource per service in a trace")
    d.add_argument("--trace", required=True, help="docker-stats style trace CSV")
    d.add_argument("--limits", default=DEFAULT_LIMITS,
                   help=f"cluster totals memory,cpu,network,block_io (default: {DEFAULT_LIMITS})")
    d.add_argument("--scenario", help="take limits from this scenario's workers instead")
    d.set_defaults(func=cmd_dom)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
