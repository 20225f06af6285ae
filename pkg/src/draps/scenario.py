"""Scenario configuration: JSON loading, validation and arrival expansion.

Scenario JSON layout::

    {
      "name": "hetero-100",
      "scheduler": "spread",            # spread | binpack | random | draps
      "seed": 0,
      "tick_seconds": 1,
      "heartbeat_period_ticks": 5,
      "max_ticks": 700,
      "threshold": 0.10,                # remaining fraction that triggers an alert
      "alert_cooldown_periods": 3,
      "warmup_samples": 12,
      "window_samples": 6,
      "shuffle_arrivals": false,        # permute which service fills each arrival slot
      "filters": {"ready": true, "resource": true, "plugin": true, "constraint": true},
      "workers": [{"id": "w1", "capacity": {"memory": "4GiB", "cpu": 1,
                   "network": 62.5e6, "block_io": 100e6},
                   "labels": [], "plugins": [], "ready": true}],
      "traces": {"tomcat": {"path": "../traces/tomcat.csv", "container": "tomcat-0"},
                 "flat": {"sample_interval": 1, "samples": [[1e8, 0.1, 0, 0]]}},
      "services": [{"id": "tomcat", "trace_id": "tomcat", "mode": "replicated",
                    "reservation": null, "constraints": [], "required_plugins": []}],
      "arrivals": [{"tick": 0, "service": "tomcat", "count": 1}],
      "arrival_sequence": {"start": 0, "interval": 5, "blocks": [["tomcat", 10]]}
    }

Trace paths are relative to the scenario file. ``arrivals`` and
``arrival_sequence`` may be combined; the sequence places one container per
slot.
"""

from __future__ import annotations

import dataclasses
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .core import ResourceVector, ServiceMode, ServiceSpec, WorkerNode
from .demand import DemandTrace, TraceFormatError, read_trace_csv
from .schedulers import FilterSet, SchedulerKind


class ConfigError(ValueError):
    pass


_UNITS = {
    "": 1, "b": 1,
    "kb": 1e3, "mb": 1e6, "gb": 1e9,
    "kib": 1024, "mib": 1024 ** 2, "gib": 1024 ** 3,
}


def parse_quantity(value) -> float:
    """Number, or a string such as ``"4GiB"`` / ``"512MiB"``."""
    if isinstance(value, bool):
        raise ConfigError(f"bad quantity {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    m = re.fullmatch(r"\s*([0-9.eE+-]+)\s*([A-Za-z]*)\s*", str(value))
    if not m or m.group(2).lower() not in _UNITS:
        raise ConfigError(f"bad quantity {value!r}")
    try:
        return float(m.group(1)) * _UNITS[m.group(2).lower()]
    except ValueError:
        raise ConfigError(f"bad quantity {value!r}") from None


def parse_vector(obj) -> ResourceVector:
    if isinstance(obj, (list, tuple)):
        if len(obj) != 4:
            raise ConfigError(f"resource vector needs 4 components, got {obj!r}")
        return ResourceVector(*(parse_quantity(x) for x in obj))
    if not isinstance(obj, dict):
        raise ConfigError(f"bad resource vector {obj!r}")
    unknown = set(obj) - {"memory", "cpu", "network", "block_io"}
    if unknown:
        raise ConfigError(f"unknown resource fields {sorted(unknown)}")
    try:
        return ResourceVector(**{k: parse_quantity(v) for k, v in obj.items()})
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


@dataclass(frozen=True)
class WorkerConfig:
    id: str
    capacity: ResourceVector
    labels: frozenset = frozenset()
    plugins: frozenset = frozenset()
    ready: bool = True

    def build(self) -> WorkerNode:
        return WorkerNode(self.id, self.capacity, ready=self.ready,
                          labels=self.labels, plugins=self.plugins)


@dataclass(frozen=True)
class Arrival:
    tick: int
    service: str
    count: int = 1


@dataclass
class ScenarioConfig:
    workers: list[WorkerConfig]
    services: list[ServiceSpec]
    traces: dict[str, DemandTrace]
    arrivals: list[Arrival]
    scheduler: SchedulerKind = SchedulerKind.SPREAD
    seed: int = 0
    tick_seconds: float = 1.0
    heartbeat_period_ticks: int = 5
    threshold: float = 0.10
    alert_cooldown_periods: int = 3
    warmup_samples: int = 12
    window_samples: int = 6
    max_ticks: int = 600
    filters: FilterSet = field(default_factory=FilterSet)
    shuffle_arrivals: bool = False
    name: str = "scenario"

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def validate(self) -> None:
        if not self.workers:
            raise ConfigError("scenario needs at least one worker")
        ids = [w.id for w in self.workers]
        if len(set(ids)) != len(ids):
            raise ConfigError("worker ids must be unique")
        for w in self.workers:
            if np.any(w.capacity.as_array() <= 0):
                raise ConfigError(f"worker {w.id}: capacity components must be > 0")
        sids = [s.id for s in self.services]
        if len(set(sids)) != len(sids):
            raise ConfigError("service ids must be unique")
        for s in self.services:
            if s.trace_id not in self.traces:
                raise ConfigError(f"service {s.id}: unknown trace_id {s.trace_id!r}")
        if self.max_ticks < 1:
            raise ConfigError("max_ticks must be >= 1")
        for a in self.arrivals:
            if a.service not in sids:
                raise ConfigError(f"arrival references unknown service {a.service!r}")
            if not 0 <= a.tick < self.max_ticks:
                raise ConfigError(f"arrival tick {a.tick} outside [0, max_ticks)")
            if a.count < 1:
                raise ConfigError("arrival count must be >= 1")
        if not self.tick_seconds > 0:
            raise ConfigError("tick_seconds must be > 0")
        if self.heartbeat_period_ticks < 1:
            raise ConfigError("heartbeat_period_ticks must be >= 1")
        if not 0 < self.threshold < 1:
            raise ConfigError("threshold must lie strictly between 0 and 1")
        if self.alert_cooldown_periods < 0:
            raise ConfigError("alert_cooldown_periods must be >= 0")
        if self.warmup_samples < 1 or self.window_samples < 1:
            raise ConfigError("warmup_samples and window_samples must be >= 1")

    def expanded_arrivals(self, rng: Optional[np.random.Generator] = None) -> list[tuple[int, str]]:
        """One (tick, service) entry per container, in placement order."""
        slots = []
        for a in sorted(self.arrivals, key=lambda a: a.tick):  # stable: schedule order within a tick
            slots.extend([(a.tick, a.service)] * a.count)
        if self.shuffle_arrivals and slots:
            if rng is None:
                raise ValueError("shuffling arrivals needs a generator")
            order = rng.permutation(len(slots))
            services = [slots[i][1] for i in order]
            slots = [(tick, svc) for (tick, _), svc in zip(slots, services)]
        return slots


def scenario_from_dict(data: dict, base_dir: Path = Path(".")) -> ScenarioConfig:
    try:
        return _from_dict(data, Path(base_dir))
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid scenario: {exc!r}") from None


def _from_dict(data: dict, base_dir: Path) -> ScenarioConfig:
    workers = [
        WorkerConfig(
            id=str(w["id"]),
            capacity=parse_vector(w["capacity"]),
            labels=frozenset(w.get("labels", ())),
            plugins=frozenset(w.get("plugins", ())),
            ready=bool(w.get("ready", True)),
        )
        for w in data["workers"]
    ]
    traces = {}
    csv_cache: dict[Path, dict] = {}
    for tid, t in data.get("traces", {}).items():
        if "samples" in t:
            traces[tid] = DemandTrace(tid, float(t.get("sample_interval", 1.0)),
                                      np.array([parse_vector(s).as_array() for s in t["samples"]]))
            continue
        path = (base_dir / t["path"]).resolve()
        if path not in csv_cache:
            try:
                csv_cache[path] = read_trace_csv(path)
            except OSError as exc:
                raise ConfigError(f"trace {tid}: cannot read {path}: {exc.strerror}") from None
            except TraceFormatError as exc:
                raise ConfigError(f"trace {tid}: {path.name} {exc}") from None
        records = csv_cache[path]
        container = t.get("container")
        if container is None:
            if len(records) != 1:
                raise ConfigError(f"trace {tid}: {path.name} has several containers, name one")
            container = next(iter(records))
        if container not in records:
            raise ConfigError(f"trace {tid}: container {container!r} not in {path.name}")
        tr = records[container].trace
        traces[tid] = DemandTrace(tid, tr.sample_interval, tr.samples)

    services = []
    for s in data.get("services", []):
        res = s.get("reservation")
        services.append(ServiceSpec(
            id=str(s["id"]),
            trace_id=str(s.get("trace_id", s["id"])),
            mode=ServiceMode(s.get("mode", "replicated")),
            reservation=parse_vector(res) if res is not None else None,
            constraints=frozenset(s.get("constraints", ())),
            required_plugins=frozenset(s.get("required_plugins", ())),
        ))

    arrivals = [Arrival(int(a["tick"]), str(a["service"]), int(a.get("count", 1)))
                for a in data.get("arrivals", [])]
    seq = data.get("arrival_sequence")
    if seq:
        tick, step = int(seq.get("start", 0)), int(seq.get("interval", 1))
        for svc, count in seq["blocks"]:
            for _ in range(int(count)):
                arrivals.append(Arrival(tick, str(svc), 1))
                tick += step

    filters = FilterSet(**data.get("filters", {}))
    known = {f.name for f in dataclasses.fields(ScenarioConfig)}
    extra = set(data) - known - {"arrival_sequence"}
    if extra:
        raise ConfigError(f"unknown scenario fields {sorted(extra)}")
    simple = {k: data[k] for k in (
        "seed", "tick_seconds", "heartbeat_period_ticks", "threshold", "alert_cooldown_periods",
        "warmup_samples", "window_samples", "max_ticks", "shuffle_arrivals", "name",
    ) if k in data}
    cfg = ScenarioConfig(
        workers=workers, services=services, traces=traces, arrivals=arrivals,
        scheduler=SchedulerKind.parse(data.get("scheduler", "spread")),
        filters=filters, **simple,
    )
    cfg.validate()
    return cfg


def load_scenario(path) -> ScenarioConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"scenario {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("scenario JSON must be an object")
    return scenario_from_dict(data, path.parent)


def data_path(*parts) -> Path:
    """Path to a file shipped in the package's data directory."""
    from importlib.resources import files

    return Path(str(files("draps") / "data" / Path(*parts)))


def builtin_scenario(name: str, **overrides) -> ScenarioConfig:
    """Load a bundled scenario (``hetero_100``, ``hetero_140``, ``loaded_mix``)."""
    cfg = load_scenario(data_path("scenarios", f"{name}.json"))
    if overrides:
        if "scheduler" in overrides and isinstance(overrides["scheduler"], str):
            overrides["scheduler"] = SchedulerKind.parse(overrides["scheduler"])
        cfg = cfg.replace(**overrides)
        cfg.validate()
    return cfg
