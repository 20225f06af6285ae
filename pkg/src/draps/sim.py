"""Deterministic tick-based cluster simulator.

Each tick runs these phases in order:

1. replay one demand sample for every running container;
2. kill every container on a worker whose memory demand exceeds capacity;
3. (DRAPS) workers self-examine and queue alerts;
4. on heartbeat ticks, workers report and the manager refreshes its view;
5. (DRAPS) the manager turns alerts into migrations;
6. arrivals due this tick are placed with the configured strategy;
7. utilization is recorded.

CPU, network and block I/O demand beyond capacity is throttled
proportionally instead of failing. Heartbeat sizes follow a fixed schedule
of 64 bytes per message plus 32 bytes per reported container; the baseline
heartbeat reports worker state only.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional

import numpy as np

from .core import (
    KINDS,
    Cluster,
    ContainerInstance,
    ContainerState,
    ResourceVector,
    ServiceMode,
    WorkerNode,
)
from .demand import KnownServiceRegistry
from .events import EventLog
from .metrics import METRICS_HEADER, UtilizationRecord
from .migration import AlertMsg, execute_migration, handle_alert, self_examine
from .scenario import ScenarioConfig
from .schedulers import SchedulerKind, apply_filters, place

HEARTBEAT_HEADER_BYTES = 64
HEARTBEAT_CONTAINER_BYTES = 32

_MEM = 0


@dataclass(frozen=True)
class HeartbeatMsg:
    worker: str
    tick: int
    containers: Mapping[str, ResourceVector]
    available: ResourceVector
    payload_size: int


def heartbeat_size(n_containers: int, enhanced: bool) -> int:
    if not enhanced:
        return HEARTBEAT_HEADER_BYTES
    return HEARTBEAT_HEADER_BYTES + HEARTBEAT_CONTAINER_BYTES * n_containers


def _as_array(v) -> np.ndarray:
    return v.as_array() if isinstance(v, ResourceVector) else np.asarray(v, dtype=float)


def overload_check(worker: WorkerNode, demands: Mapping[str, object]) -> Optional[list[str]]:
    """Containers to kill when memory demand strictly exceeds capacity, else None."""
    total = sum(float(_as_array(d)[_MEM]) for d in demands.values())
    if total > worker.capacity.memory:
        return sorted(demands)
    return None


@dataclass
class SimulationResult:
    config: ScenarioConfig
    records: list[UtilizationRecord]
    events: EventLog
    summary: dict
    heartbeats: list[HeartbeatMsg] = field(default_factory=list, repr=False)
    cluster: Optional[Cluster] = field(default=None, repr=False)

    def metrics_csv(self) -> str:
        lines = [",".join(METRICS_HEADER)]
        lines += [",".join(r.csv_row(self.config.tick_seconds)) for r in self.records]
        return "\n".join(lines) + "\n"

    def events_csv(self) -> str:
        return self.events.to_csv(self.config.tick_seconds)

    def summary_json(self) -> str:
        return json.dumps(self.summary, indent=2, sort_keys=True) + "\n"

    def write(self, out_dir) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        files = {
            "metrics.csv": self.metrics_csv(),
            "events.csv": self.events_csv(),
            "summary.json": self.summary_json(),
        }
        paths = []
        for name, text in files.items():
            p = out / name
            p.write_text(text)
            paths.append(p)
        return paths

    def worker_series(self, worker: str, column: str = "n_containers") -> list:
        idx = {"mem_util": 0, "cpu_util": 1, "net_util": 2, "blk_util": 3}
        out = []
        for r in self.records:
            if r.worker != worker:
                continue
            if column == "n_containers":
                out.append(r.n_containers)
            elif column == "worker_max":
                out.append(r.worker_max)
            else:
                out.append(r.ratios[idx[column]])
        return out


class Simulation:
    def __init__(self, config: ScenarioConfig, record_heartbeats: bool = False):
        config.validate()
        self.config = config
        self.draps = config.scheduler is SchedulerKind.DRAPS
        self.cluster = Cluster([w.build() for w in config.workers], config.services)
        self.worker_ids = sorted(self.cluster.workers)
        self.capacity = {wid: w.capacity.as_array() for wid, w in self.cluster.workers.items()}
        self.traces = {s.id: config.traces[s.trace_id] for s in config.services}

        seq = np.random.SeedSequence(config.seed)
        arrival_seed, placement_seed = seq.spawn(2)
        self.rng = np.random.default_rng(placement_seed)
        self.arrivals: dict[int, list[str]] = {}
        for tick, svc in config.expanded_arrivals(np.random.default_rng(arrival_seed)):
            self.arrivals.setdefault(tick, []).append(svc)

        self.registry = KnownServiceRegistry(config.warmup_samples, config.window_samples)
        for s in config.services:
            self.registry.register(s.id)
        self.log = EventLog()
        self.record_heartbeats = record_heartbeats
        self.heartbeats: list[HeartbeatMsg] = []

        # manager view, refreshed from heartbeats
        self.available = {wid: cap.copy() for wid, cap in self.capacity.items()}
        self.estimate: dict[str, np.ndarray] = {}
        self.last_alert: dict[str, int] = {}

        # worker-side per-container accumulators since the last heartbeat
        self.acc_sum: dict[str, np.ndarray] = {}
        self.acc_cnt: dict[str, int] = {}
        # per-tick scratch
        self.usage_now: dict[str, np.ndarray] = {}
        self.tick_load: dict[str, np.ndarray] = {}

        self.records: list[UtilizationRecord] = []
        self._seq = 0
        self.kills = 0
        self.overloads = 0
        self.migrations = 0
        self.rejected = 0
        self.placed = 0
        self.alerts = 0
        self.hb_bytes = 0
        self.hb_bytes_baseline = 0
        self.nu_series: list[float] = []

    # -- helpers -----------------------------------------------------------

    def _new_id(self, service: str) -> str:
        self._seq += 1
        return f"{service}.{self._seq:05d}"

    def _kill(self, tick: int, cid: str, detail: str) -> None:
        c = self.cluster.containers[cid]
        worker = c.worker
        self.cluster.kill(cid)
        self.acc_sum.pop(cid, None)
        self.acc_cnt.pop(cid, None)
        self.estimate.pop(cid, None)
        self.log.log(tick, "kill", cid, c.service, worker, "", detail)

    def _availability(self) -> dict[str, ResourceVector]:
        return {wid: ResourceVector.from_array(np.maximum(a, 0.0)) for wid, a in self.available.items()}

    def _expected_demand(self, service: str) -> np.ndarray:
        try:
            return self.registry.average_service_demand(service).as_array()
        except LookupError:
            res = self.cluster.services[service].reservation
            return res.as_array() if res is not None else np.zeros(4)

    def _hosted(self, wid: str) -> list[str]:
        return sorted(self.cluster.workers[wid].hosted)

    # -- phases ------------------------------------------------------------

    def _replay_and_overload(self, tick: int) -> None:
        ts = self.config.tick_seconds
        self.usage_now = {}
        self.tick_load = {}
        for wid in self.worker_ids:
            w = self.cluster.workers[wid]
            cids = self._hosted(wid)
            if not w.alive or not cids:
                self.tick_load[wid] = np.zeros(4)
                continue
            containers = [self.cluster.containers[cid] for cid in cids]
            rows = []
            for c in containers:
                trace = self.traces[c.service]
                rows.append(trace.samples[trace.index_at(c.phase_offset * ts)])
                c.phase_offset += 1
            demand = np.array(rows)

            if overload_check(w, dict(zip(cids, demand))) is not None:
                self.overloads += 1
                self.log.log(tick, "worker_overload", "", "", wid, "",
                             f"memory demand {demand[:, _MEM].sum():.0f} > capacity {w.capacity.memory:.0f}")
                for cid in cids:
                    self._kill(tick, cid, "overload")
                    self.kills += 1
                self.tick_load[wid] = np.zeros(4)
                continue

            total = demand.sum(axis=0)
            cap = self.capacity[wid]
            scale = np.ones(4)
            over = total > cap
            over[_MEM] = False
            scale[over] = cap[over] / total[over]
            usage = demand * scale
            self.tick_load[wid] = usage.sum(axis=0)
            for cid, u in zip(cids, usage):
                self.usage_now[cid] = u
                if cid in self.acc_sum:
                    self.acc_sum[cid] += u
                    self.acc_cnt[cid] += 1
                else:
                    self.acc_sum[cid] = u.copy()
                    self.acc_cnt[cid] = 1

    def _self_examine(self, tick: int) -> list[AlertMsg]:
        cfg = self.config
        cooldown = cfg.alert_cooldown_periods * cfg.heartbeat_period_ticks
        alerts = []
        for wid in self.worker_ids:
            w = self.cluster.workers[wid]
            if not w.alive or not w.hosted:
                continue
            # cheap pre-check on the worker total before building vectors
            if (1.0 - self.tick_load[wid] / self.capacity[wid]).min() >= cfg.threshold:
                continue
            usages = {cid: ResourceVector.from_array(self.usage_now[cid]) for cid in self._hosted(wid)
                      if cid in self.usage_now}
            alert = self_examine(w, usages, cfg.threshold, tick, self.last_alert.get(wid), cooldown)
            if alert is None:
                continue
            self.last_alert[wid] = tick
            self.alerts += 1
            c = self.cluster.containers[alert.container]
            self.log.log(tick, "alert", alert.container, c.service, wid, "", alert.bottleneck.label)
            alerts.append(alert)
        return alerts

    def emit_heartbeats(self, tick: int) -> list[HeartbeatMsg]:
        """One message per alive worker; resets the per-container windows."""
        msgs = []
        for wid in self.worker_ids:
            w = self.cluster.workers[wid]
            if not w.alive:
                continue
            reported = {}
            used = np.zeros(4)
            for cid in self._hosted(wid):
                n = self.acc_cnt.pop(cid, 0)
                s = self.acc_sum.pop(cid, None)
                if n:
                    avg = s / n
                    used += avg
                    reported[cid] = avg
            available = ResourceVector.from_array(np.maximum(self.capacity[wid] - used, 0.0))
            size = heartbeat_size(len(reported), self.draps)
            self.hb_bytes += size
            self.hb_bytes_baseline += heartbeat_size(len(reported), False)
            containers = (
                {cid: ResourceVector.from_array(v) for cid, v in reported.items()} if self.draps else {}
            )
            msgs.append(HeartbeatMsg(wid, tick, containers, available, size))
        return msgs

    def _consume_heartbeats(self, msgs: list[HeartbeatMsg]) -> None:
        if not self.draps:
            return
        for msg in msgs:
            self.available[msg.worker] = msg.available.as_array()
            for cid, usage in msg.containers.items():
                service = self.cluster.containers[cid].service
                self.registry.record_usage(service, cid, usage, msg.tick)
                self.estimate[cid] = usage.as_array()

    def _handle_alerts(self, tick: int, alerts: list[AlertMsg]) -> None:
        for alert in alerts:
            c = self.cluster.containers.get(alert.container)
            if c is None or c.state is not ContainerState.RUNNING or c.worker != alert.worker:
                continue
            decision = handle_alert(alert, self.cluster, self.registry, self._availability(),
                                    self.config.filters)
            if decision.target is None:
                self.log.log(tick, "migrate_abort", c.id, c.service, alert.worker, "", decision.reason)
                continue
            est = self.estimate.get(c.id, self.usage_now.get(c.id, np.zeros(4)))
            current = self.usage_now.get(c.id)
            new = execute_migration(self.cluster, decision, tick, self.log, self._new_id(c.service))
            if new is None:
                continue
            self.migrations += 1
            self.acc_sum.pop(c.id, None)
            self.acc_cnt.pop(c.id, None)
            self.estimate.pop(c.id, None)
            self.estimate[new.id] = est
            self.available[decision.target] = self.available[decision.target] - est
            self.available[decision.source] = self.available[decision.source] + est
            if current is not None:
                # source already consumed this tick; the replacement overlaps for one tick
                self.tick_load[decision.target] = self.tick_load[decision.target] + current

    def _place_arrivals(self, tick: int) -> None:
        for service in self.arrivals.get(tick, ()):
            spec = self.cluster.services[service]
            if spec.mode is ServiceMode.GLOBAL:
                self._place_global(tick, service)
                continue
            self._place_one(tick, service)

    def _place_one(self, tick: int, service: str) -> None:
        spec = self.cluster.services[service]
        cid = self._new_id(service)
        self.cluster.add_container(ContainerInstance(cid, service))
        decision = place(
            self.config.scheduler, spec, list(self.cluster.workers.values()),
            registry=self.registry, availability=self._availability(),
            reservations=self.cluster.reservations(), filters=self.config.filters,
            rng=self.rng, container=cid,
        )
        self._commit(tick, cid, service, decision.worker, decision.reason)

    def _place_global(self, tick: int, service: str) -> None:
        # one replica on every worker that passes the filters; no strategy involved
        spec = self.cluster.services[service]
        candidates = apply_filters(spec, list(self.cluster.workers.values()),
                                   self.cluster.reservations(), self.config.filters)
        if not candidates:
            cid = self._new_id(service)
            self.cluster.add_container(ContainerInstance(cid, service))
            self._commit(tick, cid, service, None, "no-worker")
        for w in candidates:
            cid = self._new_id(service)
            self.cluster.add_container(ContainerInstance(cid, service))
            self._commit(tick, cid, service, w.id, None)

    def _commit(self, tick: int, cid: str, service: str, worker: Optional[str], reason: Optional[str]) -> None:
        if worker is None:
            self.rejected += 1
            self.cluster.containers[cid].state = ContainerState.KILLED
            self.log.log(tick, "reject", cid, service, "", "", reason or "no-worker")
            return
        self.cluster.host(cid, worker)
        self.placed += 1
        self.log.log(tick, "place", cid, service, "", worker)
        if self.draps:
            self.available[worker] = self.available[worker] - self._expected_demand(service)

    def _record(self, tick: int) -> None:
        nu = 0.0
        any_alive = False
        for wid in self.worker_ids:
            w = self.cluster.workers[wid]
            ratios = tuple(float(x) for x in self.tick_load.get(wid, np.zeros(4)) / self.capacity[wid])
            rec = UtilizationRecord(tick, wid, ratios, len(w.hosted), w.alive)
            self.records.append(rec)
            if w.alive:
                any_alive = True
                nu = max(nu, rec.worker_max)
        self.nu_series.append(nu if any_alive else float("nan"))

    def step(self, tick: int) -> None:
        self._replay_and_overload(tick)
        alerts = self._self_examine(tick) if self.draps else []
        if tick % self.config.heartbeat_period_ticks == 0:
            msgs = self.emit_heartbeats(tick)
            if self.record_heartbeats:
                self.heartbeats.extend(msgs)
            self._consume_heartbeats(msgs)
        if alerts:
            self._handle_alerts(tick, alerts)
        self._place_arrivals(tick)
        self._record(tick)

    def run(self) -> SimulationResult:
        for tick in range(self.config.max_ticks):
            self.step(tick)
        return SimulationResult(self.config, self.records, self.log, self._summary(),
                                self.heartbeats, self.cluster)

    def _summary(self) -> dict:
        cfg = self.config
        peak_by_kind = {k.label: 0.0 for k in KINDS}
        peak_worker = {wid: 0.0 for wid in self.worker_ids}
        for r in self.records:
            if not r.alive:
                continue
            for k, v in zip(KINDS, r.ratios):
                peak_by_kind[k.label] = max(peak_by_kind[k.label], round(v, 6))
            peak_worker[r.worker] = max(peak_worker[r.worker], round(r.worker_max, 6))
        nus = [round(x, 6) for x in self.nu_series]
        peak = max(nus) if nus else 0.0
        return {
            "scenario": cfg.name,
            "scheduler": cfg.scheduler.value,
            "seed": cfg.seed,
            "ticks": cfg.max_ticks,
            "final_nu": nus[-1] if nus else 0.0,
            "peak_nu": peak,
            "peak_tick_s": (nus.index(peak) * cfg.tick_seconds) if nus else 0.0,
            "peak_util_by_kind": peak_by_kind,
            "peak_util_by_worker": peak_worker,
            "total_kills": self.kills,
            "worker_overloads": self.overloads,
            "total_migrations": self.migrations,
            "alerts": self.alerts,
            "placed": self.placed,
            "rejected": self.rejected,
            "final_containers": {wid: len(self.cluster.workers[wid].hosted) for wid in self.worker_ids},
            "heartbeat_bytes": self.hb_bytes,
            "baseline_heartbeat_bytes": self.hb_bytes_baseline,
            "heartbeat_schedule": f"{HEARTBEAT_HEADER_BYTES}B/msg + {HEARTBEAT_CONTAINER_BYTES}B/container"
                                  " (simulated accounting)",
        }


def run(config: ScenarioConfig, record_heartbeats: bool = False) -> SimulationResult:
    return Simulation(config, record_heartbeats).run()
