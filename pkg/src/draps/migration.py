"""Worker bottleneck self-examination and manager-side alert handling."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from .core import KINDS, Cluster, ContainerInstance, ContainerState, ResourceKind, ResourceVector, WorkerNode
from .demand import KnownServiceRegistry
from .events import EventLog
from .metrics import utilization
from .schedulers import FilterSet, apply_filters, argmax_worker, system_limits


class DanglingReference(LookupError):
    """An alert names a worker or container the manager cannot resolve."""


@dataclass(frozen=True)
class AlertMsg:
    worker: str
    bottleneck: ResourceKind
    container: str
    tick: int = 0


@dataclass(frozen=True)
class MigrationDecision:
    container: str
    source: str
    target: Optional[str] = None
    reason: str = ""

    def __post_init__(self):
        if self.target is not None and self.target == self.source:
            raise ValueError("a migration cannot target its source worker")


def self_examine(
    worker: WorkerNode,
    usages: Mapping[str, ResourceVector],
    threshold: float,
    tick: int = 0,
    last_alert_tick: Optional[int] = None,
    cooldown_ticks: int = 0,
) -> Optional[AlertMsg]:
    """Raise an alert when some kind has less than ``threshold`` of capacity left.

    The alert names the kind with the least remaining fraction and the
    container using the most of it. Nothing is emitted while the worker is
    inside its cooldown window.
    """
    if not 0 < threshold < 1:
        raise ValueError("threshold must lie strictly between 0 and 1")
    if not usages:
        return None
    if last_alert_tick is not None and tick - last_alert_tick < cooldown_ticks:
        return None
    remaining = 1.0 - utilization(worker, usages)
    k = int(np.argmin(remaining))
    if remaining[k] >= threshold:
        return None
    kind = KINDS[k]
    # highest usage first, then ascending container id
    container = min(usages, key=lambda cid: (-usages[cid][kind], cid))
    return AlertMsg(worker.id, kind, container, tick)


def handle_alert(
    alert: AlertMsg,
    cluster: Cluster,
    registry: KnownServiceRegistry,
    availability: Mapping[str, ResourceVector],
    filters: FilterSet = FilterSet(),
) -> MigrationDecision:
    """Pick a migration target for the container named in an alert.

    Candidates are the other alive workers passing the filter chain. When
    some candidate holds no replica of the service, only replica-free
    candidates are kept; otherwise all are (the global case). The target has
    the most available amount of the service's dominant kind, or of the
    alerted bottleneck kind while the service is still unknown.
    """
    source = cluster.workers.get(alert.worker)
    if source is None or not source.alive:
        raise DanglingReference(f"alert from unknown or dead worker {alert.worker!r}")
    container = cluster.containers.get(alert.container)
    if container is None or container.id not in source.hosted:
        raise DanglingReference(f"container {alert.container!r} is not hosted by {alert.worker}")
    spec = cluster.services[container.service]

    others = [w for w in cluster.alive_workers() if w.id != source.id]
    candidates = apply_filters(spec, others, cluster.reservations(), filters)
    replicas = cluster.service_workers(spec.id)
    spread_out = [w for w in candidates if w.id not in replicas]
    if spread_out:
        candidates = spread_out
    if not candidates:
        return MigrationDecision(container.id, source.id, None, "no-worker")

    if registry.is_known(spec.id):
        kind = registry.dominant_resource(spec.id, system_limits(cluster.alive_workers()))
    else:
        kind = alert.bottleneck
    target = argmax_worker(candidates, lambda w: availability.get(w.id, w.capacity)[kind])
    return MigrationDecision(container.id, source.id, target)


def execute_migration(
    cluster: Cluster,
    decision: MigrationDecision,
    tick: int,
    log: EventLog,
    new_id: str,
) -> Optional[ContainerInstance]:
    """Start a replacement on the target, then kill the original.

    The replacement resumes the original's workload where it stopped. If
    either worker is gone the migration is aborted and logged, and the
    cluster is left as it was.
    """
    if decision.target is None:
        raise ValueError("decision has no target")
    old = cluster.containers[decision.container]
    target = cluster.workers.get(decision.target)
    source = cluster.workers.get(decision.source)
    if target is None or not target.alive or source is None or not source.alive:
        log.log(tick, "migrate_abort", old.id, old.service, decision.source, decision.target,
                "target not alive" if target is None or not target.alive else "source not alive")
        return None
    if old.state is not ContainerState.RUNNING or old.worker != decision.source:
        log.log(tick, "migrate_abort", old.id, old.service, decision.source, decision.target,
                "container no longer on source")
        return None

    new = ContainerInstance(new_id, old.service, phase_offset=old.phase_offset)
    cluster.add_container(new)
    cluster.host(new.id, target.id)
    log.log(tick, "migrate", new.id, new.service, source.id, target.id, f"from {old.id}")
    cluster.kill(old.id)
    log.log(tick, "kill", old.id, old.service, source.id, "", "migrated")
    return new
