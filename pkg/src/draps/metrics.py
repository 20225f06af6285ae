"""Utilization ratios, the cluster objective and a brute-force placement oracle.

The scheduler objective is the cluster's highest per-kind utilization ratio
(``nu``), which placement tries to keep *low*.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .core import ResourceVector, WorkerNode

MAX_BRUTE_CONTAINERS = 12
MAX_BRUTE_WORKERS = 4

METRICS_HEADER = (
    "tick_s", "worker", "mem_util", "cpu_util", "net_util", "blk_util",
    "worker_max", "n_containers", "alive",
)


class NoAliveWorkers(ValueError):
    pass


class NotHosted(ValueError):
    pass


@dataclass(frozen=True)
class UtilizationRecord:
    tick: float
    worker: str
    ratios: tuple[float, float, float, float]
    n_containers: int
    alive: bool = True

    @property
    def worker_max(self) -> float:
        return max(self.ratios)

    def csv_row(self, tick_seconds: float = 1.0) -> list[str]:
        return [
            f"{self.tick * tick_seconds:g}", self.worker,
            *(f"{r:.6f}" for r in self.ratios),
            f"{self.worker_max:.6f}", str(self.n_containers), str(int(self.alive)),
        ]


def utilization(worker: WorkerNode, usages: Mapping[str, ResourceVector]) -> np.ndarray:
    """Per-kind utilization ratio of one worker from its containers' usage."""
    total = np.zeros(4)
    for cid, usage in usages.items():
        if cid not in worker.hosted:
            raise NotHosted(f"container {cid} is not hosted by {worker.id}")
        total += usage.as_array()
    return total / worker.capacity.as_array()


def cluster_nu(ratios: Sequence, alive: Optional[Sequence[bool]] = None) -> float:
    """Highest ratio over every alive worker and every kind.

    ``ratios`` holds one 4-vector per worker (or :class:`UtilizationRecord`).
    """
    rows = []
    for i, r in enumerate(ratios):
        if isinstance(r, UtilizationRecord):
            if r.alive and (alive is None or alive[i]):
                rows.append(r.ratios)
        elif alive is None or alive[i]:
            rows.append(r)
    if not rows:
        raise NoAliveWorkers("cluster_nu needs at least one alive worker")
    return float(np.max(np.asarray(rows, dtype=float)))


@dataclass(frozen=True)
class Violation:
    kind: str  # "unplaced" | "multi-placed" | "over-capacity"
    container: Optional[str] = None
    worker: Optional[str] = None
    detail: str = ""


def check_constraints(
    placements: Mapping[str, Sequence[str]],
    usages: Mapping[str, ResourceVector],
    capacities: Mapping[str, ResourceVector],
) -> list[Violation]:
    """Report every broken placement or capacity constraint.

    ``placements`` maps each running container to the workers it is placed
    on; exactly one is allowed. Containers with usage but no placement entry
    count as unplaced.
    """
    out = []
    load = {w: np.zeros(4) for w in capacities}
    for cid in sorted(set(placements) | set(usages)):
        where = list(placements.get(cid, ()))
        if not where:
            out.append(Violation("unplaced", container=cid))
            continue
        if len(where) > 1:
            out.append(Violation("multi-placed", container=cid, detail=",".join(sorted(where))))
        if cid in usages:
            for w in where:
                load.setdefault(w, np.zeros(4))
                load[w] += usages[cid].as_array()
    for w in sorted(load):
        if w not in capacities:
            out.append(Violation("over-capacity", worker=w, detail="unknown worker"))
            continue
        ratios = load[w] / capacities[w].as_array()
        for k in np.flatnonzero(ratios > 1.0):
            out.append(Violation("over-capacity", worker=w, detail=f"kind {int(k)} ratio {ratios[k]:.6f}"))
    return out


@dataclass(frozen=True)
class OptimalPlacement:
    nu: float
    assignment: tuple[int, ...]
    feasible: bool


def assignment_nu(demands: np.ndarray, capacities: np.ndarray, assignment: Sequence[int]) -> float:
    load = np.zeros_like(capacities, dtype=float)
    for i, w in enumerate(assignment):
        load[w] += demands[i]
    return float(np.max(load / capacities))


def brute_force_optimal_nu(
    containers: Sequence[ResourceVector], workers: Sequence[ResourceVector]
) -> OptimalPlacement:
    """Exhaustive min-nu placement of constant demands onto workers.

    Enumerates all ``len(workers) ** len(containers)`` assignments in
    lexicographic order and keeps the first one with the lowest nu. The
    result is feasible iff that nu is at most 1. Assignments are worker
    indices, one per container.
    """
    n, m = len(containers), len(workers)
    if n > MAX_BRUTE_CONTAINERS or m > MAX_BRUTE_WORKERS:
        raise ValueError(
            f"instance {n}x{m} exceeds the enumeration bound "
            f"({MAX_BRUTE_CONTAINERS} containers, {MAX_BRUTE_WORKERS} workers)"
        )
    if m == 0:
        raise ValueError("need at least one worker")
    caps = np.array([w.as_array() for w in workers])
    if np.any(caps <= 0):
        raise ValueError("worker capacities must be strictly positive")
    if n == 0:
        return OptimalPlacement(0.0, (), True)
    dem = np.array([c.as_array() for c in containers])

    # split into an outer python loop over the leading containers and a
    # vectorised block over the trailing ones
    tail = min(n, 7)
    head = n - tail
    tail_assign = np.array(list(itertools.product(range(m), repeat=tail)), dtype=np.intp)
    onehot = np.eye(m)[tail_assign]                      # (A, tail, m)
    tail_load = np.einsum("atm,tk->amk", onehot, dem[head:])  # (A, m, 4)

    best_nu, best = np.inf, None
    for prefix in itertools.product(range(m), repeat=head):
        base = np.zeros((m, 4))
        for i, w in enumerate(prefix):
            base[w] += dem[i]
        nus = ((tail_load + base) / caps).max(axis=(1, 2))
        idx = int(np.argmin(nus))
        if nus[idx] < best_nu:
            best_nu, best = float(nus[idx]), prefix + tuple(int(x) for x in tail_assign[idx])
    return OptimalPlacement(best_nu, best, best_nu <= 1.0)
