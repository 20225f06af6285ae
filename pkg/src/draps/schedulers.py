"""Filter chain and placement strategies (Spread, Binpack, Random, DRAPS)."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Optional, Sequence

import numpy as np

from .core import (
    PlacementDecision,
    ResourceVector,
    ServiceSpec,
    WorkerNode,
)
from .demand import KnownServiceRegistry


class SchedulerKind(Enum):
    SPREAD = "spread"
    BINPACK = "binpack"
    RANDOM = "random"
    DRAPS = "draps"

    @classmethod
    def parse(cls, text: str) -> "SchedulerKind":
        try:
            return cls(text.strip().lower())
        except ValueError:
            names = "|".join(k.value for k in cls)
            raise ValueError(f"unknown scheduler {text!r}, expected one of {names}") from None


class NoCandidates(LookupError):
    """Every worker was filtered out."""


@dataclass(frozen=True)
class FilterSet:
    ready: bool = True
    resource: bool = True
    plugin: bool = True
    constraint: bool = True

    @classmethod
    def none(cls) -> "FilterSet":
        return cls(False, False, False, False)


def apply_filters(
    task: ServiceSpec,
    workers: Sequence[WorkerNode],
    reservations: Optional[Mapping[str, ResourceVector]] = None,
    filters: FilterSet = FilterSet(),
) -> list[WorkerNode]:
    """Alive workers that pass every enabled filter, in ascending id order."""
    reservations = reservations or {}
    out = []
    for w in sorted(workers, key=lambda w: w.id):
        if not w.alive:
            continue
        if filters.ready and not w.ready:
            continue
        if filters.resource and task.reservation is not None:
            used = reservations.get(w.id, ResourceVector.zero())
            if not (used + task.reservation).fits_within(w.capacity):
                continue
        if filters.plugin and not set(task.required_plugins) <= w.plugins:
            continue
        if filters.constraint and not set(task.constraints) <= w.labels:
            continue
        out.append(w)
    return out


def _require(candidates: Sequence[WorkerNode]) -> list[WorkerNode]:
    if not candidates:
        raise NoCandidates("no candidate worker")
    return sorted(candidates, key=lambda w: w.id)


def place_spread(candidates: Sequence[WorkerNode]) -> str:
    # min() keeps the first of equal keys, so ascending id wins ties
    return min(_require(candidates), key=lambda w: len(w.hosted)).id


def place_binpack(candidates: Sequence[WorkerNode]) -> str:
    return max(_require(candidates), key=lambda w: len(w.hosted)).id


def place_random(candidates: Sequence[WorkerNode], rng: np.random.Generator) -> str:
    cands = _require(candidates)
    return cands[int(rng.integers(len(cands)))].id


def argmax_worker(candidates: Sequence[WorkerNode], score) -> str:
    """Highest-scoring candidate; ascending id on ties."""
    best_id, best = None, None
    for w in _require(candidates):
        s = score(w)
        if best is None or s > best:
            best_id, best = w.id, s
    return best_id


def system_limits(workers: Sequence[WorkerNode]) -> ResourceVector:
    """Sum of capacities over alive workers."""
    total = np.zeros(4)
    for w in workers:
        if w.alive:
            total += w.capacity.as_array()
    return ResourceVector.from_array(total)


def mean_available_fraction(worker: WorkerNode, available: ResourceVector) -> float:
    return float(np.mean(available.as_array() / worker.capacity.as_array()))


def place_draps(
    task: ServiceSpec,
    workers: Sequence[WorkerNode],
    registry: KnownServiceRegistry,
    availability: Mapping[str, ResourceVector],
    reservations: Optional[Mapping[str, ResourceVector]] = None,
    filters: FilterSet = FilterSet(),
    container: str = "",
) -> PlacementDecision:
    """Dominant-resource-aware placement.

    A known service goes to the candidate with the most available amount
    of its dominant kind. An unknown one goes to the candidate whose
    available fractions, averaged over the four kinds, are highest.
    """
    candidates = apply_filters(task, workers, reservations, filters)
    if not candidates:
        return PlacementDecision(container, None, "no-worker")
    avail = {w.id: availability.get(w.id, w.capacity) for w in candidates}
    if registry.is_known(task.id):
        dom = registry.dominant_resource(task.id, system_limits(workers))
        chosen = argmax_worker(candidates, lambda w: avail[w.id][dom])
    else:
        chosen = argmax_worker(candidates, lambda w: mean_available_fraction(w, avail[w.id]))
    return PlacementDecision(container, chosen)


def place(
    kind: SchedulerKind,
    task: ServiceSpec,
    workers: Sequence[WorkerNode],
    *,
    registry: Optional[KnownServiceRegistry] = None,
    availability: Optional[Mapping[str, ResourceVector]] = None,
    reservations: Optional[Mapping[str, ResourceVector]] = None,
    filters: FilterSet = FilterSet(),
    rng: Optional[np.random.Generator] = None,
    container: str = "",
) -> PlacementDecision:
    """Run the filter chain and the selected strategy for one container."""
    if kind is SchedulerKind.DRAPS:
        if registry is None:
            raise ValueError("DRAPS placement needs a service registry")
        return place_draps(task, workers, registry, availability or {}, reservations, filters, container)
    candidates = apply_filters(task, workers, reservations, filters)
    if not candidates:
        return PlacementDecision(container, None, "no-worker")
    if kind is SchedulerKind.SPREAD:
        return PlacementDecision(container, place_spread(candidates))
    if kind is SchedulerKind.BINPACK:
        return PlacementDecision(container, place_binpack(candidates))
    if rng is None:
        raise ValueError("random placement needs a seeded generator")
    return PlacementDecision(container, place_random(candidates, rng))


def static_assignment(
    kind: SchedulerKind,
    demands: Sequence[ResourceVector],
    capacities: Sequence[ResourceVector],
    seed: int = 0,
) -> tuple[int, ...]:
    """Place constant demands one by one with a strategy; returns worker indices.

    Each container is treated as its own service whose demand is already
    known, and DRAPS availability is capacity minus what has been placed.
    Used to compare heuristics against the brute-force optimum.
    """
    workers = [WorkerNode(f"w{j:03d}", cap) for j, cap in enumerate(capacities)]
    index = {w.id: j for j, w in enumerate(workers)}
    load = {w.id: np.zeros(4) for w in workers}
    rng = np.random.default_rng(seed)
    registry = KnownServiceRegistry(warmup_samples=1, window_samples=1)
    out = []
    for i, d in enumerate(demands):
        task = ServiceSpec(f"s{i}", trace_id=f"s{i}")
        registry.register(task.id)
        registry.record_usage(task.id, f"c{i}", d, 0)
        avail = {
            w.id: ResourceVector.from_array(np.maximum(w.capacity.as_array() - load[w.id], 0.0))
            for w in workers
        }
        decision = place(kind, task, workers, registry=registry, availability=avail,
                         filters=FilterSet.none(), rng=rng, container=f"c{i}")
        workers[index[decision.worker]].hosted.add(f"c{i}")
        load[decision.worker] += d.as_array()
        out.append(index[decision.worker])
    return tuple(out)

