"""Shared domain types: resource vectors, workers, services, containers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional

import numpy as np

GiB = 1024 ** 3
MiB = 1024 ** 2


class ResourceKind(Enum):
    MEMORY = 0
    CPU = 1
    NETWORK = 2
    BLOCK_IO = 3

    @property
    def label(self) -> str:
        return _KIND_LABELS[self]

    @classmethod
    def parse(cls, text: str) -> "ResourceKind":
        key = text.strip().lower().replace("_", "").replace("-", "")
        for kind, label in _KIND_LABELS.items():
            if label.lower().replace("_", "") == key:
                return kind
        raise ValueError(f"unknown resource kind {text!r}")


_KIND_LABELS = {
    ResourceKind.MEMORY: "Memory",
    ResourceKind.CPU: "Cpu",
    ResourceKind.NETWORK: "Network",
    ResourceKind.BLOCK_IO: "BlockIo",
}

# canonical order; every tie-break over kinds walks this tuple
KINDS = tuple(ResourceKind)


class InvalidCapacity(ValueError):
    """A limit or capacity vector has a zero or negative component."""


@dataclass(frozen=True)
class ResourceVector:
    """Non-negative amounts of the four resource kinds.

    Units: memory in bytes, cpu in cores (1.0 is one full core), network and
    block I/O in bytes per second.
    """

    memory: float = 0.0
    cpu: float = 0.0
    network: float = 0.0
    block_io: float = 0.0

    def __post_init__(self):
        for name in ("memory", "cpu", "network", "block_io"):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {value!r}")
            object.__setattr__(self, name, value)

    @classmethod
    def zero(cls) -> "ResourceVector":
        return cls()

    @classmethod
    def from_array(cls, values) -> "ResourceVector":
        m, c, n, b = (float(v) for v in values)
        return cls(m, c, n, b)

    def as_array(self) -> np.ndarray:
        return np.array([self.memory, self.cpu, self.network, self.block_io], dtype=float)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.memory, self.cpu, self.network, self.block_io)

    def __getitem__(self, kind: ResourceKind) -> float:
        return self.as_tuple()[kind.value]

    def __add__(self, other: "ResourceVector") -> "ResourceVector":
        return ResourceVector(*(a + b for a, b in zip(self.as_tuple(), other.as_tuple())))

    def __mul__(self, c: float) -> "ResourceVector":
        return ResourceVector(*(a * c for a in self.as_tuple()))

    __rmul__ = __mul__

    def fits_within(self, other: "ResourceVector") -> bool:
        return all(a <= b for a, b in zip(self.as_tuple(), other.as_tuple()))


def vector_normalize(v: ResourceVector, limits: ResourceVector) -> np.ndarray:
    """Express ``v`` as fractions of ``limits``, one entry per kind.

    Fractions above 1.0 are allowed (over-subscription).
    """
    lim = limits.as_array()
    if np.any(lim <= 0):
        raise InvalidCapacity(f"limits must be strictly positive, got {limits}")
    return v.as_array() / lim


def vector_mean(vs: Iterable[ResourceVector]) -> ResourceVector:
    vs = list(vs)
    if not vs:
        raise ValueError("cannot average an empty list of vectors")
    return ResourceVector.from_array(np.mean([v.as_array() for v in vs], axis=0))


@dataclass
class WorkerNode:
    id: str
    capacity: ResourceVector
    ready: bool = True
    labels: frozenset = frozenset()
    plugins: frozenset = frozenset()
    hosted: set = field(default_factory=set)
    alive: bool = True

    def __post_init__(self):
        if np.any(self.capacity.as_array() <= 0):
            raise InvalidCapacity(f"worker {self.id}: capacity components must be > 0")
        self.labels = frozenset(self.labels)
        self.plugins = frozenset(self.plugins)


class ServiceMode(Enum):
    REPLICATED = "replicated"
    GLOBAL = "global"


@dataclass(frozen=True)
class ServiceSpec:
    id: str
    trace_id: str
    mode: ServiceMode = ServiceMode.REPLICATED
    reservation: Optional[ResourceVector] = None
    constraints: frozenset = frozenset()
    required_plugins: frozenset = frozenset()


class ContainerState(Enum):
    PENDING = "pending"
    RUNNING = "running"
    KILLED = "killed"


@dataclass
class ContainerInstance:
    id: str
    service: str
    worker: Optional[str] = None
    phase_offset: int = 0
    state: ContainerState = ContainerState.PENDING


@dataclass(frozen=True)
class PlacementDecision:
    container: str
    worker: Optional[str] = None
    reason: Optional[str] = None

    @property
    def assigned(self) -> bool:
        return self.worker is not None


class Cluster:
    """Mutable cluster state: workers, services and every container ever created.

    Only the simulation loop mutates it; ``host``/``kill`` keep the
    one-worker-per-running-container rule intact.
    """

    def __init__(self, workers: Iterable[WorkerNode], services: Iterable[ServiceSpec] = ()):
        self.workers: dict[str, WorkerNode] = {}
        for w in workers:
            if w.id in self.workers:
                raise ValueError(f"duplicate worker id {w.id!r}")
            self.workers[w.id] = w
        self.services: dict[str, ServiceSpec] = {s.id: s for s in services}
        self.containers: dict[str, ContainerInstance] = {}

    def alive_workers(self) -> list[WorkerNode]:
        return [w for _, w in sorted(self.workers.items()) if w.alive]

    def add_container(self, container: ContainerInstance) -> None:
        if container.id in self.containers:
            raise ValueError(f"duplicate container id {container.id!r}")
        self.containers[container.id] = container

    def host(self, container_id: str, worker_id: str) -> None:
        c = self.containers[container_id]
        w = self.workers[worker_id]
        if c.state is not ContainerState.PENDING:
            raise ValueError(f"container {container_id} is {c.state.value}, not pending")
        if not w.alive:
            raise ValueError(f"worker {worker_id} is not alive")
        c.worker = worker_id
        c.state = ContainerState.RUNNING
        w.hosted.add(container_id)

    def kill(self, container_id: str) -> None:
        c = self.containers[container_id]
        if c.worker is not None:
            self.workers[c.worker].hosted.discard(container_id)
        c.state = ContainerState.KILLED

    def running(self) -> list[ContainerInstance]:
        return [c for c in self.containers.values() if c.state is ContainerState.RUNNING]

    def service_workers(self, service_id: str) -> set[str]:
        """Workers currently hosting at least one replica of the service."""
        return {c.worker for c in self.running() if c.service == service_id}

    def reservations(self) -> dict[str, ResourceVector]:
        totals = {wid: ResourceVector.zero() for wid in self.workers}
        for c in self.running():
            res = self.services[c.service].reservation if c.service in self.services else None
            if res is not None:
                totals[c.worker] = totals[c.worker] + res
        return totals
