"""Demand traces, trace CSV ingestion and the known-service registry.

A service joins the known set once it has reported ``warmup_samples`` usage
samples in total. Its average demand is the flat mean of the most recent
``window_samples`` samples kept per container, and its dominant resource is
the kind with the largest share of the cluster-wide limits.
"""

from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .core import KINDS, InvalidCapacity, ResourceKind, ResourceVector

TRACE_HEADER = (
    "tick_s", "container", "service", "cpu_pct", "mem_bytes",
    "net_rx_bytes", "net_tx_bytes", "blk_read_bytes", "blk_write_bytes",
)


class TraceFormatError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class UnknownService(KeyError):
    pass


class UnknownDemand(LookupError):
    """The service has no recorded usage yet."""


@dataclass(frozen=True)
class DemandTrace:
    """Per-interval demand samples of one container, shape (n, 4).

    Queries past the end repeat the final sample.
    """

    trace_id: str
    sample_interval: float
    samples: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 4 or len(arr) == 0:
            raise ValueError(f"trace {self.trace_id}: samples must be a non-empty (n, 4) array")
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise ValueError(f"trace {self.trace_id}: samples must be finite and >= 0")
        if not self.sample_interval > 0:
            raise ValueError(f"trace {self.trace_id}: sample_interval must be > 0")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    def __len__(self) -> int:
        return len(self.samples)

    def index_at(self, seconds: float) -> int:
        return min(int(seconds // self.sample_interval), len(self.samples) - 1)

    def at(self, seconds: float) -> ResourceVector:
        return ResourceVector.from_array(self.samples[self.index_at(seconds)])

    def peak(self) -> ResourceVector:
        return ResourceVector.from_array(self.samples.max(axis=0))


@dataclass(frozen=True)
class TraceRecord:
    container: str
    service: str
    trace: DemandTrace


def read_trace_csv(path) -> dict[str, TraceRecord]:
    """Parse a docker-stats style export into one trace per container.

    cpu_pct becomes a core fraction; cumulative network and block I/O
    counters become rates by first-differencing (the first sample of each
    container gets rate 0). Sampling must be uniform per container.
    """
    path = Path(path)
    rows: dict[str, list] = {}
    services: dict[str, str] = {}
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise TraceFormatError("empty trace file", 1) from None
        if tuple(h.strip() for h in header) != TRACE_HEADER:
            raise TraceFormatError(f"header must be {','.join(TRACE_HEADER)}", 1)
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(TRACE_HEADER):
                raise TraceFormatError(f"expected {len(TRACE_HEADER)} fields, got {len(row)}", lineno)
            container, service = row[1].strip(), row[2].strip()
            if not container or not service:
                raise TraceFormatError("container and service must be non-empty", lineno)
            try:
                nums = [float(row[0])] + [float(x) for x in row[3:]]
            except ValueError as exc:
                raise TraceFormatError(f"non-numeric field ({exc})", lineno) from None
            if not all(np.isfinite(nums)) or any(x < 0 for x in nums):
                raise TraceFormatError("fields must be finite and >= 0", lineno)
            if services.setdefault(container, service) != service:
                raise TraceFormatError(f"container {container} changes service", lineno)
            rows.setdefault(container, []).append((lineno, nums))

    if not rows:
        raise TraceFormatError("trace has no data rows")
    out = {}
    for container, entries in rows.items():
        out[container] = TraceRecord(container, services[container], _to_trace(container, entries))
    return out


def _to_trace(container: str, entries: list) -> DemandTrace:
    ticks = np.array([nums[0] for _, nums in entries])
    steps = np.diff(ticks)
    for (lineno, _), step in zip(entries[1:], steps):
        if step <= 0:
            raise TraceFormatError(f"tick_s must increase for container {container}", lineno)
    interval = float(steps[0]) if len(steps) else 1.0
    for (lineno, _), step in zip(entries[1:], steps):
        if not np.isclose(step, interval, rtol=1e-6):
            raise TraceFormatError(f"non-uniform sampling interval for container {container}", lineno)

    samples = np.zeros((len(entries), 4))
    prev = None
    for i, (lineno, nums) in enumerate(entries):
        _, cpu_pct, mem, rx, tx, rd, wr = nums
        net, blk = rx + tx, rd + wr
        samples[i, ResourceKind.MEMORY.value] = mem
        samples[i, ResourceKind.CPU.value] = cpu_pct / 100.0
        if prev is not None:
            if net < prev[0] or blk < prev[1]:
                raise TraceFormatError(f"cumulative counter decreased for container {container}", lineno)
            samples[i, ResourceKind.NETWORK.value] = (net - prev[0]) / steps[i - 1]
            samples[i, ResourceKind.BLOCK_IO.value] = (blk - prev[1]) / steps[i - 1]
        prev = (net, blk)
    return DemandTrace(container, interval, samples)


def write_trace_csv(path, records: list[tuple[str, str, DemandTrace]]) -> None:
    """Inverse of :func:`read_trace_csv` for (container, service, trace) triples.

    Rates are integrated back into cumulative counters; the first sample's
    network and block rates are dropped, as they would be on re-reading.
    """
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        for container, service, trace in records:
            net = blk = 0.0
            for i, (mem, cpu, net_rate, blk_rate) in enumerate(trace.samples):
                if i:
                    net += net_rate * trace.sample_interval
                    blk += blk_rate * trace.sample_interval
                w.writerow([
                    f"{i * trace.sample_interval:g}", container, service,
                    f"{cpu * 100:.4f}", f"{mem:.0f}",
                    f"{net / 2:.1f}", f"{net / 2:.1f}", f"{blk / 2:.1f}", f"{blk / 2:.1f}",
                ])


class _ServiceHistory:
    __slots__ = ("buffers", "count", "dominant")

    def __init__(self):
        self.buffers: dict[str, deque] = {}
        self.count = 0
        self.dominant: Optional[ResourceKind] = None


class KnownServiceRegistry:
    def __init__(self, warmup_samples: int = 12, window_samples: int = 6):
        if warmup_samples < 1 or window_samples < 1:
            raise ValueError("warmup_samples and window_samples must be >= 1")
        self.warmup_samples = warmup_samples
        self.window_samples = window_samples
        self._services: dict[str, _ServiceHistory] = {}

    def register(self, service: str) -> None:
        self._services.setdefault(service, _ServiceHistory())

    def __contains__(self, service: str) -> bool:
        return service in self._services

    def _history(self, service: str) -> _ServiceHistory:
        try:
            return self._services[service]
        except KeyError:
            raise UnknownService(service) from None

    def record_usage(self, service: str, container: str, usage: ResourceVector, tick: float) -> None:
        hist = self._history(service)
        buf = hist.buffers.get(container)
        if buf is None:
            buf = hist.buffers[container] = deque(maxlen=self.window_samples)
        buf.append((tick, usage.as_array()))
        hist.count += 1

    def sample_count(self, service: str) -> int:
        return self._history(service).count

    def buffered(self, service: str, container: str) -> list[tuple[float, ResourceVector]]:
        buf = self._history(service).buffers.get(container, ())
        return [(t, ResourceVector.from_array(v)) for t, v in buf]

    def is_known(self, service: str) -> bool:
        return service in self._services and self._services[service].count >= self.warmup_samples

    def known_services(self) -> list[str]:
        return sorted(s for s in self._services if self.is_known(s))

    def average_service_demand(self, service: str) -> ResourceVector:
        samples = [v for buf in self._history(service).buffers.values() for _, v in buf]
        if not samples:
            raise UnknownDemand(f"service {service!r} has no recorded usage")
        return ResourceVector.from_array(np.mean(samples, axis=0))

    def dominant_resource(self, service: str, system_limits: ResourceVector) -> ResourceKind:
        """Kind with the largest average demand relative to the cluster-wide limit."""
        hist = self._history(service)
        if hist.count < self.warmup_samples:
            raise UnknownService(f"service {service!r} is not in the known set")
        kind = dominant_kind(self.average_service_demand(service), system_limits)
        hist.dominant = kind
        return kind

    def cached_dominant(self, service: str) -> Optional[ResourceKind]:
        return self._history(service).dominant


def dominant_kind(demand: ResourceVector, limits: ResourceVector) -> ResourceKind:
    lim = limits.as_array()
    if np.any(lim <= 0) or not np.all(np.isfinite(lim)):
        raise InvalidCapacity(f"system limits must be strictly positive, got {limits}")
    shares = demand.as_array() / lim
    # np.argmax returns the first maximum, i.e. canonical order on ties
    return KINDS[int(np.argmax(shares))]


def tied_kinds(demand: ResourceVector, limits: ResourceVector) -> list[ResourceKind]:
    """Kinds sharing the maximal normalized demand (length > 1 means a tie)."""
    shares = demand.as_array() / limits.as_array()
    return [KINDS[i] for i in np.flatnonzero(shares == shares.max())]
