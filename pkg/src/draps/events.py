"""Ordered event log shared by the simulator and the migration path."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

EVENT_HEADER = ("tick_s", "event", "container", "service", "from_worker", "to_worker", "detail")
EVENT_KINDS = frozenset({"place", "reject", "alert", "migrate", "migrate_abort", "kill", "worker_overload"})


@dataclass(frozen=True)
class Event:
    tick: int
    event: str
    container: str = ""
    service: str = ""
    from_worker: str = ""
    to_worker: str = ""
    detail: str = ""


class EventLog:
    def __init__(self):
        self.events: list[Event] = []

    def log(self, tick: int, event: str, container: str = "", service: str = "",
            from_worker: str = "", to_worker: str = "", detail: str = "") -> Event:
        if event not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {event!r}")
        if self.events and tick < self.events[-1].tick:
            raise ValueError("events must be logged in non-decreasing tick order")
        ev = Event(tick, event, container or "", service or "", from_worker or "", to_worker or "", detail)
        self.events.append(ev)
        return ev

    def __iter__(self):
        return iter(self.events)

    def __len__(self) -> int:
        return len(self.events)

    def of_kind(self, event: str) -> list[Event]:
        return [e for e in self.events if e.event == event]

    def to_csv(self, tick_seconds: float = 1.0) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(EVENT_HEADER)
        for e in self.events:
            w.writerow([f"{e.tick * tick_seconds:g}", e.event, e.container, e.service,
                        e.from_worker, e.to_worker, e.detail])
        return buf.getvalue()
