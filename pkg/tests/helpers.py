"""Small builders shared by the test modules."""

import numpy as np

from draps.core import GiB, MiB, ResourceVector, ServiceSpec, WorkerNode
from draps.demand import DemandTrace
from draps.scenario import Arrival, ScenarioConfig, WorkerConfig
from draps.schedulers import SchedulerKind


def mem(gib: float) -> ResourceVector:
    return ResourceVector(memory=gib * GiB)


def worker(wid: str, mem_gib: float = 4, cpu: float = 1, net: float = 1e8, blk: float = 1e8, **kw) -> WorkerNode:
    return WorkerNode(wid, ResourceVector(mem_gib * GiB, cpu, net, blk), **kw)


def flat_config(samples, n_workers=1, arrivals=((0, "svc", 1),), scheduler=SchedulerKind.SPREAD,
                max_ticks=20, mem_gib=4, **kw) -> ScenarioConfig:
    """Tiny scenario with one service replaying ``samples`` (rows of 4)."""
    workers = [WorkerConfig(f"w{j + 1}", ResourceVector(mem_gib * GiB, 4, 1e8, 1e8)) for j in range(n_workers)]
    traces = {"t": DemandTrace("t", 1.0, np.asarray(samples, dtype=float))}
    services = [ServiceSpec("svc", "t")]
    return ScenarioConfig(
        workers=workers, services=services, traces=traces,
        arrivals=[Arrival(t, s, c) for t, s, c in arrivals],
        scheduler=scheduler, max_ticks=max_ticks, **kw,
    )
