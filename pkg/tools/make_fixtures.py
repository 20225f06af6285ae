"""Regenerate the bundled trace and scenario fixtures under src/draps/data/.

    python tools/make_fixtures.py

Output is deterministic. Idle traces model a short start-up burst followed
by a flat footprint with small jitter; the four workload traces are
hand-shaped piecewise profiles (a CPU-bound digits job, a database with
query bursts and a late join, a web server under two request rates, a
package manager that downloads then installs).
"""

import json
from pathlib import Path

import numpy as np

from draps.core import GiB, MiB
from draps.demand import DemandTrace, write_trace_csv

DATA = Path(__file__).resolve().parents[1] / "src" / "draps" / "data"
KB = 1e3
MB = 1e6

# service: (steady memory MiB, idle cpu cores, start-up cpu burst cores)
IDLE_POOL = {
    "mongodb": (75, 0.006, 0.22),
    "mysql": (190, 0.004, 0.30),
    "postgres": (30, 0.002, 0.15),
    "cassandra": (230, 0.012, 0.30),
    "rethinkdb": (60, 0.005, 0.18),
    "registry": (12, 0.001, 0.08),
    "memcached": (8, 0.001, 0.05),
    "tomcat": (215, 0.004, 0.28),
    "httpd": (22, 0.001, 0.10),
    "redis": (9, 0.002, 0.06),
    "haproxy": (10, 0.001, 0.06),
    "jetty": (135, 0.003, 0.25),
    "nginx": (7, 0.001, 0.05),
    "glassfish": (245, 0.006, 0.30),
    "rabbitmq": (115, 0.008, 0.22),
    "zookeeper": (80, 0.004, 0.20),
    "activemq": (170, 0.005, 0.25),
    "ghost": (105, 0.003, 0.20),
}

SET_100 = ["mongodb", "mysql", "postgres", "registry", "tomcat",
           "httpd", "ghost", "jetty", "rabbitmq", "zookeeper"]
SET_140 = SET_100 + ["cassandra", "glassfish", "activemq", "rethinkdb"]

WORKERS = [
    {"id": "w1", "capacity": {"memory": "4GiB", "cpu": 1, "network": 62.5e6, "block_io": 100e6}},
    {"id": "w2", "capacity": {"memory": "8GiB", "cpu": 4, "network": 125e6, "block_io": 200e6}},
    {"id": "w3", "capacity": {"memory": "16GiB", "cpu": 8, "network": 250e6, "block_io": 400e6}},
]


def idle_trace(name, mem_mib, cpu_idle, cpu_burst, rng, n=120):
    t = np.arange(n)
    mem = mem_mib * MiB * (1 + 0.02 * rng.standard_normal(n))
    ramp = np.minimum(1.0, 0.3 + 0.7 * t / 4)
    mem = mem * ramp
    cpu = cpu_idle * (1 + 0.3 * rng.random(n))
    cpu[:3] = cpu_burst
    net = 2 * KB * (1 + rng.random(n))
    blk = np.where(t < 4, 3 * MB, 10 * KB)
    net[0] = blk[0] = 0.0
    return DemandTrace(name, 1.0, np.column_stack([mem, cpu, net, blk]))


def piecewise(n, base, segments):
    out = np.full(n, float(base))
    for start, stop, value in segments:
        out[start:stop] = value
    return out


def workload_traces(variant: int):
    """Four hand-shaped 100 s profiles; ``variant`` nudges magnitudes slightly."""
    n = 100
    f = 1 + 0.05 * variant
    pi = np.column_stack([
        piecewise(n, 1.5 * MiB, [(10, 70, 3 * MiB)]),
        piecewise(n, 0.001, [(10, 30, 1.0), (38, 70, 2.0)]),
        np.zeros(n),
        piecewise(n, 0.0, [(10, 12, 50 * KB)]),
    ])
    mysql = np.column_stack([
        piecewise(n, 190 * MiB * f, [(84, 96, 330 * MiB * f)]),
        piecewise(n, 0.01, [(10, 13, 0.6 * f), (30, 33, 0.45 * f), (50, 53, 0.5 * f),
                            (70, 73, 0.55 * f), (84, 96, 0.95)]),
        piecewise(n, 20 * KB, [(10, 13, 400 * KB), (84, 96, 600 * KB)]),
        piecewise(n, 50 * KB, [(10, 13, 5 * MB * f), (84, 96, 8 * MB * f)]),
    ])
    tomcat = np.column_stack([
        piecewise(n, 215 * MiB * f, [(10, 50, 225 * MiB * f), (50, 90, 232 * MiB * f)]),
        piecewise(n, 0.004, [(10, 50, 0.03 * f), (50, 90, 0.06 * f)]),
        piecewise(n, 1 * KB, [(10, 50, 15 * KB), (50, 90, 30 * KB)]),
        np.full(n, 2 * KB),
    ])
    yum = np.column_stack([
        piecewise(n, 40 * MiB, [(5, 45, 60 * MiB), (45, 75, 85 * MiB * f)]),
        piecewise(n, 0.02, [(5, 45, 0.05), (45, 75, 0.25 * f)]),
        piecewise(n, 1 * KB, [(5, 40, 12 * MB * f)]),
        piecewise(n, 10 * KB, [(40, 75, 25 * MB * f)]),
    ])
    out = {}
    for name, arr in (("pi", pi), ("mysql", mysql), ("tomcat", tomcat), ("yum", yum)):
        arr[0, 2:] = 0.0
        out[name] = DemandTrace(name, 1.0, arr)
    return out


def scenario(name, services, max_ticks, interval=5):
    return {
        "name": name,
        "scheduler": "spread",
        "seed": 0,
        "tick_seconds": 1,
        "heartbeat_period_ticks": 5,
        "max_ticks": max_ticks,
        "threshold": 0.10,
        "alert_cooldown_periods": 3,
        "warmup_samples": 12,
        "window_samples": 6,
        "shuffle_arrivals": True,
        "workers": WORKERS,
        "traces": {s: {"path": f"../traces/idle/{s}.csv"} for s in services},
        "services": [{"id": s, "trace_id": s} for s in services],
        "arrival_sequence": {"start": 0, "interval": interval, "blocks": [[s, 10] for s in services]},
    }


def main():
    idle_dir = DATA / "traces" / "idle"
    idle_dir.mkdir(parents=True, exist_ok=True)
    for i, (name, (mem, cpu, burst)) in enumerate(IDLE_POOL.items()):
        tr = idle_trace(name, mem, cpu, burst, np.random.default_rng(1000 + i))
        write_trace_csv(idle_dir / f"{name}.csv", [(f"{name}-0", name, tr)])

    profiles = DATA / "traces" / "profiles"
    profiles.mkdir(parents=True, exist_ok=True)
    v0, v1 = workload_traces(0), workload_traces(1)
    for name, tr in v0.items():
        write_trace_csv(profiles / f"{name}.csv", [(f"{name}-0", name, tr)])
    write_trace_csv(profiles / "all.csv", [
        (f"{name}-{k}", name, tr) for name in v0 for k, tr in enumerate((v0[name], v1[name]))
    ])
    zero = DemandTrace("idle", 1.0, np.zeros((10, 4)))
    write_trace_csv(profiles / "zero.csv", [("quiet-0", "quiet", zero)])

    scen = DATA / "scenarios"
    scen.mkdir(parents=True, exist_ok=True)
    docs = {
        "hetero_100.json": scenario("hetero-100", SET_100, 700),
        "hetero_140.json": scenario("hetero-140", SET_140, 900),
    }
    loaded = scenario("loaded-mix", ["tomcat", "mysql", "rabbitmq"], 600)
    loaded["traces"] = {
        "tomcat-idle": {"path": "../traces/idle/tomcat.csv"},
        "rabbitmq-idle": {"path": "../traces/idle/rabbitmq.csv"},
        "pi": {"path": "../traces/profiles/pi.csv"},
        "mysql-load": {"path": "../traces/profiles/mysql.csv"},
        "yum": {"path": "../traces/profiles/yum.csv"},
    }
    loaded["services"] = [
        {"id": "tomcat", "trace_id": "tomcat-idle"},
        {"id": "rabbitmq", "trace_id": "rabbitmq-idle"},
        {"id": "pi", "trace_id": "pi"},
        {"id": "mysql", "trace_id": "mysql-load"},
        {"id": "yum", "trace_id": "yum"},
    ]
    loaded["arrival_sequence"] = {"start": 0, "interval": 4, "blocks": [
        ["tomcat", 20], ["rabbitmq", 20], ["pi", 8], ["mysql", 12], ["yum", 6]]}
    docs["loaded_mix.json"] = loaded
    for fname, doc in docs.items():
        (scen / fname).write_text(json.dumps(doc, indent=2) + "\n")
    print(f"fixtures written under {DATA}")


if __name__ == "__main__":
    main()
