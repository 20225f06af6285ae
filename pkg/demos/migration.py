"""
Alerts and migrations
=====================

Busy services pile up on a worker until one resource drops below 10 %
headroom. The worker names its heaviest container and the manager moves
it somewhere with room.
"""

from draps.scenario import builtin_scenario
from draps.sim import run

res = run(builtin_scenario("loaded_mix", scheduler="draps"))
for e in res.events:
    if e.event in ("alert", "migrate", "migrate_abort"):
        print(f"t={e.tick:4d}s {e.event:13s} {e.container:14s} {e.from_worker}->{e.to_worker} {e.detail}")

s = res.summary
print(f"{s['alerts']} alerts, {s['total_migrations']} migrations, {s['total_kills']} overload kills")
print(f"heartbeat bytes {s['heartbeat_bytes']} vs {s['baseline_heartbeat_bytes']} for worker-only reports")
