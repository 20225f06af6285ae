"""
Memory overload cascade
=======================

With 140 containers the 4 GiB worker runs out of memory under Spread and
loses everything it hosts at once. DRAPS keeps it lightly loaded.
"""

from draps.scenario import builtin_scenario
from draps.sim import run

spread = run(builtin_scenario("hetero_140", scheduler="spread"))
for e in spread.events.of_kind("worker_overload"):
    print(f"t={e.tick}s {e.from_worker}: {e.detail}")

counts = spread.worker_series("w1")
peak = max(counts)
drop = counts.index(0, counts.index(peak))
print(f"w1 container count peaks at {peak}, hits 0 at t={drop}s")

draps = run(builtin_scenario("hetero_140", scheduler="draps"))
print("draps overloads:", draps.summary["worker_overloads"])
print("draps final counts:", draps.summary["final_containers"])
