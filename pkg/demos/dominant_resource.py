"""
Which resource does a service lean on?
======================================

Average each service's recorded usage and divide by the cluster totals.
The largest share names the dominant resource.
"""

from draps import KnownServiceRegistry, ResourceVector
from draps.demand import read_trace_csv
from draps.scenario import builtin_scenario, data_path

# cluster totals of the bundled three-worker setup
cfg = builtin_scenario("hetero_100")
limits = ResourceVector.from_array(sum(w.capacity.as_array() for w in cfg.workers))
print("cluster limits:", limits)

records = read_trace_csv(data_path("traces", "profiles", "all.csv"))
reg = KnownServiceRegistry(warmup_samples=1, window_samples=10_000)
for rec in records.values():
    reg.register(rec.service)
    for i, row in enumerate(rec.trace.samples):
        reg.record_usage(rec.service, rec.container, ResourceVector.from_array(row), i)

for service in reg.known_services():
    avg = reg.average_service_demand(service)
    shares = avg.as_array() / limits.as_array()
    print(f"{service:8s} shares {shares.round(4)} -> {reg.dominant_resource(service, limits).label}")

# scaling every sample by the same factor never changes the answer
doubled = avg * 2.0
print("scaled demand share ratio unchanged:", (doubled.as_array() / limits.as_array()).argmax() == shares.argmax())
