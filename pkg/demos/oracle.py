"""
How far are the heuristics from the best placement?
===================================================

For small instances every assignment can be tried. The exhaustive optimum
bounds what any placement strategy can reach.
"""

import numpy as np

from draps import ResourceVector
from draps.core import GiB
from draps.metrics import assignment_nu, brute_force_optimal_nu
from draps.schedulers import SchedulerKind, static_assignment

# three 3 GiB containers on a 4 GiB and an 8 GiB worker
opt = brute_force_optimal_nu([ResourceVector(3 * GiB)] * 3,
                             [ResourceVector(4 * GiB, 1, 1, 1), ResourceVector(8 * GiB, 1, 1, 1)])
print("hand instance:", opt)

rng = np.random.default_rng(1)
gaps = {k: [] for k in SchedulerKind}
for _ in range(30):
    caps = rng.uniform([2 * GiB, 1, 5e7, 5e7], [16 * GiB, 8, 5e8, 5e8], size=(3, 4))
    dem = rng.uniform(0, 0.5, size=(7, 4)) * caps.min(axis=0)
    best = brute_force_optimal_nu([ResourceVector(*d) for d in dem], [ResourceVector(*c) for c in caps]).nu
    for k in SchedulerKind:
        got = assignment_nu(dem, caps, static_assignment(k, [ResourceVector(*d) for d in dem],
                                                         [ResourceVector(*c) for c in caps]))
        gaps[k].append(got / best)

for k, g in gaps.items():
    print(f"{k.value:8s} mean nu / optimum {np.mean(g):.3f}  worst {np.max(g):.3f}")
