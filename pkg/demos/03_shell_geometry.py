"""
Neighborhood shells of a supercritical random graph
===================================================

Shells around a node grow by a factor of about lambda per hop until
they exhaust the graph; shells around two distant nodes overlap at a
predictable size once their radii add up past the typical distance.
"""

import numpy as np

from lmdist import (
    components,
    er_generate,
    growth_survey,
    intersection_survey,
    shell_profile,
    typical_distance_check,
)
from lmdist.bench import sample_pairs

n, lam = 20000, 5.0
g = er_generate(n, lam, seed=42)
log_n = np.log(n) / np.log(lam)
print(f"graph: {g.n} nodes, {g.m} edges; log_{lam:g} n = {log_n:.2f}")
print()

u = int(np.flatnonzero(components(g).labels == 0)[0])
prof = shell_profile(g, u, 8)
print(f"shells around node {u}:")
print("  k  size      ratio")
for k in range(1, 9):
    prev = prof.counts[k - 1]
    ratio = prof.counts[k] / prev if prev else float("nan")
    print(f"  {k}  {prof.counts[k]:6d}  {ratio:8.2f}")
print()

print(growth_survey(g, 50, seed=1, lam=lam).summary())
print(intersection_survey(g, 100, seed=1, lam=lam).summary())
pairs = sample_pairs(g, 500, seed=3)
print(typical_distance_check(g, pairs, lam=lam).summary())
