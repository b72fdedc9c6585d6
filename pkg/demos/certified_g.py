"""f*_d(d) next to its certified lower bound g_d(d) as d grows."""

import time

from kdmatch.candidate import g_bound, optimal_candidate

print(f"{'d':>6} {'f*_d(d)':>12} {'g_d(d)':>12} {'1-1/g':>9} certified")
for d in (10, 100, 1000, 10000):
    t = time.perf_counter()
    g = g_bound(d, d)
    f = optimal_candidate(d, d).values[d]
    print(f"{d:>6} {f:>12.6f} {g.values[d]:>12.6f} {g.ratio():>9.6f} {g.certified}  ({time.perf_counter() - t:.2f}s)")
