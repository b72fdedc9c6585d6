"""OCS against RANKING on the hard instances, with exact values where available."""

from kdmatch.analysis import eta, gamma
from kdmatch.exact import ranking_exact, ranking_exact_smalld
from kdmatch.generators import gen_general_ranking_hard, gen_small_d_ranking_hard, gen_two_phase_adversary
from kdmatch.sim import compare

TRIALS = 200_000


def show(title, inst, extra):
    print(f"\n{title}  ({inst.server_count} servers, {inst.request_count} requests)")
    for rep in compare(inst, ["ranking", "ocs", "greedy", "random"], TRIALS, master_seed=1):
        lo, hi = rep.ratio_ci95
        print(f"  {rep.algo:<14} {rep.ratio_estimate:.4f}  [{lo:.4f}, {hi:.4f}]")
    for k, v in extra.items():
        print(f"  {k:<14} {v:.6f}")


for d in (2, 3, 4):
    inst = gen_general_ranking_hard(d)
    show(f"general instance d={d}", inst, {"ranking exact": float(ranking_exact(inst).ratio), "gamma(d)": gamma(d)})

for d in (2, 3):
    inst = gen_small_d_ranking_hard(d)
    show(f"2d-component instance d={d}", inst, {"ranking exact": float(ranking_exact_smalld(d).ratio)})

for d in (4, 6):
    show(f"two-phase adversary d={d}", gen_two_phase_adversary(d, 0), {"eta(d)": eta(d)})
