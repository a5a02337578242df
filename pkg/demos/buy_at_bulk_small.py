"""Non-oblivious buy-at-bulk against the exact optimum.

Three cable types; each terminal picks a type by counting its neighbours,
then routes up through layers of higher types. On four-terminal instances
the brute-force optimum is computable, so we can see the actual ratio.
"""
import numpy as np

from onbab import CableSchedule, generate, run_bab
from onbab.oracles import brute_force_routing_opt, cable_cost_fn

sch = CableSchedule([(1.0, 1.0), (4.0, 0.1), (20.0, 0.01)])
fn = cable_cost_fn([(c.sigma, c.beta) for c in sch.cables])
ratios = []
for seed in range(10):
    inst = generate("euclidean", seed=seed, n=6)
    m = inst.online()
    alg = run_bab(m, sch, range(5))
    m.reveal_until(5)
    ident = alg.algorithm_cost_identity()
    opt = brute_force_routing_opt(m.matrix(), [1, 2, 3, 4], 0, fn)
    ratios.append(ident["lhs"] / opt)
    print(f"seed {seed}: types {[alg.tau[v] for v in alg.terminals]}, ALG {ident['lhs']:7.2f}, OPT {opt:7.2f}")
print(f"\nmean ALG/OPT {np.mean(ratios):.3f}, worst {max(ratios):.3f}")
