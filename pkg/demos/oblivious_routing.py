"""One routing, many cost functions.

The oblivious algorithm never sees the cost function. We route 64
terminals once and then price the same routes under min(x, 2^i) for every
i, next to the buy/rent budget that bounds each price.
"""
from onbab import generate, run_oblivious
from onbab.oracles import rob_lower_bound

inst = generate("euclidean", seed=2, n=65)
for variant in ("rand", "det", "det-improved"):
    m = inst.online()
    alg = run_oblivious(m, range(65), variant, seed=2)
    print(f"\n{variant}: types {alg.type_histogram()}")
    print("   i    cost_i   buy+rent   cost_i / lower bound")
    for i, r in alg.cost_report().items():
        lb = rob_lower_bound(m, alg.terminals, 0, 2.0 ** i)
        print(f"  {i:2d} {r['cost']:9.1f} {r['buy'] + r['rent']:10.1f} {r['cost'] / lb:12.2f}")
