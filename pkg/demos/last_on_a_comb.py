"""LAST on the capped comb.

Seventy teeth sit 0.1 apart along a line, each 1 away from a hub (the root).
Greedy Steiner chains every tooth to its neighbour, so the tree path back
to the root grows by 0.1 per tooth. LAST watches that path and, as soon as
it is more than 7 times the direct distance, buys the direct edge.
"""
from onbab import OnlineMetric, generate, run_last

inst = generate("capped-comb", n=70, eps=0.1, cap=2.0)
alg = run_last(OnlineMetric.from_matrix(inst.matrix), range(71))

for st in alg.steps:
    if st.chose_direct or st.terminal in (1, 61, 63):
        tag = "direct edge" if st.chose_direct else "tree path ok"
        print(f"tooth {st.terminal:2d}: tree path {st.d_Pv:5.2f} vs 7 x {st.d_vr:.2f}  -> {tag}")

rep = alg.stretch_and_cost_report()
print(f"\nworst stretch {rep['max_root_stretch']:.3f}, tree {rep['cost_T']:.2f}, "
      f"direct edges {rep['cost_A']:.2f}, MST {rep['mst_cost']:.2f}")
