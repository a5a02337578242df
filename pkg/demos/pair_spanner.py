"""An online spanner for 64 random pairs.

Pairs arrive one at a time; the spanner keeps each pair within
4 log2(k) of its true distance using a near-linear number of edges.
"""
import math

from onbab import generate, run_spanner

inst = generate("euclidean", seed=11, n=128, roles="pairs")
for k in ("auto", None):
    sp = run_spanner(inst.online(), inst.pairs(), k=k)
    st = sp.stats()
    mode = "known k" if k else "unknown k"
    print(f"{mode:9s}: {st['edge_count']} edges for 64 pairs, worst stretch {st['max_pair_stretch']:.2f} "
          f"(allowed {4 * math.log2(64):.0f}), cost {st['cost_H']:.1f} vs lower bound {sp.steiner_forest_lower_bound():.1f}")

print("\nper scale: augmentation edges, centers, meta-graph girth")
for j, s in st["per_scale"].items():
    print(f"  2^{j:<2d} A={s['A']:3d} Z={s['Z']:3d} girth={s['girth']}")
