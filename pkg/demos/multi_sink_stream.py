"""Sources and sinks arriving together.

Every source hangs off the nearest earlier terminal of higher class; when a
new sink shows up, sources that are now more than 3x too far from the sink
set get a shortcut edge.
"""
from onbab import Mlast, generate

inst = generate("euclidean", seed=3, n=60, roles="multi-sink", p_sink=0.15)
m = inst.online()
alg = Mlast(m)
shortcuts = 0
for a in inst.arrivals:
    m.reveal_until(a.id)
    st = alg.insert(a.id, "sink" if a.role == "sink" else "source")
    if st.a_edges:
        shortcuts += len(st.a_edges)
        print(f"{a.role:6s} {a.id:2d} (class {st.klass}) added shortcuts {[(x, s) for x, s, _ in st.a_edges]}")

rep = alg.lemma6_report()
print(f"\n{len(alg.sinks)} sinks, {len(alg.sources)} sources, {shortcuts} shortcuts")
print(f"worst source stretch {rep['max_sink_stretch']:.3f}; cost / sum of 2^class = {rep['C']:.3f}")
