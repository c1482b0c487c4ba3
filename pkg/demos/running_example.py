"""
Eight flows, five queries, seven counters
==========================================

Builds the concept lattice of the bundled eight-flow table, maps each query
to its target concept and prints which flows end up sharing a counter.
"""

from conceptmeter import build, compute_support, running_example

ctx, queries = running_example()
lat = build(ctx)
support = compute_support(lat, queries)
print(f"{ctx.n_flows} flows, {ctx.n_matchfields} matchfield values, {len(lat)} concepts")

# every concept carries a bit per query: is the query inside its intent?
for c in lat.sorted_top_down():
    tags = []
    if c.id in support.target_set:
        tags.append("target")
    if c.id in support.projections:
        tags.append("projection")
    if c.id in support.grounds:
        tags.append("ground")
    intent = ",".join(ctx.labels(c.intent_set)) or "-"
    print(f"  c{c.id:<3} {support.vector_string(c.id)}  {{{intent}}}  {' '.join(tags)}")

# targets: the most general concept whose intent holds the query
for q in support.queries:
    t = support.targets[q.id]
    print(f"{q.label} -> c{t}, answer {sorted(ctx.flow_names(lat[t].extent_set))}")

# one counter per ground; f6 and f7 always travel together
for k, cell in enumerate(support.partition()):
    print(f"counter {k}: {' '.join(ctx.flow_names(cell))}")
