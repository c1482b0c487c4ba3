"""
Adding a flow without rebuilding
=================================

Inserts f8 = {h2, h7, h9} into the running example and shows what moves:
concepts that only absorb the flow, new concepts with their genitors, the
retargeted query and where the new flow is grounded.
"""

from conceptmeter import add_flow, build, compute_support, running_example

ctx, queries = running_example()
lat = build(ctx)
support = compute_support(lat, queries)
name = lambda c: "{" + ",".join(ctx.labels(lat[c].intent_set)) + "}"  # noqa: E731

report = add_flow(lat, ["h2", "h7", "h9"], name="f8", support=support)

print("modified:", ", ".join(f"c{c} {name(c)}" for c in report.modified))
for new, genitor in report.new:
    print(f"new c{new} {name(new)} from genitor c{genitor} {name(genitor)}")
for q, old, new in report.retargeted:
    print(f"{support.queries[q].label} moves from c{old} to c{new}")
print(f"f8 grounded at c{report.ground} {name(report.ground)}")
print(f"{len(lat)} concepts, {len(support.grounds)} counters")

# the incremental result is the same as starting over
fresh = build(ctx)
assert support.canonical(lat) == compute_support(fresh, queries).canonical(fresh)
print("matches a rebuild from scratch")
