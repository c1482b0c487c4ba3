"""
How many counters does a workload need?
========================================

Generates 1000-flow tables from the bundled 12-field spec and counts the
registers needed for 100 queries as queries get less specific. Takes under
a minute.
"""

import numpy as np

from conceptmeter import benchgen

spec = benchgen.default_spec(num_flows=1000, num_queries=100)
pcts = [0.1, 0.3, 0.5, 0.7, 0.9]
rows = benchgen.sweep(spec, pcts, [100], seeds=[1, 2])

print(f"{'wildcard_pct':>12}{'mean N_c':>10}{'of |F|':>8}")
for pct in pcts:
    n_c = np.mean([r["N_c"] for r in rows if r["wildcard_pct"] == pct])
    print(f"{pct:>12}{n_c:>10.1f}{1000:>8}")

# near-exact queries each match a handful of flows and leave the rest
# unmatched; one- or two-field queries overlap in many ways, so most flows
# end up with a query signature of their own
