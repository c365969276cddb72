"""
Trapping sets of the (155,64) Tanner code
=========================================

Decode every weight-3 error pattern with Gallager B and group the failures
by the set of variables the decoder gets stuck on.
"""

import numpy as np

from tscover import load_code, code_profile, instanton_search, topological_ts_scan
from tscover.trapping import count_by_signature

H = load_code("tanner")
print(code_profile(H).as_dict())

# Weight 1 and 2 never fail: every single and double error is corrected.
for k in (1, 2):
    print(k, instanton_search(H.graph, k).num_failures)

# At weight 3 some patterns fail. Each lands in a set of 5 variables with 3
# unsatisfied checks, and every such set is hit by exactly one triple.
census = instanton_search(H.graph, 3)
print(census.num_failures, "failing triples")
print(count_by_signature(census.classes()))

ts = census.classes()[0]
print("variables", ts.variables, "odd checks", ts.odd_checks)

# The same sets come out of a purely graphical scan, with no decoding at all.
scan = topological_ts_scan(H.graph, 5, 3)
print(count_by_signature(scan))
print(sorted({r.cycle_length for r in scan if r.signature == (5, 3)}))

# Watch one failing pattern: the decoder oscillates between two halves of
# the (5,3) set and never clears it.
from tscover import gallager_b_decode
y = np.zeros(H.n, dtype=np.uint8)
y[list(census.failures[0][0])] = 1
trace = gallager_b_decode(H.graph, y)
print(trace.outcome, [sorted(s) for s in trace.supports[-2:]])
