"""
Margulis code and the unique-edge schedule
==========================================

The (2640,1320) Margulis code has 1320 (4,4) sets, one per 8-cycle. Each
one has an edge no other (4,4) set uses, so swapping that edge breaks it
without disturbing the others.
"""

from tscover import code_profile, critical_number, eliminate_trapping_sets, load_code, topological_ts_scan
from tscover.trapping import count_by_signature, sets_of_signature

H = load_code("margulis")
print(code_profile(H).as_dict())

scan = topological_ts_scan(H.graph, 5, 5)
print(count_by_signature(scan))
sets = sets_of_signature(scan, (4, 4))

# Gallager B fails on 4 errors placed on one of these sets, but not on 3.
print(critical_number(H.graph, sets[0], halo_radius=0))

cover, plan = eliminate_trapping_sets(H, sets, schedule="unique-edge", seed=0)
print(len(plan.swapped), "swaps")
print(code_profile(cover.matrix).as_dict())

# The (4,4) sets are gone; the cover's smallest sets are now (5,5).
print(count_by_signature(topological_ts_scan(cover.matrix.graph, 5, 5)))
