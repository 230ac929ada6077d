"""
Routing jobs by relative laxity
===============================

Jobs are split by how much slack they have relative to their lifespan.
Loose jobs go to EDF, very tight ones to CMS, and everything in between
to one of a few SJF buckets.  Here we look at a random instance, its
exact optimum, and how the combined scheduler spends its machines.
"""

from collections import Counter
from fractions import Fraction

from machmin import GenSpec, HybridA, bucket_count, generate, min_machines, route, simulate, verify

inst = generate(GenSpec("uniform", n=40, horizon=60, max_size=30, seed=3))
m_star = min_machines(inst)
print(f"{len(inst)} jobs, m* = {m_star}, SJF buckets = {bucket_count(m_star)}")

# routing is a pure function of (job, m*)
print(Counter(str(route(j, m_star)) for j in inst))

# each pool gets a constant multiple of m* machines
h = HybridA(m_star)
print("pools:", h.pool_sizes(), "total", h.machines)

res = simulate(h, inst)
assert res.feasible and verify(res.schedule, inst, res.machines_used)

# the pool reservation is generous; count how many machines ever ran work
print(f"machines busy: {res.machines_busy} of {res.machines_used}")
print("busy / (m* * max(1, buckets)) =",
      Fraction(res.machines_busy, m_star * max(1, bucket_count(m_star))))
