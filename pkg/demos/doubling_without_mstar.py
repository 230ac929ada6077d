"""
Not knowing m*
==============

The doubling wrapper opens a fresh pool of 1, 2, 4, ... machines whenever
a simulate-ahead check says the current pool cannot absorb a new job.
Bursts of zero-laxity jobs whose width doubles each phase force it
through several intervals.
"""

from machmin import DoublingWrapper, EDFScheduler, GenSpec, generate, min_machines, simulate

inst = generate(GenSpec("adversarial_doubling", n=31, max_size=12, seed=1))
m_star = min_machines(inst)

d = DoublingWrapper(EDFScheduler)
res = simulate(d, inst)
print(f"m* = {m_star}; feasible = {res.feasible}")
print(f"intervals opened at {[str(t) for t in d.opened_at]}")
print(f"machines: {d.machines} = 2^{d.kappa} - 1, versus 4 m* = {4 * m_star}")
for t, job, size in d.rejections:
    print(f"  t={t}: job {job} does not fit a pool of {size}")
