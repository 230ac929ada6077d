"""
Budget burning in CMS
=====================

Each job splits its laxity evenly into delay budgets, one per machine
plus a forbidden extra one.  A job only runs on its assigned machine once
the budget there is used up.  Two overlapping jobs show both outcomes.
"""

from machmin import CMSScheduler, Instance, simulate

# A = (0, 4, 2) has laxity 2; B = (1, 4, 3) has none
inst = Instance.from_tuples([(0, 4, 2), (1, 4, 3)])

for m_cms in (1, 2):
    s = CMSScheduler(m_cms, trace=True)
    res = simulate(s, inst)
    print(f"--- m_cms = {m_cms}: initial budgets {s.initial_budgets}")
    for e in res.trace:
        if e["event"] == "decide":
            print(f"t={e['time']}: psi={e['psi']} active={e['active']} failed={e['failed']}")
    if res.feasible:
        for p in res.schedule:
            print(f"  job {p.job} on machine {p.machine} during [{p.start}, {p.end})")
    else:
        print("  failure:", res.failure)

# With one machine A's second budget runs out at t=2 while B holds
# machine 1, so A lands on the forbidden machine.  With two machines A
# finishes on machine 2 at 10/3 and B on machine 1 right at its deadline.
