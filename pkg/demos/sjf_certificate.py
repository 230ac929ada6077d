"""
Why SJF fails: a checkable certificate
======================================

When SJF misses a deadline, the times the failing job sat idle and the
jobs that ran then form a weakly critical pair.  Such a pair is a lower
bound witness on m*, and the checker confirms it from scratch.
"""

from fractions import Fraction

from machmin import (
    GenSpec, SJFScheduler, check_weakly_critical, extract_sjf_certificate, generate,
    implied_lower_bound, min_machines, simulate, sjf_machine_bound,
)

lam1, lam2 = Fraction(1, 16), Fraction(1, 4)
# keep every relative laxity strictly below lam2 so all jobs are (1 - lam2)-tight
for seed in range(1, 100):
    inst = generate(GenSpec("bucketed", n=12, horizon=40, max_size=30, seed=seed,
                            l1=lam1, l2=lam2 - Fraction(1, 100)))
    m_star = min_machines(inst)
    run = simulate(SJFScheduler(m_star), inst)
    if run.failure is not None:
        break

print(f"seed {seed}: m* = {m_star}, SJF on {m_star} machines fails: {run.failure}")
pair = extract_sjf_certificate(run, inst, lam1, lam2)
print(pair.to_json())
print("weakly critical:", bool(check_weakly_critical(pair, inst)))
print(f"bound shape mu / log(1/beta) = {implied_lower_bound(pair.mu, pair.beta, pair.alpha):.6f}")
print(f"SJF machine factor for this range: {sjf_machine_bound(lam1, lam2):.6f}")
