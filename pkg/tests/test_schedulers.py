import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from machmin import (
    CMSScheduler, DoublingWrapper, EDFScheduler, HybridA, HybridAdaptive, Instance, Job, SJFScheduler,
    cms_step, doubling_wrap, edf_assignment, hybrid_a, min_machines, route, simulate,
    sjf_assignment, sub_cms, verify,
)
from machmin.schedulers import CmsState, cms_advance

from conftest import random_instance, small_instances

T = Instance.from_tuples

A, B, C = Job(0, 0, 5, 1), Job(1, 0, 3, 1), Job(2, 0, 9, 1)


def test_edf_assignment():
    assert edf_assignment([A, B, C], 2) == {1: 1, 2: 0}
    assert edf_assignment([], 3) == {}
    assert edf_assignment([Job(0, 0, 4, 1), Job(1, 0, 4, 1)], 1) == {1: 0}


def test_sjf_assignment():
    a, b, c = Job(0, 0, 9, 4), Job(1, 0, 9, 2), Job(2, 0, 9, 7)
    assert sjf_assignment([a, b, c], 1) == {1: 1}
    assert set(sjf_assignment([a, b, c], 3).values()) == {0, 1, 2}


def test_sjf_ranks_original_size():
    # job 0 (size 2) is half done, job 1 (size 3) untouched; both have 1..3 left
    inst = T([(0, 10, 2), (0, 10, 3)])
    s = SJFScheduler(1)
    s.arrive(list(inst), F(0), {0: F(2), 1: F(3)})
    assert s.decide(F(1), {0: F(1), 1: F(3)}).assignment == {1: 0}


def test_sub_cms_hand_traces():
    release = {1: 0, 2: 5}
    psi = sub_cms([1, 2], {2: [F(1), F(1)], 1: [F(0), F(1)]}, release, 1)
    assert psi == {2: 1, 1: 1}  # j2 inactive, j1 active; cursor would move to 2
    assert sub_cms([7], {7: [F(0), F(0)]}, {7: 3}, 1) == {7: 1}
    rel = {1: 0, 2: 1, 3: 2}
    psi = sub_cms([1, 2, 3], {i: [F(1, 2)] * 3 for i in rel}, rel, 2)
    assert psi == {1: 1, 2: 1, 3: 1}


def test_sub_cms_tie_break_latest_then_id_desc():
    rel = {1: 0, 2: 0}
    psi = sub_cms([1, 2], {1: [F(0), F(0)], 2: [F(0), F(0)]}, rel, 1)
    assert psi == {2: 1, 1: 2}


def test_cms_step_single_job():
    st = CmsState(2)
    st.add(Job(0, 0, 3, 1))
    assert st.budgets[0] == [F(2, 3)] * 3
    step = cms_step(st, F(0))
    assert step.psi == {0: 1} and step.active == [] and step.next_time == F(2, 3)
    cms_advance(st, step.next_time)
    step = cms_step(st, F(2, 3))
    assert step.active == [0] and step.next_time == F(5, 3)
    assert cms_advance(st, F(5, 3)) == [0]


def test_cms_step_zero_laxity():
    st = CmsState(1)
    st.add(Job(0, 0, 4, 4))
    step = cms_step(st, F(0))
    assert step.active == [0] and not step.failed and step.next_time == 4


def test_cms_step_arrival_cuts_horizon():
    st = CmsState(1)
    st.add(Job(0, 0, 10, 2))  # budgets 4 each
    step = cms_step(st, F(0), next_arrival=F(1))
    assert step.next_time == 1


def test_cms_two_job_hand_trace_fails_on_one_machine():
    # A=(0,4,2) budgets [1,1]; B=(1,4,3) zero laxity.  At t=2 A is active on
    # the forbidden machine 2.
    res = simulate(CMSScheduler(1), T([(0, 4, 2), (1, 4, 3)]))
    assert res.failure.reason == "forbidden machine"
    assert res.failure.time == 2 and res.failure.job == 0


def test_cms_two_job_hand_trace_two_machines():
    inst = T([(0, 4, 2), (1, 4, 3)])
    res = simulate(CMSScheduler(2), inst)
    assert res.feasible
    got = sorted((p.start, p.end, p.machine, p.job) for p in res.schedule)
    assert got == [(F(2, 3), 1, 1, 0), (1, 4, 1, 1), (F(5, 3), F(10, 3), 2, 0)]
    assert verify(res.schedule, inst, 2)


def test_cms_trace_budgets():
    s = CMSScheduler(3, trace=True)
    inst = T([(0, 10, 2), (1, 9, 5), (2, 6, 3)])
    res = simulate(s, inst)
    for j in inst:
        assert s.initial_budgets[j.id] == F(j.laxity, 4)
    last = {}
    for entry in res.trace:
        for jid, bs in entry["budgets"].items():
            assert all(b >= 0 for b in bs)
            if jid in last:
                assert all(x <= y for x, y in zip(bs, last[jid]))
            last[jid] = bs


def test_cms_rejects_zero_machines():
    with pytest.raises(ValueError):
        CMSScheduler(0)


def test_hybrid_pools():
    h = hybrid_a(16, 16, 8, 8)
    assert h.pool_sizes() == {"edf": 256, "sjf(1)": 128, "sjf(2)": 128, "cms": 128}
    assert h.machines == 640
    h2 = HybridA(2)
    assert set(h2.pool_sizes()) == {"edf", "cms"}


def test_hybrid_loose_jobs_only_use_edf():
    inst = T([(0, 10, 2), (1, 9, 3), (3, 20, 5), (4, 8, 1)])
    assert all(route(j, 4).tag == "EDF" for j in inst)
    h = HybridA(4, 1, 1, 1)
    res = simulate(h, inst)
    assert res.feasible
    assert all(p.machine <= 4 for p in res.schedule)


def test_hybrid_propagates_cms_failure():
    res = simulate(HybridA(1, 1, 1, 1), T([(0, 4, 2), (1, 4, 3)]))
    assert res.failure.source == "cms/cms" and res.failure.reason == "forbidden machine"


def test_doubling_single_job():
    d = doubling_wrap(EDFScheduler)
    res = simulate(d, T([(0, 3, 3)]))
    assert res.feasible and d.kappa == 1 and res.machines_used == 1


def test_doubling_opens_second_interval():
    d = doubling_wrap(EDFScheduler)
    res = simulate(d, T([(0, 4, 4), (1, 3, 2)]))
    assert res.feasible
    assert d.kappa == 2 and d.opened_at == [0, 1] and res.machines_used == 3
    assert {p.machine for p in res.pieces_of(1)} <= {2, 3}


def test_doubling_machine_count_geometric():
    inst = T([(0, 8, 8)] + [(1, 8, 7)] * 2 + [(2, 8, 6)] * 4)
    d = doubling_wrap(EDFScheduler)
    res = simulate(d, inst)
    assert res.feasible
    assert d.kappa == 3 and res.machines_used == 7
    inst = T([(0, 16, 16)] + [(1, 16, 15)] * 2 + [(2, 16, 14)] * 4 + [(3, 16, 13)] * 8)
    d = doubling_wrap(EDFScheduler)
    assert simulate(d, inst).feasible and d.kappa == 4 and d.machines == 15


@settings(max_examples=80, deadline=None)
@given(small_instances(max_n=6, horizon=14, max_p=5))
def test_doubling_invariants(inst):
    for base in (EDFScheduler, SJFScheduler, CMSScheduler):
        d = DoublingWrapper(base)
        res = simulate(d, inst)
        assert res.feasible  # a fresh interval can always take a lone job
        assert verify(res.schedule, inst, res.machines_used)
        assert d.machines == 2 ** d.kappa - 1
        # every opening was forced by a rejected lookahead on the previous size
        assert [size for _, _, size in d.rejections] == [2 ** k for k in range(d.kappa - 1)]


def test_hybrid_adaptive_starts_in_cms():
    inst = T([(0, 10, 2), (2, 10, 3), (6, 20, 5)])
    assert min_machines(inst) == 1
    h = HybridAdaptive()
    res = simulate(h, inst)
    # with the estimate still at 1 every relative laxity is <= 1/m_hat
    assert res.feasible and list(h.runs) == ["cms"] and h.m_hat == 1


def test_hybrid_adaptive_bounds():
    rng = random.Random(3)
    for _ in range(25):
        inst = random_instance(rng, 30, 40, 15)
        h = HybridAdaptive()
        res = simulate(h, inst)
        assert res.feasible and verify(res.schedule, inst, res.machines_used)
        assert res.machines_used <= 4 * h.parameterized_machines()
        assert [m for _, m in h.m_hat_history] == [2 ** (k + 1) for k in range(len(h.m_hat_history))]


def test_hybrid_adaptive_rebuckets_new_arrivals_only():
    h = HybridAdaptive(1, 1, 1)
    # a burst of zero-laxity jobs forces m_hat up; the late job is routed with the new estimate
    inst = T([(0, 4, 4)] * 4 + [(5, 25, 18)])
    res = simulate(h, inst)
    assert res.feasible and h.m_hat >= 4
    assert h.owner[4] == str(route(inst.by_id()[4], h.m_hat)).lower()
    assert all(h.owner[i] == "cms" for i in range(4))


@settings(max_examples=300, deadline=None)
@given(small_instances(max_n=6, horizon=14, max_p=5))
def test_edf_one_machine_optimal(inst):
    if min_machines(inst) == 1:
        assert simulate(EDFScheduler(1), inst).feasible


def _clip(schedule, t):
    out = []
    for p in schedule:
        if p.start < t:
            out.append((p.start, min(p.end, t), p.machine, p.job))
    return sorted(out)


@settings(max_examples=60, deadline=None)
@given(small_instances(max_n=6, horizon=14, max_p=5), st.integers(1, 13))
def test_online_prefix(inst, cut):
    prefix = Instance(j for j in inst if j.r < cut)
    for make in (lambda: EDFScheduler(2), lambda: SJFScheduler(2), lambda: CMSScheduler(2),
                 lambda: HybridA(2, 1, 1, 1), lambda: DoublingWrapper(EDFScheduler)):
        full, part = simulate(make(), inst), simulate(make(), prefix)
        horizon = F(cut)
        for r in (full, part):
            if r.failure is not None:
                horizon = min(horizon, r.failure.time)
        assert _clip(full.schedule, horizon) == _clip(part.schedule, horizon)


def test_sub_cms_deterministic():
    rng = random.Random(0)
    for _ in range(50):
        rel = {i: rng.randint(0, 5) for i in range(6)}
        budgets = {i: [F(rng.randint(0, 2), 3) for _ in range(4)] for i in rel}
        assert sub_cms(list(rel), budgets, rel, 3) == sub_cms(list(reversed(list(rel))), budgets, rel, 3)


def test_doubling_allocates_factory_machine_count():
    inst = T([(0, 4, 4)] * 3 + [(1, 4, 3)] * 4)
    d = DoublingWrapper(lambda k: EDFScheduler(3 * k))
    res = simulate(d, inst)
    assert res.feasible and d.kappa == 2
    assert d.machines == 3 * (2 ** d.kappa - 1) == res.machines_used
    assert verify(res.schedule, inst, res.machines_used)
