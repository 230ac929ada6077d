"""Offline feasibility and the minimum machine count m*.

Preemptive migratory feasibility on identical machines reduces to a
bipartite flow: jobs on one side, elementary slots between consecutive
release/deadline points on the other.  All capacities are integers after
scaling by the denominator of the speed, so the flow is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional

import networkx as nx

from .core import Instance, Interval, Number
from .engine import SchedulePiece

_SRC, _SNK = "s", "t"


@dataclass
class FeasibilityResult:
    feasible: bool
    max_flow_value: Fraction  # work units
    witness: Optional[list[SchedulePiece]] = None
    deficit: Optional[tuple[Interval, Fraction]] = None

    def __bool__(self):
        return self.feasible


def _event_points(inst: Instance) -> list[int]:
    return sorted({j.r for j in inst} | {j.d for j in inst})


def _network(inst: Instance, m: int, speed: Fraction):
    scale = speed.denominator
    num = speed.numerator
    pts = _event_points(inst)
    g = nx.DiGraph()
    for j in inst:
        g.add_edge(_SRC, ("j", j.id), capacity=j.p * scale)
    for a, b in zip(pts, pts[1:]):
        g.add_edge(("s", a), _SNK, capacity=m * num * (b - a))
    for j in inst:
        for a, b in zip(pts, pts[1:]):
            if j.r <= a and b <= j.d:
                g.add_edge(("j", j.id), ("s", a), capacity=num * (b - a))
    return g, pts, scale


def wrap_around(slot: Interval, work: dict[int, Fraction], m: int,
                speed: Number = 1) -> list[SchedulePiece]:
    """Pack per-job work into ``slot`` on ``m`` machines, McNaughton style.

    Each job's duration must fit the slot and the total must fit ``m``
    copies of it.  Jobs are laid out in id order.
    """
    speed = Fraction(speed)
    out = []
    machine, cur = 1, slot.start
    for jid in sorted(work):
        dur = work[jid] / speed
        if dur <= 0:
            continue
        if dur > slot.length:
            raise ValueError(f"job {jid} needs {dur} > slot length {slot.length}")
        end = cur + dur
        if end <= slot.end:
            out.append(SchedulePiece(Interval(cur, end), machine, jid))
            cur = end
        else:
            out.append(SchedulePiece(Interval(cur, slot.end), machine, jid))
            machine += 1
            cur = slot.start + (end - slot.end)
            out.append(SchedulePiece(Interval(slot.start, cur), machine, jid))
        if cur == slot.end:
            machine, cur = machine + 1, slot.start
    if out and max(p.machine for p in out) > m:
        raise ValueError("slot work exceeds machine capacity")
    return out


def feasible(inst: Instance, m: int, speed: Number = 1, want_witness: bool = False) -> FeasibilityResult:
    """Decide whether ``inst`` fits on ``m`` machines of the given speed."""
    if m < 1:
        raise ValueError("m must be >= 1")
    speed = Fraction(speed)
    if speed <= 0:
        raise ValueError("speed must be positive")
    total = inst.total_work
    if not inst.jobs:
        return FeasibilityResult(True, Fraction(0), [] if want_witness else None)
    g, pts, scale = _network(inst, m, speed)
    value, flow = nx.maximum_flow(g, _SRC, _SNK)
    ok = value == total * scale
    res = FeasibilityResult(ok, Fraction(value, scale))
    if ok and want_witness:
        pieces = []
        for a, b in zip(pts, pts[1:]):
            work = {}
            for j in inst:
                f = flow.get(("j", j.id), {}).get(("s", a), 0)
                if f:
                    work[j.id] = Fraction(f, scale)
            pieces += wrap_around(Interval(a, b), work, m, speed)
        res.witness = sorted(pieces, key=lambda p: (p.start, p.machine))
    elif not ok:
        _, (reach, _) = nx.minimum_cut(g, _SRC, _SNK)
        cut_slots = [n[1] for n in reach if isinstance(n, tuple) and n[0] == "s"]
        if cut_slots:
            lo = min(cut_slots)
            hi = pts[pts.index(max(cut_slots)) + 1]
        else:
            lo, hi = pts[0], pts[-1]
        res.deficit = (Interval(lo, hi), Fraction(total * scale - value, scale))
    return res


def demand_lower_bound(inst: Instance, speed: Number = 1) -> int:
    """Max over event-point windows [a, b] of ceil(contained work / (s (b - a)))."""
    if not inst.jobs:
        raise ValueError("empty instance")
    speed = Fraction(speed)
    pts = _event_points(inst)
    best = 1
    for x, a in enumerate(pts):
        for b in pts[x + 1:]:
            w = sum(j.p for j in inst if j.r >= a and j.d <= b)
            if w:
                best = max(best, math.ceil(Fraction(w) / (speed * (b - a))))
    return best


def min_machines(inst: Instance, speed: Number = 1) -> int:
    """Smallest m with ``feasible(inst, m, speed)``; binary search from the demand bound."""
    if not inst.jobs:
        raise ValueError("empty instance")
    lo, hi = demand_lower_bound(inst, speed), len(inst)
    if lo > hi or not feasible(inst, hi, speed):
        # more than n machines never helps: a job runs on one machine at a time
        raise ValueError("instance is infeasible at this speed on any number of machines")
    while lo < hi:
        mid = (lo + hi) // 2
        if feasible(inst, mid, speed):
            hi = mid
        else:
            lo = mid + 1
    return lo


BRUTE_FORCE_MAX_JOBS = 6
BRUTE_FORCE_MAX_HORIZON = 16


def brute_force_min_machines(inst: Instance) -> int:
    """m* by exhaustive search over unit-slot schedules (unit speed).

    With integer data some optimal preemptive schedule runs whole jobs in
    whole unit slots, so trying every set of at most m jobs per unit slot
    is exhaustive.  Guarded to tiny instances.
    """
    n = len(inst)
    if n == 0:
        raise ValueError("empty instance")
    if n > BRUTE_FORCE_MAX_JOBS or inst.horizon > BRUTE_FORCE_MAX_HORIZON:
        raise ValueError(f"brute force limited to {BRUTE_FORCE_MAX_JOBS} jobs "
                         f"and horizon {BRUTE_FORCE_MAX_HORIZON}")
    jobs = list(inst.jobs)
    t0 = min(j.r for j in jobs)
    t_end = max(j.d for j in jobs)

    def fits(m: int) -> bool:
        @lru_cache(maxsize=None)
        def go(t: int, rem: tuple[int, ...]) -> bool:
            if not any(rem):
                return True
            if t >= t_end:
                return False
            for k, j in enumerate(jobs):
                if rem[k] and rem[k] > j.d - max(t, j.r):
                    return False
            alive = [k for k, j in enumerate(jobs) if rem[k] and j.r <= t < j.d]
            for mask in range(1 << len(alive)):
                if bin(mask).count("1") > m:
                    continue
                nxt = list(rem)
                for b, k in enumerate(alive):
                    if mask >> b & 1:
                        nxt[k] -= 1
                if go(t + 1, tuple(nxt)):
                    return True
            return False

        return go(t0, tuple(j.p for j in jobs))

    for m in range(1, n + 1):
        if fits(m):
            return m
    raise AssertionError("n machines always suffice for valid jobs")
