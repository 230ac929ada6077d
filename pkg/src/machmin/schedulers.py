"""Online policies: EDF, SJF, CMS, the hybrid algorithm and the doubling wrapper."""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Optional

from .core import Job, Route, bucket_count, route
from .engine import Decision, Failure, OnlineScheduler, lookahead_feasible


def _fill(ranked: Iterable[Job], m: int) -> dict[int, int]:
    return {k: j.id for k, j in enumerate(ranked, start=1) if k <= m}


def edf_assignment(alive: Iterable[Job], m: int) -> dict[int, int]:
    """Run the ``m`` alive jobs with smallest ``(d, id)`` on machines 1..m."""
    return _fill(sorted(alive, key=lambda j: (j.d, j.id))[:m], m)


def sjf_assignment(alive: Iterable[Job], m: int) -> dict[int, int]:
    """Like EDF but ranked by original size ``p`` (never the remaining work)."""
    return _fill(sorted(alive, key=lambda j: (j.p, j.id))[:m], m)


class _ListScheduler(OnlineScheduler):
    rank: Callable

    def __init__(self, m: int):
        super().__init__()
        if m < 1:
            raise ValueError(f"{self.name} needs at least one machine")
        self.m = m

    @property
    def machines(self) -> int:
        return self.m

    def decide(self, now, alive):
        live = [self.jobs[i] for i in alive if i in self.jobs]
        return Decision(type(self).rank(live, self.m))


class EDFScheduler(_ListScheduler):
    name = "edf"
    rank = staticmethod(edf_assignment)


class SJFScheduler(_ListScheduler):
    name = "sjf"
    rank = staticmethod(sjf_assignment)


# --- CMS -------------------------------------------------------------------


@dataclass
class CmsState:
    """Mutable state of the budget-burning algorithm.

    ``budgets[j][i - 1]`` is job j's remaining delay budget on machine i,
    for i in 1..m_cms+1.  Machine m_cms+1 is forbidden.
    """

    m_cms: int
    budgets: dict[int, list[Fraction]] = field(default_factory=dict)
    remaining: dict[int, Fraction] = field(default_factory=dict)
    release: dict[int, int] = field(default_factory=dict)
    psi: dict[int, int] = field(default_factory=dict)
    last: Fraction = Fraction(0)

    def add(self, job: Job):
        share = Fraction(job.laxity, self.m_cms + 1)
        self.budgets[job.id] = [share] * (self.m_cms + 1)
        self.remaining[job.id] = Fraction(job.p)
        self.release[job.id] = job.r

    def active(self) -> list[int]:
        return [j for j, i in self.psi.items() if self.budgets[j][i - 1] == 0]


def sub_cms(alive: Iterable[int], budgets: Mapping[int, list[Fraction]],
            release: Mapping[int, int], m_cms: int) -> dict[int, int]:
    """Assign each alive job a machine index, latest arrival first.

    The cursor only moves past a machine once a job with zero budget for it
    (an active job) lands there, so several inactive jobs can share an
    index.  Iteration stops once the cursor passes the forbidden machine;
    failure is certain at that point and is detected by the caller.
    """
    order = sorted(alive, key=lambda j: (release[j], j), reverse=True)
    psi: dict[int, int] = {}
    i = 1
    for j in order:
        if i > m_cms + 1:
            break
        psi[j] = i
        if budgets[j][i - 1] == 0:
            i += 1
    return psi


@dataclass
class CmsStep:
    psi: dict[int, int]
    active: list[int]
    next_time: Optional[Fraction]
    failed: bool


def cms_step(state: CmsState, now: Fraction, next_arrival: Optional[Fraction] = None,
             speed: Fraction = Fraction(1)) -> CmsStep:
    """Recompute the assignment at ``now`` and find the next event.

    ``state.remaining`` holds remaining work; it drains at ``speed`` while
    budgets burn at rate 1.  Does not advance the state; see :func:`cms_advance`.
    """
    alive = [j for j, w in state.remaining.items() if w > 0]
    state.psi = sub_cms(alive, state.budgets, state.release, state.m_cms)
    state.last = Fraction(now)
    forbidden = state.m_cms + 1
    active = state.active()
    if any(state.psi[j] == forbidden for j in active) or len(state.psi) < len(alive):
        return CmsStep(dict(state.psi), active, None, True)
    spans = [state.budgets[j][i - 1] for j, i in state.psi.items() if state.budgets[j][i - 1] > 0]
    spans += [state.remaining[j] / speed for j in active]
    nxt = now + min(spans) if spans else None
    if next_arrival is not None and (nxt is None or next_arrival < nxt):
        nxt = Fraction(next_arrival)
    return CmsStep(dict(state.psi), active, nxt, False)


def cms_advance(state: CmsState, until: Fraction, speed: Fraction = Fraction(1)) -> list[int]:
    """Burn budgets / process work from ``state.last`` to ``until``.

    Returns the jobs that completed.
    """
    span = Fraction(until) - state.last
    done = []
    for j, i in state.psi.items():
        b = state.budgets[j]
        if b[i - 1] > 0:
            b[i - 1] -= span
            if b[i - 1] < 0:
                raise RuntimeError(f"budget of job {j} on machine {i} overdrawn")
        else:
            state.remaining[j] -= speed * span
            if state.remaining[j] <= 0:
                done.append(j)
    for j in done:
        del state.remaining[j]
        del state.budgets[j]
        del state.psi[j]
    state.last = Fraction(until)
    return done


class CMSScheduler(OnlineScheduler):
    """Budget-burning CMS on ``m_cms`` machines plus one forbidden machine.

    With ``trace=True`` every decision is logged with the full assignment
    (including inactive jobs sharing an index) and all budgets.
    """

    name = "cms"

    def __init__(self, m_cms: int, trace: bool = False):
        super().__init__()
        if m_cms < 1:
            raise ValueError("CMS needs m_cms >= 1")
        self.state = CmsState(m_cms)
        self.record = trace
        self.log: list[dict] = []
        self.initial_budgets: dict[int, Fraction] = {}

    @property
    def machines(self) -> int:
        return self.state.m_cms

    def arrive(self, batch, now, alive):
        super().arrive(batch, now, alive)
        for j in sorted(batch, key=lambda j: j.id):
            self.state.add(j)
            self.initial_budgets[j.id] = self.state.budgets[j.id][0]
        if self.record:
            self.log.append({"time": now, "event": "arrival", "jobs": [j.id for j in batch],
                             "budgets": {j.id: list(self.state.budgets[j.id]) for j in batch}})

    def decide(self, now, alive):
        st = self.state
        for j in list(st.remaining):
            if j not in alive:
                del st.remaining[j], st.budgets[j]
        # the engine tracks remaining time (work / speed), so CMS runs at unit rate on it
        st.remaining = {j: Fraction(alive[j]) for j in st.remaining}
        step = cms_step(st, now)
        if self.record:
            self.log.append({
                "time": now, "event": "decide", "psi": dict(step.psi), "active": list(step.active),
                "budgets": {j: list(b) for j, b in st.budgets.items()}, "failed": step.failed,
            })
        if step.failed:
            bad = next((j for j in step.active if step.psi[j] == st.m_cms + 1), None)
            return Decision({}, failure=Failure(now, self.name, "forbidden machine", bad))
        return Decision({step.psi[j]: j for j in step.active}, wakeup=step.next_time)

    def advance(self, start, end):
        # remaining is tracked in time units here, so drain at rate 1
        cms_advance(self.state, end)

    def trace(self):
        return self.log if self.record else None


# --- hybrid algorithm A ------------------------------------------------------


class _Composite(OnlineScheduler):
    """Disjoint pools behind one machine numbering."""

    def __init__(self):
        super().__init__()
        self.pools: dict[str, tuple[OnlineScheduler, int]] = {}  # name -> (sched, offset)
        self.owner: dict[int, str] = {}

    def _add_pool(self, name: str, sched: OnlineScheduler, offset: int):
        self.pools[name] = (sched, offset)

    def _own(self, name: str, alive):
        return {i: w for i, w in alive.items() if self.owner.get(i) == name}

    def decide(self, now, alive):
        assignment: dict[int, int] = {}
        wake = None
        for name, (sched, offset) in self.pools.items():
            sub = self._own(name, alive)
            if not sub:
                continue
            dec = sched.decide(now, sub)
            if dec.failure is not None:
                f = dec.failure
                return Decision({}, failure=Failure(f.time, f"{name}/{f.source}", f.reason, f.job))
            for m, i in dec.assignment.items():
                assignment[m + offset] = i
            if dec.wakeup is not None and (wake is None or dec.wakeup < wake):
                wake = dec.wakeup
        return Decision(assignment, wake)

    def advance(self, start, end):
        for sched, _ in self.pools.values():
            sched.advance(start, end)


def _pool_name(r: Route) -> str:
    return str(r).lower()


class HybridA(_Composite):
    """The combined scheduler with known ``m_star``: EDF, one SJF pool per bucket, CMS."""

    name = "hybrid"

    def __init__(self, m_star: int, c_edf: int = 16, c_sjf: int = 8, c_cms: int = 8,
                 trace: bool = False):
        super().__init__()
        if m_star < 1 or min(c_edf, c_sjf, c_cms) < 1:
            raise ValueError("m_star and pool constants must be >= 1")
        self.m_star = m_star
        self.constants = (c_edf, c_sjf, c_cms)
        offset = 0
        self._add_pool("edf", EDFScheduler(c_edf * m_star), offset)
        offset += c_edf * m_star
        for i in range(1, bucket_count(m_star) + 1):
            self._add_pool(f"sjf({i})", SJFScheduler(c_sjf * m_star), offset)
            offset += c_sjf * m_star
        self.cms = CMSScheduler(c_cms * m_star, trace=trace)
        self._add_pool("cms", self.cms, offset)
        self.total = offset + c_cms * m_star

    @property
    def machines(self) -> int:
        return self.total

    def pool_sizes(self) -> dict[str, int]:
        return {name: s.machines for name, (s, _) in self.pools.items()}

    def arrive(self, batch, now, alive):
        super().arrive(batch, now, alive)
        groups: dict[str, list[Job]] = {}
        for j in batch:
            name = _pool_name(route(j, self.m_star))
            self.owner[j.id] = name
            groups.setdefault(name, []).append(j)
        for name, jobs in groups.items():
            self.pools[name][0].arrive(jobs, now, self._own(name, alive))

    def trace(self):
        return self.cms.trace()


def hybrid_a(m_star: int, c_edf: int = 16, c_sjf: int = 8, c_cms: int = 8) -> HybridA:
    return HybridA(m_star, c_edf, c_sjf, c_cms)


# --- doubling ---------------------------------------------------------------


@dataclass
class _Era:
    start: Fraction
    size: int
    offset: int
    sched: OnlineScheduler
    jobs: list[int] = field(default_factory=list)


class DoublingWrapper(OnlineScheduler):
    """Run ``factory(m)`` without knowing m.

    Interval k runs ``factory(2**(k-1))`` on its own fresh machines (as many
    as that scheduler uses) and owns every job arriving while it is current.  On each arrival the current interval is simulated
    ahead with the newcomer and no further arrivals; if that fails, the
    next interval opens at this time and takes the newcomer.

    ``allocate(size) -> offset`` hands out machine blocks; pass a shared one
    when several wrappers live side by side.
    """

    name = "doubling"

    def __init__(self, factory: Callable[[int], OnlineScheduler], speed=1,
                 allocate: Optional[Callable[[int], int]] = None, label: str = ""):
        super().__init__()
        self.factory = factory
        self.speed = Fraction(speed)
        self._next_free = 0
        self.allocate = allocate or self._allocate_local
        self.label = label
        self.eras: list[_Era] = []
        self.owner: dict[int, int] = {}
        self.opened_at: list[Fraction] = []
        self.rejections: list[tuple[Fraction, int, int]] = []  # (time, job, size that failed)

    def _allocate_local(self, size: int) -> int:
        off = self._next_free
        self._next_free += size
        return off

    def _open(self, now: Fraction):
        size = 2 ** len(self.eras)
        sched = self.factory(size)
        era = _Era(Fraction(now), size, self.allocate(sched.machines), sched)
        self.eras.append(era)
        self.opened_at.append(Fraction(now))
        return era

    @property
    def kappa(self) -> int:
        return len(self.eras)

    @property
    def current_size(self) -> int:
        return self.eras[-1].size if self.eras else 0

    @property
    def machines(self) -> int:
        return sum(e.sched.machines for e in self.eras)

    def _own(self, k: int, alive):
        return {i: w for i, w in alive.items() if self.owner.get(i) == k}

    def arrive(self, batch, now, alive):
        super().arrive(batch, now, alive)
        if not self.eras:
            self._open(now)
        for j in sorted(batch, key=lambda j: j.id):
            k = len(self.eras) - 1
            era = self.eras[k]
            trial = copy.deepcopy(era.sched)
            sub = {self.jobs[i]: w * self.speed for i, w in self._own(k, alive).items()}
            sub[j] = Fraction(j.p)
            trial.arrive([j], now, {i.id: w / self.speed for i, w in sub.items()})
            if not lookahead_feasible(trial, now, sub, self.speed):
                self.rejections.append((Fraction(now), j.id, era.size))
                era = self._open(now)
                k += 1
            self.owner[j.id] = k
            era.jobs.append(j.id)
            era.sched.arrive([j], now, {**self._own(k, alive), j.id: alive[j.id]})

    def decide(self, now, alive):
        assignment: dict[int, int] = {}
        wake = None
        for k, era in enumerate(self.eras):
            sub = self._own(k, alive)
            if not sub:
                continue
            dec = era.sched.decide(now, sub)
            if dec.failure is not None:
                f = dec.failure
                src = f"{self.label or self.name}[{k + 1}]/{f.source}"
                return Decision({}, failure=Failure(f.time, src, f.reason, f.job))
            for m, i in dec.assignment.items():
                assignment[m + era.offset] = i
            if dec.wakeup is not None and (wake is None or dec.wakeup < wake):
                wake = dec.wakeup
        return Decision(assignment, wake)

    def advance(self, start, end):
        for era in self.eras:
            era.sched.advance(start, end)


def doubling_wrap(factory: Callable[[int], OnlineScheduler], speed=1) -> DoublingWrapper:
    return DoublingWrapper(factory, speed)


class HybridAdaptive(OnlineScheduler):
    """The combined scheduler without a priori m*.

    Arrivals are routed with a running estimate ``m_hat``; each route tag
    gets its own doubling-wrapped sub-run.  Whenever a sub-run's current
    interval grows past ``c * m_hat`` for its pool constant ``c``, the
    estimate doubles.  Routing is frozen at arrival.
    """

    name = "hybrid-adaptive"

    def __init__(self, c_edf: int = 16, c_sjf: int = 8, c_cms: int = 8, speed=1):
        super().__init__()
        if min(c_edf, c_sjf, c_cms) < 1:
            raise ValueError("pool constants must be >= 1")
        self.constants = (c_edf, c_sjf, c_cms)
        self.speed = Fraction(speed)
        self.m_hat = 1
        self.m_hat_history: list[tuple[Fraction, int]] = []
        self.runs: dict[str, DoublingWrapper] = {}
        self.owner: dict[int, str] = {}
        self._next_free = 0

    def _allocate(self, size: int) -> int:
        off = self._next_free
        self._next_free += size
        return off

    def _constant(self, name: str) -> int:
        c_edf, c_sjf, c_cms = self.constants
        return {"edf": c_edf, "cms": c_cms}.get(name, c_sjf)

    def _run_for(self, name: str) -> DoublingWrapper:
        if name not in self.runs:
            factory = {"edf": EDFScheduler, "cms": CMSScheduler}.get(name, SJFScheduler)
            self.runs[name] = DoublingWrapper(factory, self.speed, self._allocate, label=name)
        return self.runs[name]

    @property
    def machines(self) -> int:
        return self._next_free

    def parameterized_machines(self, m_star: Optional[int] = None) -> int:
        """Machines :class:`HybridA` would reserve given ``m_star`` (default: final ``m_hat``)."""
        m = self.m_hat if m_star is None else m_star
        c_edf, c_sjf, c_cms = self.constants
        return (c_edf + c_sjf * bucket_count(m) + c_cms) * m

    def arrive(self, batch, now, alive):
        super().arrive(batch, now, alive)
        for j in sorted(batch, key=lambda j: j.id):
            name = _pool_name(route(j, self.m_hat))
            self.owner[j.id] = name
            run = self._run_for(name)
            run.arrive([j], now, {i: w for i, w in alive.items()
                                  if self.owner.get(i) == name})
            while run.current_size > self._constant(name) * self.m_hat:
                self.m_hat *= 2
                self.m_hat_history.append((Fraction(now), self.m_hat))

    def decide(self, now, alive):
        assignment: dict[int, int] = {}
        wake = None
        for name, run in self.runs.items():
            sub = {i: w for i, w in alive.items() if self.owner.get(i) == name}
            if not sub:
                continue
            dec = run.decide(now, sub)
            if dec.failure is not None:
                return dec
            assignment.update(dec.assignment)
            if dec.wakeup is not None and (wake is None or dec.wakeup < wake):
                wake = dec.wakeup
        return Decision(assignment, wake)

    def advance(self, start, end):
        for run in self.runs.values():
            run.advance(start, end)


def hybrid_a_adaptive(c_edf: int = 16, c_sjf: int = 8, c_cms: int = 8, speed=1) -> HybridAdaptive:
    return HybridAdaptive(c_edf, c_sjf, c_cms, speed)
