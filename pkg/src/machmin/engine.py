"""Event-driven simulation of online schedulers with exact verification.

The engine owns the clock.  A scheduler is a passive policy: it is told
about arrivals, asked for a machine assignment at every event, and told
how much time elapsed before the next one.  Between two events the
assignment is constant.
"""

from __future__ import annotations

import copy
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional

from .core import Instance, Interval, Job, Number


@dataclass(frozen=True, order=True)
class SchedulePiece:
    interval: Interval
    machine: int
    job: int

    @property
    def start(self) -> Fraction:
        return self.interval.start

    @property
    def end(self) -> Fraction:
        return self.interval.end


@dataclass(frozen=True)
class Failure:
    time: Fraction
    source: str  # "engine" for deadline misses, otherwise the scheduler/pool name
    reason: str
    job: Optional[int] = None


@dataclass
class Decision:
    assignment: dict[int, int]  # machine -> job id
    wakeup: Optional[Fraction] = None  # absolute time of next internal event
    failure: Optional[Failure] = None


class OnlineScheduler:
    """Base policy.  Subclasses override :meth:`decide` and optionally
    :meth:`arrive` / :meth:`advance`.

    ``alive`` maps job id -> remaining processing *time* at the run's speed.
    """

    name = "scheduler"

    def __init__(self):
        self.jobs: dict[int, Job] = {}

    @property
    def machines(self) -> int:
        raise NotImplementedError

    def arrive(self, batch: list[Job], now: Fraction, alive: Mapping[int, Fraction]) -> None:
        for j in batch:
            self.jobs[j.id] = j

    def decide(self, now: Fraction, alive: Mapping[int, Fraction]) -> Decision:
        raise NotImplementedError

    def advance(self, start: Fraction, end: Fraction) -> None:
        pass

    def trace(self) -> Optional[list]:
        return None


@dataclass
class RunResult:
    schedule: list[SchedulePiece]
    machines_used: int
    feasible: bool
    failure: Optional[Failure]
    events: int
    completions: dict[int, Fraction]
    speed: Fraction = Fraction(1)
    trace: Optional[list] = None

    @property
    def machines_busy(self) -> int:
        """Number of distinct machines that processed any work."""
        return len({p.machine for p in self.schedule})

    def pieces_of(self, job_id: int) -> list[SchedulePiece]:
        return [p for p in self.schedule if p.job == job_id]

    def to_dict(self) -> dict:
        f = self.failure
        return {
            "feasible": self.feasible,
            "machines_used": self.machines_used,
            "machines_busy": self.machines_busy,
            "events": self.events,
            "speed": str(self.speed),
            "failure": None if f is None else {
                "time": str(f.time), "source": f.source, "reason": f.reason, "job": f.job,
            },
            "completions": {str(k): str(v) for k, v in sorted(self.completions.items())},
            "schedule": [[str(p.start), str(p.end), p.machine, p.job] for p in self.schedule],
        }


class _PieceRecorder:
    def __init__(self):
        self.open: dict[int, list] = {}  # machine -> [job, start, end]
        self.done: list[SchedulePiece] = []

    def add(self, machine: int, job: int, start: Fraction, end: Fraction):
        cur = self.open.get(machine)
        if cur is not None and cur[0] == job and cur[2] == start:
            cur[2] = end
            return
        if cur is not None:
            self.done.append(SchedulePiece(Interval(cur[1], cur[2]), machine, cur[0]))
        self.open[machine] = [job, start, end]

    def finish(self) -> list[SchedulePiece]:
        for machine, (job, a, b) in self.open.items():
            self.done.append(SchedulePiece(Interval(a, b), machine, job))
        self.open = {}
        return sorted(self.done, key=lambda p: (p.start, p.machine))


def _run(scheduler: OnlineScheduler, arrivals: Iterable[Job], speed: Fraction,
         start: Optional[Fraction] = None,
         alive_init: Optional[Mapping[Job, Fraction]] = None) -> RunResult:
    pending = sorted(arrivals, key=lambda j: (j.r, j.id))
    pending.reverse()  # pop() from the end yields the earliest
    jobs: dict[int, Job] = {}
    rem: dict[int, Fraction] = {}  # remaining work
    for j, w in (alive_init or {}).items():
        jobs[j.id] = j
        rem[j.id] = Fraction(w)
    if start is not None:
        t = Fraction(start)
    elif pending:
        t = Fraction(pending[-1].r)
    else:
        t = Fraction(0)

    rec = _PieceRecorder()
    completions: dict[int, Fraction] = {}
    failure: Optional[Failure] = None
    events = 0

    while True:
        batch = []
        while pending and pending[-1].r <= t:
            j = pending.pop()
            jobs[j.id] = j
            rem[j.id] = Fraction(j.p)
            batch.append(j)
        times = {i: w / speed for i, w in rem.items()}
        if batch:
            scheduler.arrive(batch, t, times)
        if not rem:
            if not pending:
                break
            t = Fraction(pending[-1].r)
            continue

        dec = scheduler.decide(t, times)
        events += 1
        if dec.failure is not None:
            failure = dec.failure
            break
        running = set()
        for m, i in dec.assignment.items():
            if not 1 <= m <= scheduler.machines:
                raise RuntimeError(f"{scheduler.name}: machine {m} out of range")
            if i not in rem:
                raise RuntimeError(f"{scheduler.name}: job {i} is not alive at {t}")
            if i in running:
                raise RuntimeError(f"{scheduler.name}: job {i} on two machines at {t}")
            running.add(i)

        # a job is doomed once it cannot finish even if run continuously from now
        for i in sorted(rem):
            slack = speed * (jobs[i].d - t)
            if (rem[i] > slack) if i in running else (rem[i] >= slack):
                failure = Failure(t, "engine", "deadline", i)
                break
        if failure is not None:
            break

        nxt = []
        if pending:
            nxt.append(Fraction(pending[-1].r))
        if dec.wakeup is not None:
            nxt.append(dec.wakeup)
        for i, w in rem.items():
            if i in running:
                nxt.append(t + w / speed)
            else:
                nxt.append(jobs[i].d - w / speed)
        t_next = min(nxt)
        if t_next <= t:
            raise RuntimeError(f"{scheduler.name}: non-advancing event at {t}")

        for m, i in dec.assignment.items():
            rec.add(m, i, t, t_next)
            rem[i] -= speed * (t_next - t)
            if rem[i] == 0:
                completions[i] = t_next
                del rem[i]
        scheduler.advance(t, t_next)
        t = t_next

    return RunResult(
        schedule=rec.finish(),
        machines_used=scheduler.machines,
        feasible=failure is None and not rem and not pending,
        failure=failure,
        events=events,
        completions=completions,
        speed=speed,
        trace=scheduler.trace(),
    )


def simulate(scheduler: OnlineScheduler, inst: Instance, speed: Number = 1) -> RunResult:
    """Drive ``scheduler`` over ``inst`` and record what it does."""
    return _run(scheduler, inst.jobs, Fraction(speed))


def lookahead_feasible(snapshot: OnlineScheduler, now: Number,
                       alive: Mapping[Job, Fraction], speed: Number = 1) -> bool:
    """Would ``snapshot`` finish every alive job if nothing else arrived?

    ``alive`` maps each alive job to its remaining *work*.  The snapshot is
    cloned; the caller's scheduler is never touched.
    """
    if not alive:
        return True
    clone = copy.deepcopy(snapshot)
    res = _run(clone, (), Fraction(speed), start=Fraction(now), alive_init=alive)
    return res.feasible


@dataclass
class VerifyReport:
    ok: bool
    violation: Optional[str] = None
    detail: str = ""

    def __bool__(self):
        return self.ok


def verify(schedule: Iterable[SchedulePiece], inst: Instance, m: int,
           speed: Number = 1) -> VerifyReport:
    """Check a schedule against ``inst`` on ``m`` machines of the given speed.

    Returns the first violation found, in the order: unknown job, machine
    index, lifespan, machine conflict, job parallelism, incomplete job.
    """
    speed = Fraction(speed)
    jobs = inst.by_id()
    pieces = list(schedule)
    for p in pieces:
        if p.job not in jobs:
            return VerifyReport(False, "unknown job", f"piece {p} references job {p.job}")
        if not 1 <= p.machine <= m:
            return VerifyReport(False, "machine index", f"piece {p} uses machine {p.machine} > {m}")
        j = jobs[p.job]
        if p.start < j.r or p.end > j.d:
            return VerifyReport(False, "lifespan", f"piece {p} outside [{j.r}, {j.d})")

    by_machine = defaultdict(list)
    by_job = defaultdict(list)
    for p in pieces:
        by_machine[p.machine].append(p)
        by_job[p.job].append(p)
    for machine in sorted(by_machine):
        ps = sorted(by_machine[machine], key=lambda p: (p.start, p.end))
        for a, b in zip(ps, ps[1:]):
            if b.start < a.end:
                return VerifyReport(False, "machine conflict",
                                    f"machine {machine}: jobs {a.job} and {b.job} overlap at {b.start}")
    for job in sorted(by_job):
        ps = sorted(by_job[job], key=lambda p: (p.start, p.end))
        for a, b in zip(ps, ps[1:]):
            if b.start < a.end:
                return VerifyReport(False, "job parallel",
                                    f"job {job} runs on machines {a.machine} and {b.machine} at {b.start}")
    for j in inst.jobs:
        got = sum((p.interval.length for p in by_job.get(j.id, ())), Fraction(0))
        if got * speed < j.p:
            return VerifyReport(False, "incomplete", f"job {j.id} processed {got * speed} of {j.p}")
    return VerifyReport(True)
