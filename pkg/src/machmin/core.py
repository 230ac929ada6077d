"""Job model, exact time arithmetic and laxity-based routing.

All times are :class:`fractions.Fraction` values.  Job parameters are
integers; the only non-integral times in a run come from CMS budgets.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

TimePoint = Fraction
Number = Union[int, Fraction]


def as_time(x: Number | str) -> Fraction:
    """Coerce an int, Fraction or ``"p/q"`` string to a TimePoint."""
    if isinstance(x, float):
        raise TypeError("floating point times are not supported")
    return Fraction(x)


@dataclass(frozen=True, order=True)
class Job:
    id: int
    r: int
    d: int
    p: int

    def __post_init__(self):
        for name in ("id", "r", "d", "p"):
            if not isinstance(getattr(self, name), int) or isinstance(getattr(self, name), bool):
                raise TypeError(f"job field {name!r} must be an int")
        if self.id < 0:
            raise ValueError(f"job id must be non-negative, got {self.id}")
        if self.p < 1:
            raise ValueError(f"job {self.id}: size must be >= 1")
        if self.d < self.r + self.p:
            raise ValueError(f"job {self.id}: deadline {self.d} < release + size")

    @property
    def length(self) -> int:
        """Lifespan length d - r."""
        return self.d - self.r

    @property
    def laxity(self) -> int:
        return self.d - self.r - self.p

    @property
    def rho(self) -> Fraction:
        return Fraction(self.laxity, self.length)

    def lifespan(self) -> Interval:
        return Interval(Fraction(self.r), Fraction(self.d))


@dataclass(frozen=True, order=True)
class Interval:
    """Half-open interval ``[start, end)``."""

    start: Fraction
    end: Fraction

    def __post_init__(self):
        object.__setattr__(self, "start", Fraction(self.start))
        object.__setattr__(self, "end", Fraction(self.end))
        if not self.start < self.end:
            raise ValueError(f"empty interval [{self.start}, {self.end})")

    @property
    def length(self) -> Fraction:
        return self.end - self.start

    def contains(self, t: Number) -> bool:
        return self.start <= t < self.end

    def overlap(self, other: Interval) -> Fraction:
        lo = max(self.start, other.start)
        hi = min(self.end, other.end)
        return hi - lo if hi > lo else Fraction(0)


@dataclass(frozen=True)
class Instance:
    jobs: tuple[Job, ...]

    def __init__(self, jobs: Iterable[Job]):
        jobs = tuple(sorted(jobs, key=lambda j: (j.r, j.id)))
        ids = [j.id for j in jobs]
        if len(set(ids)) != len(ids):
            raise ValueError("job ids must be unique")
        object.__setattr__(self, "jobs", jobs)

    def __len__(self) -> int:
        return len(self.jobs)

    def __iter__(self):
        return iter(self.jobs)

    def by_id(self) -> dict[int, Job]:
        return {j.id: j for j in self.jobs}

    @property
    def total_work(self) -> int:
        return sum(j.p for j in self.jobs)

    @property
    def horizon(self) -> int:
        if not self.jobs:
            return 0
        return max(j.d for j in self.jobs) - min(j.r for j in self.jobs)

    @classmethod
    def from_tuples(cls, triples: Iterable[Sequence[int]]) -> Instance:
        """Build from ``(r, d, p)`` triples, numbering ids in input order."""
        return cls(Job(i, r, d, p) for i, (r, d, p) in enumerate(triples))


@dataclass(frozen=True)
class Route:
    tag: str  # "EDF", "SJF" or "CMS"
    bucket: int = 0

    def __str__(self):
        return f"SJF({self.bucket})" if self.tag == "SJF" else self.tag


EDF = Route("EDF")
CMS = Route("CMS")


def laxity(j: Job) -> int:
    return j.laxity


def relative_laxity(j: Job) -> Fraction:
    return j.rho


def is_alpha_tight(j: Job, alpha: Number) -> bool:
    """True iff ``p > alpha * |I(j)|``; the boundary counts as loose."""
    alpha = Fraction(alpha)
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    return j.p > alpha * j.length


def bucket_count(m_star: int) -> int:
    """``max(0, ceil(lg lg m_star))`` computed without floating point."""
    if m_star < 1:
        raise ValueError("m_star must be >= 1")
    k = 0
    while 2 ** (2 ** k) < m_star:
        k += 1
    return k


def bucket_bounds(i: int) -> tuple[Fraction, Fraction]:
    """Relative laxity range ``(lo, hi]`` of SJF bucket ``i``."""
    return Fraction(1, 2 ** (2 ** (i + 1))), Fraction(1, 2 ** (2 ** i))


def route_rho(rho: Fraction, m_star: int) -> Route:
    if m_star < 1:
        raise ValueError("m_star must be >= 1")
    if not 0 <= rho < 1:
        raise ValueError(f"relative laxity must lie in [0, 1), got {rho}")
    if rho <= Fraction(1, m_star):
        return CMS
    if rho >= Fraction(1, 4) or bucket_count(m_star) == 0:
        return EDF
    # 1/m_star < rho < 1/4: find i >= 1 with 2^-2^(i+1) < rho <= 2^-2^i
    i = 1
    while rho <= bucket_bounds(i)[0]:
        i += 1
    return Route("SJF", i)


def route(j: Job, m_star: int) -> Route:
    """Three-way split: CMS for rho <= 1/m*, EDF for rho >= 1/4, else an SJF bucket."""
    return route_rho(j.rho, m_star)


# interval-union helpers; inputs are iterables of (start, end) pairs


def normalize(intervals: Iterable[tuple[Number, Number]]) -> list[tuple[Fraction, Fraction]]:
    """Sorted, disjoint, merged union of nonempty intervals."""
    out: list[tuple[Fraction, Fraction]] = []
    for a, b in sorted((Fraction(a), Fraction(b)) for a, b in intervals):
        if a >= b:
            continue
        if out and a <= out[-1][1]:
            if b > out[-1][1]:
                out[-1] = (out[-1][0], b)
        else:
            out.append((a, b))
    return out


def measure(intervals: Iterable[tuple[Number, Number]]) -> Fraction:
    return sum((b - a for a, b in normalize(intervals)), Fraction(0))


def subtract(base: Iterable[tuple[Number, Number]], cut: Iterable[tuple[Number, Number]]):
    """``base`` minus ``cut`` as a normalized union."""
    cut = normalize(cut)
    out = []
    for a, b in normalize(base):
        cur = a
        for c, d in cut:
            if d <= cur or c >= b:
                continue
            if c > cur:
                out.append((cur, c))
            cur = max(cur, d)
            if cur >= b:
                break
        if cur < b:
            out.append((cur, b))
    return out


def intersect_length(intervals: Iterable[tuple[Number, Number]], a: Number, b: Number) -> Fraction:
    total = Fraction(0)
    for c, d in normalize(intervals):
        lo, hi = max(c, a), min(d, b)
        if hi > lo:
            total += hi - lo
    return total
