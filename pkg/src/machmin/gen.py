"""Seeded instance generators and the instance JSON format."""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .core import Instance, Job

KINDS = ("uniform", "bucketed", "very_tight", "loose", "laminar", "agreeable", "adversarial_doubling")
_MAX_TRIES = 10_000


@dataclass(frozen=True)
class GenSpec:
    kind: str
    n: int
    horizon: int = 100
    max_size: int = 20
    seed: int = 0
    l1: Optional[Fraction] = None  # bucketed: lower relative laxity
    l2: Optional[Fraction] = None  # bucketed: upper relative laxity
    m: Optional[int] = None  # very_tight: rho <= 1/m
    rho0: Optional[Fraction] = None  # loose: rho >= rho0

    def validate(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}; expected one of {KINDS}")
        if self.n < 0 or self.horizon < 1 or self.max_size < 1:
            raise ValueError("n >= 0, horizon >= 1 and max_size >= 1 required")
        if self.kind == "bucketed":
            if self.l1 is None or self.l2 is None:
                raise ValueError("bucketed needs l1 and l2")
            if not 0 <= self.l1 <= self.l2 < 1:
                raise ValueError(f"bucketed needs 0 <= l1 <= l2 < 1, got {self.l1}, {self.l2}")
        if self.kind == "very_tight" and (self.m is None or self.m < 1):
            raise ValueError("very_tight needs m >= 1")
        if self.kind == "loose" and (self.rho0 is None or not 0 <= self.rho0 < 1):
            raise ValueError("loose needs 0 <= rho0 < 1")


def _laxity_job(rng: random.Random, i: int, lo: Fraction, hi: Fraction, spec: GenSpec,
                hi_open: bool = False) -> Job:
    """One job with relative laxity in [lo, hi] (or [lo, hi) when ``hi_open``).

    The lifespan length is drawn first, then an integer laxity from the
    range the bounds force; empty ranges are resampled.
    """
    for _ in range(_MAX_TRIES):
        L = rng.randint(1, spec.horizon)
        lmin = max(math.ceil(lo * L), L - spec.max_size, 0)
        lmax = min(math.floor(hi * L), L - 1)
        if hi_open and Fraction(lmax, L) == hi:
            lmax -= 1
        if lmin > lmax:
            continue
        lax = rng.randint(lmin, lmax)
        r = rng.randint(0, spec.horizon - L)
        return Job(i, r, r + L, L - lax)
    raise ValueError(f"no integer job with relative laxity in [{lo}, {hi}] "
                     f"fits horizon {spec.horizon} and max size {spec.max_size}")


def _laminar(rng: random.Random, spec: GenSpec) -> list[Job]:
    # grow a laminar family: each new lifespan nests inside an existing one
    # or sits in a gap of the top level
    spans: list[tuple[int, int]] = []
    for _ in range(_MAX_TRIES):
        if len(spans) == spec.n:
            break
        if spans and rng.random() < 0.7:
            a, b = rng.choice(spans)
        else:
            a, b = 0, spec.horizon
        kids = sorted(s for s in spans if a <= s[0] and s[1] <= b and s != (a, b))
        top = [s for s in kids if not any(o != s and o[0] <= s[0] and s[1] <= o[1] for o in kids)]
        gaps, cur = [], a
        for c, d in top:
            if c > cur:
                gaps.append((cur, c))
            cur = max(cur, d)
        if cur < b:
            gaps.append((cur, b))
        if not gaps:
            continue
        g0, g1 = rng.choice(gaps)
        x = rng.randint(g0, g1 - 1)
        y = rng.randint(x + 1, g1)
        spans.append((x, y))
    if len(spans) < spec.n:
        raise ValueError("horizon too short for a laminar family of this size")
    return [Job(i, x, y, rng.randint(1, min(spec.max_size, y - x))) for i, (x, y) in enumerate(spans)]


def _agreeable(rng: random.Random, spec: GenSpec) -> list[Job]:
    rs = sorted(rng.randint(0, spec.horizon) for _ in range(spec.n))
    jobs, last_d = [], 0
    for i, r in enumerate(rs):
        p = rng.randint(1, spec.max_size)
        d = max(last_d, r + p + rng.randint(0, spec.max_size))
        jobs.append(Job(i, r, d, p))
        last_d = d
    return jobs


def _adversarial_doubling(rng: random.Random, spec: GenSpec) -> list[Job]:
    # bursts of zero-laxity jobs whose width doubles, one burst per phase
    jobs, t, width = [], 0, 1
    length = max(1, min(spec.max_size, spec.horizon))
    while len(jobs) < spec.n:
        for _ in range(min(width, spec.n - len(jobs))):
            p = rng.randint(max(1, length // 2), length)
            jobs.append(Job(len(jobs), t, t + p, p))
        t += rng.randint(1, length)
        width *= 2
    return jobs


def generate(spec: GenSpec) -> Instance:
    """Pure function of ``spec``: same spec, same instance."""
    spec.validate()
    rng = random.Random(f"{spec.kind}:{spec.seed}")
    if spec.kind == "uniform":
        jobs = []
        for i in range(spec.n):
            p = rng.randint(1, min(spec.max_size, spec.horizon))
            r = rng.randint(0, spec.horizon - p)
            jobs.append(Job(i, r, rng.randint(r + p, spec.horizon), p))
    elif spec.kind == "bucketed":
        jobs = [_laxity_job(rng, i, spec.l1, spec.l2, spec) for i in range(spec.n)]
    elif spec.kind == "very_tight":
        jobs = [_laxity_job(rng, i, Fraction(0), Fraction(1, spec.m), spec) for i in range(spec.n)]
    elif spec.kind == "loose":
        jobs = [_laxity_job(rng, i, spec.rho0, Fraction(1), spec, hi_open=True) for i in range(spec.n)]
    elif spec.kind == "laminar":
        jobs = _laminar(rng, spec)
    elif spec.kind == "agreeable":
        jobs = _agreeable(rng, spec)
    else:
        jobs = _adversarial_doubling(rng, spec)
    return Instance(jobs)


def p_ratio(inst: Instance) -> Fraction:
    """Largest over smallest job size."""
    if not inst.jobs:
        raise ValueError("empty instance")
    sizes = [j.p for j in inst]
    return Fraction(max(sizes), min(sizes))


def dumps(inst: Instance) -> str:
    lines = [json.dumps({"id": j.id, "r": j.r, "d": j.d, "p": j.p}) for j in inst]
    return '{"jobs": [\n' + ",\n".join("  " + s for s in lines) + "\n]}\n"


def loads(text: str) -> Instance:
    raw = json.loads(text)
    if not isinstance(raw, dict) or set(raw) != {"jobs"}:
        raise ValueError('instance JSON must be an object with exactly the key "jobs"')
    jobs = []
    for entry in raw["jobs"]:
        if set(entry) != {"id", "r", "d", "p"}:
            raise ValueError(f"job entry must have exactly id, r, d, p: {entry}")
        jobs.append(Job(entry["id"], entry["r"], entry["d"], entry["p"]))
    return Instance(jobs)


def load(path) -> Instance:
    with open(path) as fh:
        return loads(fh.read())


def save(inst: Instance, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(inst))
