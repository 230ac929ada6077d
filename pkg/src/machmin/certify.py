"""Lower-bound certificates on m*: critical pairs and the closed-form bounds."""

from __future__ import annotations

import json
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Iterable, Optional

from .core import Instance, Number, intersect_length, is_alpha_tight, measure, normalize, subtract
from .engine import RunResult

PRECISION = 60


@dataclass(frozen=True)
class CriticalPair:
    G: frozenset[int]
    T: tuple[tuple[Fraction, Fraction], ...]
    mu: int
    beta: Fraction
    alpha: Fraction

    def __init__(self, G: Iterable[int], T: Iterable[tuple[Number, Number]], mu: int,
                 beta: Number, alpha: Number):
        T = [(Fraction(a), Fraction(b)) for a, b in T]
        if not T:
            raise ValueError("T must be nonempty")
        for a, b in T:
            if not a < b:
                raise ValueError(f"empty interval [{a}, {b}) in T")
        norm = normalize(T)
        if T != norm:
            raise ValueError("intervals of T must be sorted and pairwise disjoint")
        object.__setattr__(self, "G", frozenset(G))
        object.__setattr__(self, "T", tuple(norm))
        object.__setattr__(self, "mu", int(mu))
        object.__setattr__(self, "beta", Fraction(beta))
        object.__setattr__(self, "alpha", Fraction(alpha))

    @property
    def T_length(self) -> Fraction:
        return measure(self.T)

    def to_json(self) -> str:
        return json.dumps({
            "G": sorted(self.G),
            "T": [[str(a), str(b)] for a, b in self.T],
            "mu": self.mu,
            "beta": str(self.beta),
            "alpha": str(self.alpha),
        }, indent=1) + "\n"

    @classmethod
    def from_json(cls, text: str) -> CriticalPair:
        raw = json.loads(text)
        extra = set(raw) - {"G", "T", "mu", "beta", "alpha"}
        if extra:
            raise ValueError(f"unknown certificate fields: {sorted(extra)}")
        return cls(raw["G"], [(Fraction(a), Fraction(b)) for a, b in raw["T"]],
                   raw["mu"], Fraction(raw["beta"]), Fraction(raw["alpha"]))


@dataclass
class CheckResult:
    ok: bool
    condition: Optional[str] = None  # "tightness", "coverage" or "laxity"
    detail: str = ""
    witness_time: Optional[Fraction] = None
    witness_job: Optional[int] = None

    def __bool__(self):
        return self.ok


def _jobs_of(pair: CriticalPair, inst: Instance):
    by_id = inst.by_id()
    missing = sorted(pair.G - set(by_id))
    if missing:
        raise KeyError(f"unknown job ids in G: {missing}")
    return [by_id[i] for i in sorted(pair.G)]


def _check_common(pair: CriticalPair, jobs) -> Optional[CheckResult]:
    for j in jobs:
        if not is_alpha_tight(j, pair.alpha):
            return CheckResult(False, "tightness", f"job {j.id} is {pair.alpha}-loose",
                               witness_job=j.id)
    # coverage is constant between consecutive endpoints
    pts = sorted({a for a, _ in pair.T} | {b for _, b in pair.T}
                 | {Fraction(j.r) for j in jobs} | {Fraction(j.d) for j in jobs})
    for a, b in zip(pts, pts[1:]):
        if not any(c <= a and b <= d for c, d in pair.T):
            continue
        cover = sum(1 for j in jobs if j.r <= a and b <= j.d)
        if cover < pair.mu:
            return CheckResult(False, "coverage",
                               f"[{a}, {b}) covered by {cover} < {pair.mu} jobs", witness_time=a)
    return None


def check_critical(pair: CriticalPair, inst: Instance) -> CheckResult:
    """(mu, beta)-critical: coverage >= mu on T and |T ∩ I(j)| >= beta * laxity for each j in G."""
    jobs = _jobs_of(pair, inst)
    bad = _check_common(pair, jobs)
    if bad is not None:
        return bad
    for j in jobs:
        got = intersect_length(pair.T, j.r, j.d)
        if got < pair.beta * j.laxity:
            return CheckResult(False, "laxity",
                               f"|T ∩ I({j.id})| = {got} < {pair.beta * j.laxity}", witness_job=j.id)
    return CheckResult(True)


def check_weakly_critical(pair: CriticalPair, inst: Instance) -> CheckResult:
    """Weakly (mu, beta)-critical: coverage >= mu on T and |T| >= beta/mu * total laxity of G."""
    jobs = _jobs_of(pair, inst)
    bad = _check_common(pair, jobs)
    if bad is not None:
        return bad
    need = pair.beta / pair.mu * sum(j.laxity for j in jobs)
    if pair.T_length < need:
        return CheckResult(False, "laxity", f"|T| = {pair.T_length} < {need}")
    return CheckResult(True)


def extract_sjf_certificate(run: RunResult, inst: Instance, lam1: Optional[Number] = None,
                            lam2: Optional[Number] = None) -> CriticalPair:
    """Build the weakly critical pair witnessing an SJF deadline miss.

    T is the part of the failing job's lifespan (up to the failure) when it
    was not running; G is every job SJF ran during T.  The laxity range
    defaults to the instance's min/max relative laxity.
    """
    f = run.failure
    if f is None or f.reason != "deadline" or f.job is None:
        raise ValueError("run has no deadline miss to certify")
    by_id = inst.by_id()
    j = by_id[f.job]
    rhos = [x.rho for x in inst]
    lam1 = Fraction(lam1) if lam1 is not None else min(rhos)
    lam2 = Fraction(lam2) if lam2 is not None else max(rhos)
    if not 0 < lam1 <= lam2 <= Fraction(1, 2):
        raise ValueError(f"laxity range [{lam1}, {lam2}] not inside (0, 1/2]")
    ran = [(p.start, p.end) for p in run.pieces_of(j.id)]
    T = subtract([(Fraction(j.r), f.time)], ran)
    if not T:
        raise ValueError(f"job {j.id} was never idle before failing")
    G = set()
    for p in run.schedule:
        if p.job != j.id and intersect_length(T, p.start, p.end) > 0:
            G.add(p.job)
    return CriticalPair(G, T, run.machines_used, lam1 / (5 * lam2), 1 - lam2)


def _ln(x: Fraction) -> Decimal:
    return (Decimal(x.numerator) / Decimal(x.denominator)).ln()


def implied_lower_bound(mu: int, beta: Number, alpha: Number) -> Decimal:
    """``mu / log_{1/(1-alpha)}(1/beta)``, the bound shape up to its hidden constant.

    Evaluated in 60-digit decimal arithmetic.  ``beta == 1`` gives infinity.
    """
    beta, alpha = Fraction(beta), Fraction(alpha)
    if mu < 1:
        raise ValueError("mu must be >= 1")
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if not 0 < beta <= 1:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    with localcontext() as ctx:
        ctx.prec = PRECISION
        if beta == 1:
            return Decimal("Infinity")
        return +(Decimal(mu) * _ln(1 / (1 - alpha)) / _ln(1 / beta))


def sjf_machine_bound(lam1: Number, lam2: Number) -> Decimal:
    """``log_{1/lam2}(5 lam2 / lam1)``: SJF's machine factor on laxities in [lam1, lam2]."""
    lam1, lam2 = Fraction(lam1), Fraction(lam2)
    if not 0 < lam1 <= lam2 <= Fraction(1, 2):
        raise ValueError(f"need 0 < lam1 <= lam2 <= 1/2, got {lam1}, {lam2}")
    with localcontext() as ctx:
        ctx.prec = PRECISION
        return +(_ln(5 * lam2 / lam1) / _ln(1 / lam2))
