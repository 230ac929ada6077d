"""Exact simulation of online machine minimization for deadline scheduling."""

from .core import (
    Instance,
    Interval,
    Job,
    Route,
    bucket_count,
    is_alpha_tight,
    laxity,
    relative_laxity,
    route,
)
from .engine import RunResult, SchedulePiece, lookahead_feasible, simulate, verify
from .oracle import brute_force_min_machines, demand_lower_bound, feasible, min_machines
from .schedulers import (
    CMSScheduler,
    DoublingWrapper,
    EDFScheduler,
    HybridA,
    HybridAdaptive,
    SJFScheduler,
    cms_step,
    doubling_wrap,
    edf_assignment,
    hybrid_a,
    hybrid_a_adaptive,
    sjf_assignment,
    sub_cms,
)
from .certify import (
    CriticalPair,
    check_critical,
    check_weakly_critical,
    extract_sjf_certificate,
    implied_lower_bound,
    sjf_machine_bound,
)
from .gen import GenSpec, generate, p_ratio

__version__ = "0.1.0"
