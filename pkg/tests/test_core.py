from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from machmin import Job, bucket_count, is_alpha_tight, laxity, relative_laxity, route
from machmin.core import (
    CMS, EDF, Instance, Interval, Route, bucket_bounds, measure, normalize, route_rho, subtract,
)


@pytest.mark.parametrize("r,d,p,lax", [(0, 10, 4, 6), (3, 5, 2, 0), (2, 12, 1, 9)])
def test_laxity(r, d, p, lax):
    assert laxity(Job(0, r, d, p)) == lax


@pytest.mark.parametrize("r,d,p,rho", [(0, 10, 4, F(6, 10)), (3, 5, 2, 0), (0, 16, 15, F(1, 16))])
def test_relative_laxity(r, d, p, rho):
    got = relative_laxity(Job(0, r, d, p))
    assert got == rho and isinstance(got, F)


@pytest.mark.parametrize("p,alpha,tight", [(4, F(1, 2), False), (6, F(1, 2), True), (5, F(1, 2), False)])
def test_alpha_tight(p, alpha, tight):
    assert is_alpha_tight(Job(0, 0, 10, p), alpha) is tight


def test_alpha_range():
    with pytest.raises(ValueError):
        is_alpha_tight(Job(0, 0, 10, 5), 1)


@pytest.mark.parametrize("m,k", [(16, 2), (2, 0), (17, 3), (1, 0), (3, 1), (4, 1), (5, 2), (256, 3), (257, 4)])
def test_bucket_count(m, k):
    assert bucket_count(m) == k


def test_bucket_count_matches_float_formula():
    import math
    for m in range(3, 5000):
        assert bucket_count(m) == math.ceil(math.log2(math.log2(m)) - 1e-12)


@pytest.mark.parametrize("rho,m,expected", [
    (F(1, 3), 16, EDF),
    (F(1, 10), 16, Route("SJF", 1)),
    (F(1, 20), 16, CMS),
    (F(1, 4), 16, EDF),            # EDF wins the shared boundary
    (F(1, 16), 16, CMS),           # CMS wins bucket 2's top end at m*=16
    (F(1, 17), 17, CMS),
    (F(1, 16), 17, Route("SJF", 2)),
    (F(1, 3), 2, CMS),             # m* <= 2: no buckets
    (F(3, 5), 2, EDF),
    (F(0), 1, CMS),
])
def test_route_examples(rho, m, expected):
    assert route_rho(rho, m) == expected


def test_route_job():
    assert route(Job(0, 0, 30, 20), 16) == EDF  # rho 1/3


def test_invalid_jobs():
    with pytest.raises(ValueError):
        Job(0, 0, 3, 4)
    with pytest.raises(ValueError):
        Job(0, 0, 3, 0)
    with pytest.raises(TypeError):
        Job(0, 0.5, 3, 1)
    with pytest.raises(ValueError):
        Instance([Job(0, 0, 3, 1), Job(0, 1, 3, 1)])


def test_instance_order():
    inst = Instance([Job(3, 2, 5, 1), Job(1, 0, 4, 1), Job(2, 2, 9, 3)])
    assert [j.id for j in inst] == [1, 2, 3]


rationals = st.fractions(min_value=0, max_value=1).filter(lambda x: x < 1)


@given(rationals, st.integers(1, 2 ** 20))
def test_route_total(rho, m):
    r = route_rho(rho, m)
    assert r.tag in ("EDF", "SJF", "CMS")
    if r.tag == "SJF":
        assert m >= 3
        assert 1 <= r.bucket <= bucket_count(m)
        lo, hi = bucket_bounds(r.bucket)
        assert lo < rho <= hi
        assert F(1, m) < rho < F(1, 4)
    elif r.tag == "CMS":
        assert rho <= F(1, m)
    else:
        assert rho > F(1, m)


@given(st.integers(0, 50), st.integers(1, 50), st.integers(0, 50))
def test_relative_laxity_props(r, p, slack):
    j = Job(0, r, r + p + slack, p)
    assert 0 <= j.rho < 1
    assert (j.rho == 0) == (j.laxity == 0)


@given(st.fractions(), st.fractions())
def test_time_exact(a, b):
    assert (a + b) - b == a
    assert a + b == b + a


@given(st.fractions(), st.fractions(), st.fractions())
def test_time_assoc(a, b, c):
    assert (a + b) + c == a + (b + c)


def test_interval():
    iv = Interval(1, F(5, 2))
    assert iv.length == F(3, 2)
    assert iv.contains(1) and not iv.contains(F(5, 2))
    with pytest.raises(ValueError):
        Interval(2, 2)


def test_interval_unions():
    assert normalize([(3, 4), (0, 1), (F(1, 2), 2)]) == [(0, 2), (3, 4)]
    assert measure([(0, 2), (1, 3)]) == 3
    assert subtract([(0, 10)], [(2, 3), (5, 7)]) == [(0, 2), (3, 5), (7, 10)]
    assert subtract([(0, 1)], [(0, 1)]) == []
