import math
import random

import pytest
import sympy

from zsiglab.abc import (
    AbcTriple,
    DegenerateTriple,
    check_imprimitive_bound,
    check_rad_lower_bound,
    orbit_abc_triple,
    quality_scan,
)
from zsiglab.heights import LOG2, radical
from zsiglab.numfield import QQ

from conftest import make


def test_orbit_triples():
    t = orbit_abc_triple(make(2, 0, 1), 0, 2)
    assert (t.a, t.b, t.s) == (QQ(1), QQ(1), QQ(2))
    assert t.h_proj == pytest.approx(LOG2) and t.rad == pytest.approx(LOG2)
    assert t.quality == pytest.approx(1.0)
    t = orbit_abc_triple(make(2, 0, 1), 0, 4)
    assert (t.a, t.b, t.s) == (QQ(25), QQ(1), QQ(26))
    assert t.h_proj == pytest.approx(math.log(26))
    assert t.rad == pytest.approx(math.log(130))
    with pytest.raises(DegenerateTriple):
        orbit_abc_triple(make(2, 0, 2), 0, 1)


def test_rad_lower_bound():
    chk = check_rad_lower_bound(make(2, 0, 3), 0, 3, 0.5)
    assert chk.holds
    assert chk.lhs == pytest.approx(math.log(21))
    assert chk.rhs == pytest.approx(0.5 * math.log(12))
    assert check_rad_lower_bound(make(2, 0, 1), 0, 2, 1.0).holds
    assert check_rad_lower_bound(make(2, 0, 1), 0, 5, 0.5).holds


def test_rad_margin_monotone_in_epsilon():
    f = make(2, 0, 3)
    for n in range(2, 6):
        margins = [check_rad_lower_bound(f, 0, n, e).margin for e in (0.1, 0.3, 0.5, 0.9)]
        assert margins == sorted(margins)


def test_imprimitive_bound():
    chk = check_imprimitive_bound(make(2, 0, 1), 0, 4, 0.25)
    assert chk.holds and chk.lhs == pytest.approx(LOG2)
    assert check_imprimitive_bound(make(2, 0, 1), 0, 3, 0.01).holds
    chk = check_imprimitive_bound(make(2, 0, 1), 0, 6, 0.1)
    assert chk.lhs == pytest.approx(math.log(10))
    assert chk.rhs == pytest.approx(0.1 * math.log(458330))


def test_quality_scan():
    triples = quality_scan(make(2, 0, 1), 0, range(2, 7))
    assert len(triples) == 5
    qs = [t.quality for t in triples]
    assert qs == sorted(qs, reverse=True)
    triples = quality_scan(make(2, 0, 2), 0, range(2, 5))
    assert sorted((int(t.a.a), int(t.b.a), int(t.s.a)) for t in triples) == [
        (4, 2, 6),
        (36, 2, 38),
        (1444, 2, 1446),
    ]
    assert quality_scan(make(2, 0, 1), 0, range(2, 2)) == []
    skipped = []
    quality_scan(make(2, 0, 2), 0, range(1, 3), skipped=skipped)
    assert [n for n, _ in skipped] == [1]


def test_sum_identity_and_scaling():
    rng = random.Random(9)
    for _ in range(30):
        a = QQ(rng.randint(1, 10**6)) / rng.randint(1, 50)
        b = QQ(rng.randint(1, 10**6)) / rng.randint(1, 50)
        if not a + b:
            continue
        t = AbcTriple.build(a, b)
        assert t.a + t.b == t.s
        lam = QQ(rng.randint(1, 999)) / rng.randint(1, 99)
        u = AbcTriple.build(lam * a, lam * b)
        assert abs(u.h_proj - t.h_proj) < 1e-10
        assert abs(u.quality - t.quality) < 1e-10


def test_rad_matches_distinct_primes():
    rng = random.Random(10)
    for _ in range(40):
        a, b = rng.randint(1, 10**7), rng.randint(1, 10**7)
        g = math.gcd(a, b)
        a, b = a // g, b // g
        rad = radical(QQ, [a, b, a + b])
        expect = math.log(math.prod(sympy.primefactors(a * b * (a + b))) or 1)
        assert rad == pytest.approx(expect)


def test_triple_sum_checked():
    with pytest.raises(ValueError):
        AbcTriple(QQ(1), QQ(1), QQ(3), 0.0, 0.0)
