import random
from fractions import Fraction

import pytest
import sympy

from zsiglab.dynamics import iterate, iterate_polynomial
from zsiglab.galois import (
    QuadExtElement,
    ReducibleBase,
    disc_iterate,
    disc_recursive,
    is_square,
    is_square_in_quadratic,
    maximality_level2_oracle,
    maximality_sufficient,
    squarefree_core,
    stability_test,
    tower_report,
    verify_example_family,
)
from zsiglab.numfield import QQ, NumberField

from conftest import ALL_FIELDS, make, oracle_factor, random_element

x = sympy.Symbol("x")


def sympy_disc(f, i):
    coeffs = [int(c.a) for c in iterate_polynomial(f, i)]
    p = sum(c * x**k for k, c in enumerate(coeffs))
    return sympy.discriminant(p, x)


def test_disc_examples():
    assert disc_iterate(make(2, 0, 1), 1) == QQ(-4)
    assert disc_iterate(make(2, 0, 1), 2) == QQ(512)
    assert abs(disc_recursive(make(2, 0, 1), 2).a) == 512
    assert disc_iterate(make(2, -4, -2), 1) == QQ(8)


def test_disc_recursion_random():
    rng = random.Random(12)
    for _ in range(20):
        d = rng.choice((2, 3))
        f = make(d, rng.randint(-3, 3), rng.randint(-4, 4))
        for i in range(1, 4):
            direct = disc_iterate(f, i)
            assert direct.a == sympy_disc(f, i)
            assert abs(direct.a) == abs(disc_recursive(f, i).a)


def test_is_square_in_quadratic():
    assert is_square_in_quadratic(2, 2)
    assert not is_square_in_quadratic(2, 3)
    assert is_square_in_quadratic(-1, -4)
    with pytest.raises(ValueError):
        is_square_in_quadratic(4, 1)


@pytest.mark.parametrize("K", ALL_FIELDS, ids=lambda K: K.name)
def test_is_square_exact(K):
    rng = random.Random(K.D + 3)
    for _ in range(40):
        w = random_element(rng, K, bound=40, den=5)
        r = is_square(w * w)
        assert r is not None and r * r == w * w
        z = w * w * K(rng.choice([2, 3, 5, 7]))
        r = is_square(z)
        assert r is None or r * r == z


def test_squarefree_core():
    assert squarefree_core(8) == 2
    assert squarefree_core(Fraction(-12, 5)) == -15
    with pytest.raises(ValueError):
        QuadExtElement(4, 1, 1)


def test_stability():
    s = stability_test(make(2, 0, 1), 10)
    assert s.ok and s.checked_to == 10
    s = stability_test(make(2, 0, -2), 6)
    assert s.pcf
    assert stability_test(make(2, -4, -2), 10).ok
    assert not stability_test(make(2, 0, -1), 4).ok


def test_maximality_sufficient():
    v = maximality_sufficient(make(2, 0, 1), 3)
    assert v.kind == "Maximal" and v.witness == "5"
    assert maximality_sufficient(make(2, 0, 1), 2).kind == "Inconclusive"
    assert maximality_sufficient(make(2, -4, -2), 2).kind == "Inconclusive"


def test_sufficient_against_oracle_factorization():
    f = make(2, 0, 1)
    orbit = iterate(f, 0, 8)
    for n in range(3, 9):
        v = maximality_sufficient(f, n)
        assert v.kind == "Maximal"
        p = int(v.witness)
        assert oracle_factor(int(orbit.value(n).a))[p] == 1
        for m in range(1, n):
            assert int(orbit.value(m).a) % p


def test_level2_oracle():
    assert maximality_level2_oracle(make(2, -4, -2)).kind == "NotMaximal"
    assert maximality_level2_oracle(make(2, 0, 1)).kind == "Maximal"
    assert maximality_level2_oracle(make(2, 0, 3)).kind == "Maximal"
    with pytest.raises(ReducibleBase):
        maximality_level2_oracle(make(2, 0, -1))


def test_sufficient_never_contradicts_oracle():
    rng = random.Random(8)
    for _ in range(30):
        f = make(2, rng.randint(-5, 5), rng.randint(-9, 9))
        try:
            oracle = maximality_level2_oracle(f)
        except ReducibleBase:
            continue
        suff = maximality_sufficient(f, 2)
        if suff.kind == "Maximal":
            assert oracle.kind == "Maximal"


def test_roots_of_unity_hypothesis():
    v = maximality_sufficient(make(3, 0, 1), 2)
    assert v.kind == "Inconclusive" and "root of unity" in v.note
    K3 = NumberField(3)
    v = maximality_sufficient(make(3, 0, 1, K3), 2)
    assert "root of unity" not in v.note


def test_example_family_report():
    checks = verify_example_family(6)
    assert [c.i for c in checks] == [2, 3, 4, 5, 6]
    assert all(c.ok for c in checks)
    assert checks[0].oracle.kind == "NotMaximal"
    assert str(checks[1].map) == "2;-20;-18"


def test_tower_report_rows():
    rep = tower_report(make(2, 0, 1), 5)
    kinds = [r["verdict"] for r in rep.rows() if r["test"] == "sufficient"]
    assert kinds == ["Inconclusive", "Maximal", "Maximal", "Maximal"]
    assert rep.discs[2] == QQ(512)
