import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zsiglab.numfield import (
    QQ,
    BudgetExceeded,
    NumberField,
    UnsupportedField,
    ZeroElement,
    archimedean_logs,
    canonical_associate,
    factor_element,
    field_from_spec,
    ok_gcd,
    parse_element,
    prime_weight,
    primes_above,
    valuation,
)
from zsiglab.factoring import FactorBudget

from conftest import ALL_FIELDS, random_element

Qi = NumberField(1)


def test_whitelist():
    with pytest.raises(UnsupportedField):
        NumberField(5)
    with pytest.raises((UnsupportedField, ValueError)):
        field_from_spec("Q(-5)")
    assert field_from_spec("Qi") == Qi
    assert field_from_spec("Q(-163)").D == 163
    assert field_from_spec("Q") == QQ


def test_generator_relation():
    for K in ALL_FIELDS[1:]:
        w = K.gen
        assert w * w == K.trace_w * w - K.norm_w
        z = w.to_complex()
        assert abs(z * z - (K.trace_w * z - K.norm_w)) < 1e-9


def test_factor_examples():
    t = factor_element(QQ, QQ(26))
    assert {str(p): e for p, e in t} == {"2": 1, "13": 1} and t.unit == QQ.one
    t = factor_element(Qi, Qi(5))
    assert len(t) == 2 and all(e == 1 for _, e in t)
    assert {p.residue_size for p, _ in t} == {5}
    assert t.rebuild() == Qi(5)
    t = factor_element(QQ, QQ(Fraction(-3, 2)))
    assert {str(p): e for p, e in t} == {"3": 1, "2": -1} and t.unit == QQ(-1)
    with pytest.raises(ZeroElement):
        factor_element(QQ, QQ.zero)


def test_valuation_examples():
    two = primes_above(QQ, 2)[0]
    assert valuation(QQ, QQ(26), two) == 1
    five = primes_above(QQ, 5)[0]
    assert valuation(QQ, QQ(Fraction(1, 25)), five) == -2
    (ram,) = primes_above(Qi, 2)
    x = parse_element(Qi, "3 + i")
    assert valuation(Qi, x, ram) == 1
    with pytest.raises(ZeroElement):
        valuation(QQ, QQ.zero, two)


def test_prime_weights():
    assert prime_weight(QQ, primes_above(QQ, 2)[0]) == math.log(2)
    (ram,) = primes_above(Qi, 2)
    assert math.isclose(prime_weight(Qi, ram), math.log(2) / 2)
    (inert,) = primes_above(Qi, 3)
    assert inert.residue_size == 9
    assert math.isclose(prime_weight(Qi, inert), math.log(3))


def test_archimedean_logs():
    assert archimedean_logs(QQ, QQ(Fraction(3, 2))) == [pytest.approx(math.log(1.5))]
    assert archimedean_logs(Qi, Qi(1, 1)) == [pytest.approx(math.log(2) / 2)] * 2
    assert archimedean_logs(QQ, QQ(-7)) == [pytest.approx(math.log(7))]


@pytest.mark.parametrize("K", ALL_FIELDS, ids=lambda K: K.name)
def test_prime_splitting(K):
    for p in (2, 3, 5, 7, 11, 13, 1009):
        primes = primes_above(K, p)
        total = 1
        for P in primes:
            assert P.residue_size in (p, p * p)
            assert P.rational_prime == p
            assert int(P.generator.abs_norm()) == P.residue_size
            total *= P.residue_size ** (P.ramification if K.D else 1)
        assert total == p**K.degree


@pytest.mark.parametrize("K", ALL_FIELDS, ids=lambda K: K.name)
def test_factor_round_trip_and_product_formula(K):
    rng = random.Random(K.D)
    for _ in range(60):
        x = random_element(rng, K, bound=400)
        if not x:
            continue
        table = factor_element(K, x)
        assert table.rebuild() == x
        assert table.unit.is_unit()
        assert all(e != 0 for _, e in table)
        finite = sum(e * p.weight for p, e in table)
        arch = sum(archimedean_logs(K, x)) / K.degree
        assert abs(finite - arch) < 1e-10


@pytest.mark.parametrize("K", ALL_FIELDS[1:], ids=lambda K: K.name)
def test_associate_invariance(K):
    rng = random.Random(100 + K.D)
    for _ in range(20):
        x = random_element(rng, K, bound=200, den=1)
        if not x:
            continue
        base = factor_element(K, x)
        for u in K.units:
            t = factor_element(K, u * x)
            assert t.entries == base.entries
        assert canonical_associate(x) == canonical_associate(-x)


@settings(max_examples=80, deadline=None)
@given(
    st.integers(-500, 500), st.integers(-500, 500), st.integers(-500, 500), st.integers(-500, 500)
)
def test_valuation_additive(a, b, c, d):
    x, y = Qi(a, b), Qi(c, d)
    if not x or not y:
        return
    table = factor_element(Qi, x * y)
    for p, e in table:
        assert valuation(Qi, x, p) + valuation(Qi, y, p) == e


def test_gcd_generates_ideal_sum():
    for K in ALL_FIELDS:
        rng = random.Random(5 + K.D)
        for _ in range(20):
            x = random_element(rng, K, bound=300, den=1)
            y = random_element(rng, K, bound=300, den=1)
            if not x or not y:
                continue
            g = ok_gcd(K, x, y)
            assert (x / g).is_integral() and (y / g).is_integral()
            tx, ty = factor_element(K, x).as_dict(), factor_element(K, y).as_dict()
            expect = {p: min(tx[p], ty[p]) for p in tx.keys() & ty.keys()}
            got = {p: e for p, e in factor_element(K, g)}
            assert got == {p: e for p, e in expect.items() if e}


@pytest.mark.parametrize("K", ALL_FIELDS, ids=lambda K: K.name)
def test_text_round_trip(K):
    rng = random.Random(K.D + 1)
    for _ in range(50):
        x = random_element(rng, K)
        assert parse_element(K, str(x)) == x


def test_parse_forms():
    assert parse_element(Qi, "1/2 + 3/4*w") == Qi(Fraction(1, 2), Fraction(3, 4))
    assert parse_element(Qi, "i") == Qi.gen
    assert parse_element(Qi, "2 +-3*w") == Qi(2, -3)
    with pytest.raises(ValueError):
        parse_element(QQ, "w")
    with pytest.raises(ValueError):
        parse_element(QQ, "")


def test_budget_exceeded_reports_cofactor():
    n = 1_000_003 * 1_000_033
    with pytest.raises(BudgetExceeded) as info:
        factor_element(QQ, QQ(n), FactorBudget(trial_bound=100, rho_iterations=0))
    assert info.value.cofactor == n
