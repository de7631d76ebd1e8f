import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from zsiglab.factoring import (
    DETERMINISTIC_MR_LIMIT,
    FactorBudget,
    ZeroInput,
    factor_integer,
    is_probable_prime,
)

from conftest import oracle_factor


def test_small_examples():
    assert factor_integer(458330).as_dict() == {2: 1, 5: 1, 45833: 1}
    r = factor_integer(1)
    assert r.factors == () and r.is_complete
    with pytest.raises(ZeroInput):
        factor_integer(0)


def test_negative_sign_kept():
    r = factor_integer(-12)
    assert r.sign == -1 and r.as_dict() == {2: 2, 3: 1}
    assert r.value() == -12


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=2, max_value=10**15))
def test_matches_oracle(n):
    assert factor_integer(n).as_dict() == oracle_factor(n)


def test_semiprimes_need_rho():
    for k in range(10):
        p = sympy.nextprime(10**8 + 7919 * k * k)
        q = sympy.nextprime(3 * 10**9 + 104729 * k)
        r = factor_integer(p * q)
        assert r.as_dict() == {p: 1, q: 1}


def test_perfect_powers():
    p = 1_000_003
    assert factor_integer(p**5).as_dict() == {p: 5}
    assert factor_integer(2**10 * 3**7 * p**2).as_dict() == {2: 10, 3: 7, p: 2}


def test_fermat_seven_tiny_budget_is_partial():
    n = 2**128 + 1
    r = factor_integer(n, FactorBudget(trial_bound=100, rho_iterations=1000))
    assert not r.is_complete
    assert r.value() == n
    assert r.cofactor > 1


def test_crippled_budget_keeps_cofactor():
    n = 1_000_003 * 1_000_033 * 7
    r = factor_integer(n, FactorBudget(trial_bound=100, rho_iterations=0))
    assert r.as_dict() == {7: 1}
    assert r.cofactor == 1_000_003 * 1_000_033


def test_primality_agrees_with_oracle():
    for n in range(2, 5000):
        assert is_probable_prime(n) == sympy.isprime(n)
    big = sympy.nextprime(DETERMINISTIC_MR_LIMIT * 10)
    assert is_probable_prime(big)
    assert not is_probable_prime(big * sympy.nextprime(big))
    # strong pseudoprime to several small bases
    assert not is_probable_prime(3215031751)


def test_budget_validation():
    with pytest.raises(ValueError):
        FactorBudget(trial_bound=1)
    with pytest.raises(ValueError):
        FactorBudget(rho_iterations=-1)
