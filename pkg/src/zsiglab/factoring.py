"""Budgeted integer factorization.

Trial division by blocks of small primes, then Pollard rho with Brent's cycle
detection on whatever survives. Every call is bounded by a FactorBudget; when
the budget runs out the result is returned as partial, with the unfactored
cofactor kept intact so that callers can still reason about it.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from functools import lru_cache

from sympy import integer_nthroot

__all__ = [
    "FactorBudget",
    "FactorResult",
    "ZeroInput",
    "DETERMINISTIC_MR_LIMIT",
    "factor_integer",
    "is_probable_prime",
    "small_primes",
]

# Miller-Rabin with the first 13 prime bases is exact below this bound.
DETERMINISTIC_MR_LIMIT = 3_317_044_064_679_887_385_961_981
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_RANDOM_MR_ROUNDS = 64
_BLOCK = 512


class ZeroInput(ValueError):
    """Raised when asked to factor 0."""


@dataclass(frozen=True)
class FactorBudget:
    trial_bound: int = 10**6
    rho_iterations: int = 10**7
    allow_probable_prime: bool = True

    def __post_init__(self) -> None:
        if self.trial_bound < 2 or self.rho_iterations < 0:
            raise ValueError(f"invalid factor budget {self!r}")


DEFAULT_BUDGET = FactorBudget()


@dataclass(frozen=True)
class FactorResult:
    """Factorization of ``sign * prod(p**e) * cofactor``.

    ``cofactor`` is 1 when the factorization is complete; otherwise it is an
    unfactored part > 1 that is composite or of unknown status.
    ``probable`` is set when some reported prime was only certified by
    random-base strong pseudoprime tests.
    """

    sign: int
    factors: tuple[tuple[int, int], ...]
    cofactor: int = 1
    probable: bool = False

    @property
    def is_complete(self) -> bool:
        return self.cofactor == 1

    def as_dict(self) -> dict[int, int]:
        return dict(self.factors)

    def value(self) -> int:
        out = self.sign * self.cofactor
        for p, e in self.factors:
            out *= p**e
        return out


@lru_cache(maxsize=8)
def small_primes(bound: int) -> tuple[int, ...]:
    """Primes strictly below ``bound``."""
    if bound < 3:
        return ()
    sieve = bytearray([1]) * bound
    sieve[0:2] = b"\x00\x00"
    for i in range(2, math.isqrt(bound - 1) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(range(i * i, bound, i)))
    return tuple(i for i, flag in enumerate(sieve) if flag)


@lru_cache(maxsize=8)
def _prime_blocks(bound: int) -> tuple[tuple[int, tuple[int, ...]], ...]:
    primes = small_primes(bound)
    blocks = []
    for start in range(0, len(primes), _BLOCK):
        chunk = primes[start : start + _BLOCK]
        blocks.append((math.prod(chunk), chunk))
    return tuple(blocks)


def _strong_probable_prime(n: int, a: int) -> bool:
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    x = pow(a, d, n)
    if x == 1 or x == n - 1:
        return True
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return True
    return False


def is_probable_prime(n: int) -> bool:
    """Strong pseudoprime test.

    Exact for ``n < DETERMINISTIC_MR_LIMIT``; above that, 64 rounds with bases
    drawn from a generator seeded by ``n`` (so repeated calls agree).
    """
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    if n < DETERMINISTIC_MR_LIMIT:
        return all(_strong_probable_prime(n, a) for a in _MR_BASES)
    rng = random.Random(n)
    return all(
        _strong_probable_prime(n, rng.randrange(2, n - 1))
        for _ in range(_RANDOM_MR_ROUNDS)
    )


def _brent(n: int, c: int, limit: int) -> tuple[int | None, int]:
    """One Pollard-Brent run with x -> x^2 + c. Returns (divisor or None, iterations used)."""
    y, r, q, g = 2, 1, 1, 1
    m = 128
    used = 0
    x = ys = y
    while g == 1:
        x = y
        for _ in range(r):
            y = (y * y + c) % n
        used += r
        k = 0
        while k < r and g == 1:
            ys = y
            for _ in range(min(m, r - k)):
                y = (y * y + c) % n
                q = q * abs(x - y) % n
            used += min(m, r - k)
            g = math.gcd(q, n)
            k += m
        r *= 2
        if used >= limit and g == 1:
            return None, used
    if g == n:
        # batch overshot; backtrack one step at a time
        while True:
            ys = (ys * ys + c) % n
            used += 1
            g = math.gcd(abs(x - ys), n)
            if g > 1 or used >= limit:
                break
    if g == n or g == 1:
        return None, used
    return g, used


def _perfect_power(n: int, max_exp: int) -> tuple[int, int]:
    """Return (root, k) with root**k == n and k maximal among primes <= max_exp, else (n, 1)."""
    for k in small_primes(max_exp + 1):
        root, exact = integer_nthroot(n, k)
        if exact:
            r2, k2 = _perfect_power(int(root), max_exp)
            return r2, k * k2
    return n, 1


class _State:
    def __init__(self, budget: FactorBudget) -> None:
        self.budget = budget
        self.rho_left = budget.rho_iterations
        self.probable = False


def _split(n: int, state: _State, out: dict[int, int], mult: int, unfactored: list[int]) -> None:
    """Factor n (> 1, free of small primes) into ``out`` with multiplicity ``mult``."""
    if n == 1:
        return
    if is_probable_prime(n):
        if n >= DETERMINISTIC_MR_LIMIT:
            if not state.budget.allow_probable_prime:
                unfactored.append(n**mult)
                return
            state.probable = True
        out[n] = out.get(n, 0) + mult
        return
    max_exp = max(2, n.bit_length() // max(1, state.budget.trial_bound.bit_length() - 1))
    root, k = _perfect_power(n, max_exp)
    if k > 1:
        _split(root, state, out, mult * k, unfactored)
        return
    c = 1
    while state.rho_left > 0:
        g, used = _brent(n, c, state.rho_left)
        state.rho_left -= used
        if g is not None:
            # g and n//g may share primes; split both and merge counts
            _split(g, state, out, mult, unfactored)
            _split(n // g, state, out, mult, unfactored)
            return
        c += 1
    unfactored.append(n**mult)


@lru_cache(maxsize=4096)
def factor_integer(n: int, budget: FactorBudget = DEFAULT_BUDGET) -> FactorResult:
    """Factor a nonzero integer within ``budget``.

    >>> factor_integer(458330).factors
    ((2, 1), (5, 1), (45833, 1))
    """
    n = int(n)
    if n == 0:
        raise ZeroInput("cannot factor 0")
    sign = -1 if n < 0 else 1
    n = abs(n)
    found: dict[int, int] = {}
    for product, chunk in _prime_blocks(budget.trial_bound):
        if n == 1:
            break
        if math.gcd(n, product) == 1:
            if chunk[-1] ** 2 > n:
                break
            continue
        for p in chunk:
            if n % p == 0:
                e = 0
                while n % p == 0:
                    n //= p
                    e += 1
                found[p] = e
    state = _State(budget)
    unfactored: list[int] = []
    if n > 1:
        primes = small_primes(budget.trial_bound)
        if primes and primes[-1] ** 2 > n:
            # trial division already rules out composites this small
            found[n] = found.get(n, 0) + 1
        else:
            _split(n, state, found, 1, unfactored)
    return FactorResult(
        sign=sign,
        factors=tuple(sorted(found.items())),
        cofactor=math.prod(unfactored),
        probable=state.probable,
    )
