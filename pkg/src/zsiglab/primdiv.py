"""Primitive prime divisors and Zsigmondy sets of orbits.

The primitive part of f^n(alpha) is extracted without factoring: starting from
the numerator content of f^n(alpha), gcds with the numerator contents of every
earlier nonzero iterate f^m(alpha), 1 <= m < n, are divided out until coprime.
A prime survives exactly when it is primitive, so Zsigmondy membership (the
primitive part is a unit) never depends on the factorization budget. Only the
multiplicity-one witness search and the support classification factor.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

from .dynamics import OrbitTable, UnicriticalMap, detect_periodicity, iterate
from .factoring import DEFAULT_BUDGET, FactorBudget, ZeroInput, factor_integer
from .numfield import (
    BudgetExceeded,
    FieldElement,
    NumberField,
    PrimeOfK,
    ZeroElement,
    canonical_associate,
    ok_gcd,
    primes_above,
    valuation,
)

__all__ = [
    "FactorBudget",
    "factor_integer",
    "ZeroInput",
    "ZeroIterate",
    "PreperiodicOrbit",
    "Support",
    "LevelReport",
    "ZsigmondyReport",
    "SupportClassification",
    "numerator_content",
    "positive_support",
    "primitive_part",
    "primitive_prime_divisors",
    "zsigmondy_set",
    "classify_support",
    "imprimitive_mass",
]


class ZeroIterate(ValueError):
    """f^n(alpha) = 0; the caller records n as a Zsigmondy member directly."""


class PreperiodicOrbit(ValueError):
    pass


@dataclass(frozen=True)
class Support:
    """Positive-valuation support, possibly incomplete.

    ``cofactor_norm`` is the absolute norm of the part whose primes are not
    listed (1 when complete).
    """

    entries: tuple[tuple[PrimeOfK, int], ...]
    cofactor_norm: int = 1

    @property
    def complete(self) -> bool:
        return self.cofactor_norm == 1

    @property
    def status(self) -> str:
        return "Exact" if self.complete else "Partial"

    def primes(self) -> list[PrimeOfK]:
        return [p for p, _ in self.entries]

    def as_dict(self) -> dict[PrimeOfK, int]:
        return dict(self.entries)


def numerator_content(x: FieldElement) -> FieldElement:
    """Canonical generator of the ideal prod_{v_p(x) > 0} p^{v_p(x)}."""
    K = x.K
    if not x:
        raise ZeroElement("numerator content of 0")
    if K.D == 0:
        return K(abs(x.a.numerator))
    m = x.denominator()
    y = x * m
    if m == 1:
        return canonical_associate(y)
    g = ok_gcd(K, y, K(m))
    return canonical_associate(y / g)


def _is_unit(y: FieldElement) -> bool:
    return y.abs_norm() == 1


def factor_integral(y: FieldElement, budget: FactorBudget = DEFAULT_BUDGET) -> Support:
    """Factor a nonzero element of O_K as far as the budget allows."""
    K = y.K
    norm = int(y.abs_norm())
    if norm == 1:
        return Support(())
    res = factor_integer(norm, budget)
    entries = []
    for p, _ in res.factors:
        for prime in primes_above(K, p):
            e = valuation(K, y, prime)
            if e:
                entries.append((prime, e))
    entries.sort(key=lambda pe: pe[0].sort_key())
    return Support(tuple(entries), res.cofactor)


def positive_support(
    K: NumberField, x: FieldElement, budget: FactorBudget = DEFAULT_BUDGET
) -> Support:
    """Primes with v_p(x) > 0 and their exponents, found by factoring the numerator content."""
    x = K(x) if not isinstance(x, FieldElement) else x
    if not x:
        raise ZeroElement("positive support of 0")
    return factor_integral(numerator_content(x), budget)


def _sieve(N: FieldElement, earlier: Sequence[FieldElement]) -> FieldElement:
    K = N.K
    if K.D == 0:
        n = int(N.a)
        for a in earlier:
            a = int(a.a)
            g = math.gcd(n, a)
            while g > 1:
                n //= g
                g = math.gcd(n, g)
        return K(n)
    for a in earlier:
        g = ok_gcd(K, N, a)
        while not _is_unit(g):
            N = N / g
            g = ok_gcd(K, N, g)
    return canonical_associate(N)


def _check_level(orbit: OrbitTable, n: int) -> None:
    if n < 2:
        raise ValueError("primitive divisors are defined for n >= 2")
    orbit.value(n)  # raises past the computed range


def primitive_part(orbit: OrbitTable, n: int) -> FieldElement:
    """Part of the numerator content of f^n(alpha) supported on primitive primes."""
    _check_level(orbit, n)
    x = orbit.value(n)
    if not x:
        raise ZeroIterate(f"f^{n}(alpha) = 0")
    earlier = [numerator_content(orbit.value(m)) for m in range(1, n) if orbit.value(m)]
    return _sieve(numerator_content(x), earlier)


def primitive_prime_divisors(
    orbit: OrbitTable, n: int, budget: FactorBudget = DEFAULT_BUDGET
) -> Support:
    """Primitive primes of f^n(alpha) with their multiplicities in f^n(alpha)."""
    return factor_integral(primitive_part(orbit, n), budget)


@dataclass(frozen=True)
class LevelReport:
    n: int
    value: FieldElement
    primitive_part: FieldElement | None
    primitive_primes: Support | None
    in_zsigmondy: bool
    mult_one_witness: PrimeOfK | None
    status: str  # "Exact" or "Partial" for the witness search

    @property
    def is_zero(self) -> bool:
        return not self.value


@dataclass(frozen=True)
class ZsigmondyReport:
    map: UnicriticalMap
    start: FieldElement
    levels: tuple[LevelReport, ...]
    wandering_certified: bool
    overflow_at: int | None = None

    @property
    def zsigmondy_set(self) -> list[int]:
        return [lv.n for lv in self.levels if lv.in_zsigmondy]

    @property
    def without_witness(self) -> list[int]:
        """Levels with no certified multiplicity-one primitive prime."""
        return [lv.n for lv in self.levels if lv.mult_one_witness is None]

    @property
    def status(self) -> str:
        return "Exact" if all(lv.status == "Exact" for lv in self.levels) else "Partial"

    def level(self, n: int) -> LevelReport:
        for lv in self.levels:
            if lv.n == n:
                return lv
        raise KeyError(n)


def _witness(part: FieldElement, budget: FactorBudget) -> tuple[Support, PrimeOfK | None, str]:
    support = factor_integral(part, budget)
    for p, e in support.entries:
        if e == 1:
            return support, p, "Exact"
    return support, None, support.status


def _witness_task(args):
    part, budget = args
    return _witness(part, budget)


def zsigmondy_set(
    f: UnicriticalMap,
    alpha,
    n_max: int,
    budget: FactorBudget = DEFAULT_BUDGET,
    *,
    find_witnesses: bool = True,
    require_wandering: bool = True,
    jobs: int = 1,
    orbit: OrbitTable | None = None,
) -> ZsigmondyReport:
    """Zsigmondy membership for every level 2..n_max, plus multiplicity-one witnesses."""
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    alpha = f.K(alpha) if not isinstance(alpha, FieldElement) else alpha
    verdict = detect_periodicity(f, alpha)
    if verdict.is_preperiodic:
        raise PreperiodicOrbit(
            f"{alpha} is preperiodic under {f} (preperiod {verdict.preperiod}, period {verdict.period})"
        )
    if require_wandering and not verdict.is_wandering:
        raise PreperiodicOrbit(f"could not certify an infinite orbit for {alpha} under {f}")
    if orbit is None:
        orbit = iterate(f, alpha, n_max)
    top = min(n_max, orbit.n_max)
    contents: list[FieldElement | None] = [None]
    for m in range(1, top + 1):
        v = orbit.value(m)
        contents.append(numerator_content(v) if v else None)

    parts: list[FieldElement | None] = []
    for n in range(2, top + 1):
        if contents[n] is None:
            parts.append(None)
            continue
        earlier = [contents[m] for m in range(1, n) if contents[m] is not None]
        parts.append(_sieve(contents[n], earlier))

    witnesses: list = [None] * len(parts)
    if find_witnesses:
        todo = [(i, (p, budget)) for i, p in enumerate(parts) if p is not None and not _is_unit(p)]
        if jobs > 1 and len(todo) > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(_witness_task, [a for _, a in todo]))
        else:
            results = [_witness_task(a) for _, a in todo]
        for (i, _), r in zip(todo, results):
            witnesses[i] = r

    levels = []
    for idx, n in enumerate(range(2, top + 1)):
        part = parts[idx]
        value = orbit.value(n)
        if part is None:
            levels.append(LevelReport(n, value, None, None, True, None, "Exact"))
            continue
        member = _is_unit(part)
        if member:
            levels.append(LevelReport(n, value, part, Support(()), True, None, "Exact"))
            continue
        if witnesses[idx] is None:
            levels.append(LevelReport(n, value, part, None, False, None, "Partial"))
            continue
        support, wit, status = witnesses[idx]
        levels.append(LevelReport(n, value, part, support, False, wit, status))
    return ZsigmondyReport(
        f, alpha, tuple(levels), verdict.is_wandering, orbit.overflow_at
    )


@dataclass(frozen=True)
class SupportClassification:
    Y1: tuple[tuple[PrimeOfK, int], ...]
    Y2: tuple[tuple[PrimeOfK, int], ...]
    Y3plus: tuple[tuple[PrimeOfK, int], ...]

    @staticmethod
    def _mass(entries) -> float:
        return sum(p.weight for p, _ in entries)

    @property
    def masses(self) -> tuple[float, float, float]:
        return self._mass(self.Y1), self._mass(self.Y2), self._mass(self.Y3plus)

    @property
    def weighted_mass(self) -> float:
        """sum over the positive support of v_p * N_p."""
        return sum(e * p.weight for cls in (self.Y1, self.Y2, self.Y3plus) for p, e in cls)


def classify_support(
    orbit: OrbitTable, n: int, budget: FactorBudget = DEFAULT_BUDGET
) -> SupportClassification:
    """Split the positive support of f^n(alpha) by multiplicity 1, 2 and >= 3."""
    x = orbit.value(n)
    if not x:
        raise ZeroIterate(f"f^{n}(alpha) = 0")
    support = positive_support(x.K, x, budget)
    if not support.complete:
        raise BudgetExceeded(f"support of f^{n}(alpha) not fully factored", support.cofactor_norm)
    y1 = tuple((p, e) for p, e in support.entries if e == 1)
    y2 = tuple((p, e) for p, e in support.entries if e == 2)
    y3 = tuple((p, e) for p, e in support.entries if e >= 3)
    return SupportClassification(y1, y2, y3)


def imprimitive_primes(
    orbit: OrbitTable, n: int, budget: FactorBudget = DEFAULT_BUDGET
) -> list[PrimeOfK]:
    """Primes dividing f^n(alpha) that also divide an earlier nonzero iterate f^m, 1 <= m < n."""
    x = orbit.value(n)
    if not x:
        raise ZeroIterate(f"f^{n}(alpha) = 0")
    if n < 2:
        return []
    full = numerator_content(x)
    prim = primitive_part(orbit, n)
    rest = full / prim
    support = factor_integral(rest, budget)
    if not support.complete:
        raise BudgetExceeded(
            f"imprimitive part of f^{n}(alpha) not fully factored", support.cofactor_norm
        )
    return support.primes()


def imprimitive_mass(
    orbit: OrbitTable, n: int, budget: FactorBudget = DEFAULT_BUDGET
) -> float:
    return sum(p.weight for p in imprimitive_primes(orbit, n, budget))
