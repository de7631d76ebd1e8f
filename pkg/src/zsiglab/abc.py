"""abc triples generated by orbits, with radical, quality and the two margin checks."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from .dynamics import UnicriticalMap, iterate
from .factoring import DEFAULT_BUDGET, FactorBudget
from .heights import DEFAULT_SLACK, BoundCheck, _greater, _less, height, radical, tuple_height
from .numfield import BudgetExceeded, FieldElement
from .primdiv import imprimitive_mass, positive_support

__all__ = [
    "AbcTriple",
    "DegenerateTriple",
    "orbit_abc_triple",
    "check_rad_lower_bound",
    "check_imprimitive_bound",
    "quality_scan",
]


class DegenerateTriple(ValueError):
    pass


@dataclass(frozen=True)
class AbcTriple:
    a: FieldElement
    b: FieldElement
    s: FieldElement
    h_proj: float
    rad: float
    n: int | None = None

    def __post_init__(self) -> None:
        if self.a + self.b != self.s:
            raise ValueError("a + b != s")

    @property
    def quality(self) -> float:
        return self.h_proj / self.rad if self.rad > 0 else math.inf

    @classmethod
    def build(
        cls, a: FieldElement, b: FieldElement, budget: FactorBudget = DEFAULT_BUDGET, n=None
    ) -> AbcTriple:
        s = a + b
        if not a or not b or not s:
            raise DegenerateTriple(f"zero part in ({a}, {b}, {s})")
        K = a.K
        return cls(a, b, s, tuple_height(K, (a, b, s)).value, radical(K, (a, b, s), budget), n)

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "a": str(self.a),
            "b": str(self.b),
            "s": str(self.s),
            "h": self.h_proj,
            "rad": self.rad,
            "quality": self.quality,
        }


def _orbit_parts(f: UnicriticalMap, alpha, n: int):
    if n < 1:
        raise ValueError("n must be >= 1")
    orbit = iterate(f, alpha, n)
    x = orbit.value(n - 1)
    a = (x - f.gamma) ** f.d
    if not a:
        raise DegenerateTriple(f"f^{n - 1}(alpha) = gamma")
    if not f.c:
        raise DegenerateTriple("c = 0")
    if not orbit.value(n):
        raise DegenerateTriple(f"f^{n}(alpha) = 0")
    return orbit, a


def orbit_abc_triple(
    f: UnicriticalMap, alpha, n: int, budget: FactorBudget = DEFAULT_BUDGET
) -> AbcTriple:
    """(x - gamma)^d + c = f^n(alpha) with x = f^{n-1}(alpha)."""
    _, a = _orbit_parts(f, alpha, n)
    return AbcTriple.build(a, f.c, budget, n)


def check_rad_lower_bound(
    f: UnicriticalMap,
    alpha,
    n: int,
    epsilon: float,
    budget: FactorBudget = DEFAULT_BUDGET,
    slack: float = DEFAULT_SLACK,
) -> BoundCheck:
    """sum_{v_p(f^n(alpha)) > 0} N_p > (d - 1 - epsilon) h(f^{n-1}(alpha))."""
    if n < 1:
        raise ValueError("n must be >= 1")
    orbit = iterate(f, alpha, n)
    x = orbit.value(n)
    if not x:
        raise DegenerateTriple(f"f^{n}(alpha) = 0")
    support = positive_support(x.K, x, budget)
    if not support.complete:
        raise BudgetExceeded(f"support of f^{n}(alpha) not fully factored", support.cofactor_norm)
    lhs = sum(p.weight for p in support.primes())
    rhs = (f.d - 1 - epsilon) * height(orbit.value(n - 1))
    return _greater(lhs, rhs, slack, strict=True)


def check_imprimitive_bound(
    f: UnicriticalMap,
    alpha,
    n: int,
    delta: float,
    budget: FactorBudget = DEFAULT_BUDGET,
    slack: float = DEFAULT_SLACK,
) -> BoundCheck:
    """Mass of primes recurring from earlier levels <= delta h(f^n(alpha))."""
    orbit = iterate(f, alpha, n)
    x = orbit.value(n)
    if not x:
        raise DegenerateTriple(f"f^{n}(alpha) = 0")
    mass = imprimitive_mass(orbit, n, budget) if n >= 2 else 0.0
    return _less(mass, delta * height(x), slack)


def quality_scan(
    f: UnicriticalMap,
    alpha,
    n_range: Iterable[int],
    budget: FactorBudget = DEFAULT_BUDGET,
    *,
    skipped: list | None = None,
) -> list[AbcTriple]:
    """Triples over the range sorted by quality (highest first); degenerate or
    unfactorable levels are appended to ``skipped`` as (n, reason)."""
    out = []
    for n in n_range:
        try:
            out.append(orbit_abc_triple(f, alpha, n, budget))
        except (DegenerateTriple, BudgetExceeded) as exc:
            if skipped is not None:
                skipped.append((n, f"{type(exc).__name__}: {exc}"))
    out.sort(key=lambda t: (-t.quality, t.n))
    return out
