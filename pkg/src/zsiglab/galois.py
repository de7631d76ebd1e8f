"""Iterated-preimage towers: stability, discriminants and maximality verdicts."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from . import poly
from .dynamics import (
    MAX_EXPANSION_DEGREE,
    UnicriticalMap,
    detect_periodicity,
    example_family,
    example_shift,
    iterate,
    iterate_polynomial,
)
from .factoring import DEFAULT_BUDGET, FactorBudget, factor_integer
from .numfield import QQ, FieldElement, NumberField, PrimeOfK, valuation
from .primdiv import ZeroIterate, primitive_prime_divisors

__all__ = [
    "QuadExtElement",
    "ReducibleBase",
    "Verdict",
    "StabilityReport",
    "TowerReport",
    "FamilyCheck",
    "disc_iterate",
    "disc_recursive",
    "is_square",
    "is_square_in_quadratic",
    "squarefree_core",
    "stability_test",
    "maximality_sufficient",
    "maximality_level2_oracle",
    "tower_report",
    "verify_example_family",
]


class ReducibleBase(ValueError):
    pass


# --------------------------------------------------------------------------
# exact arithmetic in Q(sqrt D)


def squarefree_core(q) -> int:
    """Squarefree integer D with q = D * r^2 for some rational r."""
    q = Fraction(q)
    if q == 0:
        raise ValueError("core of 0")
    n = q.numerator * q.denominator  # same square class as q
    res = factor_integer(abs(n))
    if not res.is_complete:
        raise ArithmeticError(f"could not factor {abs(n)}")
    core = 1
    for p, e in res.factors:
        if e % 2:
            core *= p
    return core if n > 0 else -core


@dataclass(frozen=True)
class QuadExtElement:
    """a + b sqrt(D) with D squarefree, D not 0 or 1."""

    D: int
    a: Fraction
    b: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        if self.D in (0, 1) or squarefree_core(self.D) != self.D:
            raise ValueError(f"{self.D} is not a squarefree non-square")
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "b", Fraction(self.b))

    def __mul__(self, other: QuadExtElement) -> QuadExtElement:
        if other.D != self.D:
            raise ValueError("different quadratic fields")
        return QuadExtElement(
            self.D, self.a * other.a + self.D * self.b * other.b, self.a * other.b + self.b * other.a
        )

    def is_rational(self) -> bool:
        return self.b == 0

    def __str__(self) -> str:
        return f"{self.a} + {self.b}*sqrt({self.D})"


def _rational_sqrt(q: Fraction) -> Fraction | None:
    if q < 0:
        return None
    n, d = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if n * n == q.numerator and d * d == q.denominator:
        return Fraction(n, d)
    return None


def is_square(z: FieldElement) -> FieldElement | None:
    """A square root of z in its field, or None."""
    K = z.K
    if not z:
        return K.zero
    if K.D == 0:
        r = _rational_sqrt(z.a)
        return None if r is None else K(r)
    # w^2 = z forces N(w) = s with s^2 = N(z) and Tr(w)^2 = Tr(z) + 2s
    s = _rational_sqrt(z.norm())
    if s is None:
        return None
    tau = _rational_sqrt(z.trace() + 2 * s)
    if tau is None:
        return None
    if tau:
        w = (z + s) / tau
    else:
        # trace-zero root: w = q sqrt(-D)
        q = _rational_sqrt(s / K.D)
        if q is None:
            return None
        root = K.gen if K.trace_w == 0 else 2 * K.gen - 1
        w = root * q
    return w if w * w == z else None


def is_square_in_quadratic(D, z) -> bool:
    """z rational is a square in Q(sqrt D) iff z or z D is a rational square."""
    D, z = Fraction(D), Fraction(z)
    if _rational_sqrt(D) is not None:
        raise ValueError(f"{D} is a rational square")
    if z == 0:
        raise ValueError("z must be nonzero")
    return _rational_sqrt(z) is not None or _rational_sqrt(z * D) is not None


def _quadratic_sqrt(D: int, z: Fraction) -> QuadExtElement | None:
    r = _rational_sqrt(z)
    if r is not None:
        return QuadExtElement(D, r, 0)
    r = _rational_sqrt(z / D)
    if r is not None:
        return QuadExtElement(D, 0, r)
    return None


# --------------------------------------------------------------------------
# discriminants


def disc_recursive(f: UnicriticalMap, i: int) -> FieldElement:
    """d^{d^i} Disc(f^{i-1})^d f^i(gamma)^{d-1}, built up from Disc(f^0) = 1 (sign dropped)."""
    if i < 1:
        raise ValueError("i must be >= 1")
    d, K = f.d, f.K
    orbit = iterate(f, f.gamma, i)
    disc = K.one
    for k in range(1, i + 1):
        disc = K(d) ** (d**k) * disc**d * orbit.value(k) ** (d - 1)
    return disc


def disc_iterate(f: UnicriticalMap, i: int) -> FieldElement:
    """Disc(f^i) by resultant of the expanded iterate, checked against the recursion."""
    direct = poly.discriminant(iterate_polynomial(f, i))
    rec = disc_recursive(f, i)
    if direct != rec and direct != -rec:
        raise AssertionError(f"disc recursion disagrees at i={i}: {direct} vs {rec}")
    return direct


# --------------------------------------------------------------------------
# verdicts


@dataclass(frozen=True)
class Verdict:
    kind: str  # "Maximal", "NotMaximal" or "Inconclusive"
    level: int
    witness: str = ""
    note: str = ""
    budget_exhausted: bool = False

    def as_dict(self) -> dict:
        return {
            "level": self.level,
            "verdict": self.kind,
            "witness": self.witness,
            "note": self.note,
            "budget_exhausted": self.budget_exhausted,
        }


@dataclass(frozen=True)
class StabilityReport:
    status: str  # "StableUpTo" or "Failed"
    checked_to: int
    failed_at: int | None = None
    pcf: bool = False

    @property
    def ok(self) -> bool:
        return self.status == "StableUpTo"

    def __str__(self) -> str:
        if self.ok:
            return f"StableUpTo({self.checked_to})"
        return f"Failed({self.failed_at})"


def stability_test(f: UnicriticalMap, n_max: int) -> StabilityReport:
    """f irreducible and f^n(gamma) a non-square for 2 <= n <= n_max (d = 2)."""
    if f.d != 2:
        raise ValueError("the square criterion is for d = 2")
    pcf = detect_periodicity(f, f.gamma).is_preperiodic
    if is_square(poly.discriminant(f.polynomial())) is not None:
        return StabilityReport("Failed", n_max, 1, pcf)
    orbit = iterate(f, f.gamma, n_max)
    for n in range(2, orbit.n_max + 1):
        if is_square(orbit.value(n)) is not None:
            return StabilityReport("Failed", n_max, n, pcf)
    return StabilityReport("StableUpTo", orbit.n_max, None, pcf)


def _has_root_of_unity(K: NumberField, d: int) -> bool:
    return K.roots_of_unity_order % d == 0


def _integral_at(K: NumberField, x: FieldElement, p: PrimeOfK) -> bool:
    return not x or valuation(K, x, p) >= 0


def maximality_sufficient(
    f: UnicriticalMap, n: int, budget: FactorBudget = DEFAULT_BUDGET
) -> Verdict:
    """Maximal(p) from a multiplicity-one primitive prime p of f^n(gamma) away from d
    and the denominators of c and gamma; Inconclusive otherwise."""
    if n < 2:
        raise ValueError("n must be >= 2")
    K, d = f.K, f.d
    if not _has_root_of_unity(K, d):
        return Verdict("Inconclusive", n, note=f"{K.name} lacks a primitive {d}-th root of unity")
    if d == 2:
        stab = stability_test(f, n)
        if not stab.ok:
            return Verdict("Inconclusive", n, note=f"stability {stab}")
    orbit = iterate(f, f.gamma, n)
    try:
        support = primitive_prime_divisors(orbit, n, budget)
    except ZeroIterate:
        return Verdict("Inconclusive", n, note=f"f^{n}(gamma) = 0")
    for p, e in support.entries:
        if e != 1 or d % p.rational_prime == 0:
            continue
        if _integral_at(K, f.c, p) and _integral_at(K, f.gamma, p):
            return Verdict("Maximal", n, witness=str(p))
    return Verdict(
        "Inconclusive",
        n,
        note="no admissible multiplicity-one primitive prime",
        budget_exhausted=not support.complete,
    )


def maximality_level2_oracle(f: UnicriticalMap) -> Verdict:
    """Exact level-2 test over Q: maximal iff f^2(gamma) is not a square in Q(sqrt Disc f)."""
    if f.d != 2 or f.K != QQ:
        raise ValueError("the level-2 oracle needs d = 2 over Q")
    disc = poly.discriminant(f.polynomial()).a
    if _rational_sqrt(disc) is not None:
        raise ReducibleBase(f"Disc({f}) = {disc} is a rational square")
    D = squarefree_core(disc)
    z = iterate(f, f.gamma, 2).value(2).a
    if z == 0:
        return Verdict("NotMaximal", 2, witness="f^2(gamma) = 0")
    w = _quadratic_sqrt(D, z)
    if w is not None:
        sq = w * w
        if not (sq.is_rational() and sq.a == z):
            raise AssertionError("square root check failed")
        return Verdict("NotMaximal", 2, witness=f"({w})^2 = {z}")
    return Verdict("Maximal", 2, witness=f"{z} is not a square in Q(sqrt({D}))")


# --------------------------------------------------------------------------
# reports


@dataclass
class TowerReport:
    map: UnicriticalMap
    stability: StabilityReport | None
    verdicts: list[Verdict] = field(default_factory=list)
    oracle: Verdict | None = None
    discs: dict[int, FieldElement] = field(default_factory=dict)

    def rows(self) -> list[dict]:
        out = []
        for v in self.verdicts:
            row = {"map": str(self.map), "test": "sufficient", **v.as_dict()}
            row["disc"] = str(self.discs[v.level]) if v.level in self.discs else ""
            out.append(row)
        if self.oracle is not None:
            row = {"map": str(self.map), "test": "level2-oracle", **self.oracle.as_dict()}
            row["disc"] = str(self.discs.get(2, ""))
            out.append(row)
        return out


def tower_report(f: UnicriticalMap, n_max: int, budget: FactorBudget = DEFAULT_BUDGET) -> TowerReport:
    stab = stability_test(f, n_max) if f.d == 2 else None
    report = TowerReport(f, stab)
    for n in range(1, n_max + 1):
        if f.d**n <= MAX_EXPANSION_DEGREE:
            report.discs[n] = disc_iterate(f, n)
    for n in range(2, n_max + 1):
        report.verdicts.append(maximality_sufficient(f, n, budget))
    if f.d == 2 and f.K == QQ:
        report.oracle = maximality_level2_oracle(f)
    return report


@dataclass(frozen=True)
class FamilyCheck:
    i: int
    map: UnicriticalMap
    shift: FieldElement
    a_identity: bool
    b_two_adic: bool
    c_congruence: bool
    d_disc_identity: bool
    e_witness: str
    stable: bool
    oracle: Verdict | None

    @property
    def ok(self) -> bool:
        return (
            self.a_identity
            and self.b_two_adic
            and self.c_congruence
            and self.d_disc_identity
            and bool(self.e_witness)
            and self.stable
            and (self.oracle is None or self.oracle.kind == "NotMaximal")
        )

    def as_dict(self) -> dict:
        return {
            "i": self.i,
            "map": str(self.map),
            "shift": str(self.shift),
            "a": self.a_identity,
            "b": self.b_two_adic,
            "c": self.c_congruence,
            "d": self.d_disc_identity,
            "witness": self.e_witness,
            "stable": self.stable,
            "verdict": "NotMaximal" if self.e_witness else "Inconclusive",
            "oracle": self.oracle.kind if self.oracle else "",
        }


def _v2(q: Fraction) -> int:
    if q == 0:
        raise ValueError("v_2(0)")
    n, d, v = q.numerator, q.denominator, 0
    while n % 2 == 0:
        n //= 2
        v += 1
    while d % 2 == 0:
        d //= 2
        v -= 1
    return v


def verify_example_family(i_max: int, levels: int = 12) -> list[FamilyCheck]:
    if i_max < 2:
        raise ValueError("i_max must be >= 2")
    base = UnicriticalMap.make(2, 0, 2)
    out = []
    for i in range(2, i_max + 1):
        f = example_family(i)
        g = f.gamma
        orbit = iterate(f, g, max(i, levels))
        a_ok = orbit.value(1) == -orbit.value(i)
        b_ok = all(_v2(orbit.value(n).a) == 1 for n in range(1, levels + 1))
        fi0 = iterate(base, QQ.zero, i).value(i).a
        c_ok = ((fi0 - 2) / 2) % 8 == 2
        disc = poly.discriminant(f.polynomial()).a
        d_ok = -orbit.value(1).a == disc / 4
        # f_i^i(gamma) = -f_i(gamma) = Disc/4 = (sqrt(Disc)/2)^2 with sqrt(Disc) in K_1
        witness = ""
        target = orbit.value(i).a
        D = squarefree_core(disc)
        w = _quadratic_sqrt(D, target)
        if w is not None:
            sq = w * w
            if sq.is_rational() and sq.a == target:
                witness = f"({w})^2 = {target}"
        stable = stability_test(f, levels).ok
        oracle = maximality_level2_oracle(f) if i == 2 else None
        out.append(
            FamilyCheck(i, f, example_shift(i), a_ok, b_ok, c_ok, d_ok, witness, stable, oracle)
        )
    return out
