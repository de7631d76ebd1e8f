"""S-unit decompositions f^n(alpha) = u d y^l and the quadratic witness curves."""

from __future__ import annotations

from dataclasses import dataclass

from . import poly
from .dynamics import UnicriticalMap, iterate, iterate_polynomial
from .factoring import DEFAULT_BUDGET, FactorBudget, factor_integer
from .heights import DEFAULT_SLACK, BoundCheck, _greater, _less, height
from .numfield import (
    BudgetExceeded,
    FieldElement,
    PrimeOfK,
    factor_element,
    primes_above,
    valuation,
)
from .primdiv import ZeroIterate, classify_support

__all__ = [
    "SUnitDecomposition",
    "WitnessCurve",
    "DegenerateDiscriminant",
    "denominator_primes",
    "decompose",
    "check_unit_height_bound",
    "heightunif_witness",
    "check_Y1_mass",
]


class DegenerateDiscriminant(ArithmeticError):
    pass


@dataclass(frozen=True)
class SUnitDecomposition:
    u: FieldElement
    d_part: FieldElement
    y: FieldElement
    l: int
    S: tuple[PrimeOfK, ...]
    value: FieldElement

    def rebuild(self) -> FieldElement:
        return self.u * self.d_part * self.y**self.l

    def windows_ok(self) -> bool:
        """Exponent windows for d_part: [0, l-1] off S and 0 on S."""
        K = self.u.K
        if not self.d_part.is_integral():
            return False
        table = factor_element(K, self.d_part)
        for p, e in table:
            if p in self.S:
                if e != 0:
                    return False
            elif not 0 <= e <= self.l - 1:
                return False
        return True

    def u_is_S_unit(self) -> bool:
        K = self.u.K
        return all(p in self.S for p, _ in factor_element(K, self.u))

    def y_is_S_integral(self) -> bool:
        K = self.u.K
        return all(e >= 0 or p in self.S for p, e in factor_element(K, self.y))


def denominator_primes(f: UnicriticalMap, alpha, budget: FactorBudget = DEFAULT_BUDGET):
    """Finite primes where alpha, gamma or c has negative valuation."""
    K = f.K
    alpha = K(alpha) if not isinstance(alpha, FieldElement) else alpha
    out = []
    for x in (alpha, f.gamma, f.c):
        m = x.denominator()
        if m == 1:
            continue
        res = factor_integer(m, budget)
        if not res.is_complete:
            raise BudgetExceeded(f"could not factor denominator {m}", res.cofactor)
        for p, _ in res.factors:
            for prime in primes_above(K, p):
                if valuation(K, x, prime) < 0 and prime not in out:
                    out.append(prime)
    return tuple(sorted(out))


def decompose(
    f: UnicriticalMap, alpha, n: int, l: int, budget: FactorBudget = DEFAULT_BUDGET
) -> SUnitDecomposition:
    if l < 2:
        raise ValueError("l must be >= 2")
    K = f.K
    x = iterate(f, alpha, n).value(n)
    if not x:
        raise ZeroIterate(f"f^{n}(alpha) = 0")
    S = denominator_primes(f, alpha, budget)
    table = factor_element(K, x, budget)
    u, d_part, y = table.unit, K.one, K.one
    for p, e in table:
        pi = p.generator
        if p in S:
            u = u * pi**e
            continue
        q, r = divmod(e, l)
        d_part = d_part * pi**r
        y = y * pi**q
    dec = SUnitDecomposition(u, d_part, y, l, S, x)
    if dec.rebuild() != x:
        raise AssertionError(f"decomposition of {x} does not rebuild")
    return dec


def check_unit_height_bound(
    dec: SUnitDecomposition, f: UnicriticalMap, alpha, C: float, slack: float = DEFAULT_SLACK
) -> BoundCheck:
    """h(u) <= C (l - 1)^2 (h(alpha) + h(gamma) + h(c))."""
    K = f.K
    alpha = K(alpha) if not isinstance(alpha, FieldElement) else alpha
    rhs = C * (dec.l - 1) ** 2 * (height(alpha) + height(f.gamma) + height(f.c))
    return _less(height(dec.u), rhs, slack)


@dataclass(frozen=True)
class WitnessCurve:
    F: tuple[FieldElement, ...]  # constant term first
    point: tuple[FieldElement, FieldElement]
    disc_nonzero: bool
    decomposition: SUnitDecomposition

    def on_curve(self) -> bool:
        x, y = self.point
        return y * y == poly.evaluate(self.F, x)

    def as_dict(self) -> dict:
        return {
            "F": [str(c) for c in self.F],
            "point": [str(self.point[0]), str(self.point[1])],
            "disc_nonzero": self.disc_nonzero,
        }


def heightunif_witness(
    f: UnicriticalMap, alpha, n: int, budget: FactorBudget = DEFAULT_BUDGET
) -> WitnessCurve:
    """Rational point (f^{n-3}(alpha), u d y) on Y^2 = u d f^3(X)."""
    if f.d != 2:
        raise ValueError("witness curves are built for d = 2")
    if n < 3:
        raise ValueError("witness curves need n >= 3")
    dec = decompose(f, alpha, n, 2, budget)
    ud = dec.u * dec.d_part
    F = poly.scale(iterate_polynomial(f, 3), ud)
    x = iterate(f, alpha, n - 3).value(n - 3)
    curve = WitnessCurve(F, (x, ud * dec.y), True, dec)
    if not curve.on_curve():
        raise AssertionError("witness point is not on the curve")
    if not poly.discriminant(F):
        raise DegenerateDiscriminant(f"disc of u d f^3 vanishes for {f}")
    return curve


def check_Y1_mass(
    f: UnicriticalMap,
    alpha,
    n: int,
    epsilon: float,
    budget: FactorBudget = DEFAULT_BUDGET,
    slack: float = DEFAULT_SLACK,
) -> BoundCheck:
    """sum_{p in Y1} N_p > epsilon h(f^n(alpha))."""
    orbit = iterate(f, alpha, n)
    cls = classify_support(orbit, n, budget)
    mass = cls.masses[0]
    rhs = epsilon * height(orbit.value(n))
    return _greater(mass, rhs, slack, strict=True)
