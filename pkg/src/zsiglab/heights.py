"""Weil heights, projective heights, radicals and canonical heights.

``height`` is the workhorse: it uses the Mahler-measure identity (log of the
leading coefficient of the primitive integral minimal polynomial plus the
archimedean contribution), so it never factors anything. The two place-sum
formulations, one through prime valuations and one through normalized local
absolute values, are kept as independent routes and are cross-checked in the
test suite.

All inequality checkers return a ``BoundCheck`` whose ``margin`` is oriented so
that a positive margin means the inequality holds with room to spare.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

from .factoring import DEFAULT_BUDGET, FactorBudget, factor_integer
from .numfield import (
    BudgetExceeded,
    FieldElement,
    NumberField,
    ZeroElement,
    archimedean_logs,
    factor_element,
    log_abs,
    ok_gcd,
    primes_above,
    valuation,
)

if TYPE_CHECKING:
    from .dynamics import UnicriticalMap

LOG2 = math.log(2)
DEFAULT_SLACK = 1e-9


class AllZero(ValueError):
    pass


class DegreeMismatch(ValueError):
    pass


@dataclass(frozen=True)
class HeightValue:
    value: float
    error_bound: float = 0.0

    def __post_init__(self) -> None:
        if self.value < 0 or self.error_bound < 0:
            raise ValueError(f"negative height data {self}")

    def __float__(self) -> float:
        return self.value

    @property
    def interval(self) -> tuple[float, float]:
        return (max(0.0, self.value - self.error_bound), self.value + self.error_bound)


@dataclass(frozen=True)
class BoundCheckConfig:
    epsilon: float = 0.5
    delta: float = 0.25
    tau: float = 0.0
    slack: float = DEFAULT_SLACK

    def __post_init__(self) -> None:
        for name in ("epsilon", "delta", "tau", "slack"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite")
        if self.epsilon <= 0 or self.delta <= 0 or self.tau < 0 or self.slack < 0:
            raise ValueError(f"invalid bound-check config {self}")


@dataclass(frozen=True)
class BoundCheck:
    holds: bool
    margin: float
    lhs: float
    rhs: float

    def __bool__(self) -> bool:
        return self.holds


def _less(lhs: float, rhs: float, slack: float, strict: bool = False) -> BoundCheck:
    """Evaluate lhs < rhs (or <=) with tolerance."""
    margin = rhs - lhs
    return BoundCheck(margin > -slack if strict else margin >= -slack, margin, lhs, rhs)


def _greater(lhs: float, rhs: float, slack: float, strict: bool = False) -> BoundCheck:
    margin = lhs - rhs
    return BoundCheck(margin > -slack if strict else margin >= -slack, margin, lhs, rhs)


# --------------------------------------------------------------------------
# heights of elements


def height(x: FieldElement) -> float:
    """Absolute logarithmic Weil height h(x), with h(0) = 0."""
    if not x:
        return 0.0
    if not x.b:
        q = x.a
        return math.log(max(abs(q.numerator), q.denominator))
    # primitive integral minimal polynomial a0 X^2 + a1 X + a2 of x
    tr, nm = x.trace(), x.norm()
    a0 = math.lcm(tr.denominator, nm.denominator)
    a1 = -tr * a0
    a2 = nm * a0
    g = math.gcd(a0, int(a1), int(a2))
    a0 //= g
    return 0.5 * (math.log(a0) + max(0.0, log_abs(nm)))


def weil_height(K: NumberField, x: FieldElement) -> HeightValue:
    x = K(x) if not isinstance(x, FieldElement) else x
    return HeightValue(height(x))


def _denominator_primes(K: NumberField, x: FieldElement, budget: FactorBudget):
    m = x.denominator()
    if m == 1:
        return []
    res = factor_integer(m, budget)
    if not res.is_complete:
        raise BudgetExceeded(f"could not factor denominator {m}", res.cofactor)
    out = []
    for p, _ in res.factors:
        for prime in primes_above(K, p):
            out.append(prime)
    return out


def height_by_valuations(
    K: NumberField, x: FieldElement, budget: FactorBudget = DEFAULT_BUDGET
) -> float:
    """h(x) as -sum_p min(v_p(x), 0) N_p + (1/[K:Q]) sum_sigma max(log|sigma x|, 0)."""
    x = K(x) if not isinstance(x, FieldElement) else x
    if not x:
        return 0.0
    finite = 0.0
    for prime in _denominator_primes(K, x, budget):
        v = valuation(K, x, prime)
        finite -= min(v, 0) * prime.weight
    arch = sum(max(t, 0.0) for t in archimedean_logs(K, x)) / K.degree
    return finite + arch


def height_by_places(
    K: NumberField, x: FieldElement, budget: FactorBudget = DEFAULT_BUDGET
) -> float:
    """h(x) as (1/[K:Q]) sum_v [K_v:Q_v] log max(1, |x|_v) over all places v."""
    x = K(x) if not isinstance(x, FieldElement) else x
    if not x:
        return 0.0
    total = 0.0
    for prime in _denominator_primes(K, x, budget):
        e = prime.ramification
        f = round(math.log(prime.residue_size, prime.rational_prime))
        # |x|_v = p^(-v/e) extends the usual |.|_p; local degree e*f
        abs_log = -valuation(K, x, prime) / e * math.log(prime.rational_prime)
        total += e * f * max(0.0, abs_log)
    if K.degree == 1:
        total += max(0.0, log_abs(x.a))
    else:
        # one complex place, local degree 2, |x|_v = |sigma(x)|
        total += 2 * max(0.0, 0.5 * log_abs(x.norm()))
    return total / K.degree


def tuple_height(K: NumberField, zs: Sequence[FieldElement]) -> HeightValue:
    """Projective height of (z_1 : ... : z_n).

    Uses -sum_p min_i v_p(z_i) N_p; factor-free because after clearing
    denominators the finite part is log N(gcd)/[K:Q].
    """
    zs = [K(z) if not isinstance(z, FieldElement) else z for z in zs]
    if len(zs) < 2:
        raise ValueError("tuple height needs at least two coordinates")
    nonzero = [z for z in zs if z]
    if not nonzero:
        raise AllZero("all coordinates are zero")
    m = math.lcm(*(z.denominator() for z in nonzero))
    ints = [z * m for z in nonzero]
    g = ints[0]
    for z in ints[1:]:
        g = ok_gcd(K, g, z)
    arch = max(log_abs(z.abs_norm()) for z in ints)
    return HeightValue(max(0.0, (arch - log_abs(g.abs_norm())) / K.degree))


def radical(
    K: NumberField, zs: Sequence[FieldElement], budget: FactorBudget = DEFAULT_BUDGET
) -> float:
    """Sum of N_p over primes at which some two coordinates have different valuations."""
    zs = [K(z) if not isinstance(z, FieldElement) else z for z in zs]
    if any(not z for z in zs):
        raise ZeroElement("radical needs nonzero coordinates")
    tables = [factor_element(K, z, budget).as_dict() for z in zs]
    support = set().union(*tables)
    total = 0.0
    for p in sorted(support):
        vals = {t.get(p, 0) for t in tables}
        if len(vals) > 1:
            total += p.weight
    return total


def positive_divisor_mass(K: NumberField, x: FieldElement, budget=DEFAULT_BUDGET) -> float:
    """sum_{v_p(x) > 0} v_p(x) N_p."""
    table = factor_element(K, x, budget)
    return sum(e * p.weight for p, e in table if e > 0)


def check_divisor_height(
    K: NumberField, x: FieldElement, budget=DEFAULT_BUDGET, slack: float = DEFAULT_SLACK
) -> BoundCheck:
    """Inequality sum_{v_p(x)>0} v_p(x) N_p <= h(x)."""
    return _less(positive_divisor_mass(K, x, budget), height(x), slack)


def check_triangle(
    K: NumberField, alphas: Sequence[FieldElement], slack: float = DEFAULT_SLACK
) -> BoundCheck:
    """h(a_1 + ... + a_n) <= log n + sum h(a_i)."""
    alphas = [K(a) if not isinstance(a, FieldElement) else a for a in alphas]
    if not alphas:
        return BoundCheck(True, 0.0, 0.0, 0.0)
    total = K.zero
    for a in alphas:
        total = total + a
    rhs = math.log(len(alphas)) + sum(height(a) for a in alphas)
    return _less(height(total), rhs, slack)


# --------------------------------------------------------------------------
# canonical heights and orbit bounds


def canonical_height(
    f: UnicriticalMap, alpha: FieldElement, n_iter: int, digit_cap: int | None = None
) -> HeightValue:
    """Estimate h_f(alpha) by h(g^n(alpha - gamma)) / d^n with g = x^d + (c - gamma).

    The error bound is the telescoped tail (h(c - gamma) + log 2) / ((d - 1) d^n).
    """
    from .dynamics import DEFAULT_DIGIT_CAP, OperandOverflow, monic_normal_form

    if n_iter < 1:
        raise ValueError("n_iter must be >= 1")
    cap = DEFAULT_DIGIT_CAP if digit_cap is None else digit_cap
    g = monic_normal_form(f)
    beta = f.K(alpha) - f.gamma
    for step in range(n_iter):
        beta = g(beta)
        if _too_big(beta, cap):
            raise OperandOverflow(f"iterate {step + 1} exceeds {cap} digits")
    d = f.d
    scale = d**n_iter
    tail = (height(g.c) + LOG2) / ((d - 1) * scale)
    return HeightValue(height(beta) / scale, tail)


def _too_big(x: FieldElement, cap_digits: int) -> bool:
    limit = int(cap_digits * 3.3219280948873626) + 1
    return max(
        abs(x.a.numerator).bit_length(),
        x.a.denominator.bit_length(),
        abs(x.b.numerator).bit_length(),
        x.b.denominator.bit_length(),
    ) > limit


@dataclass(frozen=True)
class OrbitBoundsCheck:
    lower: BoundCheck
    upper: BoundCheck
    height: float

    @property
    def holds(self) -> bool:
        return self.lower.holds and self.upper.holds


def _shift_cost(f: UnicriticalMap) -> float:
    # undoing x -> x - gamma costs h(gamma) + log 2 by the triangle inequality;
    # nothing to undo when gamma = 0
    return height(f.gamma) + LOG2 if f.gamma else 0.0


def orbit_lower_bound(f: UnicriticalMap, alpha: FieldElement, n: int) -> float:
    """d^n (h(alpha - gamma) - 2/(d-1) max(1, h(c - gamma))) - h(gamma) - log 2."""
    d = f.d
    hs = height(f.c - f.gamma)
    return d**n * (height(f.K(alpha) - f.gamma) - 2 / (d - 1) * max(1.0, hs)) - _shift_cost(f)


def orbit_upper_bound(f: UnicriticalMap, alpha: FieldElement, n: int) -> float:
    """d^n/(d-1) (log 2 + h(c - gamma)) + d^n h(alpha - gamma) + h(gamma) + log 2."""
    d = f.d
    return (
        d**n / (d - 1) * (LOG2 + height(f.c - f.gamma))
        + d**n * height(f.K(alpha) - f.gamma)
        + _shift_cost(f)
    )


def check_orbit_bounds(
    f: UnicriticalMap, alpha: FieldElement, n: int, slack: float = DEFAULT_SLACK
) -> OrbitBoundsCheck:
    """Both strict two-sided orbit height bounds at level n (gamma may be nonzero)."""
    from .dynamics import iterate

    if n < 1:
        raise ValueError("n must be >= 1")
    orbit = iterate(f, alpha, n)
    hn = height(orbit.value(n))
    lower = _greater(hn, orbit_lower_bound(f, alpha, n), slack, strict=True)
    upper = _less(hn, orbit_upper_bound(f, alpha, n), slack, strict=True)
    return OrbitBoundsCheck(lower, upper, hn)


def iterate_height(f: UnicriticalMap, i: int) -> float:
    """max coefficient height of the expanded i-th iterate f^i."""
    from .dynamics import iterate_polynomial

    return max(height(c) for c in iterate_polynomial(f, i))


def check_height_growth(
    f: UnicriticalMap,
    alpha: FieldElement,
    n: int,
    i: int,
    C1: float,
    C2: float,
    slack: float = DEFAULT_SLACK,
) -> BoundCheck:
    """h(f^n(alpha)) > C1 h(f^i) + C2."""
    from .dynamics import iterate

    if n < 1 or i < 1:
        raise ValueError("n and i must be >= 1")
    hn = height(iterate(f, alpha, n).value(n))
    return _greater(hn, C1 * iterate_height(f, i) + C2, slack, strict=True)


@dataclass(frozen=True)
class SqueezeCheck:
    lower: BoundCheck
    upper: BoundCheck

    @property
    def holds(self) -> bool:
        return self.lower.holds and self.upper.holds

    def __bool__(self) -> bool:
        return self.holds


def check_height_squeeze(
    f: UnicriticalMap,
    alpha: FieldElement,
    n: int,
    eps: float,
    slack: float = DEFAULT_SLACK,
) -> SqueezeCheck:
    """(1 - eps) h(f^n) <= 2 h(f^(n-1)) <= (1 + eps) h(f^n), for quadratic maps."""
    from .dynamics import iterate

    if f.d != 2:
        raise DegreeMismatch(f"height squeeze is stated for d = 2, got d = {f.d}")
    if n < 2:
        raise ValueError("n must be >= 2")
    orbit = iterate(f, alpha, n)
    hn = height(orbit.value(n))
    hprev = height(orbit.value(n - 1))
    return SqueezeCheck(
        lower=_less((1 - eps) * hn, 2 * hprev, slack),
        upper=_less(2 * hprev, (1 + eps) * hn, slack),
    )


def observed_kappa(f: UnicriticalMap, alpha: FieldElement, n: int) -> float:
    """h(f^n(alpha)) / (d^n max(1, h(c - gamma))), the empirical growth ratio."""
    from .dynamics import iterate

    hn = height(iterate(f, alpha, n).value(n))
    return hn / (f.d**n * max(1.0, height(f.c - f.gamma)))
