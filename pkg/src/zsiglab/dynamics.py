"""Unicritical maps f(x) = (x - gamma)^d + c and their exact orbits."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from . import poly
from .numfield import QQ, FieldElement, NumberField, parse_element

DEFAULT_DIGIT_CAP = 100_000
DEFAULT_MAX_STEPS = 64
# symbolic expansion of f^i is capped at this many coefficients minus one
MAX_EXPANSION_DEGREE = 27


class OperandOverflow(ArithmeticError):
    pass


class ExpansionCap(ArithmeticError):
    pass


class PCFBase(ValueError):
    pass


@dataclass(frozen=True)
class UnicriticalMap:
    d: int
    gamma: FieldElement
    c: FieldElement

    def __post_init__(self) -> None:
        if self.d < 2:
            raise ValueError("degree must be at least 2")
        if self.gamma.K != self.c.K:
            raise ValueError("gamma and c live in different fields")

    @classmethod
    def make(cls, d: int, gamma, c, K: NumberField = QQ) -> UnicriticalMap:
        return cls(d, _elt(K, gamma), _elt(K, c))

    @classmethod
    def parse(cls, text: str, K: NumberField = QQ) -> UnicriticalMap:
        """Parse the ``"d;gamma;c"`` text form."""
        parts = text.split(";")
        if len(parts) != 3:
            raise ValueError(f"map spec {text!r} is not of the form 'd;gamma;c'")
        return cls(int(parts[0]), parse_element(K, parts[1]), parse_element(K, parts[2]))

    def __str__(self) -> str:
        return f"{self.d};{self.gamma};{self.c}"

    @property
    def K(self) -> NumberField:
        return self.gamma.K

    @property
    def shift(self) -> FieldElement:
        """c - gamma, the constant of the conjugate x^d + (c - gamma)."""
        return self.c - self.gamma

    @property
    def integral_shift(self) -> bool:
        return self.shift.is_integral()

    @property
    def in_Pd(self) -> bool:
        return self.integral_shift and bool(self.c)

    def __call__(self, x: FieldElement) -> FieldElement:
        return (x - self.gamma) ** self.d + self.c

    def polynomial(self) -> poly.Poly:
        K = self.K
        base = poly.normalize([-self.gamma, K.one])
        return poly.add(poly.power(base, self.d), (self.c,))


def _elt(K: NumberField, x) -> FieldElement:
    if isinstance(x, FieldElement):
        return x
    if isinstance(x, str):
        return parse_element(K, x)
    return K(x)


def monic_normal_form(f: UnicriticalMap) -> UnicriticalMap:
    """x^d + (c - gamma), conjugate to f by x -> x - gamma."""
    K = f.K
    return UnicriticalMap(f.d, K.zero, f.shift)


def conjugate_by_shift(f: UnicriticalMap, t) -> UnicriticalMap:
    """g(x) = f(x + t) - t, so that g^n(alpha - t) = f^n(alpha) - t."""
    t = _elt(f.K, t)
    return UnicriticalMap(f.d, f.gamma - t, f.c - t)


def iterate_polynomial(f: UnicriticalMap, i: int, max_degree: int = MAX_EXPANSION_DEGREE):
    """Expanded coefficients of f^i, constant term first."""
    if i < 1:
        raise ValueError("i must be >= 1")
    if f.d**i > max_degree:
        raise ExpansionCap(f"f^{i} has degree {f.d**i} > {max_degree}")
    return _iterate_polynomial(f, i)


@lru_cache(maxsize=256)
def _iterate_polynomial(f: UnicriticalMap, i: int):
    p = f.polynomial()
    out = p
    for _ in range(i - 1):
        out = poly.compose(p, out)
    return out


def _too_big(x: FieldElement, limit_bits: int) -> bool:
    return (
        abs(x.a.numerator).bit_length() > limit_bits
        or x.a.denominator.bit_length() > limit_bits
        or abs(x.b.numerator).bit_length() > limit_bits
        or x.b.denominator.bit_length() > limit_bits
    )


@dataclass(frozen=True)
class OrbitTable:
    map: UnicriticalMap
    start: FieldElement
    values: tuple[FieldElement, ...]
    overflow_at: int | None = None

    @property
    def n_max(self) -> int:
        return len(self.values) - 1

    def value(self, n: int) -> FieldElement:
        if n < 0:
            raise IndexError(n)
        if n > self.n_max:
            if self.overflow_at is not None and n >= self.overflow_at:
                raise OperandOverflow(f"level {n} is beyond the digit cap (overflow at {self.overflow_at})")
            raise IndexError(f"orbit only computed to level {self.n_max}")
        return self.values[n]

    def __len__(self) -> int:
        return len(self.values)


def iterate(
    f: UnicriticalMap, alpha, n_max: int, digit_cap: int = DEFAULT_DIGIT_CAP
) -> OrbitTable:
    """Exact orbit alpha, f(alpha), ..., f^n_max(alpha), truncated at the digit cap."""
    x = _elt(f.K, alpha)
    limit_bits = int(digit_cap * math.log2(10)) + 1
    values = [x]
    overflow_at = None
    for k in range(1, n_max + 1):
        x = f(x)
        if _too_big(x, limit_bits):
            overflow_at = k
            break
        values.append(x)
    return OrbitTable(f, _elt(f.K, alpha), tuple(values), overflow_at)


def nu(f: UnicriticalMap) -> tuple[float, float]:
    """(nu(f), log+ nu(f)) with nu = h(gamma) / max(1, h(c - gamma))."""
    from .heights import height

    value = height(f.gamma) / max(1.0, height(f.shift))
    return value, log_plus(value)


def log_plus(t: float) -> float:
    return math.log(t) if t > 1 else 0.0


@dataclass(frozen=True)
class PeriodicityVerdict:
    kind: str  # "PCF", "Wandering" or "Unknown"
    preperiod: int | None = None
    period: int | None = None
    escape_level: int | None = None
    steps_tried: int | None = None

    @property
    def is_preperiodic(self) -> bool:
        return self.kind == "PCF"

    @property
    def is_wandering(self) -> bool:
        return self.kind == "Wandering"


def escape_threshold(f: UnicriticalMap) -> float:
    """h(beta - gamma) beyond this certifies that beta has infinite forward orbit."""
    from .heights import LOG2, height

    return (
        2 / (f.d - 1) * max(1.0, height(f.shift)) + height(f.gamma) + LOG2 + 1.0
    )


def detect_periodicity(
    f: UnicriticalMap, alpha, max_steps: int = DEFAULT_MAX_STEPS
) -> PeriodicityVerdict:
    """Exact repeat detection plus a height-escape certificate for wandering points."""
    from .heights import height

    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    threshold = escape_threshold(f)
    x = _elt(f.K, alpha)
    seen: dict[FieldElement, int] = {}
    for k in range(max_steps + 1):
        if x in seen:
            first = seen[x]
            return PeriodicityVerdict("PCF", preperiod=first, period=k - first)
        seen[x] = k
        if height(x - f.gamma) > threshold:
            return PeriodicityVerdict("Wandering", escape_level=k)
        x = f(x)
    return PeriodicityVerdict("Unknown", steps_tried=max_steps)


def taunec_family(K: NumberField, d: int, base, N: int) -> UnicriticalMap:
    """Conjugate of x^d + base whose critical orbit hits 0 at step N.

    gamma = -g^N(0) for g = x^d + base, and c = base + gamma, so f^N(gamma) = 0.
    """
    base = _elt(K, base)
    if N < 1:
        raise ValueError("N must be >= 1")
    if not base.is_integral():
        raise ValueError("base must lie in O_K")
    g = UnicriticalMap(d, K.zero, base)
    verdict = detect_periodicity(g, K.zero)
    if not verdict.is_wandering:
        raise PCFBase(f"x^{d} + {base} is not certified non-PCF ({verdict.kind})")
    orbit = iterate(g, K.zero, N)
    gamma = -orbit.value(N)
    return UnicriticalMap(d, gamma, base + gamma)


def example_family(i: int) -> UnicriticalMap:
    """f_i(x) = f(x + t_i) - t_i over Q with f = x^2 + 2 and t_i = 2 + (f^i(0) - 2)/2."""
    if i < 2:
        raise ValueError("family is indexed by i >= 2")
    f = UnicriticalMap.make(2, 0, 2)
    fi0 = iterate(f, QQ.zero, i).value(i)
    t = 2 + (fi0 - 2) / 2
    return conjugate_by_shift(f, t)


def example_shift(i: int) -> FieldElement:
    f = UnicriticalMap.make(2, 0, 2)
    fi0 = iterate(f, QQ.zero, i).value(i)
    return 2 + (fi0 - 2) / 2


def sample_wandering(
    rng, count: int, *, degrees=(2,), bound: int = 10, K: NumberField = QQ, max_tries: int = 10_000
) -> list[tuple[UnicriticalMap, FieldElement]]:
    """Seeded draws of (f, alpha) with integral gamma, c, alpha of size <= bound,
    rejecting PCF maps and starts not certified to wander."""
    out = []
    tries = 0
    while len(out) < count:
        tries += 1
        if tries > max_tries:
            raise RuntimeError(f"only {len(out)} wandering draws in {max_tries} tries")

        def draw() -> FieldElement:
            a = rng.randint(-bound, bound)
            b = rng.randint(-bound, bound) if K.D else 0
            return K(a, b)

        f = UnicriticalMap(rng.choice(degrees), draw(), draw())
        alpha = draw()
        if not detect_periodicity(f, f.gamma).is_wandering:
            continue
        if not detect_periodicity(f, alpha).is_wandering:
            continue
        out.append((f, alpha))
    return out
