"""Exact arithmetic in Q and the nine imaginary quadratic fields of class number one.

Elements are stored as ``a + b*w`` with ``a, b`` rationals and ``w`` the ring
generator of O_K: ``w = sqrt(-D)`` when ``-D != 1 mod 4`` and
``w = (1 + sqrt(-D))/2`` otherwise. Both cases satisfy ``w^2 = t*w - n`` with
``(t, n) = (0, D)`` or ``(1, (1 + D)/4)``, and ``w = (t + i*sqrt(D))/2`` in C.

Element factorization goes through the integer norm. Rational primes are split
by finding a root of the minimal polynomial of ``w`` modulo p and taking the
shortest vector of the lattice ``p*Z + (w - r)*Z``; since O_K is a PID the
shortest vector generates the prime ideal above p.

Floating point outputs (logs, prime weights) are IEEE doubles computed from
exact integers with ``math.log``, which is correctly rounded to within a few
ulps even for integers far beyond the double range. Relative error per log is
below 1e-15; callers compare reals only through an explicit slack.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, Union

from sympy.ntheory import sqrt_mod

from .factoring import DEFAULT_BUDGET, FactorBudget, factor_integer

__all__ = [
    "BudgetExceeded",
    "ZeroElement",
    "UnsupportedField",
    "NumberField",
    "FieldElement",
    "PrimeOfK",
    "ValuationTable",
    "QQ",
    "field_from_spec",
    "factor_element",
    "valuation",
    "prime_weight",
    "archimedean_logs",
    "primes_above",
    "log_abs",
]

CLASS_NUMBER_ONE = (1, 2, 3, 7, 11, 19, 43, 67, 163)


class ZeroElement(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    """Integer factorization ran out of budget before finishing."""

    def __init__(self, message: str, cofactor: int | None = None) -> None:
        super().__init__(message)
        self.cofactor = cofactor


class UnsupportedField(ValueError):
    pass


Rational = Union[int, Fraction]


def log_abs(q: Rational) -> float:
    """log|q| for a nonzero rational, exact enough for arbitrarily large parts."""
    q = Fraction(q)
    return math.log(abs(q.numerator)) - math.log(q.denominator)


@dataclass(frozen=True)
class NumberField:
    """Q (``D == 0``) or Q(sqrt(-D)) for D in the class-number-one whitelist."""

    D: int = 0

    def __post_init__(self) -> None:
        if self.D != 0 and self.D not in CLASS_NUMBER_ONE:
            raise UnsupportedField(
                f"Q(sqrt(-{self.D})) is not one of the class-number-one fields {CLASS_NUMBER_ONE}"
            )

    @property
    def is_rational(self) -> bool:
        return self.D == 0

    @property
    def degree(self) -> int:
        return 1 if self.D == 0 else 2

    @property
    def trace_w(self) -> int:
        return 1 if self.D % 4 == 3 else 0

    @property
    def norm_w(self) -> int:
        if self.D == 0:
            return 0
        return (1 + self.D) // 4 if self.trace_w else self.D

    @property
    def discriminant(self) -> int:
        if self.D == 0:
            return 1
        return -self.D if self.trace_w else -4 * self.D

    @property
    def name(self) -> str:
        if self.D == 0:
            return "Q"
        if self.D == 1:
            return "Qi"
        return f"Q(-{self.D})"

    def __repr__(self) -> str:
        return f"NumberField({self.name})"

    def __call__(self, a: Rational | FieldElement = 0, b: Rational = 0) -> FieldElement:
        if isinstance(a, FieldElement):
            return a
        return FieldElement(self, Fraction(a), Fraction(b))

    @property
    def one(self) -> FieldElement:
        return self(1)

    @property
    def zero(self) -> FieldElement:
        return self(0)

    @property
    def gen(self) -> FieldElement:
        if self.D == 0:
            raise UnsupportedField("Q has no quadratic generator")
        return self(0, 1)

    @cached_property
    def units(self) -> tuple[FieldElement, ...]:
        if self.D == 1:
            g = self.gen  # i, order 4
        elif self.D == 3:
            g = self.gen  # (1+sqrt(-3))/2, order 6
        else:
            return (self.one, self(-1))
        out = [self.one]
        x = g
        while x != self.one:
            out.append(x)
            x = x * g
        return tuple(out)

    @property
    def roots_of_unity_order(self) -> int:
        return len(self.units)

    def parse(self, text: str) -> FieldElement:
        return parse_element(self, text)


QQ = NumberField(0)


def field_from_spec(spec: str) -> NumberField:
    """Parse ``Q``, ``Qi`` or ``Q(-D)``."""
    s = spec.strip().replace(" ", "")
    if s in ("Q", "QQ"):
        return QQ
    if s in ("Qi", "Q(i)", "Q(-1)"):
        return NumberField(1)
    m = re.fullmatch(r"Q\((?:sqrt\()?-(\d+)\)?\)", s)
    if m:
        return NumberField(int(m.group(1)))
    raise UnsupportedField(f"cannot parse field spec {spec!r}")


class FieldElement:
    __slots__ = ("K", "a", "b", "_hash")

    def __init__(self, K: NumberField, a: Fraction, b: Fraction = Fraction(0)) -> None:
        if K.D == 0 and b:
            raise ValueError("rational field element with nonzero w-coordinate")
        self.K = K
        self.a = a
        self.b = b
        self._hash = None

    # construction helpers -------------------------------------------------
    def _coerce(self, other) -> FieldElement:
        if isinstance(other, FieldElement):
            if other.K != self.K:
                raise ValueError(f"mixing elements of {self.K} and {other.K}")
            return other
        if isinstance(other, (int, Fraction)):
            return FieldElement(self.K, Fraction(other))
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return FieldElement(self.K, self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self) -> FieldElement:
        return FieldElement(self.K, -self.a, -self.b)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return FieldElement(self.K, self.a - o.a, self.b - o.b)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if not self.b and not o.b:
            return FieldElement(self.K, self.a * o.a)
        bd = self.b * o.b
        return FieldElement(
            self.K,
            self.a * o.a - self.K.norm_w * bd,
            self.a * o.b + self.b * o.a + self.K.trace_w * bd,
        )

    __rmul__ = __mul__

    def conjugate(self) -> FieldElement:
        if not self.b:
            return self
        return FieldElement(self.K, self.a + self.K.trace_w * self.b, -self.b)

    def norm(self) -> Fraction:
        if not self.b:
            return self.a * self.a if self.K.D else self.a
        K = self.K
        return self.a * self.a + K.trace_w * self.a * self.b + K.norm_w * self.b * self.b

    def abs_norm(self) -> Fraction:
        """Absolute value of N_{K/Q}; equals |x|^[K:Q] at any complex embedding."""
        return abs(self.norm()) if self.K.D == 0 else self.norm()

    def trace(self) -> Fraction:
        if self.K.D == 0:
            return self.a
        return 2 * self.a + self.K.trace_w * self.b

    def inverse(self) -> FieldElement:
        if not self:
            raise ZeroDivisionError("inverse of zero field element")
        if not self.b:
            return FieldElement(self.K, 1 / self.a)
        n = self.norm()
        c = self.conjugate()
        return FieldElement(self.K, c.a / n, c.b / n)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o * self.inverse()

    def __pow__(self, e: int) -> FieldElement:
        if e < 0:
            return self.inverse() ** (-e)
        if not self.b:
            return FieldElement(self.K, self.a**e)
        result = self.K.one
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def __bool__(self) -> bool:
        return bool(self.a) or bool(self.b)

    def __eq__(self, other) -> bool:
        if isinstance(other, FieldElement):
            return self.K == other.K and self.a == other.a and self.b == other.b
        if isinstance(other, (int, Fraction)):
            return not self.b and self.a == other
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.K.D, self.a, self.b))
        return self._hash

    # predicates -----------------------------------------------------------
    @property
    def is_rational(self) -> bool:
        return not self.b

    def is_integral(self) -> bool:
        return self.a.denominator == 1 and self.b.denominator == 1

    def is_unit(self) -> bool:
        return self.is_integral() and self.abs_norm() == 1

    def denominator(self) -> int:
        """Least positive integer m with m*x in O_K."""
        return math.lcm(self.a.denominator, self.b.denominator)

    def to_complex(self) -> complex:
        if self.K.D == 0:
            return complex(float(self.a))
        t, n = self.K.trace_w, self.K.norm_w
        w = complex(t / 2, math.sqrt(4 * n - t * t) / 2)
        return float(self.a) + float(self.b) * w

    def height_digits(self) -> int:
        """Decimal digits of the largest numerator/denominator among the coordinates."""
        m = max(
            abs(self.a.numerator), self.a.denominator, abs(self.b.numerator), self.b.denominator
        )
        return len(str(m)) if m < 10**4000 else int(m.bit_length() * math.log10(2)) + 1

    def __repr__(self) -> str:
        return f"{self.K.name}[{self}]"

    def __str__(self) -> str:
        if self.K.D == 0 or not self.b:
            return str(self.a)
        mag = abs(self.b)
        wpart = "w" if mag == 1 else f"{mag}*w"
        if not self.a:
            return wpart if self.b > 0 else f"-{wpart}"
        return f"{self.a} {'+' if self.b > 0 else '-'} {wpart}"


_TERM = re.compile(r"([+-]?)\s*(\d+(?:/\d+)?)?\s*(\*?\s*[wi])?")


def parse_element(K: NumberField, text: str) -> FieldElement:
    """Parse ``a/b`` or ``a/b + c/d*w``; ``i`` is accepted as the generator of Q(i)."""
    s = text.strip()
    if not s:
        raise ValueError("empty field element")
    s = s.replace(" ", "")
    # normalise "+-" produced by the canonical emitter
    s = s.replace("+-", "-").replace("--", "+")
    pos = 0
    a = Fraction(0)
    b = Fraction(0)
    while pos < len(s):
        m = _TERM.match(s, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse field element {text!r}")
        sign, num, gen = m.groups()
        if num is None and gen is None:
            raise ValueError(f"cannot parse field element {text!r}")
        value = Fraction(num) if num is not None else Fraction(1)
        if sign == "-":
            value = -value
        if gen is not None:
            if K.D == 0:
                raise ValueError(f"generator in rational element {text!r}")
            if gen.lstrip("*") == "i" and K.D != 1:
                raise ValueError("'i' is only a generator of Q(i)")
            b += value
        else:
            a += value
        pos = m.end()
        if pos < len(s) and s[pos] not in "+-":
            raise ValueError(f"cannot parse field element {text!r}")
    return FieldElement(K, a, b)


# --------------------------------------------------------------------------
# primes


@dataclass(frozen=True)
class PrimeOfK:
    """A prime of O_K, stored through its canonical generator."""

    K: NumberField
    a: int
    b: int
    rational_prime: int
    residue_size: int

    @property
    def generator(self) -> FieldElement:
        return self.K(self.a, self.b)

    @property
    def weight(self) -> float:
        return math.log(self.residue_size) / self.K.degree

    @property
    def ramification(self) -> int:
        if self.K.D == 0:
            return 1
        return 2 if self.K.discriminant % self.rational_prime == 0 else 1

    def __str__(self) -> str:
        if self.K.D == 0:
            return str(self.a)
        if self.b == 0:
            return str(self.a)
        return f"{self.a}{self.b:+d}*w"

    def sort_key(self) -> tuple:
        return (self.rational_prime, self.residue_size, abs(self.a), abs(self.b), self.a < 0, self.b < 0)

    def __lt__(self, other: PrimeOfK) -> bool:
        return self.sort_key() < other.sort_key()


def _associate_key(x: FieldElement) -> tuple:
    return (abs(x.a), abs(x.b), x.a < 0, x.b < 0)


def canonical_associate(x: FieldElement) -> FieldElement:
    """Associate with lexicographically minimal (|a|, |b|, a<0, b<0)."""
    return min((u * x for u in x.K.units), key=_associate_key)


def make_prime(K: NumberField, generator: FieldElement) -> PrimeOfK:
    """Wrap a prime element of O_K (caller guarantees primality)."""
    g = canonical_associate(generator)
    n = int(g.abs_norm())
    if K.D == 0:
        return PrimeOfK(K, int(g.a), 0, n, n)
    # norm is p (split/ramified) or p^2 (inert)
    r = math.isqrt(n)
    if r * r == n and _is_prime_small_or_probable(r):
        p = r
    else:
        p = n
    return PrimeOfK(K, int(g.a), int(g.b), p, n)


def _is_prime_small_or_probable(n: int) -> bool:
    from .factoring import is_probable_prime

    return is_probable_prime(n)


def _lattice_shortest(K: NumberField, u: tuple[int, int], v: tuple[int, int]) -> tuple[int, int]:
    """Lagrange-Gauss reduction of a rank-2 sublattice of O_K under the norm form."""

    def nrm(x):
        a, b = x
        return a * a + K.trace_w * a * b + K.norm_w * b * b

    def dot2(x, y):
        # 2 * bilinear form associated with nrm
        return 2 * x[0] * y[0] + K.trace_w * (x[0] * y[1] + x[1] * y[0]) + 2 * K.norm_w * x[1] * y[1]

    if nrm(u) > nrm(v):
        u, v = v, u
    while True:
        nu = nrm(u)
        # round(<u,v>/<u,u>) using exact integers
        q = Fraction(dot2(u, v), 2 * nu)
        k = math.floor(q + Fraction(1, 2))
        v = (v[0] - k * u[0], v[1] - k * u[1])
        if nrm(v) >= nu:
            return u
        u, v = v, u


def _root_of_w_minpoly(K: NumberField, p: int) -> int | None:
    """A root r of x^2 - t x + n modulo p, if one exists."""
    t, n = K.trace_w, K.norm_w
    if p < 1000:
        for r in range(p):
            if (r * r - t * r + n) % p == 0:
                return r
        return None
    # p odd: t = 0 gives r^2 = -D; t = 1 gives r = (1 + s)/2 with s^2 = -D
    s = sqrt_mod((-K.D) % p, p)
    if s is None:
        return None
    if t == 0:
        return s
    return (1 + s) * pow(2, -1, p) % p


@lru_cache(maxsize=65536)
def primes_above(K: NumberField, p: int) -> tuple[PrimeOfK, ...]:
    """The primes of O_K lying over the rational prime p."""
    if K.D == 0:
        return (PrimeOfK(K, p, 0, p, p),)
    r = _root_of_w_minpoly(K, p)
    if r is None:
        return (PrimeOfK(K, p, 0, p, p * p),)
    a, b = _lattice_shortest(K, (p, 0), (-r, 1))
    pi = K(a, b)
    assert pi.norm() == p, (K, p, pi)
    first = make_prime(K, pi)
    second = make_prime(K, pi.conjugate())
    if first == second:
        return (first,)
    return tuple(sorted((first, second)))


def _divides_exactly(x: FieldElement, pi: FieldElement) -> FieldElement | None:
    q = x / pi
    return q if q.is_integral() else None


def _valuation_integral(y: FieldElement, prime: PrimeOfK) -> int:
    """v_p(y) for nonzero y in O_K."""
    K = y.K
    if K.D == 0:
        n = int(y.a)
        p = prime.rational_prime
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        return e
    pi = prime.generator
    e = 0
    # fast reject through the norm
    p = prime.rational_prime
    if int(y.norm()) % p:
        return 0
    while True:
        q = _divides_exactly(y, pi)
        if q is None:
            return e
        y = q
        e += 1


def valuation(K: NumberField, x: FieldElement, p: PrimeOfK) -> int:
    """v_p(x) for nonzero x."""
    x = K(x) if not isinstance(x, FieldElement) else x
    if not x:
        raise ZeroElement("v_p(0) is not represented")
    m = x.denominator()
    y = x * m
    vm = 0
    if m % p.rational_prime == 0:
        em = 0
        while m % p.rational_prime == 0:
            m //= p.rational_prime
            em += 1
        vm = em * p.ramification
    return _valuation_integral(y, p) - vm


@dataclass(frozen=True)
class ValuationTable:
    """``unit * prod(pi**e)`` with the canonical prime generators pi."""

    K: NumberField
    entries: tuple[tuple[PrimeOfK, int], ...]
    unit: FieldElement

    def as_dict(self) -> dict[PrimeOfK, int]:
        return dict(self.entries)

    def __getitem__(self, p: PrimeOfK) -> int:
        return self.as_dict().get(p, 0)

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def primes(self) -> list[PrimeOfK]:
        return [p for p, _ in self.entries]

    def positive(self) -> ValuationTable:
        return ValuationTable(self.K, tuple((p, e) for p, e in self.entries if e > 0), self.K.one)

    def rebuild(self) -> FieldElement:
        out = self.unit
        for p, e in self.entries:
            out = out * p.generator**e
        return out


def _rational_primes_of(n: int, budget: FactorBudget) -> list[int]:
    if abs(n) == 1:
        return []
    res = factor_integer(abs(n), budget)
    if not res.is_complete:
        raise BudgetExceeded(f"could not factor {abs(n)} within budget", res.cofactor)
    return [p for p, _ in res.factors]


def factor_element(
    K: NumberField, x: FieldElement, budget: FactorBudget = DEFAULT_BUDGET
) -> ValuationTable:
    """Unique factorization of a nonzero element into canonical primes and a unit.

    >>> factor_element(QQ, QQ(-3) / 2).unit
    Q[-1]
    """
    x = K(x) if not isinstance(x, FieldElement) else x
    if not x:
        raise ZeroElement("cannot factor 0")
    m = x.denominator()
    y = x * m
    rational = set(_rational_primes_of(m, budget))
    rational.update(_rational_primes_of(int(y.abs_norm()), budget))
    entries = []
    for p in sorted(rational):
        for prime in primes_above(K, p):
            e = valuation(K, x, prime)
            if e:
                entries.append((prime, e))
    table = ValuationTable(K, tuple(entries), K.one)
    unit = x / table.rebuild()
    if not unit.is_unit():
        raise AssertionError(f"factorization of {x} left non-unit {unit}")
    return ValuationTable(K, tuple(entries), unit)


def prime_weight(K: NumberField, p: PrimeOfK) -> float:
    """N_p = log(#k_p) / [K:Q]."""
    return math.log(p.residue_size) / K.degree


def archimedean_logs(K: NumberField, x: FieldElement) -> list[float]:
    """log|sigma(x)| for every embedding sigma: K -> C (conjugates listed separately)."""
    x = K(x) if not isinstance(x, FieldElement) else x
    if not x:
        raise ZeroElement("log|0| is undefined")
    if K.D == 0:
        return [log_abs(x.a)]
    v = 0.5 * log_abs(x.norm())
    return [v, v]


def ok_gcd(K: NumberField, x: FieldElement, y: FieldElement) -> FieldElement:
    """A generator of the ideal (x, y) for x, y in O_K, not both zero."""
    if K.D == 0:
        return K(math.gcd(int(x.a), int(y.a)))
    if not x:
        return canonical_associate(y)
    if not y:
        return canonical_associate(x)
    # Z-basis of the ideal: x, x*w, y, y*w; Hermite-reduce to two vectors
    w = K.gen
    vecs = [(int(z.a), int(z.b)) for z in (x, x * w, y, y * w)]
    a, b = _hnf2(vecs)
    g = _lattice_shortest(K, a, b)
    return canonical_associate(K(*g))


def _hnf2(vecs: Iterable[tuple[int, int]]) -> tuple[tuple[int, int], tuple[int, int]]:
    """Basis of the Z-span of 2D integer vectors (span assumed full rank)."""
    vecs = [v for v in vecs if v != (0, 0)]
    # gcd on second coordinate
    top = None
    rest = []
    for v in vecs:
        if top is None:
            top = v
            continue
        u = top
        while v[1] != 0:
            q = u[1] // v[1]
            u, v = v, (u[0] - q * v[0], u[1] - q * v[1])
        top = u
        rest.append(v)
    # remaining vectors all have second coordinate 0
    g = 0
    for v in rest:
        g = math.gcd(g, v[0])
    if top is None or top[1] == 0 or g == 0:
        raise ValueError("degenerate lattice")
    return (g, 0), top
