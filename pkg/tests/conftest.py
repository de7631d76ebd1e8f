import random
from fractions import Fraction

import pytest
import sympy

from zsiglab.dynamics import UnicriticalMap, sample_wandering
from zsiglab.numfield import CLASS_NUMBER_ONE, QQ, NumberField

ALL_FIELDS = [QQ] + [NumberField(D) for D in CLASS_NUMBER_ONE]


def oracle_factor(n: int) -> dict[int, int]:
    return {int(p): int(e) for p, e in sympy.factorint(abs(n)).items()}


def oracle_primitive_part(values: list[Fraction], n: int) -> int:
    """Primitive part of the numerator of values[n] from full factorizations."""
    target = oracle_factor(values[n].numerator)
    seen = set()
    for m in range(1, n):
        if values[m]:
            seen.update(oracle_factor(values[m].numerator))
    out = 1
    for p, e in target.items():
        if p not in seen:
            out *= p**e
    return out


def make(d, gamma, c, K=QQ):
    return UnicriticalMap.make(d, gamma, c, K)


def random_element(rng: random.Random, K, bound=30, den=6):
    a = Fraction(rng.randint(-bound, bound), rng.randint(1, den))
    b = Fraction(rng.randint(-bound, bound), rng.randint(1, den)) if K.D else 0
    return K(a, b)


@pytest.fixture
def rng():
    return random.Random(20240611)


@pytest.fixture(scope="session")
def wandering_pairs():
    return sample_wandering(random.Random(7), 60, degrees=(2, 3), bound=6)
