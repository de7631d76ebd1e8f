"""Acceptance criteria 1-10. Each test prints one PASS/FAIL line with its runtime.

Run with `pytest tests/test_acceptance.py -s` to see the lines inline; they are
also written through capsys so they show up without -s.
"""

import math
import random
import time
from fractions import Fraction

import pytest
import sympy

from zsiglab import poly
from zsiglab.abc import check_imprimitive_bound, check_rad_lower_bound
from zsiglab.cli import fit_line, nu_certificate
from zsiglab.dynamics import conjugate_by_shift, iterate, iterate_polynomial, nu, taunec_family
from zsiglab.factoring import FactorBudget
from zsiglab.galois import disc_iterate, disc_recursive, maximality_level2_oracle, verify_example_family
from zsiglab.heights import (
    canonical_height,
    check_divisor_height,
    check_height_squeeze,
    check_orbit_bounds,
    check_triangle,
    height,
    height_by_places,
    height_by_valuations,
)
from zsiglab.numfield import QQ, NumberField, archimedean_logs, factor_element
from zsiglab.primdiv import primitive_part, zsigmondy_set
from zsiglab.quadratic import DegenerateDiscriminant, decompose, heightunif_witness

from conftest import make, oracle_factor, oracle_primitive_part, random_element

Qi = NumberField(1)
LOG2 = math.log(2)


@pytest.fixture
def report(capsys):
    """Times the body and prints one verdict line; re-raises on failure."""

    def run(label, limit, body):
        t0 = time.perf_counter()
        err = None
        try:
            body()
        except AssertionError as exc:
            err = exc
        dt = time.perf_counter() - t0
        ok = err is None and dt < limit
        with capsys.disabled():
            why = "" if err is None else f" ({err})"
            slow = "" if dt < limit else f" over {limit:g}s"
            print(f"\n{'PASS' if ok else 'FAIL'} {label} [{dt:.2f}s]{slow}{why}")
        if err is not None:
            raise err
        assert dt < limit, f"{label} took {dt:.1f}s, limit {limit}s"

    return run


def test_criterion_01_height_engine(report):
    def body():
        rng = random.Random(1)
        worst = 0.0
        for i in range(500):
            K = QQ if i % 2 else Qi
            x = random_element(rng, K, bound=10**6, den=10**4)
            if not x:
                continue
            h = height(x)
            worst = max(worst, abs(h - height_by_valuations(K, x)), abs(h - height_by_places(K, x)))
            table = factor_element(K, x)
            finite = sum(e * p.weight for p, e in table)
            arch = sum(archimedean_logs(K, x)) / K.degree
            worst = max(worst, abs(finite - arch))
        assert worst < 1e-10, f"max route/product-formula residual {worst:.2e}"
        assert height(QQ(Fraction(3, 2))) == math.log(3)
        assert height(QQ.zero) == 0.0

    report("1 height engine", 5, body)


def test_criterion_02_canonical_height(report, wandering_pairs):
    def body():
        ch = canonical_height(make(2, 0, 0), QQ(2), 10)
        assert abs(ch.value - LOG2) <= LOG2 / 1024
        for f, alpha in wandering_pairs[:50]:
            n = 6 if f.d == 2 else 4
            a = canonical_height(f, alpha, n)
            b = canonical_height(f, f(alpha), n)
            assert abs(b.value - f.d * a.value) <= b.error_bound + f.d * a.error_bound + 1e-9, str(f)

    report("2 canonical height", 10, body)


def test_criterion_03_zsigmondy_sieve(report, wandering_pairs):
    def body():
        orbits = 0
        for c in range(-6, 7):
            for a0 in range(-3, 4):
                orbit = iterate(make(2, 0, c), QQ(a0), 12)
                values = [v.a for v in orbit.values]
                for n in range(2, orbit.n_max + 1):
                    if abs(values[n]) >= 10**18:
                        break
                    if values[n]:
                        assert primitive_part(orbit, n) == QQ(oracle_primitive_part(values, n))
                orbits += 1
        assert orbits >= 30
        r = zsigmondy_set(make(2, 0, 1), 0, 8)
        assert r.zsigmondy_set == []
        assert [str(lv.mult_one_witness) for lv in r.levels[:4]] == ["2", "5", "13", "677"]
        weak = FactorBudget(trial_bound=100, rho_iterations=0)
        for f, alpha in wandering_pairs[:50]:
            n = 8 if f.d == 2 else 5
            full = zsigmondy_set(f, alpha, n, find_witnesses=False).zsigmondy_set
            assert zsigmondy_set(f, alpha, n, weak).zsigmondy_set == full, str(f)

    report("3 Zsigmondy gcd-sieve vs oracle", 60, body)


def test_criterion_04_conjugation(report):
    def body():
        g = conjugate_by_shift(make(2, 0, 1), 26)
        assert 4 in zsigmondy_set(g, -26, 6, find_witnesses=False).zsigmondy_set

    report("4 conjugation trick", 5, body)


def test_criterion_05_inequality_suite(report, wandering_pairs):
    def body():
        rng = random.Random(5)
        quad = [(f, a) for f, a in wandering_pairs if f.d == 2]
        violations = 0
        for i in range(1000):
            kind = i % 5
            if kind == 0:
                K = rng.choice([QQ, Qi])
                xs = [random_element(rng, K, bound=999, den=99) for _ in range(rng.randint(1, 6))]
                violations += not check_triangle(K, xs).holds
            elif kind in (1, 2):
                f = make(rng.choice((2, 3)), rng.randint(-8, 8), rng.randint(-8, 8))
                alpha = QQ(Fraction(rng.randint(-8, 8), rng.randint(1, 3)))
                chk = check_orbit_bounds(f, alpha, rng.randint(1, 5 if f.d == 2 else 3))
                violations += not (chk.lower.holds if kind == 1 else chk.upper.holds)
            elif kind == 3:
                K = rng.choice([QQ, Qi])
                x = random_element(rng, K, bound=10**5, den=60)
                if x:
                    violations += not check_divisor_height(K, x, slack=1e-10).holds
            else:
                f, alpha = quad[i % len(quad)]
                violations += not check_height_squeeze(f, alpha, rng.randint(5, 7), 0.1).holds
        assert violations == 0, f"{violations} violations"

    report("5 inequality suite (1000 instances)", 60, body)


def _decomposition_cases(rng, count):
    out = []
    while len(out) < count:
        K = rng.choice([QQ, QQ, Qi, NumberField(7)])
        n = rng.randint(1, 6 if K.D == 0 else 4)
        b = 2 if n >= 5 else 4
        den = rng.choice([1, 1, 2, 3]) if n < 5 else 1
        f = make(2, K(Fraction(rng.randint(-b, b), den)), rng.randint(-b, b), K)
        alpha = K(Fraction(rng.randint(-b, b), rng.choice([1, 2]) if n < 5 else 1), rng.randint(-1, 1) if K.D else 0)
        if iterate(f, alpha, n).value(n):
            out.append((f, alpha, n, rng.choice((2, 3))))
    return out


def test_criterion_06_decomposition(report):
    def body():
        rng = random.Random(6)
        for f, alpha, n, l in _decomposition_cases(rng, 100):
            dec = decompose(f, alpha, n, l)
            assert dec.rebuild() == iterate(f, alpha, n).value(n)
            assert dec.windows_ok() and dec.u_is_S_unit() and dec.y_is_S_integral()
        for _ in range(40):
            n = rng.randint(1, 6)
            b = 2 if n >= 5 else 5
            f, alpha = make(2, rng.randint(-b, b), rng.randint(-b, b)), rng.randint(-b, b)
            if iterate(f, alpha, n).value(n):
                assert decompose(f, alpha, n, rng.choice((2, 3))).u in (QQ(1), QQ(-1))
        curves = 0
        while curves < 20:
            f = make(2, rng.randint(-3, 3), rng.randint(-3, 3))
            alpha, n = QQ(rng.randint(-3, 3)), rng.randint(3, 5)
            if not iterate(f, alpha, n).value(n):
                continue
            try:
                w = heightunif_witness(f, alpha, n)
            except DegenerateDiscriminant:
                continue
            x, y = w.point
            assert w.disc_nonzero and y * y == poly.evaluate(w.F, x)
            curves += 1

    report("6 S-unit decomposition and witness curves", 30, body)


def test_criterion_07_discriminants(report):
    x = sympy.Symbol("x")

    def body():
        rng = random.Random(7)
        for _ in range(20):
            d = rng.choice((2, 3))
            f = make(d, rng.randint(-3, 3), rng.randint(-4, 4))
            for i in range(1, 4):
                direct = disc_iterate(f, i)
                p = sum(int(c.a) * x**k for k, c in enumerate(iterate_polynomial(f, i)))
                assert direct.a == sympy.discriminant(p, x)
                assert abs(direct.a) == abs(disc_recursive(f, i).a)
        assert disc_iterate(make(2, 0, 1), 2) == QQ(512)
        assert abs(disc_recursive(make(2, 0, 1), 2).a) == 512

    report("7 discriminant recursion", 10, body)


def test_criterion_08_example_family(report):
    def body():
        checks = verify_example_family(6, levels=12)
        assert [c.i for c in checks] == [2, 3, 4, 5, 6]
        assert all(c.ok for c in checks), [c.as_dict() for c in checks if not c.ok]
        assert checks[0].oracle.kind == "NotMaximal"
        assert maximality_level2_oracle(make(2, 0, 1)).kind == "Maximal"

    report("8 example family", 10, body)


def test_criterion_09_family_scan(report):
    def body():
        points = []
        for N in range(2, 11):
            f = taunec_family(QQ, 2, 2, N)
            zs = zsigmondy_set(f, f.gamma, N + 1, find_witnesses=False).zsigmondy_set
            assert N in zs, f"N={N}"
            assert nu_certificate(f, N), f"certificate fails at N={N}"
            points.append((nu(f)[1], float(N)))
        slope, _ = fit_line(points)
        assert 0.8 / LOG2 <= slope <= 1.2 / LOG2, f"slope {slope}"

    report("9 family scan", 60, body)


def test_criterion_10_abc_margins(report):
    def body():
        f = make(2, 0, 3)
        orbit = iterate(f, 0, 6)
        values = [int(v.a) for v in orbit.values]
        for n in range(3, 7):
            rad = check_rad_lower_bound(f, 0, n, 0.5)
            imp = check_imprimitive_bound(f, 0, n, 0.25)
            assert rad.holds and imp.holds, f"n={n}"
            primes = oracle_factor(values[n])
            assert math.isclose(rad.lhs, sum(math.log(p) for p in primes), abs_tol=1e-9)
            earlier = {p for m in range(1, n) if values[m] for p in oracle_factor(values[m])}
            mass = sum(math.log(p) for p in primes if p in earlier)
            assert math.isclose(imp.lhs, mass, abs_tol=1e-9)

    report("10 abc margins for x^2+3", 120, body)
