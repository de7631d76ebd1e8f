"""Dense univariate polynomials over a NumberField.

A polynomial is a tuple of FieldElement coefficients, constant term first,
with no trailing zeros (the zero polynomial is the empty tuple).
"""

from __future__ import annotations

from typing import Sequence

from .numfield import FieldElement, NumberField

Poly = tuple  # tuple[FieldElement, ...]


def normalize(coeffs: Sequence[FieldElement]) -> Poly:
    coeffs = list(coeffs)
    while coeffs and not coeffs[-1]:
        coeffs.pop()
    return tuple(coeffs)


def degree(p: Poly) -> int:
    return len(p) - 1


def lead(p: Poly) -> FieldElement:
    return p[-1]


def add(p: Poly, q: Poly) -> Poly:
    if len(p) < len(q):
        p, q = q, p
    out = list(p)
    for i, c in enumerate(q):
        out[i] = out[i] + c
    return normalize(out)


def scale(p: Poly, s: FieldElement) -> Poly:
    return normalize([c * s for c in p])


def mul(p: Poly, q: Poly) -> Poly:
    if not p or not q:
        return ()
    K = p[0].K
    out = [K.zero] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if not a:
            continue
        for j, b in enumerate(q):
            if b:
                out[i + j] = out[i + j] + a * b
    return normalize(out)


def power(p: Poly, e: int) -> Poly:
    K = p[0].K
    result: Poly = (K.one,)
    base = p
    while e:
        if e & 1:
            result = mul(result, base)
        e >>= 1
        if e:
            base = mul(base, base)
    return result


def evaluate(p: Poly, x: FieldElement) -> FieldElement:
    K = x.K
    acc = K.zero
    for c in reversed(p):
        acc = acc * x + c
    return acc


def derivative(p: Poly) -> Poly:
    return normalize([c * i for i, c in enumerate(p)][1:])


def divmod_poly(a: Poly, b: Poly) -> tuple[Poly, Poly]:
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    K = b[0].K
    r = list(a)
    q = [K.zero] * max(0, len(a) - len(b) + 1)
    inv = lead(b).inverse()
    db = degree(b)
    while len(r) - 1 >= db and r:
        shift = len(r) - 1 - db
        coef = r[-1] * inv
        q[shift] = coef
        for i, c in enumerate(b):
            r[shift + i] = r[shift + i] - coef * c
        r.pop()
        while r and not r[-1]:
            r.pop()
    return normalize(q), tuple(r)


def resultant(a: Poly, b: Poly) -> FieldElement:
    """Res(a, b) by the Euclidean recursion over the field of coefficients."""
    if not a or not b:
        K = (a or b)[0].K if (a or b) else None
        if K is None:
            raise ValueError("resultant of two zero polynomials")
        return K.zero
    K = a[0].K
    sign = 1
    acc = K.one
    while True:
        m, n = degree(a), degree(b)
        if n == 0:
            return acc * lead(b) ** m * sign
        _, r = divmod_poly(a, b)
        if not r:
            return K.zero
        if (m * n) % 2:
            sign = -sign
        acc = acc * lead(b) ** (m - degree(r))
        a, b = b, r


def discriminant(p: Poly) -> FieldElement:
    """Disc(p) = (-1)^(n(n-1)/2) Res(p, p') / lc(p)."""
    n = degree(p)
    res = resultant(p, derivative(p))
    if (n * (n - 1) // 2) % 2:
        res = -res
    return res / lead(p)


def from_ints(K: NumberField, coeffs: Sequence) -> Poly:
    return normalize([K(c) for c in coeffs])


def compose(f: Poly, g: Poly) -> Poly:
    """f(g(x))."""
    acc: Poly = ()
    for c in reversed(f):
        acc = add(mul(acc, g), (c,)) if acc else normalize((c,))
    return acc if acc else ()
