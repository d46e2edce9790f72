"""Hypergeometric parameters, interlacing, and the operator D(alpha; beta).

The operator

    (theta + b_1 - 1)...(theta + b_n - 1) - z (theta + a_1)...(theta + a_n),
    theta = z d/dz,

is expanded exactly into  y^(n) + a_1(z) y^(n-1) + ... + a_n(z) y = 0  with
a_k(z) = p_k(z) / (z^n (z - 1)).  Polynomials are tuples of Fractions in
ascending powers of z.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import accumulate
from typing import Sequence

import numpy as np

from .cases import CaseResult
from .errors import IntegerDifference
from .gamma import SingularData, as_fraction, super_gamma

Poly = tuple[Fraction, ...]


# -- exact polynomial helpers -------------------------------------------------

def poly_trim(p) -> Poly:
    p = list(p)
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return tuple(Fraction(x) for x in p) if p else (Fraction(0),)


def poly_add(p: Poly, q: Poly) -> Poly:
    m = max(len(p), len(q))
    return poly_trim([(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0)
                      for i in range(m)])


def poly_scale(p: Poly, c) -> Poly:
    return poly_trim([c * x for x in p])


def poly_mul(p: Poly, q: Poly) -> Poly:
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, x in enumerate(p):
        if x:
            for j, y in enumerate(q):
                out[i + j] += x * y
    return poly_trim(out)


def poly_eval(p: Poly, x):
    acc = 0 * x
    for c in reversed(p):
        acc = acc * x + c
    return acc


def poly_from_roots(roots) -> Poly:
    """Monic polynomial prod (x - r)."""
    out: Poly = (Fraction(1),)
    for r in roots:
        out = poly_mul(out, (-Fraction(r), Fraction(1)))
    return out


@lru_cache(maxsize=None)
def stirling2(k: int, j: int) -> int:
    """Stirling numbers of the second kind via S(k,j) = j S(k-1,j) + S(k-1,j-1)."""
    if k == j:
        return 1
    if j == 0 or j > k:
        return 0
    return j * stirling2(k - 1, j) + stirling2(k - 1, j - 1)


def falling(x, m: int):
    out = 1
    for i in range(m):
        out = out * (x - i)
    return out


# -- parameters ----------------------------------------------------------------

@dataclass(frozen=True)
class HgParams:
    alpha: tuple[Fraction, ...]
    beta: tuple[Fraction, ...]
    tau: Fraction
    gamma_exponent: Fraction

    @property
    def n(self) -> int:
        return len(self.alpha)

    def to_json(self) -> dict:
        return {"alpha": [str(a) for a in self.alpha],
                "beta": [str(b) for b in self.beta],
                "tau": str(self.tau),
                "gamma_exponent": str(self.gamma_exponent)}

    @classmethod
    def from_json(cls, obj: dict) -> "HgParams":
        return make_params(obj["alpha"], obj["beta"], obj["tau"])


def make_params(alpha: Sequence, beta: Sequence, tau=0) -> HgParams:
    alpha = tuple(as_fraction(a) for a in alpha)
    beta = tuple(as_fraction(b) for b in beta)
    if len(alpha) != len(beta):
        raise ValueError("alpha and beta must have the same length")
    gamma = sum(beta, Fraction(0)) - sum(alpha, Fraction(0)) - 1
    return HgParams(alpha, beta, as_fraction(tau), gamma)


def hg_params(data: SingularData, case: CaseResult, tau=None) -> HgParams:
    """alpha from the shifted exponents at infinity, beta from those at 0.

    ``tau`` overrides the case shift (needed when ``case`` has no match).
    """
    if tau is None:
        if not case.matched:
            raise ValueError("no necessary-condition case matched; pass tau explicitly")
        tau = case.tau
    tau = as_fraction(tau)
    sg = super_gamma(data)
    n = data.n
    alpha = tuple(accumulate(sg.mu["inf"], initial=-tau - sg.upper["inf"][0]))
    top = 1 + sg.upper["0"][0]
    # beta_n = top, beta_{n-1} = top - mu_{0,1}, ..., beta_1 = top - sum(mu_0)
    desc = list(accumulate(sg.mu["0"], lambda acc, m: acc - m, initial=top))
    beta = tuple(reversed(desc))
    assert len(alpha) == len(beta) == n
    return make_params(alpha, beta, tau)


def _frac_part(x: Fraction) -> Fraction:
    return x - math.floor(x)


def interlace(alpha: Sequence, beta: Sequence) -> bool:
    """Do alpha and beta interlace modulo Z?

    Raises IntegerDifference if some alpha_j - beta_k is an integer.
    """
    alpha = [as_fraction(a) for a in alpha]
    beta = [as_fraction(b) for b in beta]
    for a in alpha:
        for b in beta:
            if (a - b).denominator == 1:
                raise IntegerDifference(f"alpha={a} and beta={b} differ by an integer")
    merged = sorted([(_frac_part(a), 0) for a in alpha] + [(_frac_part(b), 1) for b in beta])
    vals = [v for v, _ in merged]
    if len(set(vals)) != len(vals):
        return False
    tags = [t for _, t in merged]
    return all(tags[i] != tags[i + 1] for i in range(len(tags) - 1))


# -- the operator ----------------------------------------------------------------

@dataclass(frozen=True)
class HgOde:
    """y^(n) + sum_k a_k(z) y^(n-k) = 0 with a_k = p[k-1](z) / (z^n (z-1))."""

    n: int
    p: tuple[Poly, ...]

    @property
    def leading(self) -> Poly:
        return poly_mul(poly_from_roots([0] * self.n), (Fraction(-1), Fraction(1)))

    def polynomial_coefficients(self) -> list[Poly]:
        """[q_0, q_1, ..., q_n] with sum_k q_k y^(n-k) = 0 and q_0 = z^n (z-1)."""
        return [self.leading, *self.p]

    def a(self, k: int, z):
        return poly_eval(self.p[k - 1], z) / poly_eval(self.leading, z)

    def pole_order(self, k: int, point: int) -> int:
        """Pole order of a_k at 0 or 1 (0 means regular there)."""
        p = self.p[k - 1]
        if all(c == 0 for c in p):
            return 0
        if point == 0:
            vanish = next(i for i, c in enumerate(p) if c != 0)
            return max(self.n - vanish, 0)
        return 1 if poly_eval(p, Fraction(1)) != 0 else 0

    def satisfies_shift_identity(self, tau) -> bool:
        """a_1(z) == -n tau / (z - 1), i.e. p_1 == -n tau z^n."""
        target = poly_scale(poly_from_roots([0] * self.n), -self.n * as_fraction(tau))
        return poly_trim(self.p[0]) == target


def _theta_poly(shifts) -> list[Fraction]:
    """Coefficients (ascending in theta) of prod (theta + s)."""
    return list(poly_from_roots([-s for s in shifts]))


def hg_ode(params: HgParams) -> HgOde:
    n = params.n
    b = _theta_poly([x - 1 for x in params.beta])
    a = _theta_poly(params.alpha)
    # theta^k = sum_j S(k,j) z^j d^j
    B = [sum((b[k] * stirling2(k, j) for k in range(j, n + 1)), Fraction(0)) for j in range(n + 1)]
    A = [sum((a[k] * stirling2(k, j) for k in range(j, n + 1)), Fraction(0)) for j in range(n + 1)]
    p = []
    for k in range(1, n + 1):
        j = n - k
        # coefficient of d^j is (B_j - z A_j) z^j; divide by -z^n (z-1)
        p.append(poly_trim([0] * j + [-B[j], A[j]]))
    return HgOde(n, tuple(p))


def _root_candidates(numeric: np.ndarray) -> list[complex]:
    """Numerical roots plus cluster means (multiple roots split into tight clusters)."""
    out = sorted(numeric, key=lambda x: abs(x.imag))
    for r in numeric:
        near = numeric[np.abs(numeric - r) < 1e-2 * max(1.0, abs(r))]
        if len(near) > 1:
            out.append(near.mean())
    return out


def _rational_roots(coeffs: list[Fraction]) -> list[Fraction]:
    """All roots of a polynomial (ascending Fraction coefficients), exactly.

    Numerical roots are snapped to nearby rationals under a decreasing
    denominator bound and confirmed by exact evaluation before being divided
    out; an irrational root raises ValueError.
    """
    poly = list(poly_trim(coeffs))
    roots: list[Fraction] = []
    while len(poly) > 1:
        numeric = np.roots([float(c) for c in reversed(poly)])
        found = None
        for r in _root_candidates(numeric):
            if abs(r.imag) > 1e-2 * max(1.0, abs(r)):
                continue
            for max_den in (10**6, 10**4, 10**3, 10**2, 10):
                cand = Fraction(float(r.real)).limit_denominator(max_den)
                if poly_eval(tuple(poly), cand) == 0:
                    found = cand
                    break
            if found is not None:
                break
        if found is None:
            raise ValueError(f"indicial polynomial has non-rational roots: {numeric}")
        roots.append(found)
        # synthetic division by (x - found)
        quotient = [Fraction(0)] * (len(poly) - 1)
        carry = Fraction(0)
        for i in range(len(poly) - 1, 0, -1):
            carry = poly[i] + carry * found if i < len(poly) - 1 else poly[i]
            quotient[i - 1] = carry
        poly = quotient
    return sorted(roots)


def indicial_polynomial(ode: HgOde, point) -> list[Fraction]:
    """Ascending coefficients in rho of the indicial polynomial at 0, 1 or 'inf'."""
    n = ode.n
    q = ode.polynomial_coefficients()
    limits = []
    for k in range(n + 1):
        if point == 0:
            # lim z^k q_k / q_0 ; q_0 = -z^n + ..., pole order of a_k is <= k
            limits.append(-(q[k][n - k] if n - k < len(q[k]) else Fraction(0)))
        elif point == 1:
            # lim (z-1)^k a_k: only k <= 1 survive since poles at 1 are simple
            if k == 0:
                limits.append(Fraction(1))
            elif k == 1:
                limits.append(poly_eval(q[1], Fraction(1)))
            else:
                limits.append(Fraction(0))
        elif point in ("inf", math.inf):
            # lim z^k a_k as z -> infinity: leading coefficient of z^{n+1-k}
            deg = n + 1 - k
            limits.append(q[k][deg] if deg < len(q[k]) else Fraction(0))
        else:
            raise ValueError(f"unknown singular point {point!r}")
    total: Poly = (Fraction(0),)
    for k in range(n + 1):
        m = n - k
        if point in ("inf", math.inf):
            # y = z^{-rho}: derivative of order m brings falling(-rho, m)
            term = (Fraction(1),)
            for i in range(m):
                term = poly_mul(term, (Fraction(-i), Fraction(-1)))
        else:
            term = poly_from_roots(range(m))
        total = poly_add(total, poly_scale(term, limits[k]))
    return list(total)


def indicial_roots(ode: HgOde, point) -> tuple[Fraction, ...]:
    return tuple(_rational_roots(indicial_polynomial(ode, point)))
