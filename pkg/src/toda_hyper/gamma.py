"""Exact rational bookkeeping for singular strengths of an SU(n) Toda system.

Strengths are attached to the three points 0, 1 and infinity.  Everything here
is done with :class:`fractions.Fraction`; classification downstream relies on
exact equalities such as ``gamma_{1,j} == 0``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import InvalidRank, InvalidStrengths

POINTS = ("0", "1", "inf")

Matrix = list[list[Fraction]]


def as_fraction(value) -> Fraction:
    """Convert ints, Fractions, rational/decimal strings and floats exactly.

    Floats go through their shortest ``repr`` so ``0.45`` becomes ``9/20``.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not strengths")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        text = value.strip().replace("−", "-").replace(" ", "")
        if not text:
            raise ValueError("empty rational string")
        return Fraction(text)
    raise TypeError(f"cannot interpret {value!r} as a rational number")


def cartan_matrix(n: int) -> Matrix:
    """Cartan matrix of SU(n): (n-1)x(n-1), 2 on the diagonal, -1 beside it."""
    if n < 2:
        raise InvalidRank(f"n must be at least 2, got {n}")
    m = n - 1
    return [[Fraction(2 if i == j else (-1 if abs(i - j) == 1 else 0))
             for j in range(m)] for i in range(m)]


def _invert(a: Matrix) -> Matrix:
    m = len(a)
    aug = [list(row) + [Fraction(int(i == j)) for j in range(m)]
           for i, row in enumerate(a)]
    for col in range(m):
        pivot = next(r for r in range(col, m) if aug[r][col] != 0)
        aug[col], aug[pivot] = aug[pivot], aug[col]
        p = aug[col][col]
        aug[col] = [x / p for x in aug[col]]
        for r in range(m):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [row[m:] for row in aug]


def cartan_inverse(n: int) -> Matrix:
    """Exact inverse of :func:`cartan_matrix` by Gauss-Jordan elimination."""
    return _invert(cartan_matrix(n))


def mat_vec(a: Matrix, v: Sequence[Fraction]) -> list[Fraction]:
    return [sum((x * y for x, y in zip(row, v)), Fraction(0)) for row in a]


def raise_index(n: int, vec: Sequence) -> tuple[Fraction, ...]:
    """Map subscript strengths gamma_{P,j} to superscript ones gamma_P^i."""
    vec = [as_fraction(x) for x in vec]
    if len(vec) != n - 1:
        raise InvalidStrengths(f"expected {n - 1} entries, got {len(vec)}")
    return tuple(mat_vec(cartan_inverse(n), vec))


def _vector(values: Iterable, name: str) -> tuple[Fraction, ...]:
    out = []
    for k, x in enumerate(values, start=1):
        try:
            out.append(as_fraction(x))
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise InvalidStrengths(f"{name}[{k}] is not a rational number: {x!r}") from exc
    return tuple(out)


@dataclass(frozen=True)
class SingularData:
    """Problem instance: rank data n and the three strength vectors."""

    n: int
    gamma0: tuple[Fraction, ...]
    gamma1: tuple[Fraction, ...]
    gammaInf: tuple[Fraction, ...]

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 2:
            raise InvalidRank(f"n must be an integer >= 2, got {self.n!r}")
        for name in ("gamma0", "gamma1", "gammaInf"):
            vec = _vector(getattr(self, name), name)
            if len(vec) != self.n - 1:
                raise InvalidStrengths(
                    f"{name} must have {self.n - 1} entries, got {len(vec)}")
            object.__setattr__(self, name, vec)
        for name in ("gamma0", "gamma1"):
            for k, g in enumerate(getattr(self, name), start=1):
                if g <= -1:
                    raise InvalidStrengths(f"{name}[{k}] must exceed -1 (got {g})")
        for k, g in enumerate(self.gammaInf, start=1):
            if g <= 1:
                raise InvalidStrengths(f"gammaInf[{k}] must exceed 1 (got {g})")

    def at(self, point: str) -> tuple[Fraction, ...]:
        return {"0": self.gamma0, "1": self.gamma1, "inf": self.gammaInf}[point]

    def to_json(self) -> dict:
        return {"n": self.n,
                "gamma0": [str(g) for g in self.gamma0],
                "gamma1": [str(g) for g in self.gamma1],
                "gammaInf": [str(g) for g in self.gammaInf]}


@dataclass(frozen=True)
class SuperGamma:
    """Superscript strengths gamma_P^i and the positive gaps mu_{P,i}."""

    n: int
    upper: dict  # point -> tuple of gamma_P^i
    mu: dict     # point -> tuple of mu_{P,i}

    def weighted_sum_identity(self, data: SingularData, point: str) -> bool:
        """Check n*gamma_P^1 == (n-1)*gamma_{P,1} + ... + 1*gamma_{P,n-1}."""
        lower = data.at(point)
        rhs = sum((Fraction(self.n - 1 - j) * g for j, g in enumerate(lower)), Fraction(0))
        return self.n * self.upper[point][0] == rhs


def super_gamma(data: SingularData) -> SuperGamma:
    # SingularData.__post_init__ already enforces the strength constraints;
    # re-check here in case an instance was built bypassing it.
    for point, name, bound in (("0", "gamma0", -1), ("1", "gamma1", -1),
                               ("inf", "gammaInf", 1)):
        for k, g in enumerate(data.at(point), start=1):
            if not g > bound:
                raise InvalidStrengths(f"{name}[{k}] must exceed {bound} (got {g})")
    upper = {p: raise_index(data.n, data.at(p)) for p in POINTS}
    mu = {"0": tuple(g + 1 for g in data.gamma0),
          "1": tuple(g + 1 for g in data.gamma1),
          "inf": tuple(g - 1 for g in data.gammaInf)}
    return SuperGamma(data.n, upper, mu)


def mass_targets(data: SingularData) -> tuple[Fraction, ...]:
    """Coefficients m_i with  integral of e^{u_i} over the plane = m_i * pi."""
    sg = super_gamma(data)
    return tuple(sum(vals, Fraction(0)) for vals in
                 zip(sg.upper["0"], sg.upper["1"], sg.upper["inf"]))
