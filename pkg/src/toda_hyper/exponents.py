"""Local exponents of the Fuchsian ODE attached to a Toda solution."""
from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from itertools import accumulate
from math import comb
from typing import Optional

from .gamma import SuperGamma


@dataclass(frozen=True)
class ExponentSet:
    n: int
    at0: tuple[Fraction, ...]
    at1: tuple[Fraction, ...]
    atInf: tuple[Fraction, ...]
    tau: Optional[Fraction] = None
    shifted_at1: Optional[tuple[Fraction, ...]] = None
    shifted_atInf: Optional[tuple[Fraction, ...]] = None

    def effective(self) -> dict:
        """Exponents actually in force: the shifted ones when a shift is set."""
        return {"0": self.at0,
                "1": self.shifted_at1 if self.shifted_at1 is not None else self.at1,
                "inf": self.shifted_atInf if self.shifted_atInf is not None else self.atInf}


def _cumulative(start: Fraction, gaps) -> tuple[Fraction, ...]:
    return tuple(accumulate(gaps, initial=start))


def raw_exponents(sg: SuperGamma, point: str) -> tuple[Fraction, ...]:
    """Exponents in the order produced by factoring the operator.

    At 0 and 1 these are -g^1, -g^2+g^1+1, ..., g^{n-1}+(n-1); at infinity the
    integer offsets change sign.
    """
    g = sg.upper[point]
    n = sg.n
    s = -1 if point == "inf" else 1
    out = [-g[0]]
    for k in range(1, n - 1):
        out.append(-g[k] + g[k - 1] + s * k)
    out.append(g[n - 2] + s * (n - 1))
    return tuple(out)


def local_exponents(sg: SuperGamma) -> ExponentSet:
    at = {p: _cumulative(-sg.upper[p][0], sg.mu[p]) for p in ("0", "1", "inf")}
    return ExponentSet(sg.n, at["0"], at["1"], at["inf"])


def shifted_exponents(exps: ExponentSet, tau) -> ExponentSet:
    """Exponents of (z-1)^tau * y: +tau at 1, -tau at infinity."""
    tau = Fraction(tau)
    return replace(exps, tau=tau,
                   shifted_at1=tuple(e + tau for e in exps.at1),
                   shifted_atInf=tuple(e - tau for e in exps.atInf))


def fuchs_check(exps: ExponentSet) -> Fraction:
    """Left minus right side of the Fuchs relation for three singular points.

    Returns exactly zero for any consistent exponent data.
    """
    c = comb(exps.n, 2)
    total = sum((sum(v, Fraction(0)) - c for v in exps.effective().values()), Fraction(0))
    return total + 2 * c
