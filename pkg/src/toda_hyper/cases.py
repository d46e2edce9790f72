"""Which necessary-condition case (if any) the strengths at z=1 fall into."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .gamma import SingularData, super_gamma


@dataclass(frozen=True)
class CaseResult:
    case_index: Optional[int]
    tau: Optional[Fraction]
    reason: str
    # n = 2 only: both (case, tau) readings of "gamma_{1,1} != 0".
    alternatives: tuple[tuple[int, Fraction], ...] = field(default=())

    @property
    def matched(self) -> bool:
        return self.case_index is not None

    def to_json(self) -> dict:
        return {"case": self.case_index,
                "tau": None if self.tau is None else str(self.tau),
                "reason": self.reason,
                "alternatives": [[i, str(t)] for i, t in self.alternatives]}


def _only_nonzero(g, allowed: set[int]) -> bool:
    return all(x == 0 for j, x in enumerate(g) if j not in allowed)


def classify(data: SingularData) -> CaseResult:
    n = data.n
    g = data.gamma1
    sg = super_gamma(data)
    g1_up = sg.upper["1"][0]
    mu11 = sg.mu["1"][0]

    if all(x == 0 for x in g):
        return CaseResult(None, None,
                          "regular point at 1 - exponents already 0,1,...,n-1")

    if n == 2:
        # Cases 0 and n-1 coincide as conditions; keep both shifts.
        alts = ((0, g1_up - mu11), (1, g1_up))
        return CaseResult(0, alts[0][1],
                          "n=2: gamma_{1,1} != 0 matches cases 0 and 1", alts)

    if g[0] != 0 and _only_nonzero(g, {0}):
        return CaseResult(0, g1_up - mu11,
                          "case 0: gamma_{1,1} != 0, all other gamma_{1,j} = 0")
    if g[n - 2] != 0 and _only_nonzero(g, {n - 2}):
        return CaseResult(n - 1, g1_up,
                          f"case {n - 1}: gamma_{{1,{n - 1}}} != 0, all other gamma_{{1,j}} = 0")
    for i in range(1, n - 1):
        if g[i - 1] + g[i] == -1 and _only_nonzero(g, {i - 1, i}):
            return CaseResult(i, g1_up,
                              f"case {i}: gamma_{{1,{i}}} + gamma_{{1,{i + 1}}} = -1, "
                              "all other gamma_{1,j} = 0")
    return CaseResult(None, None, "gamma_1 matches none of the necessary-condition cases")
