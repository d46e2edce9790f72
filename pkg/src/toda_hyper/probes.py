"""Numerical checks on a constructed TodaSolution."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Sequence

import numpy as np

from .builder import TodaSolution
from .errors import NonpositiveMinor, QuadratureNonconvergent
from .gamma import cartan_matrix, mass_targets, super_gamma
from .ode import Path, fundamental_basis, transport


def single_valued_check(sol: TodaSolution, z: complex, path_a: Path, path_b: Path) -> float:
    """max_m |U_m continued along path_a - U_m continued along path_b|."""
    base = fundamental_basis(sol.sys)
    ua = sol.U_from_frame(z, transport(sol.sys, base, path_a))
    ub = sol.U_from_frame(z, transport(sol.sys, base, path_b))
    return float(np.abs(ua - ub).max())


def detour_paths(z: complex = -0.5, z0: complex = 0.5, height: float = 0.5) -> tuple[Path, Path]:
    """Polylines z0 -> z passing above and below the real axis; they differ by a loop around 0."""
    up = Path.polyline([z0, z0 + 1j * height, z + 1j * height, z])
    down = Path.polyline([z0, z0 - 1j * height, z - 1j * height, z])
    return up, down


def perturbed_form(sol: TodaSolution, eps: float = 1e-3, seed: int = 1) -> TodaSolution:
    """Copy of ``sol`` with P + eps ||P|| H for a random Hermitian H of unit Frobenius norm.

    Breaks monodromy invariance of the form; lam is left unchanged.
    """
    rng = np.random.default_rng(seed)
    n = sol.n
    X = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    H = (X + X.conj().T) / 2
    H /= np.linalg.norm(H)
    P = sol.form.P
    return sol.with_form(P + eps * np.linalg.norm(P) * H)


def _stencil(z: complex, h: float) -> np.ndarray:
    return np.array([z, z + h, z - h, z + 1j * h, z - 1j * h,
                     z + 2 * h, z - 2 * h, z + 2j * h, z - 2j * h])


def _laplacian(vals: np.ndarray, h: float) -> np.ndarray:
    """5-point Laplacians at spacings h and 2h combined by Richardson (error O(h^4))."""
    lap_h = (vals[1] + vals[2] + vals[3] + vals[4] - 4 * vals[0]) / h ** 2
    lap_2h = (vals[5] + vals[6] + vals[7] + vals[8] - 4 * vals[0]) / (4 * h ** 2)
    return (4 * lap_h - lap_2h) / 3


@dataclass(frozen=True)
class ResidualReport:
    toda: float
    jacobi: tuple[float, ...]
    points: int

    @property
    def jacobi_max(self) -> float:
        return max(self.jacobi)


def toda_residual(sol: TodaSolution, grid: Sequence[complex], h: float = 1e-3,
                  true_Rn: bool = False) -> ResidualReport:
    """Relative residual of  U_{i,z zbar} + e^{u_i} = 0  and of the minor identity

        R_m d dbar R_m - |d R_m|^2 = R_{m-1} R_{m+1}     (R_0 = 1, R_n := 1)

    Mixed second derivatives come from 5-point stencils (d dbar = Laplacian/4),
    first derivatives from the column-bump rule.  All stencil points share one
    expansion centre so the differences see a single smooth function.
    """
    n = sol.n
    toda, jac = 0.0, np.zeros(n - 1)
    for z in grid:
        z = complex(z)
        if min(abs(z), abs(z - 1)) < 10 * h:
            raise ValueError(f"grid point {z} closer than 10h to a singular point")
        R = sol.minors(_stencil(z, h), anchor=z)
        if np.any(R[:, :-1] <= 0):
            raise NonpositiveMinor(f"nonpositive leading minor near z={z}")
        U = -np.log(R[:, :-1])
        full0 = np.concatenate([[1.0], R[0, :-1], [1.0]])
        eu = full0[:-2] * full0[2:] / full0[1:-1] ** 2
        lap = _laplacian(U, h)
        toda = max(toda, float(np.max(np.abs(lap / 4 + eu) / eu)))
        dR = sol.column_bump_derivative(z)
        ddbar = _laplacian(R, h) / 4
        full = np.concatenate([[1.0], R[0, :-1], [R[0, -1] if true_Rn else 1.0]])
        for m in range(1, n):
            lhs = full[m] * ddbar[m - 1] - abs(dR[m - 1]) ** 2
            rhs = full[m - 1] * full[m + 1]
            jac[m - 1] = max(jac[m - 1], abs(lhs - rhs) / abs(rhs))
    return ResidualReport(toda, tuple(float(j) for j in jac), len(grid))


def default_grid(count: int = 40, seed: int = 0) -> list[complex]:
    """Random points in |Re|, |Im| <= 2 kept at least 0.3 from 0 and 1."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        z = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
        if min(abs(z), abs(z - 1)) >= 0.3:
            out.append(z)
    return out


# -- local asymptotics --------------------------------------------------------------------

def _circle(point: str, r: float, n_theta: int) -> np.ndarray:
    th = 2 * np.pi * (np.arange(n_theta) + 0.5) / n_theta
    e = np.exp(1j * th)
    if point == "0":
        return r * e
    if point == "1":
        return 1 + r * e
    return e / r


def _correction_exponents(sol: TodaSolution, point: str, e_max: float) -> list[float]:
    """Powers r^e expected in angular means near a singular point."""
    sg = super_gamma(sol.data)
    gaps = [float(m) for m in sg.mu[point]]
    base = [0.0] + list(np.cumsum(gaps))
    diffs = {round(2 * abs(b - a), 10) for a, b in combinations(base, 2)}
    exps = set()
    for d in diffs | {1.0, 2.0}:
        for k in range(1, 4):
            if 0 < k * d <= e_max:
                exps.add(round(k * d, 10))
    for a in list(exps):
        for b in list(exps):
            if a + b <= e_max:
                exps.add(round(a + b, 10))
    out = []
    for e in sorted(exps):
        if not out or e - out[-1] > 0.05:
            out.append(e)
    return out


def radial_profile(sol: TodaSolution, point: str, radii: Sequence[float],
                   n_theta: int = 64) -> np.ndarray:
    """Angular means of log R_m, shape (len(radii), n-1)."""
    out = []
    for r in radii:
        R = sol.minors(_circle(point, r, n_theta))[:, :-1]
        out.append(np.log(R).mean(axis=0))
    return np.array(out)


def asymptotic_strengths(sol: TodaSolution, point: str, radii: Sequence[float] | None = None,
                         n_theta: int = 64, e_max: float = 2.0) -> np.ndarray:
    """Slopes of log R_m = -U_m against log of the local radius (1/|z| at infinity).

    Expected: -2 gamma^m_P at each of the three points.  The fit includes the
    subleading powers r^e predicted by the local exponents.
    """
    point = str(point)
    if radii is None:
        top = 30 if point == "inf" else 12
        radii = [2.0 ** -k for k in range(4, top + 1)]
    radii = np.asarray(radii, dtype=float)
    y = radial_profile(sol, point, radii, n_theta)
    lr = np.log(radii)
    exps = _correction_exponents(sol, point, e_max) if sol.data is not None else [1.0, 2.0]
    cols = [lr, np.ones_like(lr)] + [radii ** e for e in exps]
    A = np.array(cols).T
    keep = len(radii) - 2
    A = A[:, :keep] if A.shape[1] > keep else A
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return coef[0]


# -- total masses ----------------------------------------------------------------------------

def _cutoff(s):
    """Smooth step: 1 for s <= 1/2, 0 for s >= 1."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    out[s <= 0.5] = 1.0
    mid = (s > 0.5) & (s < 1.0)
    x = (s[mid] - 0.5) * 2
    a = np.exp(-1 / (1 - x))
    b = np.exp(-1 / x)
    out[mid] = a / (a + b)
    return out


def _gl_panels(lo: float, hi: float, width: float, nodes: int):
    x, w = np.polynomial.legendre.leggauss(nodes)
    count = max(1, int(math.ceil((hi - lo) / width)))
    edges = np.linspace(lo, hi, count + 1)
    xs, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        xs.append((a + b) / 2 + (b - a) / 2 * x)
        ws.append((b - a) / 2 * w)
    return np.concatenate(xs), np.concatenate(ws)


@dataclass(frozen=True)
class MassReport:
    estimate: np.ndarray     # 4 * integral of e^{u_i}
    target: np.ndarray       # 4 pi (gamma^i_0 + gamma^i_1 + gamma^i_inf)
    coarse: np.ndarray
    tails: np.ndarray

    @property
    def relative_error(self) -> np.ndarray:
        return np.abs(self.estimate - self.target) / np.abs(self.target)


def _polar_piece(sol, centre, logr_lo, logr_hi, weight_fn, n_theta, width, nodes, invert=False):
    lr, wr = _gl_panels(logr_lo, logr_hi, width, nodes)
    th = 2 * np.pi * (np.arange(n_theta) + 0.5) / n_theta
    r = np.exp(lr)
    if invert:
        z = np.exp(1j * th)[None, :] / r[:, None]
    else:
        z = centre + r[:, None] * np.exp(1j * th)[None, :]
    f = sol.exp_u(z.ravel()).reshape(z.shape + (sol.n - 1,))
    wt = weight_fn(z)[..., None]
    # area element: r^2 dlog r dtheta in the local radius (|w|^-4 |w|^2 at infinity)
    jac = (r ** 2 if not invert else r ** -2)[:, None, None]
    ring = (f * wt * jac).mean(axis=1) * 2 * np.pi
    total = (ring * wr[:, None]).sum(axis=0)
    return total, ring, r


def mass_quadrature(sol: TodaSolution, n_theta: int = 64, nodes: int = 12,
                    r_inner: float = 2.0 ** -14, r_far: float = 2.0 ** 30,
                    rtol: float = 2e-3) -> MassReport:
    """4 * integral over the plane of e^{u_i}, via a smooth partition of unity.

    Discs of radius 0.4 about 0 and 1 and the exterior |z| > 2 are integrated
    in log-polar coordinates (the exterior in w = 1/z); the remainder in polar
    coordinates about 1/2.  Power-law tails inside r_inner and beyond r_far are
    added analytically from the leading local exponent.
    """
    sg = super_gamma(sol.data)
    n = sol.n
    a = 0.4
    R = 4.0

    def phi0(z):
        return _cutoff(np.abs(z) / a)

    def phi1(z):
        return _cutoff(np.abs(z - 1) / a)

    def phiinf(z):
        return 1 - _cutoff(np.abs(z) / R)

    def phimid(z):
        return 1 - phi0(z) - phi1(z) - phiinf(z)

    def run(n_theta, nodes):
        total = np.zeros(n - 1)
        tails = np.zeros(n - 1)
        for centre, phi, key in ((0.0, phi0, "0"), (1.0, phi1, "1")):
            t, ring, r = _polar_piece(sol, centre, math.log(r_inner), math.log(a), phi,
                                      n_theta, 1.0, nodes)
            mu = np.array([float(g) + 1 for g in sol.data.at(key)])
            # ring ~ C r^{2 mu} near the centre: integral over dlog r below r_inner
            c = ring[0] / r[0] ** (2 * mu)
            tail = c * r_inner ** (2 * mu) / (2 * mu)
            total += t + tail
            tails += tail
        t, ring, r = _polar_piece(sol, 0.0, -math.log(r_far), math.log(1 / (R / 2)), phiinf,
                                  n_theta, 1.0, nodes, invert=True)
        mu = np.array([float(g) - 1 for g in sol.data.gammaInf])
        c = ring[0] / r[0] ** (2 * mu)
        tail = c * (1 / r_far) ** (2 * mu) / (2 * mu)
        total += t + tail
        tails += tail
        lr, wr = _gl_panels(0.0, 1.5, 0.1, nodes)
        lr2, wr2 = _gl_panels(1.5, R + 0.5, 0.5, nodes)
        rr = np.concatenate([lr, lr2])
        wrr = np.concatenate([wr, wr2])
        m_theta = 2 * n_theta
        th = 2 * np.pi * (np.arange(m_theta) + 0.5) / m_theta
        z = 0.5 + rr[:, None] * np.exp(1j * th)[None, :]
        wt = phimid(z)
        mask = wt > 1e-15
        f = np.zeros(z.shape + (n - 1,))
        f[mask] = sol.exp_u(z[mask])
        ring = (f * wt[..., None]).mean(axis=1) * 2 * np.pi
        total += (ring * (rr * wrr)[:, None]).sum(axis=0)
        return 4 * total, 4 * tails

    est, tails = run(n_theta, nodes)
    coarse, _ = run(n_theta // 2, max(4, nodes * 2 // 3))
    target = 4 * math.pi * np.array([float(m) for m in mass_targets(sol.data)])
    if np.max(np.abs(est - coarse) / np.abs(est)) > rtol:
        raise QuadratureNonconvergent(f"refinement changed masses from {coarse} to {est}")
    return MassReport(est, target, coarse, tails)
