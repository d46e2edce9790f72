"""SU(3) specifics: the invariants W2, W3 of the third-order operator, their pole
coefficients, the tau-shift, first Fourier modes at z = 1 and the Pohozaev
balance.

With u = U_1, v = U_2 the factorisation

    (d - v_z)(d + v_z - u_z)(d + u_z) = d^3 + W2 d + W3

has

    W2 = A/z^2 + B/(z(z-1)) + C/(z-1)^2
    W3 = D/z^3 + E/(z^2(z-1)) + F/(z(z-1)^2) + G/(z-1)^3.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .builder import TodaSolution
from .cases import CaseResult
from .errors import IllConditionedFit, NonconvergentExtrapolation, WrongRank
from .gamma import SingularData, as_fraction, super_gamma


@dataclass(frozen=True)
class Su3Coefficients:
    """Pole coefficients of W2 and W3.

    From closed forms E and F are None and only their sum is known.  Fitted
    coefficients are complex and carry the relative least-squares residuals.
    """

    A: object
    B: object
    C: object
    D: object
    E: object
    F: object
    G: object
    E_plus_F: object
    rho: tuple
    tau: object = 0
    residual: Optional[tuple[float, float]] = None

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("A", "B", "C", "D", "E", "F", "G", "E_plus_F")}

    def to_json(self) -> dict:
        def enc(x):
            if x is None:
                return None
            if isinstance(x, Fraction):
                return str(x)
            x = complex(x)
            return [x.real, x.imag]
        out = {k: enc(v) for k, v in self.as_dict().items()}
        out["rho"] = [enc(r) for r in self.rho]
        out["tau"] = enc(self.tau)
        if self.residual is not None:
            out["residual"] = list(self.residual)
        return out


def _require_rank3(n: int) -> None:
    if n != 3:
        raise WrongRank(f"SU(3) analysis needs n = 3, got n = {n}")


def _uv(data: SingularData, point: str) -> tuple[Fraction, Fraction]:
    g = super_gamma(data).upper[point]
    return g[0], g[1]


def _c_like(gu, gv):
    return -gu - gv - gu ** 2 - gv ** 2 + gu * gv


def _g_like(gu, gv):
    return 2 * gu + 2 * gu ** 2 - gu * gv + gu ** 2 * gv - gu * gv ** 2


def rho_at_infinity(data: SingularData) -> tuple[Fraction, Fraction, Fraction]:
    gu, gv = _uv(data, "inf")
    return (-gu, gu - gv - 1, gv - 2)


def coeffs_closed_form(data: SingularData) -> Su3Coefficients:
    """Exact A, B, C, D, G and E + F from the strengths."""
    _require_rank3(data.n)
    r1, r2, r3 = rho_at_infinity(data)
    A = _c_like(*_uv(data, "0"))
    C = _c_like(*_uv(data, "1"))
    D = _g_like(*_uv(data, "0"))
    G = _g_like(*_uv(data, "1"))
    B = r1 * r2 + r1 * r3 + r2 * r3 - A - C - 2
    EF = r1 * r2 * r3 - D - G
    return Su3Coefficients(A, B, C, D, None, None, G, EF, (r1, r2, r3))


def shift_coeffs(co: Su3Coefficients, tau) -> Su3Coefficients:
    """Coefficients after conjugating the operator by (z-1)^tau.

    Conjugation creates a term s/(z-1) d^2 with s = -3 (accumulated tau); it is
    carried along so that shifts compose (shift by t then -t is the identity).
    """
    if not isinstance(tau, Fraction):
        tau = as_fraction(tau) if isinstance(tau, (int, str)) else tau
    t, s = tau, -3 * co.tau
    C = co.C + 3 * t ** 2 + 3 * t - 2 * s * t
    E = None if co.E is None else co.E - co.A * t
    F = None if co.F is None else co.F - co.B * t
    G = co.G - co.C * t - t ** 3 - 3 * t ** 2 - 2 * t + s * (t ** 2 + t)
    EF = co.E_plus_F - (co.A + co.B) * t
    return replace(co, C=C, E=E, F=F, G=G, E_plus_F=EF, tau=co.tau + t)


# -- numerical invariants ------------------------------------------------------------

def w_from_jets(du: Sequence[complex], dv: Sequence[complex]) -> tuple[complex, complex]:
    """W2, W3 from (u, u_z, u_zz, u_zzz) and the same for v."""
    _, u1, u2, u3 = du[:4]
    _, v1, v2, _ = dv[:4]
    W2 = u2 + v2 + u1 * v1 - u1 ** 2 - v1 ** 2
    W3 = u3 - 2 * u2 * u1 + v2 * u1 - u1 * v1 ** 2 + u1 ** 2 * v1
    return W2, W3


def w_invariants_numeric(sol: TodaSolution, z: complex) -> tuple[complex, complex]:
    _require_rank3(sol.n)
    dU = sol.U_derivatives(complex(z), 3)
    return w_from_jets(dU[0], dU[1])


def default_fit_points(count: int = 8, centre: complex = 0.5, radius: float = 0.7) -> np.ndarray:
    th = 2 * np.pi * (np.arange(count) + 0.5) / count + 0.1
    return centre + radius * np.exp(1j * th)


def _lstsq(basis: np.ndarray, rhs: np.ndarray) -> tuple[np.ndarray, float]:
    x, *_ = np.linalg.lstsq(basis, rhs, rcond=None)
    res = np.linalg.norm(basis @ x - rhs) / np.linalg.norm(rhs)
    return x, float(res)


def fit_coefficients(sol: TodaSolution, points: Sequence[complex] | None = None,
                     tol: float = 1e-6) -> Su3Coefficients:
    """Least-squares fit of the pole coefficients from sampled W2, W3.

    With 8 sample points both systems are oversampled at least twofold.
    """
    _require_rank3(sol.n)
    z = np.asarray(default_fit_points() if points is None else points, dtype=complex)
    if len(z) < 8:
        raise ValueError("need at least 8 sample points for a twofold oversampled fit")
    W = np.array([w_invariants_numeric(sol, zz) for zz in z])
    b2 = np.stack([1 / z ** 2, 1 / (z * (z - 1)), 1 / (z - 1) ** 2], axis=1)
    b3 = np.stack([1 / z ** 3, 1 / (z ** 2 * (z - 1)), 1 / (z * (z - 1) ** 2),
                   1 / (z - 1) ** 3], axis=1)
    # row-scale so that every sample weighs like its polynomial-form residual
    s2 = (z ** 2 * (z - 1) ** 2)[:, None]
    s3 = (z ** 3 * (z - 1) ** 3)[:, None]
    (A, B, C), r2 = _lstsq(b2 * s2, W[:, 0] * s2[:, 0])
    (D, E, F, G), r3 = _lstsq(b3 * s3, W[:, 1] * s3[:, 0])
    if max(r2, r3) > tol:
        raise IllConditionedFit(f"pole-basis fit residuals {r2:.2e}, {r3:.2e} exceed {tol:g}")
    rho = rho_at_infinity(sol.data) if sol.data is not None else ()
    return Su3Coefficients(A, B, C, D, E, F, G, E + F, rho, 0, (r2, r3))


@dataclass(frozen=True)
class HypergeometricityReport:
    C_prime: object
    G_prime: object
    F_prime: Optional[complex]
    tau: object
    f_tol: float

    @property
    def passed(self) -> bool:
        ok = self.C_prime == 0 and self.G_prime == 0
        if self.F_prime is not None:
            ok = ok and abs(self.F_prime) <= self.f_tol
        return ok

    def to_json(self) -> dict:
        f = None if self.F_prime is None else [self.F_prime.real, self.F_prime.imag]
        return {"C_prime": str(self.C_prime), "G_prime": str(self.G_prime), "F_prime": f,
                "tau": str(self.tau), "f_tol": self.f_tol, "passed": self.passed}


def hypergeometricity_check(co: Su3Coefficients, case: CaseResult | None = None,
                            fitted: Su3Coefficients | None = None, tau=None,
                            f_tol: float = 1e-5) -> HypergeometricityReport:
    """C', G' from the exact coefficients; F' = F - B tau from the fitted F.

    ``tau`` overrides the case shift (for negative controls off every case).
    """
    if tau is None:
        if case is None or not case.matched:
            raise ValueError("no case shift available; pass tau explicitly")
        tau = case.tau
    tau = as_fraction(tau)
    shifted = shift_coeffs(co, tau)
    F_prime = None
    if fitted is not None:
        F_prime = complex(fitted.F) - float(co.B) * float(tau)
    return HypergeometricityReport(shifted.C, shifted.G, F_prime, tau, f_tol)


# -- first Fourier modes at z = 1 -----------------------------------------------------

@dataclass(frozen=True)
class Su3Asymptotics:
    """Linear coefficients of u and v at z = 1: u ~ ... + c (x1 - 1) + c_tilde x2."""

    c: float
    c_tilde: float
    d: float
    d_tilde: float
    radii: tuple[float, ...]
    ladder: np.ndarray = field(repr=False)     # (len(radii), 4) raw estimates
    contraction: float = 0.0

    def to_json(self) -> dict:
        return {"c": self.c, "c_tilde": self.c_tilde, "d": self.d, "d_tilde": self.d_tilde,
                "radii": list(self.radii), "ladder": self.ladder.tolist(),
                "contraction": self.contraction}


def first_modes(field_fn: Callable[[np.ndarray], np.ndarray], r: float,
                n_theta: int = 1024, centre: complex = 1.0) -> np.ndarray:
    """(1/(pi r)) times the cos and sin moments of each field component on |z - centre| = r.

    Returns shape (k, 2) for a field with k components.
    """
    th = 2 * np.pi * np.arange(n_theta) / n_theta
    vals = np.asarray(field_fn(centre + r * np.exp(1j * th)), dtype=float)
    if vals.ndim == 1:
        vals = vals[:, None]
    w = 2 * np.pi / n_theta / (np.pi * r)
    return np.stack([(vals * np.cos(th)[:, None]).sum(0) * w,
                     (vals * np.sin(th)[:, None]).sum(0) * w], axis=1)


def first_mode_exponent(data: SingularData) -> float:
    """Leading power of r in the first-mode error at z = 1.

    Besides smooth terms (r^2 after dividing by r) the first mode picks up
    r^(2 gamma_{1,j} + 2) from the conical factors.
    """
    return float(min([2.0] + [2 * float(g) + 2 for g in data.gamma1]))


def extract_cd(source, r0: float = 0.05, n_theta: int = 1024, exponent: float | None = None,
               max_contraction: float = 0.9) -> Su3Asymptotics:
    """c, c_tilde, d, d_tilde from radii r0, r0/2, r0/4 with Richardson extrapolation.

    ``source`` is a TodaSolution or any callable mapping an array of z to an
    array of shape (P, 2) holding (u, v).  Radial terms have no first mode;
    the remainder decays like r^exponent (taken from the strengths for a
    solution, 1 otherwise) and is removed by one Richardson step on the two
    smallest radii.  The ladder must contract by at most ``max_contraction``.
    """
    if isinstance(source, TodaSolution):
        _require_rank3(source.n)
        fn = source.evaluate_U
        if exponent is None and source.data is not None:
            exponent = first_mode_exponent(source.data)
    else:
        fn = source
    e = 1.0 if exponent is None else exponent
    radii = (r0, r0 / 2, r0 / 4)
    raw = np.array([first_modes(fn, r, n_theta).reshape(-1) for r in radii])  # c, ct, d, dt
    d1 = np.abs(raw[1] - raw[0]).max()
    d2 = np.abs(raw[2] - raw[1]).max()
    scale = max(1.0, float(np.abs(raw).max()))
    contraction = 0.0 if d1 <= 1e-12 * scale else float(d2 / d1)
    if contraction > max_contraction:
        raise NonconvergentExtrapolation(
            f"first-mode ladder contracts by {contraction:.3f} > {max_contraction}")
    k = 2.0 ** e
    c, ct, d, dt = (k * raw[2] - raw[1]) / (k - 1)
    return Su3Asymptotics(float(c), float(ct), float(d), float(dt), radii, raw, contraction)


# -- Pohozaev identities --------------------------------------------------------------

def _quadratic(gu, gv):
    return gu ** 2 + gv ** 2 - gu * gv


def ie_integrand(zs: np.ndarray, r: float, uz: np.ndarray, eu: np.ndarray) -> np.ndarray:
    """Boundary integrand of I_e on |z - 1| = r times ds / dtheta.

    uz[:, 0] = u_z, uz[:, 1] = v_z; eu = (e^{2u-v}, e^{2v-u}).
    """
    nu = (zs - 1) / r
    nx, ny = nu.real, nu.imag
    gu = np.stack([2 * uz[:, 0].real, -2 * uz[:, 0].imag], axis=1)
    gv = np.stack([2 * uz[:, 1].real, -2 * uz[:, 1].imag], axis=1)
    e_u, e_v = gu[:, 0], gv[:, 0]
    n_u = gu[:, 0] * nx + gu[:, 1] * ny
    n_v = gv[:, 0] * nx + gv[:, 1] * ny
    uu = (gu ** 2).sum(1)
    vv = (gv ** 2).sum(1)
    uv = (gu * gv).sum(1)
    val = (2 * e_u * n_u - nx * uu + 2 * e_v * n_v - nx * vv
           - e_v * n_u - e_u * n_v + nx * uv + 4 * nx * (eu[:, 0] + eu[:, 1]))
    return val * r


def ie_quadrature(sol: TodaSolution, r: float = 0.02, n_theta: int = 1024) -> tuple[float, float]:
    """I_e on radii r and r/2 (trapezoid in theta); returns (Richardson value, raw at r/2)."""
    vals = []
    for rr in (r, r / 2):
        th = 2 * np.pi * np.arange(n_theta) / n_theta
        zs = 1 + rr * np.exp(1j * th)
        uz = sol.U_z(zs)
        eu = sol.exp_u(zs)
        vals.append(float(ie_integrand(zs, rr, uz, eu).mean() * 2 * np.pi))
    return 2 * vals[1] - vals[0], vals[1]


@dataclass(frozen=True)
class PohozaevReport:
    B: float
    cd_combination: float           # -(c g11 + d g12) / 2
    re_F_formula: float
    im_F_formula: float
    F_fitted: complex
    ie_quadrature: float
    ie_formula: float               # 4 pi (c g11 + d g12)
    ie_from_strengths: float        # 8 pi (Q_inf - Q_0 - Q_1 - sum of strengths)
    balance: Optional[tuple[float, float]] = None   # (lhs from masses, rhs)

    @property
    def residuals(self) -> dict:
        out = {"cdgB": abs(self.B - self.cd_combination),
               "re_F": abs(self.re_F_formula - self.F_fitted.real),
               "im_F": abs(self.im_F_formula - self.F_fitted.imag),
               "im_F_fitted": abs(self.F_fitted.imag),
               "ie_relative": abs(self.ie_quadrature - self.ie_formula) / max(abs(self.ie_formula), 1e-300)}
        if self.balance is not None:
            lhs, rhs = self.balance
            out["balance_relative"] = abs(lhs - rhs) / abs(rhs)
        return out

    def to_json(self) -> dict:
        out = {k: v for k, v in self.__dict__.items() if k not in ("F_fitted", "balance")}
        out["F_fitted"] = [self.F_fitted.real, self.F_fitted.imag]
        out["balance"] = None if self.balance is None else list(self.balance)
        out["residuals"] = self.residuals
        return out


def pohozaev_checks(sol: TodaSolution, asym: Su3Asymptotics, co: Su3Coefficients,
                    fitted: Su3Coefficients | None = None, ie_radius: float = 0.02,
                    with_balance: bool = False, mass=None) -> PohozaevReport:
    """Cross-check B, F and I_e against the first modes c, d at z = 1.

    ``co`` supplies the exact B; ``fitted`` the fitted F (fitted here when
    omitted).  ``with_balance`` adds the whole-plane balance using the mass
    quadrature (or a supplied MassReport).
    """
    data = sol.data
    _require_rank3(data.n)
    g11, g12 = (float(g) for g in data.gamma1)
    gu1, gv1 = (float(g) for g in _uv(data, "1"))
    c, ct, d, dt = asym.c, asym.c_tilde, asym.d, asym.d_tilde
    fitted = fit_coefficients(sol) if fitted is None else fitted
    re_F = 0.5 * (c * (gv1 + 1) * g11 - d * gu1 * g12)
    im_F = -0.5 * (ct * (gv1 + 1) * g11 - dt * gu1 * g12)
    ie_num, _ = ie_quadrature(sol, ie_radius)
    sg = super_gamma(data)
    Q = {p: _quadratic(*sg.upper[p]) for p in ("0", "1", "inf")}
    total = sum(sum(sg.upper[p]) for p in ("0", "1", "inf"))
    ie_strengths = float(8 * math.pi * (Q["inf"] - Q["0"] - Q["1"] - total))
    balance = None
    if with_balance:
        if mass is None:
            from .probes import mass_quadrature
            mass = mass_quadrature(sol)
        lhs = 2 * float(np.sum(mass.estimate))
        rhs = float(8 * math.pi * (Q["inf"] - Q["0"] - Q["1"])) - ie_num
        balance = (lhs, rhs)
    return PohozaevReport(float(co.B), -0.5 * (c * g11 + d * g12), re_F, im_F,
                          complex(fitted.F), ie_num, 4 * math.pi * (c * g11 + d * g12),
                          ie_strengths, balance)
