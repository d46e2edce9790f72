"""Toda solutions from hypergeometric monodromy.

Given the hypergeometric equation D(alpha; beta) with basis sigma at z0 = 1/2,
the functions nu = (z-1)^(-tau) sigma have Wronskian matrix V (V[j, k] =
nu_j^(k)).  With a Hermitian form P invariant under the monodromy,

    R = V^H (P / lambda) V,     R_m = leading m x m principal minor,
    U_m = -log R_m,             e^{u_i} = R_{i-1} R_{i+1} / R_i^2,

and U solves  U_{i, z zbar} + exp(sum_j a_ij U_j) = 0  with R_n = 1.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Optional, Sequence

import numpy as np

from .cases import CaseResult, classify
from .continuation import FrameAtlas, hub_for
from .errors import (AmbiguousForm, IndefiniteForm, NoInvariantForm, NonconstantWronskian,
                     NonpositiveMinor, NotInterlacing)
from .gamma import SingularData, as_fraction
from .hypergeo import HgParams, hg_ode, hg_params, indicial_roots, interlace
from .ode import (DEFAULT_Z0, MonodromyData, OdeSystem, Path, fundamental_basis, monodromy,
                  transport)

BRANCH = "arg(z-1) in [0, 2pi): cut along [1, +inf), continuation never crosses it"


def branch_arg(w: complex) -> float:
    a = cmath.phase(w)
    return a + 2 * math.pi if a < 0 else a


def branch_pow(w: complex, a: float) -> complex:
    """w**a on the branch arg(w) in [0, 2 pi)."""
    return cmath.exp(a * complex(math.log(abs(w)), branch_arg(w)))


def default_path(z: complex, z0: complex = DEFAULT_Z0) -> Path:
    """Route from z0 to z that never crosses [1, +inf) or runs close to 0 or 1.

    Straight when that keeps away from 0 and 1, otherwise through z0 +/- i on
    the side of Im z (real z goes over the top, matching arg(z-1) = 0 on the cut).
    """
    z = complex(z)
    d = min(abs(z), abs(z - 1))
    straight = Path.line(z0, z)
    crosses_cut = z.imag == 0 and z.real > 1
    if not crosses_cut and straight.clearance((0, 1)) >= min(0.5 * d, 0.25):
        return straight
    via = z0 + (1j if z.imag >= 0 else -1j)
    return Path.polyline([z0, via, z])


# -- invariant Hermitian form ---------------------------------------------------------

def _hermitian_basis(n: int) -> list[np.ndarray]:
    basis = []
    for a in range(n):
        e = np.zeros((n, n), dtype=complex)
        e[a, a] = 1
        basis.append(e)
    for a in range(n):
        for b in range(a + 1, n):
            e = np.zeros((n, n), dtype=complex)
            e[a, b] = e[b, a] = 1
            basis.append(e)
            e = np.zeros((n, n), dtype=complex)
            e[a, b] = 1j
            e[b, a] = -1j
            basis.append(e)
    return basis


def invariance_residual(P: np.ndarray, mats: Sequence[np.ndarray]) -> float:
    nrm = np.linalg.norm(P)
    return max(np.linalg.norm(np.conj(M) @ P @ M.T - P) / nrm for M in mats)


@dataclass(frozen=True)
class InvariantForm:
    """P: definite representative with ||P||_F = 1; the form used in R is P / lam."""

    P: np.ndarray
    lam: float
    c: complex
    nullity: int
    singular_values: np.ndarray
    residual: float

    @property
    def scaled(self) -> np.ndarray:
        return self.P / self.lam


def invariant_form(mono: MonodromyData, c: complex = 1.0, tol: float = 1e-9) -> InvariantForm:
    """Solve conj(M) P M^T = P for M in {M0, M1} over Hermitian P by SVD.

    The normalisation lam satisfies lam^n = det(P) |c|^2.
    """
    n = mono.M0.shape[0]
    basis = _hermitian_basis(n)
    cols = []
    for E in basis:
        parts = []
        for M in (mono.M0, mono.M1):
            L = np.conj(M) @ E @ M.T - E
            parts += [L.real.ravel(), L.imag.ravel()]
        cols.append(np.concatenate(parts))
    A = np.array(cols).T
    _, s, vh = np.linalg.svd(A)
    s_full = np.concatenate([s, np.zeros(max(0, len(basis) - len(s)))])
    # floor at 1 so near-unitary scalar cases (all s ~ eps) are not rescaled into noise
    smax = max(float(s_full.max()), 1.0)
    null = int(np.sum(s_full <= tol * smax))
    if null == 0:
        raise NoInvariantForm(f"no invariant Hermitian form (smallest singular value "
                              f"{s_full.min() / smax:.2e} relative)")
    if null > 1:
        raise AmbiguousForm(f"invariant forms span a {null}-dimensional space")
    x = vh[-1]
    P = sum(xi * E for xi, E in zip(x, basis))
    P = (P + P.conj().T) / 2
    ev = np.linalg.eigvalsh(P)
    if ev.max() <= 0:
        P, ev = -P, -ev[::-1]
    if ev.min() <= 0:
        raise IndefiniteForm(f"invariant form is indefinite (eigenvalues {ev})")
    P = P / np.linalg.norm(P)
    det = float(np.linalg.det(P).real)
    lam = (det * abs(c) ** 2) ** (1.0 / n)
    return InvariantForm(P, lam, complex(c), null, s_full / smax,
                         invariance_residual(P, (mono.M0, mono.M1)))


# -- Wronskian constant ----------------------------------------------------------------

def nu_wronskian(sys: OdeSystem, tau: float, z: complex, frame: np.ndarray | None = None) -> complex:
    """det W(nu)(z) = (z-1)^(-n tau) det W(sigma)(z), continued along default_path."""
    if frame is None:
        frame = transport(sys, fundamental_basis(sys), default_path(z))
    return branch_pow(z - 1, -sys.n * tau) * np.linalg.det(frame)


def wronskian_constant(sys: OdeSystem, tau: float,
                       points: Sequence[complex] = (DEFAULT_Z0, 0.5 + 1j / 3, -0.25),
                       tol: float = 1e-8) -> complex:
    vals = [nu_wronskian(sys, tau, z) for z in points]
    ref = vals[0]
    spread = max(abs(v - ref) for v in vals) / abs(ref)
    if spread > tol:
        raise NonconstantWronskian(f"det W(nu) varies by {spread:.2e} (relative) across {points}")
    return ref


# -- truncated power series ------------------------------------------------------------

def _smul(a, b):
    return np.convolve(a, b)[:len(a)]


def _sdiv(a, b):
    out = np.zeros_like(a)
    for k in range(len(a)):
        out[k] = (a[k] - np.dot(out[:k], b[k:0:-1])) / b[0]
    return out


def series_det(A: np.ndarray) -> np.ndarray:
    """Determinant of an m x m matrix of truncated series (last axis), no pivoting."""
    A = np.array(A, dtype=complex)
    m = A.shape[0]
    det = np.zeros(A.shape[2], dtype=complex)
    det[0] = 1
    for col in range(m):
        piv = A[col, col]
        det = _smul(det, piv)
        for r in range(col + 1, m):
            f = _sdiv(A[r, col], piv)
            for c in range(col, m):
                A[r, c] = A[r, c] - _smul(f, A[col, c])
    return det


def _bmul(a, b):
    """Product of a0 + a1 x + a2 y + a3 xy style 2x2 coefficient arrays, mod x^2, y^2."""
    out = np.zeros((2, 2), dtype=complex)
    for i in range(2):
        for j in range(2):
            out[i:, j:] += a[i, j] * b[:2 - i, :2 - j]
    return out


def _bdiv(a, b):
    out = np.zeros((2, 2), dtype=complex)
    out[0, 0] = a[0, 0] / b[0, 0]
    out[1, 0] = (a[1, 0] - out[0, 0] * b[1, 0]) / b[0, 0]
    out[0, 1] = (a[0, 1] - out[0, 0] * b[0, 1]) / b[0, 0]
    out[1, 1] = (a[1, 1] - out[0, 0] * b[1, 1] - out[1, 0] * b[0, 1]
                 - out[0, 1] * b[1, 0]) / b[0, 0]
    return out


def _bivariate_det(A: np.ndarray) -> np.ndarray:
    A = np.array(A, dtype=complex)
    m = A.shape[0]
    det = np.zeros((2, 2), dtype=complex)
    det[0, 0] = 1
    for col in range(m):
        piv = A[col, col]
        det = _bmul(det, piv)
        for r in range(col + 1, m):
            f = _bdiv(A[r, col], piv)
            for c in range(col, m):
                A[r, c] = A[r, c] - _bmul(f, A[col, c])
    return det


def series_log(f: np.ndarray) -> np.ndarray:
    L = np.zeros_like(f)
    L[0] = np.log(f[0])
    for k in range(1, len(f)):
        acc = k * f[k] - sum(j * L[j] * f[k - j] for j in range(1, k))
        L[k] = acc / (k * f[0])
    return L


# -- solution -----------------------------------------------------------------------------

@dataclass
class TodaSolution:
    data: Optional[SingularData]
    params: HgParams
    sys: OdeSystem
    mono: MonodromyData
    form: InvariantForm
    branch: str = BRANCH
    case: Optional[CaseResult] = None
    atlas: FrameAtlas = field(default=None, repr=False)

    def __post_init__(self):
        if self.atlas is None:
            self.atlas = FrameAtlas(self.sys)

    @property
    def n(self) -> int:
        return self.sys.n

    @property
    def tau(self) -> float:
        return float(self.params.tau)

    def with_form(self, P: np.ndarray | None = None, lam: float | None = None) -> "TodaSolution":
        """Copy with a replaced form (used by negative controls); shares the atlas."""
        f = self.form
        form = InvariantForm(f.P if P is None else P, f.lam if lam is None else lam, f.c,
                             f.nullity, f.singular_values, f.residual)
        return TodaSolution(self.data, self.params, self.sys, self.mono, form, self.branch,
                            self.case, self.atlas)

    # nu-jets with the (z-1)^(-tau) factor divided out --------------------------------
    def _nu_tilde(self, z, sigma: np.ndarray) -> np.ndarray:
        """D[..., k, j] = nu_j^(k)(z) / (z-1)^(-tau) from sigma-derivatives."""
        K = sigma.shape[-2] - 1
        w = np.asarray(z, dtype=complex) - 1.0
        out = np.zeros_like(sigma)
        for k in range(K + 1):
            for l in range(k + 1):
                s = k - l
                coef = comb(k, l) * math.prod(-self.tau - i for i in range(s))
                out[..., k, :] += (coef * w ** (-s))[..., None] * sigma[..., l, :]
        return out

    def _sigma(self, z, order: int, anchor: complex | None = None) -> np.ndarray:
        if anchor is None:
            return self.atlas.derivatives(z, order)
        series = self.atlas.series(hub_for(complex(anchor)))
        return series.derivatives(z, order)

    def gram(self, z, anchor: complex | None = None, sigma: np.ndarray | None = None) -> np.ndarray:
        """R(z) = V^H (P / lam) V, shape (..., n, n)."""
        if sigma is None:
            sigma = self._sigma(z, self.n - 1, anchor)
        D = self._nu_tilde(z, sigma[..., :self.n, :])
        weight = np.abs(np.asarray(z, dtype=complex) - 1.0) ** (-2 * self.tau)
        R = np.einsum("...ki,ij,...lj->...kl", D.conj(), self.form.scaled, D)
        return R * weight[..., None, None]

    def _form_root(self):
        """(sqrt(w) Q^H) with P/lam = Q diag(w) Q^H, or None if the form is not definite."""
        key = id(self.form)
        cached = getattr(self, "_root_cache", None)
        if cached is not None and cached[0] == key:
            return cached[1]
        w, Q = np.linalg.eigh(self.form.scaled)
        root = None if w.min() <= 0 else np.sqrt(w)[:, None] * Q.conj().T
        self._root_cache = (key, root)
        return root

    def minors(self, z, anchor: complex | None = None, sigma: np.ndarray | None = None) -> np.ndarray:
        """R_1..R_n at z; shape (..., n).

        With P/lam = C^H C the Gram matrix is B^H B for B = C V, so the leading
        minors are running products of |diag(QR(B))|^2, free of the
        cancellation in forming V^H P V explicitly.
        """
        root = self._form_root()
        if root is None:
            R = self.gram(z, anchor, sigma)
            return np.stack([np.linalg.det(R[..., :m, :m]).real
                             for m in range(1, self.n + 1)], axis=-1)
        if sigma is None:
            sigma = self._sigma(z, self.n - 1, anchor)
        D = self._nu_tilde(z, sigma[..., :self.n, :])
        B = np.einsum("ij,...kj->...ik", root, D)
        r = np.linalg.qr(B, mode="r")
        d = np.abs(np.diagonal(r, axis1=-2, axis2=-1)) ** 2
        weight = np.abs(np.asarray(z, dtype=complex) - 1.0) ** (-2 * self.tau)
        return np.cumprod(d * weight[..., None], axis=-1)

    def evaluate_U(self, z, anchor: complex | None = None) -> np.ndarray:
        Rm = self.minors(z, anchor)[..., :-1]
        if np.any(Rm <= 0):
            raise NonpositiveMinor(f"nonpositive leading minor at z={z}")
        return -np.log(Rm)

    def R_n(self, z) -> np.ndarray:
        return self.minors(z)[..., -1]

    def exp_u(self, z, anchor: complex | None = None, true_Rn: bool = False) -> np.ndarray:
        """e^{u_i} = R_{i-1} R_{i+1} / R_i^2 with R_0 = 1 and R_n = 1 unless ``true_Rn``."""
        Rm = self.minors(z, anchor)
        one = np.ones(Rm.shape[:-1] + (1,))
        last = Rm[..., -1:] if true_Rn else one
        full = np.concatenate([one, Rm[..., :-1], last], axis=-1)
        return full[..., :-2] * full[..., 2:] / full[..., 1:-1] ** 2

    def U_from_frame(self, z: complex, frame: np.ndarray) -> np.ndarray:
        """U from an explicitly continued sigma-frame (any path)."""
        Rm = self.minors(z, sigma=np.asarray(frame))[:-1]
        if np.any(Rm <= 0):
            raise NonpositiveMinor(f"nonpositive leading minor at z={z}")
        return -np.log(Rm)

    # holomorphic derivatives -------------------------------------------------------
    def minor_series(self, z: complex, order: int = 3) -> np.ndarray:
        """f[m-1, s] = d^s/dz^s R_m(z) / s!  (z-derivatives with zbar held fixed)."""
        n = self.n
        sigma = self._sigma(complex(z), n - 1 + order)
        D = self._nu_tilde(complex(z), sigma)
        weight = abs(z - 1) ** (-2 * self.tau)
        P = self.form.scaled
        # G[k, l, s] = conj(D_k) P D_{l+s} / s!
        G = np.zeros((n, n, order + 1), dtype=complex)
        for s in range(order + 1):
            G[:, :, s] = D[:n].conj() @ P @ D[s:s + n].T / math.factorial(s)
        G *= weight
        return np.array([series_det(G[:m, :m]) for m in range(1, n + 1)])

    def U_derivatives(self, z: complex, order: int = 3) -> np.ndarray:
        """dU[m-1, s] = d^s U_m / dz^s for m = 1..n-1, s = 0..order."""
        f = self.minor_series(z, order)[:-1]
        out = np.zeros((self.n - 1, order + 1), dtype=complex)
        for m in range(self.n - 1):
            L = series_log(f[m])
            out[m] = [-L[s] * math.factorial(s) for s in range(order + 1)]
        out[:, 0] = out[:, 0].real
        return out

    def mixed_minor_series(self, z: complex) -> np.ndarray:
        """F[m-1, a, b]: coefficient of dzbar^a dz^b (a, b <= 1) of R_m around z."""
        n = self.n
        sigma = self._sigma(complex(z), n)
        D = self._nu_tilde(complex(z), sigma)
        weight = abs(z - 1) ** (-2 * self.tau)
        P = self.form.scaled
        G = np.zeros((n, n, 2, 2), dtype=complex)
        for a in range(2):
            for b in range(2):
                G[:, :, a, b] = D[a:a + n].conj() @ P @ D[b:b + n].T
        G *= weight
        return np.array([_bivariate_det(G[:m, :m]) for m in range(1, n + 1)])

    def ddbar_U(self, z: complex) -> np.ndarray:
        """U_{m, z zbar} for m = 1..n-1, exactly from the series."""
        F = self.mixed_minor_series(z)[:-1]
        f, fz, fzb, fzzb = F[:, 0, 0], F[:, 0, 1], F[:, 1, 0], F[:, 1, 1]
        return -((f * fzzb - fz * fzb) / f ** 2).real

    def U_z(self, z) -> np.ndarray:
        """dU_m/dz for m = 1..n-1 at scalar or array z; shape (..., n-1)."""
        z = np.asarray(z, dtype=complex)
        n = self.n
        D = self._nu_tilde(z, self._sigma(z, n))
        P = self.form.scaled
        out = []
        for m in range(1, n):
            rows = list(range(m - 1)) + [m]
            G0 = np.einsum("...ki,ij,...lj->...kl", D[..., :m, :].conj(), P, D[..., :m, :])
            G1 = np.einsum("...ki,ij,...lj->...kl", D[..., :m, :].conj(), P, D[..., rows, :])
            out.append(-np.linalg.det(G1) / np.linalg.det(G0))
        return np.stack(out, axis=-1)

    def column_bump_derivative(self, z: complex) -> np.ndarray:
        """d R_m/dz by replacing the top derivative column nu^(m-1) with nu^(m)."""
        n = self.n
        sigma = self._sigma(complex(z), n)
        D = self._nu_tilde(complex(z), sigma)
        weight = abs(z - 1) ** (-2 * self.tau)
        P = self.form.scaled
        out = []
        for m in range(1, n + 1):
            rows = list(range(m - 1)) + [m]
            G = D[:m].conj() @ P @ D[rows].T
            out.append(np.linalg.det(G) * weight ** m)
        return np.array(out)


def prepare(data: SingularData, tau=None) -> tuple[CaseResult, HgParams]:
    case = classify(data)
    if tau is None and not case.matched:
        return case, None
    return case, hg_params(data, case, tau)


def build_from_params(params: HgParams, data: SingularData | None = None,
                      case: CaseResult | None = None, radius: float = 0.5,
                      tol: float = 1e-9) -> TodaSolution:
    ode = hg_ode(params)
    sys = OdeSystem.from_hg(ode)
    mono = monodromy(sys, radius=radius)
    c = wronskian_constant(sys, float(params.tau))
    form = invariant_form(mono, c, tol)
    return TodaSolution(data, params, sys, mono, form, BRANCH, case)


def construct(data: SingularData, tau=None, check_interlace: bool = True) -> TodaSolution:
    """Full pipeline: classify, parameters, monodromy, invariant form.

    Raises ValueError when no case applies and no ``tau`` is supplied,
    NotInterlacing at the interlacing gate, and IndefiniteForm/NoInvariantForm
    when the monodromy admits no definite form.
    """
    case, params = prepare(data, tau)
    if params is None:
        raise ValueError(case.reason)
    if check_interlace and not interlace(params.alpha, params.beta):
        raise NotInterlacing(f"alpha={[str(a) for a in params.alpha]} and "
                             f"beta={[str(b) for b in params.beta]} do not interlace modulo Z")
    return build_from_params(params, data, case)


def exponent_roots(params: HgParams) -> dict:
    ode = hg_ode(params)
    return {p: indicial_roots(ode, p) for p in (0, 1, "inf")}
