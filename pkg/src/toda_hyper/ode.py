"""Linear ODEs with polynomial coefficients: companion transport, local power
series and monodromy around the singular points 0 and 1.

Frames are n x m arrays ``Y[k, j] = y_j^{(k)}(z)``: column j is a solution and
row k its k-th derivative.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.integrate._ivp import dop853_coefficients as _dop

from .errors import ClearanceViolation, StepUnderflow
from .hypergeo import HgOde

DEFAULT_Z0 = 0.5


def _shift_poly(coeffs: np.ndarray, c: complex, rho: float) -> np.ndarray:
    """Coefficients in t of q(c + rho t), for q given in ascending powers."""
    b = np.array(coeffs, dtype=complex)
    d = len(b) - 1
    for i in range(d):
        for j in range(d - 1, i - 1, -1):
            b[j] += c * b[j + 1]
    return b * rho ** np.arange(d + 1)


def _horner(coeffs, z):
    acc = 0j
    for c in reversed(coeffs):
        acc = acc * z + c
    return acc


@dataclass(frozen=True)
class OdeSystem:
    """sum_k q_k(z) y^(n-k) = 0 with polynomial q_k; q_0 vanishes only on ``singular``."""

    n: int
    polys: tuple[tuple[complex, ...], ...]
    singular: tuple[complex, ...] = (0.0, 1.0)

    @classmethod
    def from_polynomials(cls, polys: Sequence[Sequence], singular: Iterable = (0.0, 1.0)) -> "OdeSystem":
        polys = tuple(tuple(complex(c) for c in p) for p in polys)
        return cls(len(polys) - 1, polys, tuple(complex(s) for s in singular))

    @classmethod
    def from_hg(cls, ode: HgOde) -> "OdeSystem":
        return cls.from_polynomials([[complex(c) for c in q] for q in ode.polynomial_coefficients()],
                                    (0.0, 1.0))

    def dist(self, z: complex) -> float:
        if not self.singular:
            return math.inf
        return min(abs(z - s) for s in self.singular)

    def coefficients(self, z: complex) -> np.ndarray:
        """(a_1(z), ..., a_n(z)) of the monic form."""
        lead = _horner(self.polys[0], z)
        return np.array([_horner(p, z) / lead for p in self.polys[1:]])

    def companion(self, z: complex) -> np.ndarray:
        n = self.n
        c = np.zeros((n, n), dtype=complex)
        c[np.arange(n - 1), np.arange(1, n)] = 1.0
        c[n - 1, ::-1] = -self.coefficients(z)
        return c

    def local_series(self, center: complex, frame: np.ndarray, order: int = 48,
                     rho: float | None = None) -> "LocalSeries":
        """Power series of the solutions with initial data ``frame`` at ``center``."""
        n = self.n
        frame = np.asarray(frame, dtype=complex)
        if rho is None:
            d = self.dist(center)
            rho = 1.0 if math.isinf(d) else d
        Q = [_shift_poly(np.array(p), center, rho) * rho ** k for k, p in enumerate(self.polys)]
        lead = Q[0][0]
        if lead == 0:
            raise ValueError(f"{center} is a singular point")
        Q = [q / lead for q in Q]
        N = max(order, n)
        coef = np.zeros((N + 1, frame.shape[1]), dtype=complex)
        fact = 1.0
        for k in range(n):
            if k:
                fact *= k
            coef[k] = frame[k] * rho ** k / fact
        # falling factorials ff[i, j] = i (i-1) ... (i-j+1)
        ff = np.ones((N + 1, n + 1))
        for j in range(1, n + 1):
            ff[:, j] = ff[:, j - 1] * (np.arange(N + 1) - (j - 1))
        ks, ls, ws = [], [], []
        for k, q in enumerate(Q):
            for l, w in enumerate(q):
                if (k, l) != (0, 0) and w != 0:
                    ks.append(k)
                    ls.append(l)
                    ws.append(w)
        J = n - np.array(ks, dtype=int)
        L = np.array(ls, dtype=int)
        W = np.array(ws, dtype=complex)
        for M in range(N - n + 1):
            mask = L <= M
            idx = M - L[mask] + J[mask]
            weights = W[mask] * ff[idx, J[mask]]
            s = weights @ coef[idx]
            coef[M + n] = -s / ff[M + n, n]
        return LocalSeries(complex(center), float(rho), coef)


@dataclass(frozen=True)
class LocalSeries:
    """y_j(center + rho t) = sum_m coeffs[m, j] t^m."""

    center: complex
    rho: float
    coeffs: np.ndarray

    def derivatives(self, z, order: int) -> np.ndarray:
        """Derivatives 0..order in z.  Shape (order+1, m) or (P, order+1, m) for array z."""
        zs = np.atleast_1d(np.asarray(z, dtype=complex))
        t = (zs - self.center) / self.rho
        N = self.coeffs.shape[0] - 1
        powers = t[:, None] ** np.arange(N + 1)[None, :]
        out = np.empty((len(zs), order + 1, self.coeffs.shape[1]), dtype=complex)
        m = np.arange(N + 1, dtype=float)
        for k in range(order + 1):
            scale = np.ones(N + 1 - k)
            for r in range(k):
                scale *= m[k:] - r
            d = self.coeffs[k:] * scale[:, None]
            out[:, k] = powers[:, :N + 1 - k] @ d / self.rho ** k
        return out[0] if np.ndim(z) == 0 else out

    def frame(self, z: complex, n: int) -> np.ndarray:
        return self.derivatives(z, n - 1)

    def tail_ratio(self) -> float:
        """Size of the last coefficients relative to the largest, a truncation gauge."""
        mags = np.abs(self.coeffs).max(axis=1)
        return float(mags[-4:].max() / max(mags.max(), 1e-300))


# -- paths -------------------------------------------------------------------------

@dataclass(frozen=True)
class Line:
    a: complex
    b: complex

    def point(self, s):
        return self.a + (self.b - self.a) * s

    def deriv(self, s):
        return self.b - self.a

    @property
    def start(self):
        return self.a

    @property
    def end(self):
        return self.b

    def reversed(self):
        return Line(self.b, self.a)

    def distance_to(self, p: complex) -> float:
        d = self.b - self.a
        if d == 0:
            return abs(p - self.a)
        s = ((p - self.a) * d.conjugate()).real / abs(d) ** 2
        return abs(p - self.point(min(1.0, max(0.0, s))))


@dataclass(frozen=True)
class Arc:
    center: complex
    radius: float
    theta0: float
    theta1: float

    def point(self, s):
        return self.center + self.radius * cmath.exp(1j * (self.theta0 + (self.theta1 - self.theta0) * s))

    def deriv(self, s):
        return 1j * (self.theta1 - self.theta0) * (self.point(s) - self.center)

    @property
    def start(self):
        return self.point(0.0)

    @property
    def end(self):
        return self.point(1.0)

    def reversed(self):
        return Arc(self.center, self.radius, self.theta1, self.theta0)

    def distance_to(self, p: complex) -> float:
        lo, hi = sorted((self.theta0, self.theta1))
        off = p - self.center
        if hi - lo >= 2 * math.pi or off == 0:
            covered = True
        else:
            phi = cmath.phase(off)
            phi = lo + (phi - lo) % (2 * math.pi)
            covered = phi <= hi
        if covered:
            return abs(abs(off) - self.radius)
        return min(abs(p - self.start), abs(p - self.end))


@dataclass(frozen=True)
class Path:
    segments: tuple
    delta: float = 1e-6

    def __post_init__(self):
        segs = tuple(self.segments)
        if not segs:
            raise ValueError("empty path")
        for s, t in zip(segs, segs[1:]):
            if abs(s.end - t.start) > 1e-12 * max(1.0, abs(s.end)):
                raise ValueError(f"path is not continuous at {s.end} -> {t.start}")
        object.__setattr__(self, "segments", segs)

    @property
    def start(self) -> complex:
        return self.segments[0].start

    @property
    def end(self) -> complex:
        return self.segments[-1].end

    def __add__(self, other: "Path") -> "Path":
        return Path(self.segments + other.segments, min(self.delta, other.delta))

    def reversed(self) -> "Path":
        return Path(tuple(s.reversed() for s in reversed(self.segments)), self.delta)

    def clearance(self, points: Iterable[complex]) -> float:
        pts = list(points)
        if not pts:
            return math.inf
        return min(seg.distance_to(p) for seg in self.segments for p in pts)

    @classmethod
    def line(cls, a: complex, b: complex, delta: float = 1e-6) -> "Path":
        return cls((Line(complex(a), complex(b)),), delta)

    @classmethod
    def polyline(cls, points: Sequence[complex], delta: float = 1e-6) -> "Path":
        pts = [complex(p) for p in points]
        return cls(tuple(Line(a, b) for a, b in zip(pts, pts[1:])), delta)

    @classmethod
    def loop(cls, center: complex, radius: float, base: complex = DEFAULT_Z0,
             turns: int = 1, delta: float = 1e-6) -> "Path":
        """Counterclockwise loop around ``center`` starting and ending at ``base``."""
        center, base = complex(center), complex(base)
        theta = cmath.phase(base - center)
        on_circle = center + radius * cmath.exp(1j * theta)
        arc = Arc(center, radius, theta, theta + 2 * math.pi * turns)
        if abs(on_circle - base) < 1e-14:
            return cls((arc,), delta)
        return cls((Line(base, on_circle), arc, Line(on_circle, base)), delta)


# -- adaptive transport ---------------------------------------------------------------

_A = _dop.A[:_dop.N_STAGES, :_dop.N_STAGES]
_B = _dop.B
_C = _dop.C[:_dop.N_STAGES]
_E3 = _dop.E3
_E5 = _dop.E5
_ORDER = 8


@dataclass
class TransportStats:
    steps: int = 0
    rejected: int = 0


def _error_norm(K, h, scale):
    err5 = (K.T @ _E5) / scale
    err3 = (K.T @ _E3) / scale
    e5 = float(np.vdot(err5, err5).real)
    e3 = float(np.vdot(err3, err3).real)
    if e5 == 0 and e3 == 0:
        return 0.0
    return abs(h) * e5 / math.sqrt((e5 + 0.01 * e3) * len(scale))


def _transport_segment(sys: OdeSystem, y: np.ndarray, seg, rtol, atol, cap, h_min,
                       stats: TransportStats) -> np.ndarray:
    shape = y.shape

    def rhs(s, v):
        z = seg.point(s)
        return (seg.deriv(s) * (sys.companion(z) @ v.reshape(shape))).ravel()

    def h_cap(s):
        speed = abs(seg.deriv(s))
        if speed == 0:
            return 1.0
        return min(1.0, cap * sys.dist(seg.point(s)) / speed)

    v = y.ravel().astype(complex)
    s = 0.0
    f = rhs(s, v)
    h = h_cap(s)
    err_prev = 1e-4
    K = np.empty((_dop.N_STAGES + 1, v.size), dtype=complex)
    while s < 1.0:
        h = min(h, 1.0 - s, h_cap(s))
        if h < h_min:
            raise StepUnderflow(f"step {h:.3e} below floor near z={seg.point(s)}")
        K[0] = f
        for i in range(1, _dop.N_STAGES):
            K[i] = rhs(s + _C[i] * h, v + h * (K[:i].T @ _A[i, :i]))
        v_new = v + h * (K[:-1].T @ _B)
        f_new = rhs(s + h, v_new)
        K[-1] = f_new
        scale = atol + np.maximum(np.abs(v), np.abs(v_new)) * rtol
        err = _error_norm(K, h, scale)
        if err < 1.0:
            stats.steps += 1
            s = 1.0 if s + h >= 1.0 - 1e-15 else s + h
            v, f = v_new, f_new
            if err == 0:
                factor = 5.0
            else:
                factor = 0.9 * err ** (-0.7 / _ORDER) * err_prev ** (0.4 / _ORDER)
            err_prev = max(err, 1e-10)
            h *= min(5.0, max(0.2, factor))
        else:
            stats.rejected += 1
            h *= max(0.2, 0.9 * err ** (-1.0 / _ORDER))
    return v.reshape(shape)


def transport(sys: OdeSystem, frame: np.ndarray, path: Path, rtol: float = 1e-12,
              atol: float = 1e-14, cap: float = 0.2, h_min: float = 1e-12,
              stats: TransportStats | None = None) -> np.ndarray:
    """Continue ``frame`` analytically along ``path`` and return the end frame.

    Embedded 8(5,3) Runge-Kutta steps with PI control; each step moves z by
    at most ``cap`` times the distance to the nearest singular point.
    """
    clear = path.clearance(sys.singular)
    if clear < path.delta:
        raise ClearanceViolation(f"path comes within {clear:.3e} of a singular point "
                                 f"(required {path.delta:.3e})")
    stats = stats if stats is not None else TransportStats()
    y = np.array(frame, dtype=complex)
    for seg in path.segments:
        y = _transport_segment(sys, y, seg, rtol, atol, cap, h_min, stats)
    return y


def fundamental_basis(sys: OdeSystem, z0: complex = DEFAULT_Z0) -> np.ndarray:
    """Identity frame: sigma_j^{(k)}(z0) = delta_jk."""
    if sys.dist(z0) == 0:
        raise ValueError(f"base point {z0} is singular")
    return np.eye(sys.n, dtype=complex)


@dataclass(frozen=True)
class MonodromyData:
    """Loop actions on the identity frame at z0: phi(eta) sigma_j = sum_i M[i, j] sigma_i."""

    z0: complex
    M0: np.ndarray
    M1: np.ndarray
    radius: float = 0.5
    convention: str = field(default="column: phi(eta)(sigma_j) = sum_i M_ij sigma_i")

    @property
    def Minf(self) -> np.ndarray:
        # a loop enclosing both points continues along the loop at 1, then at 0; with the
        # column convention that composes as M0 @ M1
        return np.linalg.inv(self.M0 @ self.M1)

    def eigen_mismatch(self, roots0: Sequence, roots1: Sequence) -> float:
        """Largest distance between the spectra and {exp(2 pi i rho)} (matched optimally)."""
        return max(_spectrum_mismatch(self.M0, roots0), _spectrum_mismatch(self.M1, roots1))


def _spectrum_mismatch(M: np.ndarray, roots: Sequence) -> float:
    from scipy.optimize import linear_sum_assignment
    ev = np.linalg.eigvals(M)
    target = np.exp(2j * np.pi * np.array([float(r) for r in roots]))
    cost = np.abs(ev[:, None] - target[None, :])
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max())


def monodromy(sys: OdeSystem, z0: complex = DEFAULT_Z0, radius: float = 0.5,
              rtol: float = 1e-12, atol: float = 1e-14) -> MonodromyData:
    base = fundamental_basis(sys, z0)
    M0 = transport(sys, base, Path.loop(0.0, radius, z0), rtol, atol)
    M1 = transport(sys, base, Path.loop(1.0, radius, z0), rtol, atol)
    return MonodromyData(complex(z0), M0, M1, radius)
