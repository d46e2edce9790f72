"""Fast frame evaluation by Taylor re-expansion over a fixed lattice of centres.

Three polar families of expansion centres ("hubs") cover C minus {0, 1}:
log-spaced rings around 0 and around 1 (radius <= 1/2), and rings around 1/2
reaching out to infinity.  Every hub has a fixed parent chain back to the base
point 1/2, so the frame delivered for a point z depends only on z and not on
what was evaluated before.  The continuation path is therefore arbitrary but
fixed; only quantities invariant under monodromy should be read off it.
"""
from __future__ import annotations

import cmath
import math
import threading
from typing import Optional

import numpy as np

from .ode import DEFAULT_Z0, LocalSeries, OdeSystem

_RING_RATIO = 1.25
_J_SMALL = 32
_J_MID = 64
_MID_STEP = 0.05
_MID_LINEAR = 30
_MID_OUTER = _MID_STEP * _MID_LINEAR

Hub = tuple  # (family, k, j)


def _ring_radius(family: str, k: int) -> float:
    if family == "m":
        if k <= _MID_LINEAR:
            return _MID_STEP * k
        return _MID_OUTER * _RING_RATIO ** (k - _MID_LINEAR)
    return 0.5 * _RING_RATIO ** (-k)


_CENTRES = {"0": 0.0, "1": 1.0, "m": 0.5}


def hub_point(hub: Hub) -> complex:
    family, k, j = hub
    J = _J_MID if family == "m" else _J_SMALL
    return _CENTRES[family] + _ring_radius(family, k) * cmath.exp(2j * math.pi * j / J)


def hub_parent(hub: Hub) -> Optional[Hub]:
    family, k, j = hub
    if family == "0":
        if k > 0:
            return ("0", k - 1, j)
        if j == 0:
            return None
        return ("0", 0, j - 1 if j <= _J_SMALL // 2 else (j + 1) % _J_SMALL)
    if family == "1":
        home = _J_SMALL // 2
        if k > 0:
            return ("1", k - 1, j)
        if j == home:
            return None
        return ("1", 0, j + 1 if j < home else j - 1)
    if k == 0:
        return None
    spine = _J_MID // 4 if j <= _J_MID // 2 else 3 * _J_MID // 4
    if j != spine:
        return ("m", k, j + 1 if j < spine else j - 1)
    return ("m", k - 1, spine) if k > 1 else ("m", 0, 0)


def _candidates(z: complex):
    out = []
    for family in ("0", "1"):
        off = z - _CENTRES[family]
        r = abs(off)
        if r == 0:
            continue
        k = max(0, round(math.log(0.5 / r) / math.log(_RING_RATIO)))
        j = round(cmath.phase(off) / (2 * math.pi / _J_SMALL)) % _J_SMALL
        out.append((family, k, j))
    off = z - 0.5
    r = abs(off)
    if r < 0.5 * _MID_STEP:
        out.append(("m", 0, 0))
    else:
        if r <= _MID_OUTER:
            k = round(r / _MID_STEP)
        else:
            k = _MID_LINEAR + max(0, round(math.log(r / _MID_OUTER) / math.log(_RING_RATIO)))
        j = round(cmath.phase(off) / (2 * math.pi / _J_MID)) % _J_MID
        out.append(("m", k, j))
    return out


def _dist01(z: complex) -> float:
    return min(abs(z), abs(z - 1))


def hub_for(z: complex) -> Hub:
    """Hub whose expansion is used at z: the candidate with smallest |z-h|/dist(h)."""
    best, best_ratio = None, math.inf
    for hub in _candidates(z):
        h = hub_point(hub)
        d = _dist01(h)
        if hub[0] == "m" and hub[1] > 0 and d < 0.3 * _ring_radius("m", hub[1]):
            continue
        ratio = abs(z - h) / d
        if ratio < best_ratio:
            best, best_ratio = hub, ratio
    if best is None or best_ratio > 0.5:
        raise ValueError(f"no expansion centre covers z={z}")
    return best


class FrameAtlas:
    """Thread-safe cache of hub expansions for one ODE and one base frame."""

    def __init__(self, sys: OdeSystem, base_frame: np.ndarray | None = None,
                 z0: complex = DEFAULT_Z0, order: int = 56):
        if complex(z0) != DEFAULT_Z0:
            raise ValueError("the hub lattice is rooted at z0 = 1/2")
        self.sys = sys
        self.order = order
        self.base = np.eye(sys.n, dtype=complex) if base_frame is None else np.array(base_frame, dtype=complex)
        self._cache: dict = {}
        self._lock = threading.Lock()

    def _root_series(self) -> LocalSeries:
        return self.sys.local_series(DEFAULT_Z0, self.base, self.order)

    def series(self, hub: Hub) -> LocalSeries:
        key = ("m", 0, 0) if hub_parent(hub) is None else hub
        with self._lock:
            hit = self._cache.get(key)
        if hit is not None:
            return hit
        chain = []
        node = key
        while True:
            with self._lock:
                hit = self._cache.get(node)
            if hit is not None:
                current = hit
                break
            parent = hub_parent(node)
            if parent is None:
                current = self._root_series()
                with self._lock:
                    self._cache.setdefault(("m", 0, 0), current)
                break
            chain.append(node)
            node = parent
        for node in reversed(chain):
            h = hub_point(node)
            frame = current.frame(h, self.sys.n)
            current = self.sys.local_series(h, frame, self.order)
            with self._lock:
                current = self._cache.setdefault(node, current)
        return current

    def derivatives(self, z, order: int) -> np.ndarray:
        """Derivatives 0..order of the continued basis at z (scalar or array)."""
        if np.ndim(z) == 0:
            return self.series(hub_for(complex(z))).derivatives(complex(z), order)
        zs = np.asarray(z, dtype=complex).ravel()
        out = np.empty((len(zs), order + 1, self.sys.n), dtype=complex)
        groups: dict = {}
        for i, zz in enumerate(zs):
            groups.setdefault(hub_for(complex(zz)), []).append(i)
        for hub, idx in groups.items():
            out[idx] = self.series(hub).derivatives(zs[idx], order)
        return out.reshape(np.shape(z) + (order + 1, self.sys.n))

    def frame(self, z: complex) -> np.ndarray:
        return self.derivatives(z, self.sys.n - 1)

    def __len__(self) -> int:
        return len(self._cache)
