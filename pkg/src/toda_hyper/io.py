"""Instance files, JSON reports, solution checkpoints and CSV grid samples."""
from __future__ import annotations

import csv
import json
import os
import re
import tempfile
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .builder import InvariantForm, TodaSolution
from .cases import classify
from .errors import InvalidStrengths
from .gamma import SingularData, as_fraction
from .hypergeo import HgParams, hg_ode
from .ode import MonodromyData, OdeSystem


class MalformedInput(InvalidStrengths):
    """Instance or checkpoint file that cannot be parsed."""


@dataclass(frozen=True)
class Instance:
    data: SingularData
    tolerances: dict = field(default_factory=dict)
    grid: Optional[str] = None
    override_tau: Optional[Fraction] = None
    radii: Optional[list] = None


def parse_instance(obj: dict) -> Instance:
    if not isinstance(obj, dict):
        raise MalformedInput("instance must be a JSON object")
    try:
        n = obj["n"]
        vecs = [obj[k] for k in ("gamma0", "gamma1", "gammaInf")]
    except KeyError as exc:
        raise MalformedInput(f"missing field {exc.args[0]!r}") from None
    if not isinstance(n, int) or isinstance(n, bool):
        raise MalformedInput("n must be an integer")
    for name, vec in zip(("gamma0", "gamma1", "gammaInf"), vecs):
        if not isinstance(vec, list):
            raise MalformedInput(f"{name} must be an array of rational strings")
    try:
        data = SingularData(n, *[[as_fraction(x) for x in v] for v in vecs])
    except (TypeError, ZeroDivisionError) as exc:
        raise MalformedInput(str(exc)) from None
    except ValueError as exc:
        if isinstance(exc, InvalidStrengths):
            raise
        raise MalformedInput(str(exc)) from None
    num = obj.get("numerics") or {}
    if not isinstance(num, dict):
        raise MalformedInput("numerics must be an object")
    tau = num.get("override_tau")
    tols = {str(k): float(v) for k, v in (num.get("tolerances") or {}).items()}
    return Instance(data, tols, num.get("grid"),
                    None if tau is None else as_fraction(tau), num.get("radii"))


def load_instance(path: str | os.PathLike) -> Instance:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"{path}: invalid JSON ({exc.msg})") from None
    except OSError as exc:
        raise MalformedInput(f"{path}: {exc.strerror}") from None
    return parse_instance(obj)


# -- encoding -------------------------------------------------------------------------

def encode(x: Any) -> Any:
    """JSON-ready form: rationals as strings, complex as [re, im], arrays as nested lists."""
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (bool, str, int)) or x is None:
        return x
    if isinstance(x, (float, np.floating)):
        return float(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.ndarray):
        return [encode(v) for v in x.tolist()]
    if isinstance(x, dict):
        return {str(k): encode(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [encode(v) for v in x]
    if hasattr(x, "to_json"):
        return encode(x.to_json())
    raise TypeError(f"cannot encode {type(x).__name__}")


def complex_array(obj) -> np.ndarray:
    """Inverse of :func:`encode` for arrays of [re, im] pairs."""
    a = np.asarray(obj, dtype=float)
    return a[..., 0] + 1j * a[..., 1]


def write_atomic(path: str | os.PathLike, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, obj) -> None:
    write_atomic(path, json.dumps(encode(obj), indent=2) + "\n")


# -- checkpoints ----------------------------------------------------------------------

def checkpoint_dict(sol: TodaSolution) -> dict:
    f, m = sol.form, sol.mono
    return {
        "format": "toda-hyper-checkpoint/1",
        "instance": None if sol.data is None else sol.data.to_json(),
        "params": sol.params.to_json(),
        "branch": sol.branch,
        "monodromy": {"z0": encode(complex(m.z0)), "radius": m.radius, "convention": m.convention,
                      "M0": encode(m.M0), "M1": encode(m.M1)},
        "form": {"P": encode(f.P), "lam": f.lam, "c": encode(complex(f.c)),
                 "nullity": f.nullity, "singular_values": encode(np.asarray(f.singular_values)),
                 "residual": f.residual},
    }


def save_checkpoint(path, sol: TodaSolution) -> None:
    write_json(path, checkpoint_dict(sol))


def solution_from_checkpoint(obj: dict) -> TodaSolution:
    try:
        params = HgParams.from_json(obj["params"])
        data = None if obj.get("instance") is None else parse_instance(obj["instance"]).data
        mo, fo = obj["monodromy"], obj["form"]
        mono = MonodromyData(complex(*mo["z0"]), complex_array(mo["M0"]), complex_array(mo["M1"]),
                             float(mo["radius"]), mo["convention"])
        form = InvariantForm(complex_array(fo["P"]), float(fo["lam"]), complex(*fo["c"]),
                             int(fo["nullity"]), np.asarray(fo["singular_values"], dtype=float),
                             float(fo["residual"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedInput(f"bad checkpoint: {exc}") from None
    sys = OdeSystem.from_hg(hg_ode(params))
    case = classify(data) if data is not None else None
    return TodaSolution(data, params, sys, mono, form, obj.get("branch", ""), case)


def load_checkpoint(path) -> TodaSolution:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise MalformedInput(f"{path}: {exc}") from None
    return solution_from_checkpoint(obj)


# -- grids ----------------------------------------------------------------------------

_GRID_PART = re.compile(r"^\s*(re|im)\s*=\s*([^:]+):([^:]+):(\d+)\s*$")


def parse_grid(spec: str) -> tuple[np.ndarray, np.ndarray]:
    """'re=a:b:N,im=c:d:M' -> (N real values, M imaginary values), endpoints included."""
    axes = {}
    for part in spec.replace("−", "-").split(","):
        m = _GRID_PART.match(part)
        if not m:
            raise MalformedInput(f"bad grid component {part!r}; expected re=a:b:N or im=c:d:M")
        lo, hi, count = float(m.group(2)), float(m.group(3)), int(m.group(4))
        if count < 1:
            raise MalformedInput("grid counts must be positive")
        axes[m.group(1)] = np.linspace(lo, hi, count)
    if set(axes) != {"re", "im"}:
        raise MalformedInput("grid needs both re= and im= components")
    return axes["re"], axes["im"]


def grid_rows(sol: TodaSolution, xs: np.ndarray, ys: np.ndarray,
              min_dist: float = 1e-6) -> np.ndarray:
    """Rows (x1, x2, U_1..U_{n-1}, e^{u_1}..e^{u_{n-1}}); NaN at the singular points."""
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    z = (X + 1j * Y).ravel()
    m = sol.n - 1
    out = np.full((len(z), 2 + 2 * m), np.nan)
    out[:, 0], out[:, 1] = z.real, z.imag
    ok = np.minimum(np.abs(z), np.abs(z - 1)) >= min_dist
    if ok.any():
        R = sol.minors(z[ok])
        full = np.concatenate([np.ones((R.shape[0], 1)), R[:, :-1], np.ones((R.shape[0], 1))], axis=1)
        out[ok, 2:2 + m] = -np.log(R[:, :-1])
        out[ok, 2 + m:] = full[:, :-2] * full[:, 2:] / full[:, 1:-1] ** 2
    return out


def write_grid_csv(path, sol: TodaSolution, spec: str) -> int:
    xs, ys = parse_grid(spec)
    rows = grid_rows(sol, xs, ys)
    m = sol.n - 1
    header = ["x1", "x2"] + [f"U_{i}" for i in range(1, m + 1)] + [f"exp_u_{i}" for i in range(1, m + 1)]
    import io as _io
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(["nan" if np.isnan(v) else repr(float(v)) for v in r])
    write_atomic(path, buf.getvalue())
    return len(rows)
