import cmath
import math

import numpy as np
import pytest

from conftest import make
from oracles import RUNNING, RUNNING_ROOTS
from toda_hyper.builder import exponent_roots
from toda_hyper.cases import classify
from toda_hyper.errors import ClearanceViolation, StepUnderflow
from toda_hyper.hypergeo import hg_ode, hg_params, make_params
from toda_hyper.ode import (OdeSystem, Path, TransportStats, fundamental_basis, monodromy,
                            transport)


@pytest.fixture(scope="module")
def running_sys():
    data = make(RUNNING)
    return OdeSystem.from_hg(hg_ode(hg_params(data, classify(data))))


def exp_sys():
    return OdeSystem.from_polynomials([[1], [-1]], singular=())


def test_fundamental_basis_is_identity(running_sys):
    assert np.array_equal(fundamental_basis(running_sys), np.eye(3))
    with pytest.raises(ValueError):
        fundamental_basis(running_sys, 0.0)


def test_free_particle_basis():
    sys = OdeSystem.from_polynomials([[1], [0], [0]], singular=())
    Y = transport(sys, fundamental_basis(sys), Path.line(0.5, 2.0 + 1j))
    # sigma_1 = 1, sigma_2 = z - 1/2
    assert np.allclose(Y, [[1, 1.5 + 1j], [0, 1]], atol=1e-13)


def test_exponential_growth():
    Y = transport(exp_sys(), np.eye(1), Path.line(0.5, 1.5))
    assert abs(Y[0, 0] - math.e) < 1e-12


def test_scalar_monodromy():
    half = OdeSystem.from_polynomials([[0, 1], [-0.5]], singular=(0.0,))
    M = transport(half, np.eye(1), Path.loop(0.0, 0.5))
    assert abs(M[0, 0] + 1) < 1e-11
    lin = OdeSystem.from_polynomials([[0, 1], [-1]], singular=(0.0,))
    assert abs(transport(lin, np.eye(1), Path.loop(0.0, 0.5))[0, 0] - 1) < 1e-11


def test_reversal_and_composition(running_sys):
    p = Path.polyline([0.5, 0.5 + 1j, -1 + 0.5j])
    q = Path.line(-1 + 0.5j, -2 - 1j)
    base = fundamental_basis(running_sys)
    there = transport(running_sys, base, p)
    back = transport(running_sys, there, p.reversed())
    assert np.abs(back - base).max() < 1e-10
    whole = transport(running_sys, base, p + q)
    parts = transport(running_sys, there, q)
    assert np.abs(whole - parts).max() < 1e-10 * np.abs(whole).max()


def test_clearance_violation(running_sys):
    with pytest.raises(ClearanceViolation):
        transport(running_sys, np.eye(3), Path.line(-0.5, 0.5))


def test_step_underflow(running_sys):
    with pytest.raises(StepUnderflow):
        transport(running_sys, np.eye(3), Path.line(0.5, 0.5 + 1j), rtol=1e-30, atol=1e-300,
                  h_min=1e-3)


def test_running_monodromy_spectra(running_sys):
    mono = monodromy(running_sys)
    assert mono.eigen_mismatch(RUNNING_ROOTS[0], RUNNING_ROOTS[1]) < 1e-8
    other = monodromy(running_sys, radius=0.3)
    assert np.abs(other.M0 - mono.M0).max() < 1e-8
    assert np.abs(other.M1 - mono.M1).max() < 1e-8
    prod = mono.M0 @ mono.M1 @ mono.Minf
    assert np.abs(prod - np.eye(3)).max() < 1e-9


def test_loop_at_infinity(running_sys):
    mono = monodromy(running_sys)
    down = 0.5 - 2j
    big = Path.line(0.5, down) + Path.loop(0.5, 2.0, base=down) + Path.line(down, 0.5)
    around = transport(running_sys, np.eye(3), big)
    assert np.abs(np.linalg.inv(around) - mono.Minf).max() < 1e-9 * np.abs(mono.Minf).max()


def test_first_order_hypergeometric_monodromy():
    b = 3 / 4
    sys = OdeSystem.from_hg(hg_ode(make_params(["1/3"], ["3/4"])))
    mono = monodromy(sys)
    assert abs(mono.M0[0, 0] - cmath.exp(2j * math.pi * (1 - b))) < 1e-10


def test_local_series_agrees_with_transport(running_sys):
    base = fundamental_basis(running_sys)
    series = running_sys.local_series(0.5, base, order=56)
    for z in (0.5 + 0.3j, 0.3 - 0.2j, 0.8):
        Y = transport(running_sys, base, Path.line(0.5, z))
        assert np.abs(series.frame(z, 3) - Y).max() < 1e-10 * np.abs(Y).max()
    assert series.tail_ratio() < 1e-2


def test_series_derivative_orders():
    # y'' = 0 has y = a + b z; coefficient scaling must give exact derivatives
    sys = OdeSystem.from_polynomials([[1], [0], [0]], singular=())
    s = sys.local_series(0.0, np.array([[1.0, 0.0], [0.0, 1.0]]), order=6, rho=2.0)
    d = s.derivatives(0.75, 3)
    assert np.allclose(d[:, 1], [0.75, 1, 0, 0])
    # exponential: every derivative equals the function
    e = exp_sys().local_series(0.0, np.eye(1), order=40, rho=1.0)
    assert np.allclose(e.derivatives(0.3, 4)[:, 0], math.exp(0.3), atol=1e-14)


def test_transport_stats(running_sys):
    st = TransportStats()
    transport(running_sys, np.eye(3), Path.loop(0.0, 0.5), stats=st)
    assert st.steps > 0


def test_exponent_roots_helper(running_sys):
    data = make(RUNNING)
    roots = exponent_roots(hg_params(data, classify(data)))
    assert roots[0] == RUNNING_ROOTS[0]
