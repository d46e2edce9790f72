from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from conftest import make
from oracles import NOT_INTERLACING, RUNNING
from toda_hyper.builder import (branch_pow, build_from_params, construct, default_path,
                                invariant_form, prepare, wronskian_constant)
from toda_hyper.errors import AmbiguousForm, NonconstantWronskian, NotInterlacing
from toda_hyper.hypergeo import make_params
from toda_hyper.io import checkpoint_dict, solution_from_checkpoint
from toda_hyper.ode import MonodromyData, OdeSystem
from toda_hyper.hypergeo import hg_ode
from toda_hyper.probes import default_grid, detour_paths, single_valued_check

SAMPLE = [0.3 + 0.4j, -0.7 + 0.2j, 1.8 - 0.6j, 0.5 - 2j, 4 + 3j, 0.05 + 0.01j, 0.98 - 0.02j]


def test_running_form(running_sol):
    f = running_sol.form
    assert f.nullity == 1
    assert f.residual <= 1e-10
    assert np.all(np.linalg.eigvalsh(f.P) > 0)
    assert abs(np.linalg.norm(f.P) - 1) < 1e-12


def test_liouville_form(liouville_sol):
    assert liouville_sol.form.nullity == 1
    assert liouville_sol.form.residual <= 1e-10


@pytest.mark.parametrize("fixture", ["running_sol", "liouville_sol", "case0_sol", "case1_sol"])
def test_top_minor_is_one(fixture, request):
    sol = request.getfixturevalue(fixture)
    rn = sol.R_n(np.array(SAMPLE))
    assert np.abs(rn - 1).max() <= 1e-8


def test_minors_positive(running_sol):
    R = running_sol.minors(np.array(default_grid()))
    assert np.all(R > 0)


def test_qr_minors_match_determinants(running_sol):
    # explicit determinants lose digits near 1, so stay away from it here
    for z in SAMPLE[:5]:
        G = running_sol.gram(z)
        dets = [np.linalg.det(G[:m, :m]).real for m in range(1, 4)]
        assert np.allclose(running_sol.minors(z), dets, rtol=1e-8)


def test_single_valued_across_loop(running_sol):
    up, down = detour_paths()
    assert single_valued_check(running_sol, -0.5, up, down) <= 1e-8
    up1, down1 = detour_paths(z=1.7, z0=0.5)
    assert single_valued_check(running_sol, 1.7, up1, down1) <= 1e-8


def test_atlas_agrees_with_explicit_path(running_sol):
    from toda_hyper.ode import fundamental_basis, transport
    for z in SAMPLE[:5]:
        frame = transport(running_sol.sys, fundamental_basis(running_sol.sys), default_path(z))
        assert np.abs(running_sol.U_from_frame(z, frame) - running_sol.evaluate_U(z)).max() < 1e-8


def test_u_is_real_and_conjugation_symmetric(running_sol):
    # all parameters are real, so U(conj z) = U(z)
    for z in SAMPLE:
        assert np.allclose(running_sol.evaluate_U(z), running_sol.evaluate_U(np.conj(z)), atol=1e-8)


def test_identity_monodromy_is_ambiguous():
    eye = np.eye(3, dtype=complex)
    with pytest.raises(AmbiguousForm):
        invariant_form(MonodromyData(0.5, eye, eye))


def test_rank_one():
    # sigma = (1-z)^(-1/3); the shift tau = -1/3 makes |nu| constant
    sol = build_from_params(make_params(["1/3"], ["1"], tau="-1/3"))
    assert sol.form.nullity == 1
    vals = sol.minors(np.array([0.3 + 0.2j, -2 + 1j, 3 - 1j]))[:, 0]
    assert np.allclose(vals, 1, atol=1e-9)


def test_wrong_shift_has_nonconstant_wronskian(running_data):
    case, params = prepare(running_data)
    sys = OdeSystem.from_hg(hg_ode(params))
    wronskian_constant(sys, float(params.tau))
    with pytest.raises(NonconstantWronskian):
        wronskian_constant(sys, 0.0)


def test_not_interlacing_rejected():
    with pytest.raises(NotInterlacing):
        construct(make(NOT_INTERLACING))


def test_no_case_needs_tau():
    data = make(dict(RUNNING, gamma1=("1/5", "3/10")))
    with pytest.raises(ValueError):
        construct(data)


def test_checkpoint_round_trip(running_sol):
    import json
    back = solution_from_checkpoint(json.loads(json.dumps(checkpoint_dict(running_sol))))
    zs = np.array(SAMPLE)
    assert np.abs(back.evaluate_U(zs) - running_sol.evaluate_U(zs)).max() <= 1e-12


def test_concurrent_evaluation_matches_serial(running_data):
    serial = construct(running_data)
    fresh = construct(running_data)
    pts = default_grid(24, seed=3)
    expected = [serial.evaluate_U(z) for z in pts]
    with ThreadPoolExecutor(6) as ex:
        got = list(ex.map(fresh.evaluate_U, pts))
    for a, b in zip(expected, got):
        assert np.array_equal(a, b)


def test_column_bump_derivative_matches_fd(running_sol):
    z, h = 0.3 + 0.4j, 1e-5
    bump = running_sol.column_bump_derivative(z)
    # d/dz = (d/dx - i d/dy) / 2
    dx = (running_sol.minors(z + h) - running_sol.minors(z - h)) / (2 * h)
    dy = (running_sol.minors(z + 1j * h) - running_sol.minors(z - 1j * h)) / (2 * h)
    assert np.allclose(bump, (dx - 1j * dy) / 2, rtol=1e-6, atol=1e-8)


def test_U_z_consistent_with_series(running_sol):
    for z in SAMPLE[:4]:
        series = running_sol.U_derivatives(z, 1)[:, 1]
        assert np.allclose(running_sol.U_z(z), series, rtol=1e-9, atol=1e-10)


def test_ddbar_equals_fd_laplacian(running_sol):
    z, h = -0.3 + 0.6j, 1e-3
    U = lambda w: running_sol.evaluate_U(w)
    lap = (U(z + h) + U(z - h) + U(z + 1j * h) + U(z - 1j * h) - 4 * U(z)) / h ** 2
    assert np.allclose(running_sol.ddbar_U(z), lap / 4, rtol=1e-5, atol=1e-6)


def test_branch_power():
    assert abs(branch_pow(-1 - 1e-300j, 0.5) - 1j) < 1e-12
    assert abs(branch_pow(1 - 1e-14j, 0.5) + 1) < 1e-12
    assert abs(branch_pow(2, 0.5) - 2 ** 0.5) < 1e-15


def test_default_path_avoids_cut():
    p = default_path(1.5)
    assert p.clearance((0, 1)) > 0.2
    assert all(s.start.imag >= 0 for s in p.segments)
