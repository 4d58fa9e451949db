import math

import numpy as np
import pytest

from lpvi import liegroup as lg
from lpvi import model as M
from lpvi import systems as S
from lpvi.connection import ParameterError
from lpvi.liegroup import SE2, GroupElement


def test_rk4_exponential():
    out = S.rk4_integrate(lambda y: y, [1.0], 1e-3, 1000)
    assert abs(out[-1, 0] - math.e) <= 1e-11
    assert out.shape == (1001, 1)


def test_rk4_non_finite():
    with pytest.raises(S.OracleError), np.errstate(over="ignore", invalid="ignore"):
        S.rk4_integrate(lambda y: y ** 2, [1.0], 0.5, 20)
    with pytest.raises(ValueError):
        S.rk4_integrate(lambda y: y, [1.0], 0.0, 3)


def test_sample_oracle_grid():
    out = S.sample_oracle(lambda y: -y, [1.0], 0.1, 5)
    assert out.shape == (5, 1)
    assert np.allclose(out[:, 0], np.exp(-0.1 * np.arange(5)), atol=1e-13)


# electron


def test_electron_rhs_example():
    rhs = S.electron_continuous_rhs(S.ElectronParams())
    y = np.zeros(12)
    y[6] = 1.0  # x1'' = 1
    assert rhs(y)[9] == pytest.approx(-3.0)
    assert np.array_equal(rhs(np.zeros(12)), np.zeros(12))


def test_electron_general_rhs_matches_aligned_form(rng):
    params = S.ElectronParams(mass=1.7, charge=0.8, light_speed=1.3)
    fast = S.electron_continuous_rhs(params)
    general = S._electron_general_rhs(params)
    for _ in range(20):
        y = rng.normal(size=12)
        assert np.allclose(fast(y), general(y), atol=1e-12)


def test_electron_x3_decouples(rng):
    rhs = S.electron_continuous_rhs(S.ElectronParams())
    y = rng.normal(size=12)
    y2 = y.copy()
    for idx in (0, 1, 3, 4, 6, 7, 9, 10):
        y2[idx] = rng.normal()
    assert rhs(y)[11] == rhs(y2)[11]


def test_electron_params_validation():
    with pytest.raises(ParameterError):
        S.ElectronParams(mass=0.0)
    with pytest.raises(ParameterError):
        S.ElectronParams(charge=4.0)
    with pytest.raises(ParameterError):
        S.ElectronParams(potential="cubic")
    with pytest.raises(ParameterError):
        S.build_electron_model(S.ElectronParams(), 0.0)


def test_electron_lagrangian_example():
    model = S.build_electron_model(S.ElectronParams(), 0.1)
    g = GroupElement(lg.SO2, 1.0)
    w = M.ReducedWindow(np.zeros((3, 3)), (g, g))
    assert model.lagrangian(w) == 0.0
    assert np.array_equal(M.eval_chi(model, w), [0.0])
    shape = np.zeros((3, 3))
    shape[0, 0] = 1.0  # x0 = e1: E = (m/h^2 + 2) e1 + (q/h) e1 x B
    w = M.ReducedWindow(shape, (g, g))
    E = np.array([100.0 + 2.0, -10.0, 0.0])
    assert model.lagrangian(w) == pytest.approx(0.5 * 0.1 * E @ E)


def test_electron_derivatives_match_fd(rng):
    model = S.build_electron_model(S.ElectronParams(field=(0.2, -0.1, 1.0)), 0.05)
    for _ in range(5):
        w = model.sample_window(rng)
        a = model.window_derivatives(w)
        f = M.fd_window_derivatives(model, w)
        assert np.allclose(a.L_shape, f.L_shape, rtol=1e-6, atol=1e-6 * np.max(np.abs(a.L_shape)))
        assert np.allclose(a.chi_group, f.chi_group, atol=1e-8)


# beanie


def test_potential_derivatives_consistent():
    pot = S.Potential("cosine", 1.5)
    grid = np.linspace(-2, 2, 41)
    tab = S.Potential("tabulated", table=tuple(zip(grid, 1.5 * (1 - np.cos(grid)))))
    t = 1e-5
    # a cubic spline has a piecewise-constant third derivative, so stop at the second there
    for V, orders in ((pot, 3), (tab, 2)):
        for psi in (-0.7, 0.1, 0.9):
            for order in range(orders):
                fd = (V.derivative(psi + t, order) - V.derivative(psi - t, order)) / (2 * t)
                assert abs(fd - V.derivative(psi, order + 1)) <= 1e-6 * (1 + abs(fd))
    assert abs(tab.dV(0.4) - pot.dV(0.4)) <= 1e-4
    assert S.Potential("zero").d3V(1.0) == 0.0


def test_potential_validation():
    with pytest.raises(ParameterError):
        S.Potential("quartic")
    with pytest.raises(ParameterError):
        S.Potential("tabulated", table=((0, 0), (1, 1)))
    with pytest.raises(ParameterError):
        S.Potential("tabulated", table=((0, 0), (0, 1), (1, 1), (2, 2)))


def test_load_potential_table(tmp_path):
    p = tmp_path / "v.csv"
    p.write_text("psi,V\n# comment\n0,0\n0.5,0.1\n1,0.4\n1.5,0.9\n")
    assert S.load_potential_table(str(p)) == ((0.0, 0.0), (0.5, 0.1), (1.0, 0.4), (1.5, 0.9))
    p.write_text("0,0\n1,oops\n")
    with pytest.raises(ParameterError):
        S.load_potential_table(str(p))


def test_beanie_params():
    p = S.BeanieParams(inertia1=1.0, inertia2=3.0)
    assert p.kappa == 0.75 and p.reduced_inertia == 0.75
    with pytest.raises(ParameterError):
        S.BeanieParams(inertia1=0.0)
    with pytest.raises(ParameterError):
        S.build_beanie_model(p, 0.1, "secondOrder")
    with pytest.raises(ParameterError):
        S.beanie_continuous_rhs(p, "hamiltonian")


def test_omega_conversions(rng):
    for _ in range(20):
        om = rng.normal(size=3)
        g = S.group_from_omega(0.1, om)
        assert np.allclose(S.omega_from_group(0.1, g), om, atol=1e-12)
    # the left e3 direction turns g~ by the negative standard angle
    g = S.group_from_omega(0.1, [0.3, -0.2, 0.5])
    t = 1e-6
    f = lambda q: S.omega_from_group(0.1, q)[2]
    fd = (f(lg.compose(g, lg.exp_map(SE2, [0, 0, t]))) - f(lg.compose(g, lg.exp_map(SE2, [0, 0, -t])))) / (2 * t)
    assert S._left_from_omega_partials(g, [0, 0, 1.0], 0.1)[2] == pytest.approx(fd)


def test_beanie_lagrangian_example():
    model = S.build_beanie_model(S.BeanieParams(), 0.1, "firstOrder")
    w = M.ReducedWindow(np.zeros((2, 1)), (GroupElement(SE2, 0.0, 0.1, 0.0),))
    assert model.lagrangian(w) == pytest.approx(0.05, abs=1e-16)


@pytest.mark.parametrize("variant", ["firstOrder", "optimalControl"])
def test_beanie_derivatives_match_fd(variant, rng):
    model = S.build_beanie_model(S.BeanieParams(), 0.05, variant)
    for _ in range(5):
        w = model.sample_window(rng)
        a, f = model.window_derivatives(w), M.fd_window_derivatives(model, w)
        for x, y in ((a.L_shape, f.L_shape), (a.L_group, f.L_group), (a.chi_shape, f.chi_shape), (a.chi_group, f.chi_group)):
            assert np.allclose(x, y, rtol=1e-5, atol=1e-6)


def test_constrained_omega_step_solves_constraints(rng):
    p = S.BeanieParams()
    model = S.build_beanie_model(p, 0.1, "optimalControl")
    for _ in range(10):
        psi = rng.normal(size=3)
        o0 = rng.normal(size=3)
        o1 = S.constrained_omega_step(p, 0.1, o0, psi[1] - psi[0])
        g = (S.group_from_omega(0.1, o0), S.group_from_omega(0.1, o1))
        assert np.max(np.abs(M.eval_chi(model, M.ReducedWindow(psi.reshape(-1, 1), g)))) <= 1e-12


def _reduced_run(p, y0, T=2.0, h=1e-3):
    return S.rk4_integrate(S.beanie_continuous_rhs(p, "reduced"), y0, h, int(round(T / h)))


def test_reduced_oracle_invariants():
    p = S.BeanieParams()
    out = _reduced_run(p, [0.3, 0.2, 1.0, -0.4, 0.5])
    assert np.all(out[:, 4] == 0.5)
    rot = out[:, 2] ** 2 + out[:, 3] ** 2
    assert np.max(np.abs(rot - rot[0])) <= 1e-10


def test_reduced_oracle_free_shape_is_linear():
    p = S.BeanieParams(potential=S.Potential("zero"))
    out = _reduced_run(p, [0.3, 0.2, 1.0, 0.0, 0.5], T=1.0)
    t = np.arange(out.shape[0]) * 1e-3
    assert np.max(np.abs(out[:, 0] - (0.3 + 0.2 * t))) <= 1e-12


def test_reduced_oracle_time_reversal():
    p = S.BeanieParams()
    y0 = np.array([0.3, 0.2, 1.0, -0.4, 0.5])
    flip = np.array([1, -1, -1, -1, -1])
    fwd = _reduced_run(p, y0, T=1.0)[-1]
    back = _reduced_run(p, fwd * flip, T=1.0)[-1] * flip
    assert np.max(np.abs(back - y0)) <= 1e-10


def test_registry_entries():
    assert set(S.REGISTRY) == {"electron", "beanie-first-order", "beanie-optimal-control"}
    for entry in S.REGISTRY.values():
        params = entry.make_params(entry.params)
        model, state = entry.bootstrap(params, 0.05, entry.initial)
        assert state.k == model.k
        rhs, y0, extract = entry.oracle(params, entry.initial)
        assert np.all(np.isfinite(rhs(y0)))
