import math

import numpy as np
import pytest

from conftest import ELECTRON_Y0, beanie_fo_run, beanie_oc_run, electron_run
from lpvi import integrator as I
from lpvi import liegroup as lg
from lpvi import model as M
from lpvi import systems as S
from lpvi import verify as V


def test_fit_order_exact_power_law():
    h = np.array([0.1, 0.05, 0.025])
    order, resid = V.fit_order(h, 3.0 * h ** 2)
    assert order == pytest.approx(2.0, abs=1e-12) and resid <= 1e-12


def test_convergence_study_synthetic():
    """A fake integrator with error exactly C h on the reference grid."""
    ref = lambda t: np.sin(t)[:, None]

    def run(h):
        n = int(round(1 / h))
        t = h * np.arange(n + 1)
        pts = [np.array([np.sin(x) + 0.5 * h]) for x in t]
        return I.Trajectory(None, pts, [], [])

    rep = V.convergence_study(run, ref, [0.1, 0.05, 0.025], 1.0)
    assert rep.fitted_order == pytest.approx(1.0, abs=1e-9)
    assert rep.flag is None and rep.used.all()
    with pytest.raises(ValueError):
        V.convergence_study(run, ref, [0.1], 1.0)
    with pytest.raises(ValueError):
        V.convergence_study(run, ref, [0.1, 0.03], 1.0)


def test_convergence_study_flags_failed_run():
    ref = lambda t: np.zeros((len(t), 1))

    def run(h):
        traj = I.Trajectory(None, [np.zeros(1)] * 3, [], [])
        traj.failed = True
        return traj

    rep = V.convergence_study(run, ref, [0.1, 0.05], 1.0)
    assert rep.flag is not None and math.isnan(rep.fitted_order)


def test_monitors_electron():
    traj = electron_run(0.02, 50)
    rep = V.monitor_trajectory(traj.model, traj)
    assert rep.max_deviation["charge"] == 0.0
    assert rep.max_deviation["multiplier_drift"] <= 1e-9
    assert rep.max_deviation["constraint"] == 0.0
    assert "omega3" in rep.not_applicable
    assert np.all(np.diff(rep.running_max("multiplier_drift")) >= 0)


def test_monitors_beanie():
    traj = beanie_fo_run(0.02, 100)
    rep = V.monitor_trajectory(traj.model, traj)
    assert rep.max_deviation["omega3"] <= 1e-9
    assert rep.max_deviation["transport"] <= 1e-9
    assert "charge" in rep.not_applicable and "constraint" in rep.not_applicable
    assert V.conserved_quantities(traj.model) == ["omega3", "transport"]


def test_transport_detects_corruption():
    traj = beanie_fo_run(0.02, 20)
    g = traj.group_parts[10]
    traj.group_parts[10] = lg.GroupElement(g.tag, g.theta, g.x + 1e-4, g.y)
    assert np.max(V.transport_residuals(traj)) > 1e-6


def test_kkt_marching_and_oracle_electron():
    traj = electron_run(0.1, 6)
    assert V.marching_kkt_residual(traj) <= 1e-8
    res = V.kkt_oracle(traj.model, traj)
    assert res.converged
    assert np.max(V.interior_residuals(traj.model, res)) <= 1e-8


def test_kkt_detects_perturbed_trajectory():
    traj = electron_run(0.1, 6)
    traj.shape_points[4] = traj.shape_points[4] + 1e-4
    assert V.marching_kkt_residual(traj) > 1e-6


def test_kkt_problem_contract():
    traj = electron_run(0.1, 1)
    prob = V.KKTProblem.from_trajectory(traj)
    assert prob.N == 2 * traj.model.k
    with pytest.raises(lg.ContractError):
        V.KKTProblem(traj.model, prob.p[:-1], prob.g[:-1])


def test_regularity_sweep_and_duplicate():
    traj = beanie_oc_run(0.1, 5)
    rep = V.regularity_sweep(traj.model, traj)
    assert len(rep.cond) == 5 and rep.first_flagged is None
    dup = V.duplicate_constraint_model(traj.model)
    rep2 = V.regularity_sweep(dup, V.duplicate_multipliers(traj, dup))
    assert rep2.first_flagged == 1
    with pytest.raises(lg.ContractError):
        V.duplicate_constraint_model(S.build_beanie_model(S.BeanieParams(), 0.1))


@pytest.mark.parametrize("name", list(S.REGISTRY))
def test_derivative_check_passes(name):
    entry = S.REGISTRY[name]
    model, _ = entry.bootstrap(entry.make_params(entry.params), 0.05, entry.initial)
    worst = V.derivative_check(model, n_windows=10)
    assert V.derivative_failures(worst) == []
    if model.k == 2 and model.m == 3:
        assert {f"eps{a}:group[{z}]" for a in (1, 2, 3) for z in (4, 5)} <= set(worst)


def test_derivative_check_catches_corrupted_epsilon():
    """Flip the sign of one constraint's second group-slot derivative; the check must name it."""
    model = S.build_beanie_model(S.BeanieParams(), 0.05, "optimalControl")
    base = model.derivatives

    def corrupted(w):
        d = base(w)
        cg = d.chi_group.copy()
        cg[1, 1] *= -1
        return M.WindowDerivatives(d.L_shape, d.L_group, d.chi_shape, cg)

    worst = V.derivative_check(model.with_provider(corrupted), n_windows=5)
    assert V.derivative_failures(worst) == ["eps2:group[5]"]


@pytest.mark.parametrize("which", ["electron", "beanie-optimal-control"])
def test_kkt_root_matches_marching_unknownwise(which):
    """Multipliers are fixed only up to a null space; the oracle must return the member nearest the march."""
    traj = electron_run(0.1, 6) if which == "electron" else beanie_oc_run(0.1, 6)
    prob = V.KKTProblem.from_trajectory(traj)
    res = V.kkt_oracle(traj.model, traj)
    lam = np.array(traj.multipliers[:prob.n_windows]).reshape(res.multipliers.shape)
    dz = prob.difference(res.shape_points, res.group_elements, res.multipliers, prob.p, prob.g, lam)
    assert res.converged and np.max(np.abs(dz)) <= 1e-7


def test_convergence_order_independent_of_norm():
    ref = V.oracle_reference(S.electron_continuous_rhs(S.ElectronParams()), ELECTRON_Y0, 2e-4, lambda y: y[:3])
    run = lambda h: electron_run(h, int(round(1 / h)) - 2)
    orders = [V.convergence_study(run, ref, (0.04, 0.02, 0.01), 1.0, norm).fitted_order for norm in ("sup", "rms")]
    assert abs(orders[0] - orders[1]) <= 0.05
