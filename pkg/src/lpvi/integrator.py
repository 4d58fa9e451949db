"""Residual assembly and Newton stepping for the discrete reduced equations.

Equation index n couples the windows a_{n-k}, ..., a_n.  With
G_i the left-trivialized derivative of the augmented action with respect to
the group part g~_i (summed over every window containing it) the equations are

    shape:     sum_s D_s L~(a_{n-s+1}) + <A_n^{-1} D_1 A_n, G_n> + <A_{n-1}^{-1} D_2 A_{n-1}, G_{n-1}> = 0
    momentum:  G_n^R - Ad*_{W_{n-1}} G_{n-1}^R = 0
    constraint: chi(a_n) = 0

where ``^R`` denotes right trivialization at the corresponding g~ and
W_{n-1} = g~_{n-1} A_{n-1}^{-1}.  They are the stationarity conditions of the
discrete action sum under fixed-endpoint variations (see docs/derivation.md).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import liegroup as lg
from .connection import hat_l_contraction
from .liegroup import GroupElement
from .model import (
    HOSystemModel,
    ReducedWindow,
    WindowDerivatives,
    condition_estimate,
    eval_chi,
    perturb_window,
    regularity_matrix,
    window_equation_terms,
)

log = logging.getLogger(__name__)

SINGULAR_COND = 1e16
HISTORY_CHI_TOL = 1e-8


class StepFailure(RuntimeError):
    """Newton did not converge within the iteration budget."""

    def __init__(self, message, report=None, step_index=None):
        super().__init__(message)
        self.report = report
        self.step_index = step_index


class RegularityFailure(StepFailure):
    """The step Jacobian is numerically singular."""


@dataclass(frozen=True)
class NewtonSettings:
    tolerance: float = 1e-10
    max_iterations: int = 50
    damping: float = 1.0
    min_damping: float = 1.0 / 64.0
    jacobian: str = "assembled"  # or "finite-difference"
    cond_warning: float = 1e12

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")
        if self.jacobian not in ("assembled", "finite-difference"):
            raise ValueError(f"unknown jacobian mode {self.jacobian!r}")


@dataclass
class StepReport:
    step_index: int
    converged: bool
    iterations: int
    residual: float
    raw_residual: float
    cond_estimate: float
    momentum: np.ndarray
    constraint_residuals: np.ndarray
    residual_history: list = field(default_factory=list)


@dataclass(frozen=True)
class StepState:
    """History windows a_{n-k}..a_{n-1}, their multipliers, and the next index n."""

    windows: tuple
    multipliers: tuple
    n: int
    prior_group: Optional[GroupElement] = None

    def __post_init__(self):
        object.__setattr__(self, "windows", tuple(self.windows))
        object.__setattr__(self, "multipliers", tuple(np.asarray(l, float) for l in self.multipliers))
        k = len(self.windows)
        if k == 0 or len(self.multipliers) != k:
            raise lg.ContractError("a step state needs k windows and k multiplier vectors")
        for w in self.windows:
            if w.k != k:
                raise lg.ContractError(f"history of {k} windows needs order-{k} windows")
        for a, b in zip(self.windows[:-1], self.windows[1:]):
            if not np.array_equal(a.shape[1:], b.shape[:-1]):
                raise lg.ContractError("inconsistent history: overlapping shape points differ")
            if any(x != y for x, y in zip(a.group[1:], b.group[:-1])):
                raise lg.ContractError("inconsistent history: overlapping group parts differ")

    @property
    def k(self) -> int:
        return len(self.windows)


def initial_state(model: HOSystemModel, shape_points, group_parts, multipliers, prior_group=None) -> StepState:
    """History for the first step from 2k shape points, 2k-1 group parts and k multiplier vectors."""
    k = model.k
    shape_points = np.asarray(shape_points, float).reshape(2 * k if model.r == 0 else -1, model.r)
    group_parts = list(group_parts)
    multipliers = [np.asarray(l, float).reshape(model.m) for l in multipliers]
    if len(shape_points) != 2 * k or len(group_parts) != 2 * k - 1 or len(multipliers) != k:
        raise lg.ContractError(
            f"order-{k} bootstrap needs {2 * k} shape points, {2 * k - 1} group parts and {k} multiplier vectors"
        )
    windows = tuple(ReducedWindow(shape_points[j:j + k + 1], group_parts[j:j + k]) for j in range(k))
    for j, w in enumerate(windows):
        model.check_window(w)
        # later windows keep chi = 0 by induction, so only the bootstrap is checked
        if model.m and not np.max(np.abs(eval_chi(model, w))) <= HISTORY_CHI_TOL:
            log.warning("bootstrap window %d violates the constraints (|chi| > %g)", j, HISTORY_CHI_TOL)
    return StepState(windows, tuple(multipliers), n=k, prior_group=prior_group)


# ---------------------------------------------------------------------------
# general-k residual


class _History:
    """Terms of the step equations that depend only on the history windows."""

    def __init__(self, model: HOSystemModel, hist: tuple, lams: tuple, ders: Optional[list] = None):
        k = model.k
        self.model = model
        if ders is None:
            ders = [model.window_derivatives(w) for w in hist]
        comb = [d.combined(l) for d, l in zip(ders, lams)]
        r, d = model.r, model.d
        # shape slots s = 2..k+1 come from window a_{n-s+1} = hist[k-s+1]
        shape_terms = [comb[k - s + 1][0][s - 1] for s in range(2, k + 2)]
        self.shape_round = sum((_round_bound(ders[k - s + 1], r)[s - 1] for s in range(2, k + 2)), np.zeros(r))
        # G_n history part: slot k+2+j of a_{n-j}, j = 1..k-1
        gn_aug = np.zeros(d)
        gn_L = np.zeros(d)
        for j in range(1, k):
            gn_aug = gn_aug + comb[k - j][1][j]
            gn_L = gn_L + ders[k - j].L_group[j]
        # G_{n-1}: slot k+2+j of a_{n-1-j}, j = 0..k-1
        gp_aug = np.zeros(d)
        gp_L = np.zeros(d)
        for j in range(k):
            gp_aug = gp_aug + comb[k - 1 - j][1][j]
            gp_L = gp_L + ders[k - 1 - j].L_group[j]
        last = hist[-1]
        p_prev, p_n = last.shape[0], last.shape[1]
        g_prev = last.group[0]
        conn = model.connection
        A_prev = conn.eval(p_prev, p_n)
        W_prev = lg.compose(g_prev, lg.inverse(A_prev))
        if not conn.trivial and r > 0:
            shape_terms.append(hat_l_contraction(conn, 2, W_prev, p_prev, p_n, gp_aug))
            if k >= 2:
                p_next = last.shape[2]
                A_n = conn.eval(p_n, p_next)
                g_n = last.group[1]
                W_n = lg.compose(g_n, lg.inverse(A_n))
                shape_terms.append(hat_l_contraction(conn, 1, W_n, p_n, p_next, gn_aug))
        self.shape_terms = shape_terms
        self.shape_const = np.sum(shape_terms, axis=0) if shape_terms else np.zeros(r)
        self.shape_scale = np.sum(np.abs(shape_terms), axis=0) if shape_terms else np.zeros(r)
        self.W_prev = W_prev
        gp_R = lg.left_to_right(g_prev, gp_aug)
        transported = lg.coadjoint_action(W_prev, gp_R)
        if k >= 2:
            g_n = last.group[1]
            gn_R_hist = lg.left_to_right(g_n, gn_aug)
            gn_L_R_hist = lg.left_to_right(g_n, gn_L)
        else:
            gn_R_hist = np.zeros(d)
            gn_L_R_hist = np.zeros(d)
        self.mom_const = gn_R_hist - transported
        self.mom_scale = np.abs(gn_R_hist) + np.abs(transported)
        self.gn_L_right_hist = gn_L_R_hist
        self.M_prev = lg.left_to_right(g_prev, gp_L)

    def residual(self, w: ReducedWindow, lam, der: Optional[WindowDerivatives] = None):
        model = self.model
        if der is None:
            der = model.window_derivatives(w)
        shape_t, mom_t, chi = window_equation_terms(model, w, lam, der)
        res = np.concatenate((self.shape_const + shape_t, self.mom_const + mom_t, chi))
        scale = np.concatenate((self.shape_scale + np.abs(shape_t), self.mom_scale + np.abs(mom_t), np.zeros(model.m)))
        noise = np.zeros_like(res)
        noise[:model.r] = self.shape_round + _round_bound(der, model.r)[0]
        return res, scale, der, noise


def _round_bound(der: WindowDerivatives, r: int) -> np.ndarray:
    if der.L_shape_round is None:
        return np.zeros((der.L_shape.shape[0], r))
    return np.asarray(der.L_shape_round, float)


def normalized_norm(res: np.ndarray, scale: np.ndarray, noise: Optional[np.ndarray] = None) -> float:
    """Sup of |res| relative to max(1, scale), counting only the part above the rounding bound ``noise``."""
    if res.size == 0:
        return 0.0
    excess = np.abs(res) if noise is None else np.maximum(np.abs(res) - noise, 0.0)
    return float(np.max(excess / np.maximum(1.0, scale)))


def residual_order_k(model: HOSystemModel, windows, multipliers) -> np.ndarray:
    """Stacked (shape, momentum, constraint) residual at equation index n.

    ``windows`` are a_{n-k}..a_n and ``multipliers`` lambda^{n-k}..lambda^n.
    """
    k = model.k
    windows = list(windows)
    multipliers = [np.asarray(l, float).reshape(model.m) for l in multipliers]
    if len(windows) != k + 1 or len(multipliers) != k + 1:
        raise lg.ContractError(f"order-{k} residual needs {k + 1} windows and multiplier vectors")
    StepState(tuple(windows[:-1]), tuple(multipliers[:-1]), n=k)  # validates overlap
    cand = windows[-1]
    if not (np.array_equal(windows[-2].shape[1:], cand.shape[:-1]) and all(
            a == b for a, b in zip(windows[-2].group[1:], cand.group[:-1]))):
        raise lg.ContractError("inconsistent history: candidate window does not overlap the last history window")
    hist = _History(model, tuple(windows[:-1]), tuple(multipliers[:-1]))
    res, _, _, _ = hist.residual(cand, multipliers[-1])
    return res


def residual_scaled(model: HOSystemModel, windows, multipliers) -> float:
    k = model.k
    hist = _History(model, tuple(windows[:k]), tuple(np.asarray(l, float).reshape(model.m) for l in multipliers[:k]))
    res, scale, _, noise = hist.residual(windows[k], multipliers[k])
    return normalized_norm(res, scale, noise)


# ---------------------------------------------------------------------------
# hand-coded first- and second-order assemblies


def _right(w: ReducedWindow, j: int, left) -> np.ndarray:
    return lg.left_to_right(w.group[j], left)


def residual_first_order(model: HOSystemModel, a_prev: ReducedWindow, a_n: ReducedWindow, lam_prev, lam_n) -> np.ndarray:
    """First-order (k=1) residual written term by term."""
    if model.k != 1:
        raise lg.ContractError("residual_first_order needs an order-1 model")
    conn = model.connection
    lam_prev = np.asarray(lam_prev, float).reshape(model.m)
    lam_n = np.asarray(lam_n, float).reshape(model.m)
    Dn = model.window_derivatives(a_n)
    Dp = model.window_derivatives(a_prev)
    p_prev, p_n, p_next = a_prev.shape[0], a_n.shape[0], a_n.shape[1]
    A_n = conn.eval(p_n, p_next)
    A_prev = conn.eval(p_prev, p_n)
    W_n = lg.compose(a_n.group[0], lg.inverse(A_n))
    W_prev = lg.compose(a_prev.group[0], lg.inverse(A_prev))

    def L1(cov):
        return hat_l_contraction(conn, 1, W_n, p_n, p_next, cov)

    def L2(cov):
        return hat_l_contraction(conn, 2, W_prev, p_prev, p_n, cov)

    shape = Dn.L_shape[0] + Dp.L_shape[1] + L1(Dn.L_group[0]) + L2(Dp.L_group[0])
    for a in range(model.m):
        shape = shape + lam_n[a] * (Dn.chi_shape[a, 0] + L1(Dn.chi_group[a, 0]))
        shape = shape + lam_prev[a] * (Dp.chi_shape[a, 1] + L2(Dp.chi_group[a, 0]))
    mu_n = _right(a_n, 0, Dn.L_group[0])
    mu_prev = _right(a_prev, 0, Dp.L_group[0])
    mom = mu_n - lg.coadjoint_action(W_prev, mu_prev)
    for a in range(model.m):
        eps_n = _right(a_n, 0, Dn.chi_group[a, 0])
        eps_prev = _right(a_prev, 0, Dp.chi_group[a, 0])
        mom = mom + lam_n[a] * eps_n - lam_prev[a] * lg.coadjoint_action(W_prev, eps_prev)
    return np.concatenate((shape, mom, eval_chi(model, a_n)))


def epsilon_covectors(model: HOSystemModel, a_nm2: ReducedWindow, a_nm1: ReducedWindow, a_n: ReducedWindow) -> dict:
    """Right-trivialized constraint covectors of the second-order momentum equation.

    Keys are (alpha, label) with alpha 1-based and label one of
    "n,4", "n,5", "n-1,4", "n-1,5"; each value is a dim-g array.
    """
    if model.k != 2:
        raise lg.ContractError("epsilon covectors are defined for order-2 models")
    D0, D1, D2 = (model.window_derivatives(w) for w in (a_nm2, a_nm1, a_n))
    out = {}
    for a in range(model.m):
        out[(a + 1, "n,4")] = _right(a_n, 0, D2.chi_group[a, 0])
        out[(a + 1, "n,5")] = _right(a_nm1, 1, D1.chi_group[a, 1])
        out[(a + 1, "n-1,4")] = _right(a_nm1, 0, D1.chi_group[a, 0])
        out[(a + 1, "n-1,5")] = _right(a_nm2, 1, D0.chi_group[a, 1])
    return out


def residual_second_order(model: HOSystemModel, a_nm2, a_nm1, a_n, lam_nm2, lam_nm1, lam_n) -> np.ndarray:
    """Second-order (k=2) residual written term by term (momentum form with M_n and eps)."""
    if model.k != 2:
        raise lg.ContractError("residual_second_order needs an order-2 model")
    conn = model.connection
    m = model.m
    l0, l1, l2 = (np.asarray(l, float).reshape(m) for l in (lam_nm2, lam_nm1, lam_n))
    D0, D1, D2 = (model.window_derivatives(w) for w in (a_nm2, a_nm1, a_n))
    p_prev, p_n, p_next = a_nm1.shape[0], a_n.shape[0], a_n.shape[1]
    A_n = conn.eval(p_n, p_next)
    A_prev = conn.eval(p_prev, p_n)
    g_n, g_prev = a_n.group[0], a_nm1.group[0]
    W_n = lg.compose(g_n, lg.inverse(A_n))
    W_prev = lg.compose(g_prev, lg.inverse(A_prev))

    def L1(cov):
        return hat_l_contraction(conn, 1, W_n, p_n, p_next, cov)

    def L2(cov):
        return hat_l_contraction(conn, 2, W_prev, p_prev, p_n, cov)

    shape = (D2.L_shape[0] + D1.L_shape[1] + D0.L_shape[2]
             + L1(D2.L_group[0] + D1.L_group[1]) + L2(D1.L_group[0] + D0.L_group[1]))
    for a in range(m):
        shape = shape + l2[a] * D2.chi_shape[a, 0] + l0[a] * D0.chi_shape[a, 2]
        shape = shape + L1(l2[a] * D2.chi_group[a, 0] + l1[a] * D1.chi_group[a, 1])
        shape = shape + L2(l1[a] * D1.chi_group[a, 0] + l0[a] * D0.chi_group[a, 1])
        shape = shape + l1[a] * D1.chi_shape[a, 1]
    M_n = lg.left_to_right(g_n, D2.L_group[0] + D1.L_group[1])
    M_prev = lg.left_to_right(g_prev, D1.L_group[0] + D0.L_group[1])
    eps = epsilon_covectors(model, a_nm2, a_nm1, a_n)
    mom = M_n - lg.coadjoint_action(W_prev, M_prev)
    for a in range(m):
        mom = mom + l2[a] * eps[(a + 1, "n,4")] + l1[a] * eps[(a + 1, "n,5")]
    back = np.zeros(model.d)
    for a in range(m):
        back = back + l1[a] * eps[(a + 1, "n-1,4")] + l0[a] * eps[(a + 1, "n-1,5")]
    mom = mom - lg.coadjoint_action(W_prev, back)
    return np.concatenate((shape, mom, eval_chi(model, a_n)))


# ---------------------------------------------------------------------------
# stepping


def _predict(model: HOSystemModel, state: StepState) -> tuple[ReducedWindow, np.ndarray]:
    last = state.windows[-1]
    k = model.k
    p_guess = 2.0 * last.shape[-1] - last.shape[-2]
    g_last = last.group[-1]
    if k >= 2:
        g_before = last.group[-2]
    else:
        g_before = state.prior_group
    if g_before is None:
        g_guess = g_last
    else:
        g_guess = lg.compose(g_last, lg.compose(lg.inverse(g_before), g_last))
    shape = np.vstack((last.shape[1:], p_guess))
    group = last.group[1:] + (g_guess,)
    return ReducedWindow(shape, group), state.multipliers[-1].copy()


def momentum_covector(model: HOSystemModel, state: StepState) -> np.ndarray:
    """M_{n-1}: right-trivialized L-derivative at the newest complete group part g~_{n-1}."""
    k = model.k
    tot = np.zeros(model.d)
    for j in range(k):
        w = state.windows[k - 1 - j]
        tot = tot + model.window_derivatives(w).L_group[j]
    return lg.left_to_right(state.windows[-1].group[0], tot)


def _full_residual_fn(model, state):
    def f(w, lam):
        return residual_order_k(model, state.windows + (w,), state.multipliers + (lam,))
    return f


def _fd_full_jacobian(model, state, w, lam):
    f = _full_residual_fn(model, state)
    r, d, m = model.r, model.d, model.m
    n = r + d + m
    J = np.zeros((n, n))
    for col in range(n):
        if col < r:
            step = 1e-6 * max(1.0, abs(w.shape[-1, col]))
        elif col < r + d:
            step = 1e-6 * w.group[-1].sup_norm()
        else:
            step = 1e-6 * max(1.0, abs(lam[col - r - d]))
        du = np.zeros(n)
        du[col] = step
        wp, dl = perturb_window(w, du, r, d)
        wm, dm = perturb_window(w, -du, r, d)
        J[:, col] = (f(wp, lam + dl) - f(wm, lam + dm)) / (2 * step)
    return J


def step_advance(model: HOSystemModel, state: StepState, settings: NewtonSettings = NewtonSettings(),
                 guess: Optional[tuple] = None) -> tuple[StepState, StepReport]:
    """Solve for the next window and multiplier; returns the shifted state and a report."""
    if state.k != model.k:
        raise lg.ContractError("state order does not match model order")
    n_idx = state.n
    hist = _History(model, state.windows, state.multipliers)
    if guess is None:
        w, lam = _predict(model, state)
    else:
        w, lam = guess
        lam = np.asarray(lam, float).reshape(model.m)
    r, d, m = model.r, model.d, model.m

    def jac(w, lam):
        if settings.jacobian == "assembled":
            return regularity_matrix(model, w, lam)
        return _fd_full_jacobian(model, state, w, lam)

    res, scale, _, noise = hist.residual(w, lam)
    norm = normalized_norm(res, scale)
    history = [norm]
    stalled = False
    J = None
    cond = math.nan
    it = 0

    def make_report(converged):
        M_n = hist.gn_L_right_hist + lg.left_to_right(w.group[0], model.window_derivatives(w).L_group[0])
        reported = norm if not converged or norm <= settings.tolerance else normalized_norm(res, scale, noise)
        return StepReport(n_idx, converged, it, reported, float(np.max(np.abs(res))) if res.size else 0.0, cond,
                          M_n, eval_chi(model, w), history)

    while not (norm <= settings.tolerance or (stalled and normalized_norm(res, scale, noise) <= settings.tolerance)):
        if it >= settings.max_iterations or not math.isfinite(norm):
            rep = make_report(False)
            raise StepFailure(f"Newton did not converge at equation index {n_idx} (residual {norm:.3e} after {it} iterations)",
                              rep, n_idx)
        J = jac(w, lam)
        cond = condition_estimate(J)
        if not cond < SINGULAR_COND:
            rep = make_report(False)
            raise RegularityFailure(f"singular step Jacobian at equation index {n_idx} (condition estimate {cond:.3e})", rep, n_idx)
        try:
            du = -np.linalg.solve(J, res)
        except np.linalg.LinAlgError:
            rep = make_report(False)
            raise RegularityFailure(f"singular step Jacobian at equation index {n_idx}", rep, n_idx) from None
        alpha = settings.damping
        while True:
            w_try, dl = perturb_window(w, alpha * du, r, d)
            lam_try = lam + dl
            try:
                res_try, scale_try, _, noise_try = hist.residual(w_try, lam_try)
                norm_try = normalized_norm(res_try, scale_try)
            except (ArithmeticError, ValueError):
                norm_try = math.inf
            if norm_try <= norm or alpha <= settings.min_damping:
                break
            alpha *= 0.5
        if not math.isfinite(norm_try):
            it += 1
            norm = norm_try
            continue
        # once Newton stops gaining, what is left may be rounding noise of the residual itself
        stalled = norm_try > 0.25 * norm
        w, lam, res, scale, noise, norm = w_try, lam_try, res_try, scale_try, noise_try, norm_try
        history.append(norm)
        it += 1
    if J is None:
        J = jac(w, lam)
        cond = condition_estimate(J)
    if cond > settings.cond_warning:
        log.warning("step %d: regularity condition estimate %.3e exceeds %.1e", n_idx, cond, settings.cond_warning)
    report = make_report(True)
    new_state = StepState(state.windows[1:] + (w,), state.multipliers[1:] + (lam,), n_idx + 1,
                          prior_group=state.windows[0].group[0])
    return new_state, report


@dataclass
class Trajectory:
    """All shape points, group parts and multipliers of a run, plus per-step reports.

    Window j is (p_j..p_{j+k}, g~_j..g~_{j+k-1}) with multiplier lambda^j.
    The first k windows come from the bootstrap; window k+s-1 was produced by step s.
    """

    model: HOSystemModel
    shape_points: list
    group_parts: list
    multipliers: list
    reports: list = field(default_factory=list)
    failed: bool = False
    failure: Optional[str] = None
    failure_step: Optional[int] = None

    @property
    def k(self) -> int:
        return self.model.k

    @property
    def num_windows(self) -> int:
        return len(self.multipliers)

    def window(self, j: int) -> ReducedWindow:
        k = self.k
        return ReducedWindow(np.array(self.shape_points[j:j + k + 1]), tuple(self.group_parts[j:j + k]))

    def windows(self) -> list:
        return [self.window(j) for j in range(self.num_windows)]

    def shape_array(self) -> np.ndarray:
        return np.array(self.shape_points)


def trajectory_from_state(model: HOSystemModel, state: StepState) -> Trajectory:
    k = model.k
    ws = state.windows
    shape = [ws[0].shape[i].copy() for i in range(k + 1)] + [w.shape[-1].copy() for w in ws[1:]]
    group = list(ws[0].group) + [w.group[-1] for w in ws[1:]]
    return Trajectory(model, shape, group, [l.copy() for l in state.multipliers])


def run_trajectory(model: HOSystemModel, state: StepState, N: int, settings: NewtonSettings = NewtonSettings()) -> Trajectory:
    """March N steps; a failing step stops the run and flags the partial record."""
    if N < 1:
        raise lg.ContractError("N must be at least 1")
    traj = trajectory_from_state(model, state)
    for _ in range(N):
        try:
            state, report = step_advance(model, state, settings)
        except StepFailure as exc:
            traj.failed = True
            traj.failure = str(exc)
            traj.failure_step = exc.step_index - model.k + 1 if exc.step_index is not None else None
            if exc.report is not None:
                traj.reports.append(exc.report)
            break
        w = state.windows[-1]
        traj.shape_points.append(w.shape[-1].copy())
        traj.group_parts.append(w.group[-1])
        traj.multipliers.append(state.multipliers[-1].copy())
        traj.reports.append(report)
    return traj


def equation_residuals(traj: Trajectory) -> list:
    """Residual vectors at every equation index n = k..num_windows-1."""
    model = traj.model
    k = model.k
    out = []
    for n in range(k, traj.num_windows):
        ws = [traj.window(j) for j in range(n - k, n + 1)]
        out.append(residual_order_k(model, ws, traj.multipliers[n - k:n + 1]))
    return out
