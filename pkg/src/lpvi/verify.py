"""Verification harness: conservation monitors, convergence order, KKT oracle,
regularity sweeps and derivative checks."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from . import liegroup as lg
from .integrator import NewtonSettings, Trajectory, residual_order_k
from .liegroup import GroupElement
from .model import (
    HOSystemModel,
    ReducedWindow,
    WindowDerivatives,
    condition_estimate,
    eval_chi,
    eval_ld,
    fd_window_derivatives,
    regularity_matrix,
)

log = logging.getLogger(__name__)

REGULARITY_LIMIT = 1e12


# ---------------------------------------------------------------------------
# conservation monitors


@dataclass
class ConservationReport:
    """Per-window deviation series and their running maxima.

    ``values`` maps a monitor name to a non-negative array; monitors that do
    not apply to the model are listed in ``not_applicable`` with a reason.
    """

    values: dict = field(default_factory=dict)
    not_applicable: dict = field(default_factory=dict)

    @property
    def max_deviation(self) -> dict:
        return {k: (float(np.max(v)) if len(v) else 0.0) for k, v in self.values.items()}

    def running_max(self, name: str) -> np.ndarray:
        v = self.values[name]
        return np.maximum.accumulate(v) if len(v) else v


def momentum_series(traj: Trajectory) -> list:
    """Right-trivialized momenta M_n from the Lagrangian part only, n = k-1 .. num_windows-1."""
    model = traj.model
    k = model.k
    ws = traj.windows()
    ders = [model.window_derivatives(w) for w in ws]
    out = []
    for n in range(k - 1, len(ws)):
        g = ws[n].group[0]
        total = np.zeros(model.d)
        for j in range(k):
            total = total + ders[n - j].L_group[j]
        out.append(lg.left_to_right(g, total))
    return out


def transport_residuals(traj: Trajectory) -> np.ndarray:
    """||M_n - Ad*_{W_{n-1}} M_{n-1}||_inf for every consecutive pair of momenta."""
    model = traj.model
    k = model.k
    M = momentum_series(traj)
    conn = model.connection
    out = []
    for i in range(1, len(M)):
        n = k - 1 + i
        w_prev = traj.window(n - 1)
        A = conn.eval(w_prev.shape[0], w_prev.shape[1])
        W = lg.compose(w_prev.group[0], lg.inverse(A))
        out.append(float(np.max(np.abs(M[i] - lg.coadjoint_action(W, M[i - 1])))))
    return np.array(out)


def monitor_trajectory(model: HOSystemModel, traj: Trajectory) -> ConservationReport:
    rep = ConservationReport()
    ws = traj.windows()
    for name, fn in model.monitors.items():
        rep.values[name] = np.asarray(fn(traj), float)
    if "charge" not in model.monitors:
        rep.not_applicable["charge"] = "not applicable: model has no charge slot"
    if "omega3" not in model.monitors:
        rep.not_applicable["omega3"] = "not applicable: model has no body angular velocity"
    if model.m > 0:
        lams = np.array(traj.multipliers)
        rep.values["multiplier_drift"] = np.max(np.abs(lams - lams[0]), axis=1)
        rep.values["constraint"] = np.array([float(np.max(np.abs(eval_chi(model, w)))) for w in ws])
    else:
        rep.not_applicable["multiplier_drift"] = "not applicable: unconstrained model"
        rep.not_applicable["constraint"] = "not applicable: unconstrained model"
    rep.values["transport"] = transport_residuals(traj)
    return rep


def conserved_quantities(model: HOSystemModel) -> list:
    """Monitors expected to hold to solver accuracy for this model."""
    names = [n for n in ("charge", "omega3") if n in model.monitors]
    if model.m == 0:
        names.append("transport")
    else:
        names.append("constraint")
        if "charge" in model.monitors:
            names.append("multiplier_drift")
    return names


# ---------------------------------------------------------------------------
# convergence


@dataclass
class ConvergenceReport:
    step_sizes: np.ndarray
    errors: np.ndarray
    fitted_order: float
    fit_residual: float
    pair_orders: np.ndarray
    used: np.ndarray  # mask of points entering the fit
    flag: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "step_sizes": self.step_sizes.tolist(),
            "errors": self.errors.tolist(),
            "fitted_order": self.fitted_order,
            "fit_residual": self.fit_residual,
            "pair_orders": self.pair_orders.tolist(),
            "used": self.used.tolist(),
            "flag": self.flag,
        }


def fit_order(h, err) -> tuple[float, float]:
    """Least-squares slope of log(err) against log(h) and the rms residual of the fit."""
    x, y = np.log(np.asarray(h, float)), np.log(np.asarray(err, float))
    coef, res, *_ = np.polyfit(x, y, 1, full=True)
    rms = math.sqrt(float(res[0]) / len(x)) if len(res) else 0.0
    return float(coef[0]), rms


def convergence_study(run: Callable[[float], Trajectory], reference: Callable[[np.ndarray], np.ndarray],
                      h_list, T: float, norm: str = "sup") -> ConvergenceReport:
    """Errors of the discrete shape trajectory against a reference on the grid of the coarsest step.

    ``reference(times)`` returns shape samples (len(times), r).  Steps must
    divide the coarsest one.
    """
    h = np.array(sorted((float(x) for x in h_list), reverse=True))
    if len(h) < 2:
        raise ValueError("a convergence study needs at least two step sizes")
    if np.any(np.diff(h) >= 0):
        raise ValueError("step sizes must be distinct")
    H = h[0]
    n_grid = int(round(T / H))
    if n_grid < 1 or abs(n_grid * H - T) > 1e-9 * T:
        raise ValueError("T must be a multiple of the coarsest step")
    times = H * np.arange(n_grid + 1)
    ref = np.asarray(reference(times), float).reshape(len(times), -1)
    magnitude = float(np.max(np.abs(ref)))
    errors = []
    flag = None
    for hi in h:
        ratio = H / hi
        stride = int(round(ratio))
        if abs(stride - ratio) > 1e-9:
            raise ValueError(f"step {hi} does not divide the coarsest step {H}")
        traj = run(hi)
        pts = traj.shape_array()
        if traj.failed or len(pts) <= n_grid * stride:
            flag = f"non-converged run at h={hi}"
            errors.append(math.nan)
            continue
        diff = pts[::stride][:n_grid + 1] - ref
        if norm == "sup":
            errors.append(float(np.max(np.abs(diff))))
        elif norm == "rms":
            errors.append(float(np.sqrt(np.mean(diff ** 2))))
        else:
            raise ValueError(f"unknown norm {norm!r}")
    errors = np.array(errors)
    used = np.isfinite(errors) & (errors > 0)
    if used.sum() > 2 and errors[0] > 0.1 * magnitude:
        used[0] = False
    with np.errstate(divide="ignore", invalid="ignore"):
        pair = np.log(errors[:-1] / errors[1:]) / np.log(h[:-1] / h[1:])
    if used.sum() >= 2:
        order, resid = fit_order(h[used], errors[used])
    else:
        order, resid = math.nan, math.nan
        flag = flag or "fewer than two usable step sizes"
    return ConvergenceReport(h, errors, order, resid, pair, used, flag)


def oracle_reference(rhs, y0, h_ref: float, extract: Callable[[np.ndarray], np.ndarray]):
    """Reference sampler from one dense RK4 run at h_ref (times must be multiples of h_ref)."""
    from .systems import rk4_integrate

    def reference(times):
        times = np.asarray(times, float)
        idx = np.rint(times / h_ref).astype(int)
        dense = rk4_integrate(rhs, y0, h_ref, int(idx.max()))
        return np.array([extract(dense[i]) for i in idx])

    return reference


# ---------------------------------------------------------------------------
# KKT oracle


@dataclass
class KKTResult:
    converged: bool
    residual: float
    shape_points: np.ndarray
    group_elements: list
    multipliers: np.ndarray
    iterations: int
    starts_tried: int
    note: str = ""

    def reduced(self, model: HOSystemModel) -> tuple[list, list]:
        """Reduced windows a_0..a_{N-k} and multipliers of the stationary point."""
        shape_pts, gs = self.shape_points, self.group_elements
        conn = model.connection
        gt = [lg.compose(lg.compose(lg.inverse(gs[i]), gs[i + 1]), conn.eval(shape_pts[i], shape_pts[i + 1]))
              for i in range(len(gs) - 1)]
        k = model.k
        ws = [ReducedWindow(shape_pts[j:j + k + 1], tuple(gt[j:j + k])) for j in range(len(gs) - k)]
        return ws, list(self.multipliers)


class KKTProblem:
    """The constrained action sum in unreduced variables q_i = (p_i, g_i), i = 0..N.

    Group parts are g~_i = g_i^{-1} g_{i+1} A(p_i, p_{i+1}).  The first and
    last k configurations are fixed; interior configurations and all window
    multipliers are unknown.  Stationarity is measured by fourth-order
    central differences of the action (left-trivialized for g_i), so this
    check shares no assembly code with the marching residual.
    """

    RCOND = 1e-10

    def __init__(self, model: HOSystemModel, shape_points, group_elements, fd_step: float = 1e-3):
        self.model = model
        self.p = np.array(shape_points, float)
        self.g = list(group_elements)
        self.N = len(self.g) - 1
        k = model.k
        if self.p.shape[0] != self.N + 1:
            raise lg.ContractError("shape points and group elements must have equal length")
        if self.N < 2 * k:
            raise lg.ContractError(f"the KKT oracle needs N >= {2 * k}")
        self.interior = list(range(k, self.N - k + 1))
        self.n_windows = self.N - k + 1
        self.fd_step = fd_step

    @classmethod
    def from_trajectory(cls, traj: Trajectory, g0: Optional[GroupElement] = None, **kw):
        model = traj.model
        g = [g0 or GroupElement.identity(model.tag)]
        conn = model.connection
        pts = traj.shape_array()
        for i, gt in enumerate(traj.group_parts):
            W = lg.compose(gt, lg.inverse(conn.eval(pts[i], pts[i + 1])))
            g.append(lg.compose(g[-1], W))
        return cls(model, pts, g, **kw)

    @property
    def n_unknowns(self) -> int:
        m = self.model
        return len(self.interior) * (m.r + m.d) + self.n_windows * m.m

    def pack(self, p, g, lam) -> tuple:
        return (np.array(p, float), list(g), np.array(lam, float).reshape(self.n_windows, self.model.m))

    def windows(self, p, g) -> list:
        model = self.model
        k = model.k
        conn = model.connection
        gt = [lg.compose(lg.compose(lg.inverse(g[i]), g[i + 1]), conn.eval(p[i], p[i + 1])) for i in range(self.N)]
        return [ReducedWindow(p[j:j + k + 1], tuple(gt[j:j + k])) for j in range(self.n_windows)]

    def action(self, p, g, lam) -> float:
        model = self.model
        total = 0.0
        for w, l in zip(self.windows(p, g), lam):
            total += eval_ld(model, w)
            if model.m:
                total += float(np.dot(l, eval_chi(model, w)))
        return total

    def _local_action(self, p, g, lam, i) -> float:
        # only windows containing configuration i contribute to its derivative
        model = self.model
        k = model.k
        lo, hi = max(0, i - k - 1), min(self.N, i + k + 1)
        sub_p, sub_g = p[lo:hi + 1], g[lo:hi + 1]
        gt_cache = {}
        conn = model.connection
        total = 0.0
        for j in range(max(0, i - k), min(self.n_windows - 1, i) + 1):
            parts = []
            for t in range(j, j + k):
                if t not in gt_cache:
                    gt_cache[t] = lg.compose(lg.compose(lg.inverse(g[t]), g[t + 1]), conn.eval(p[t], p[t + 1]))
                parts.append(gt_cache[t])
            w = ReducedWindow(p[j:j + k + 1], tuple(parts))
            total += eval_ld(model, w)
            if model.m:
                total += float(np.dot(lam[j], eval_chi(model, w)))
        return total

    def kkt_residual(self, p, g, lam) -> np.ndarray:
        model = self.model
        r, d = model.r, model.d
        delta = self.fd_step
        coeffs = ((2, -1.0 / 12), (1, 8.0 / 12), (-1, -8.0 / 12), (-2, 1.0 / 12))
        out = []
        for i in self.interior:
            for a in range(r):
                s = delta * max(1.0, abs(p[i, a]))
                acc = 0.0
                for mult, c in coeffs:
                    pp = p.copy()
                    pp[i, a] += mult * s
                    acc += c * self._local_action(pp, g, lam, i)
                out.append(acc / s)
            for a in range(d):
                s = delta * g[i].sup_norm()
                acc = 0.0
                for mult, c in coeffs:
                    e = np.zeros(d)
                    e[a] = mult * s
                    gg = list(g)
                    gg[i] = lg.compose(g[i], lg.exp_map(g[i].tag, e))
                    acc += c * self._local_action(p, gg, lam, i)
                out.append(acc / s)
        for w in self.windows(p, g):
            out.extend(eval_chi(model, w))
        return np.array(out)

    def apply(self, p, g, lam, dz) -> tuple:
        model = self.model
        r, d, m = model.r, model.d, model.m
        p = p.copy()
        g = list(g)
        off = 0
        for i in self.interior:
            p[i] = p[i] + dz[off:off + r]
            off += r
            if d:
                g[i] = lg.compose(g[i], lg.exp_map(g[i].tag, dz[off:off + d]))
            off += d
        lam = lam + dz[off:].reshape(self.n_windows, m)
        return p, g, lam

    def difference(self, p, g, lam, p_ref, g_ref, lam_ref) -> np.ndarray:
        """Unknown-space increment dz with apply(ref, dz) = (p, g, lam)."""
        model = self.model
        parts = []
        for i in self.interior:
            parts.append(p[i] - p_ref[i])
            if model.d:
                parts.append(lg.log_map(lg.compose(lg.inverse(g_ref[i]), g[i])))
        parts.append((np.asarray(lam, float) - np.asarray(lam_ref, float)).ravel())
        return np.concatenate(parts)

    def closest_root(self, p, g, lam, p_ref, g_ref, lam_ref, tol: float = 1e-10, rounds: int = 3) -> tuple:
        """Slide a root along the numerical null space of the KKT Jacobian towards a reference point.

        Multipliers of the fixed-endpoint problem are not all identified, so
        roots come in families; returns the member nearest the reference.
        """
        res = float(np.max(np.abs(self.kkt_residual(p, g, lam))))
        for _ in range(rounds):
            J = self.jacobian(p, g, lam)
            _, sv, Vt = np.linalg.svd(J)
            null = Vt[sv < self.RCOND * sv[0]]
            if not len(null):
                break
            dz = self.difference(p, g, lam, p_ref, g_ref, lam_ref)
            shift = -null.T @ (null @ dz)
            if np.max(np.abs(shift)) <= 1e-14:
                break
            cand = self.apply(p, g, lam, shift)
            cand_res = float(np.max(np.abs(self.kkt_residual(*cand))))
            if cand_res > tol:
                *cand, cand_res, _, ok = self.solve(*cand, tol=tol)
                if not ok:
                    break
            p, g, lam = cand
            res = cand_res
        return p, g, lam, res

    def jacobian(self, p, g, lam, step: float = 1e-5) -> np.ndarray:
        n = self.n_unknowns
        cols = []
        for c in range(n):
            dz = np.zeros(n)
            dz[c] = step
            fp = self.kkt_residual(*self.apply(p, g, lam, dz))
            fm = self.kkt_residual(*self.apply(p, g, lam, -dz))
            cols.append((fp - fm) / (2 * step))
        return np.array(cols).T

    def solve(self, p, g, lam, tol: float = 1e-10, max_iter: int = 40) -> tuple:
        """Least-squares Newton; the system may be rank deficient in the multipliers.

        The Jacobian is reused while the residual keeps dropping by 10x per
        iteration and recomputed otherwise.  Singular directions below
        ``RCOND`` times the largest are dropped: the finite-difference Jacobian
        carries noise near 1e-6 there, so steps along them are meaningless.
        Gives up after three iterations without progress.
        """
        res = self.kkt_residual(p, g, lam)
        norm = float(np.max(np.abs(res)))
        J = None
        it = 0
        best, stalled = math.inf, 0
        for it in range(1, max_iter + 1):
            if norm <= tol:
                return p, g, lam, norm, it - 1, True
            if norm < 0.5 * best:
                best, stalled = norm, 0
            else:
                stalled += 1
                if stalled > 3:
                    break
            if J is None:
                J = self.jacobian(p, g, lam)
            dz, *_ = np.linalg.lstsq(J, -res, rcond=self.RCOND)
            t = 1.0
            while True:
                cand = self.apply(p, g, lam, t * dz)
                cres = self.kkt_residual(*cand)
                cnorm = float(np.max(np.abs(cres)))
                if cnorm < norm or t < 1 / 64:
                    break
                t *= 0.5
            if cnorm > 0.1 * norm:
                J = None
            p, g, lam = cand
            res, norm = cres, cnorm
        return p, g, lam, norm, it, norm <= tol


def kkt_oracle(model: HOSystemModel, traj: Trajectory, seed: int = 0, n_starts: int = 2,
               perturbation: float = 1e-3, tol: float = 1e-10) -> KKTResult:
    """Solve the KKT system with the trajectory's endpoint configurations fixed.

    Starts are the marching trajectory perturbed by seeded noise; the root
    closest to the marching trajectory is returned.
    """
    prob = KKTProblem.from_trajectory(traj)
    rng = np.random.default_rng(seed)
    p0, g0 = prob.p, prob.g
    lam0 = np.array(traj.multipliers[:prob.n_windows], float).reshape(prob.n_windows, model.m)
    best = None
    for s in range(n_starts):
        dz = perturbation * rng.standard_normal(prob.n_unknowns)
        p, g, lam = prob.apply(p0, g0, lam0, dz)
        try:
            p, g, lam, res, its, ok = prob.solve(p, g, lam, tol=tol)
        except (ArithmeticError, np.linalg.LinAlgError) as exc:
            log.info("KKT start %d failed: %s", s, exc)
            continue
        if not ok:
            continue
        p, g, lam, res = prob.closest_root(p, g, lam, p0, g0, lam0, tol=tol)
        dist = float(np.max(np.abs(prob.difference(p, g, lam, p0, g0, lam0))))
        if best is None or dist < best[0]:
            best = (dist, KKTResult(True, res, p, g, lam, its, s + 1))
    if best is None:
        log.warning("KKT oracle inconclusive for %s: no start converged", model.name)
        return KKTResult(False, math.nan, p0, g0, lam0, 0, n_starts, note="oracle inconclusive")
    result = best[1]
    result.starts_tried = n_starts
    return result


def marching_kkt_residual(traj: Trajectory) -> float:
    """Max-abs KKT residual of the constrained action at the marching trajectory."""
    prob = KKTProblem.from_trajectory(traj)
    lam = np.array(traj.multipliers[:prob.n_windows], float).reshape(prob.n_windows, traj.model.m)
    return float(np.max(np.abs(prob.kkt_residual(prob.p, prob.g, lam))))


def interior_residuals(model: HOSystemModel, result: KKTResult) -> np.ndarray:
    """residual_order_k at each interior equation index of a KKT point."""
    ws, lams = result.reduced(model)
    k = model.k
    out = []
    for n in range(k, len(ws)):
        out.append(float(np.max(np.abs(residual_order_k(model, ws[n - k:n + 1], lams[n - k:n + 1])))))
    return np.array(out)


# ---------------------------------------------------------------------------
# regularity


@dataclass
class RegularityReport:
    cond: np.ndarray  # per step, step s uses window k+s-1
    flagged: list
    limit: float = REGULARITY_LIMIT

    @property
    def first_flagged(self) -> Optional[int]:
        return self.flagged[0] if self.flagged else None

    @property
    def max_log_ratio(self) -> float:
        c = np.log10(self.cond[np.isfinite(self.cond)])
        return float(np.max(np.abs(np.diff(c)))) if len(c) > 1 else 0.0


def regularity_sweep(model: HOSystemModel, traj: Trajectory, limit: float = REGULARITY_LIMIT) -> RegularityReport:
    k = model.k
    conds = []
    for j in range(k, traj.num_windows):
        J = regularity_matrix(model, traj.window(j), traj.multipliers[j])
        conds.append(condition_estimate(J))
    conds = np.array(conds)
    flagged = [s + 1 for s, c in enumerate(conds) if not c < limit]
    return RegularityReport(conds, flagged, limit)


def duplicate_constraint_model(model: HOSystemModel) -> HOSystemModel:
    """The same system with its constraint rows listed twice (rank deficient by construction)."""
    if model.m == 0:
        raise lg.ContractError("duplicating constraints needs a constrained model")
    base_der = model.window_derivatives

    def constraints(w):
        c = eval_chi(model, w)
        return np.concatenate((c, c))

    def derivatives(w):
        d = base_der(w)
        return WindowDerivatives(d.L_shape, d.L_group, np.concatenate((d.chi_shape, d.chi_shape)),
                                 np.concatenate((d.chi_group, d.chi_group)))

    return replace(model, name=model.name + "-duplicated", m=2 * model.m, constraints=constraints,
                   derivatives=derivatives, monitors={})


def duplicate_multipliers(traj: Trajectory, model: HOSystemModel) -> Trajectory:
    """Trajectory record of ``traj`` re-expressed for the duplicated-constraint model."""
    lams = [np.concatenate((0.5 * l, 0.5 * l)) for l in traj.multipliers]
    return Trajectory(model, traj.shape_points, traj.group_parts, lams)


# ---------------------------------------------------------------------------
# derivative check


def _rel(a, b) -> float:
    a, b = np.asarray(a, float), np.asarray(b, float)
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - b)) / max(1.0, float(np.max(np.abs(b)))))


def reference_derivatives(model: HOSystemModel, w: ReducedWindow):
    """Central-difference shape derivatives and right-exp group derivatives.

    Returns (L_shape, L_group_right, chi_shape, chi_group_right).
    """
    fd = fd_window_derivatives(model, w)
    k, m, d = model.k, model.m, model.d
    L_right = np.zeros((k, d))
    chi_right = np.zeros((m, k, d))
    for j in range(k):
        def f_all(g, j=j):
            return np.concatenate(([eval_ld(model, w.replace_group(j, g))], eval_chi(model, w.replace_group(j, g))))
        step = lg.fd_step(w.group[j])
        g = w.group[j]
        for a in range(d):
            e = np.zeros(d)
            e[a] = step
            fp = f_all(lg.compose(lg.exp_map(g.tag, e), g))
            fm = f_all(lg.compose(lg.exp_map(g.tag, -e), g))
            col = (fp - fm) / (2 * step)
            L_right[j, a] = col[0]
            chi_right[:, j, a] = col[1:]
    return fd.L_shape, L_right, fd.chi_shape, chi_right


def derivative_check(model: HOSystemModel, n_windows: int = 50, seed: int = 0) -> dict:
    """Worst relative error per slot between the model's derivatives and finite differences.

    Group slots are compared right-trivialized, against differences along
    right exp-curves; for second-order constrained models the entries
    ``eps{alpha}`` are the constraint covectors of the momentum equation.
    Relative errors use a unit floor on the reference magnitude.
    """
    if model.sample_window is None:
        raise lg.ContractError(f"model {model.name} has no window sampler")
    rng = np.random.default_rng(seed)
    k = model.k
    worst: dict = {}

    def note(name, val):
        worst[name] = max(worst.get(name, 0.0), val)

    for _ in range(n_windows):
        w = model.sample_window(rng)
        der = model.window_derivatives(w)
        ref_Ls, ref_Lg, ref_cs, ref_cg = reference_derivatives(model, w)
        for s in range(k + 1):
            note(f"L:shape[{s + 1}]", _rel(der.L_shape[s], ref_Ls[s]))
        for j in range(k):
            note(f"L:group[{k + 2 + j}]", _rel(lg.left_to_right(w.group[j], der.L_group[j]), ref_Lg[j]))
        for a in range(model.m):
            for s in range(k + 1):
                note(f"chi{a + 1}:shape[{s + 1}]", _rel(der.chi_shape[a, s], ref_cs[a, s]))
            for j in range(k):
                label = f"eps{a + 1}:group[{k + 2 + j}]" if k == 2 else f"chi{a + 1}:group[{k + 2 + j}]"
                note(label, _rel(lg.left_to_right(w.group[j], der.chi_group[a, j]), ref_cg[a, j]))
    return worst


def derivative_failures(worst: dict, tol: float = 1e-5) -> list:
    return sorted(name for name, v in worst.items() if not v <= tol)
