"""System descriptions: discrete Lagrangians and constraints on reduced windows.

A reduced window of order k holds k+1 consecutive shape points and the k
group parts between them.  Slots are numbered 1..2k+1: shape slots first
(1..k+1), then group slots (k+2..2k+1).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np

from . import liegroup as lg
from .connection import LocalDiscreteConnection
from .liegroup import GroupElement


class ModelEvaluationError(ArithmeticError):
    """Non-finite Lagrangian or constraint value; carries the offending window."""

    def __init__(self, message, window=None):
        super().__init__(message)
        self.window = window


@dataclass(frozen=True)
class ReducedWindow:
    shape: np.ndarray
    group: tuple

    def __post_init__(self):
        shape = np.array(self.shape, dtype=float)
        if shape.ndim != 2:
            raise lg.ContractError("window shape points must be a (k+1, r) array")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "group", tuple(self.group))
        if len(self.group) != shape.shape[0] - 1:
            raise lg.ContractError(
                f"a window with {shape.shape[0]} shape points needs {shape.shape[0] - 1} group parts, got {len(self.group)}"
            )
        if not np.all(np.isfinite(shape)):
            raise lg.ContractError("window shape points must be finite")

    @property
    def k(self) -> int:
        return len(self.group)

    @property
    def r(self) -> int:
        return self.shape.shape[1]

    def replace_shape(self, index: int, point) -> "ReducedWindow":
        shape = self.shape.copy()
        shape[index] = point
        return ReducedWindow(shape, self.group)

    def replace_group(self, index: int, g: GroupElement) -> "ReducedWindow":
        group = list(self.group)
        group[index] = g
        return ReducedWindow(self.shape, tuple(group))


@dataclass
class WindowDerivatives:
    """All slot derivatives of L_d and the constraints at one window.

    Group-slot entries are left-trivialized.  ``L_shape_round`` optionally
    bounds the rounding error of each L_shape entry; models whose shape
    derivatives are formed from differences of large terms supply it so the
    step solver does not chase noise below that bound.
    """

    L_shape: np.ndarray  # (k+1, r)
    L_group: np.ndarray  # (k, d)
    chi_shape: np.ndarray  # (m, k+1, r)
    chi_group: np.ndarray  # (m, k, d)
    L_shape_round: Optional[np.ndarray] = None  # (k+1, r)

    def combined(self, lam) -> tuple[np.ndarray, np.ndarray]:
        """Slot derivatives of L_d + lam . chi (the augmented Lagrangian)."""
        lam = np.asarray(lam, float)
        if lam.size == 0:
            return self.L_shape, self.L_group
        m = lam.size
        return (
            self.L_shape + (lam @ self.chi_shape.reshape(m, -1)).reshape(self.L_shape.shape),
            self.L_group + (lam @ self.chi_group.reshape(m, -1)).reshape(self.L_group.shape),
        )


def right_trivialize(window: ReducedWindow, group_left: np.ndarray) -> np.ndarray:
    """Convert (k, d) left-trivialized group-slot covectors to right-trivialized ones."""
    out = np.empty_like(group_left)
    for j, g in enumerate(window.group):
        out[j] = lg.left_to_right(g, group_left[j])
    return out


@dataclass
class HOSystemModel:
    """A constrained higher-order reduced system.

    ``lagrangian(window) -> float`` and ``constraints(window) -> (m,)`` must be
    pure.  ``derivatives(window) -> WindowDerivatives`` is an optional analytic
    provider; finite differences are used when it is absent.
    """

    name: str
    k: int
    r: int
    m: int
    tag: str
    h: float
    connection: LocalDiscreteConnection
    lagrangian: Callable[[ReducedWindow], float]
    constraints: Optional[Callable[[ReducedWindow], np.ndarray]] = None
    derivatives: Optional[Callable[[ReducedWindow], WindowDerivatives]] = None
    params: dict = field(default_factory=dict)
    omega_coordinates: Optional[Callable[[np.ndarray, np.ndarray, GroupElement], np.ndarray]] = None
    sample_window: Optional[Callable[[np.random.Generator], ReducedWindow]] = None
    monitors: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.k < 1:
            raise lg.ContractError("order k must be at least 1")
        if self.r < 0 or self.m < 0:
            raise lg.ContractError("dimensions must be non-negative")
        if not self.h > 0:
            raise lg.ContractError("time step h must be positive")
        if self.m > 0 and self.constraints is None:
            raise lg.ContractError("constraint count m > 0 needs a constraint function")
        if self.connection.tag != self.tag or self.connection.r != self.r:
            raise lg.ContractError("connection does not match model group or shape dimension")

    @property
    def d(self) -> int:
        return lg.algebra_dim(self.tag)

    @property
    def n_unknowns(self) -> int:
        return self.r + self.d + self.m

    def check_window(self, w: ReducedWindow):
        if w.k != self.k or w.r != self.r or any(g.tag != self.tag for g in w.group):
            raise lg.ContractError(f"window does not match model {self.name} (k={self.k}, r={self.r}, {self.tag})")

    def window_derivatives(self, w: ReducedWindow) -> WindowDerivatives:
        if self.derivatives is not None:
            return self.derivatives(w)
        return fd_window_derivatives(self, w)

    def omega(self, p0, p1, g: GroupElement) -> np.ndarray:
        if self.omega_coordinates is not None:
            return self.omega_coordinates(np.asarray(p0), np.asarray(p1), g)
        return lg.log_map(g) / self.h

    def with_provider(self, derivatives) -> "HOSystemModel":
        from dataclasses import replace

        return replace(self, derivatives=derivatives)


def eval_ld(model: HOSystemModel, w: ReducedWindow) -> float:
    val = float(model.lagrangian(w))
    if not math.isfinite(val):
        raise ModelEvaluationError(f"non-finite discrete Lagrangian in model {model.name}", w)
    return val


def eval_chi(model: HOSystemModel, w: ReducedWindow) -> np.ndarray:
    if model.m == 0:
        return np.zeros(0)
    val = np.asarray(model.constraints(w), dtype=float).reshape(model.m)
    if not np.all(np.isfinite(val)):
        raise ModelEvaluationError(f"non-finite constraint value in model {model.name}", w)
    return val


def _eval_all(model: HOSystemModel, w: ReducedWindow) -> np.ndarray:
    return np.concatenate(([eval_ld(model, w)], eval_chi(model, w)))


def fd_window_derivatives(model: HOSystemModel, w: ReducedWindow) -> WindowDerivatives:
    """Central differences for every slot; group slots along left exp-curves."""
    k, r, m, d = model.k, model.r, model.m, model.d
    shape_d = np.zeros((1 + m, k + 1, r))
    group_d = np.zeros((1 + m, k, d))
    for s in range(k + 1):
        for i in range(r):
            step = 1e-6 * max(1.0, abs(w.shape[s, i]))
            plus = w.shape.copy()
            minus = w.shape.copy()
            plus[s, i] += step
            minus[s, i] -= step
            fp = _eval_all(model, ReducedWindow(plus, w.group))
            fm = _eval_all(model, ReducedWindow(minus, w.group))
            shape_d[:, s, i] = (fp - fm) / (2 * step)
    for j, g in enumerate(w.group):
        step = lg.fd_step(g)
        for a in range(d):
            e = np.zeros(d)
            e[a] = step
            fp = _eval_all(model, w.replace_group(j, lg.compose(g, lg.exp_map(g.tag, e))))
            fm = _eval_all(model, w.replace_group(j, lg.compose(g, lg.exp_map(g.tag, -e))))
            group_d[:, j, a] = (fp - fm) / (2 * step)
    return WindowDerivatives(shape_d[0], group_d[0], shape_d[1:], group_d[1:])


def finite_difference_provider(model: HOSystemModel) -> Callable[[ReducedWindow], WindowDerivatives]:
    return lambda w: fd_window_derivatives(model, w)


def slot_derivative(model: HOSystemModel, which, slot: int, w: ReducedWindow):
    """Derivative of L_d (``which="L"``) or constraint ``which=alpha`` (1-based) in one slot.

    Shape slots return an r-vector; group slots return (left, right) trivialized covectors.
    """
    k = model.k
    if not 1 <= slot <= 2 * k + 1:
        raise lg.ContractError(f"slot {slot} outside 1..{2 * k + 1}")
    der = model.window_derivatives(w)
    if which == "L":
        shape, group = der.L_shape, der.L_group
    else:
        alpha = int(which)
        if not 1 <= alpha <= model.m:
            raise lg.ContractError(f"constraint index {alpha} outside 1..{model.m}")
        shape, group = der.chi_shape[alpha - 1], der.chi_group[alpha - 1]
    if slot <= k + 1:
        return shape[slot - 1].copy()
    j = slot - k - 2
    left = group[j].copy()
    return left, lg.left_to_right(w.group[j], left)


def window_equation_terms(model: HOSystemModel, w: ReducedWindow, lam, der: Optional[WindowDerivatives] = None):
    """Contributions of the newest window to the step equations.

    Returns (shape term, momentum term, constraint values): the slot-1
    derivative of the augmented Lagrangian plus its connection transport, the
    right-trivialized first-group-slot derivative, and chi(w).
    """
    if der is None:
        der = model.window_derivatives(w)
    S, G = der.combined(lam)
    from .connection import hat_l_contraction

    p0, p1 = w.shape[0], w.shape[1]
    g0 = w.group[0]
    shape_term = S[0].copy()
    if not model.connection.trivial and model.r > 0:
        A = model.connection.eval(p0, p1)
        W = lg.compose(g0, lg.inverse(A))
        shape_term = shape_term + hat_l_contraction(model.connection, 1, W, p0, p1, G[0])
    mom_term = lg.left_to_right(g0, G[0])
    return shape_term, mom_term, eval_chi(model, w)


def perturb_window(w: ReducedWindow, du: np.ndarray, r: int, d: int) -> tuple[ReducedWindow, np.ndarray]:
    """Apply an unknown increment (dp, delta, dlam) to the newest slots of a window.

    Returns the new window and the multiplier increment.
    """
    shape = w.shape.copy()
    shape[-1] = shape[-1] + du[:r]
    group = list(w.group)
    g = group[-1]
    if np.any(du[r:r + d]):
        group[-1] = lg.compose(g, lg.exp_map(g.tag, du[r:r + d]))
    return ReducedWindow(shape, tuple(group)), du[r + d:]


def window_residual_vector(model: HOSystemModel, w: ReducedWindow, lam) -> np.ndarray:
    a, b, c = window_equation_terms(model, w, lam)
    return np.concatenate((a, b, c))


def regularity_matrix(model: HOSystemModel, w: ReducedWindow, lam) -> np.ndarray:
    """Square matrix of dimension r + dim g + m governing solvability of a step.

    Rows are (shape equation, momentum equation, constraints); columns are
    the newest shape point, the newest group part (right increments through
    exp) and the multiplier of the window.  Only terms of the newest window
    depend on those unknowns, so the matrix is the derivative of
    ``window_equation_terms`` and is assembled by central differences of the
    first-derivative providers.
    """
    model.check_window(w)
    r, d, m = model.r, model.d, model.m
    lam = np.asarray(lam, float).reshape(m)
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
        fp = window_residual_vector(model, wp, lam + dl)
        wm, dl = perturb_window(w, -du, r, d)
        fm = window_residual_vector(model, wm, lam + dl)
        J[:, col] = (fp - fm) / (2 * step)
    return J


def condition_estimate(J: np.ndarray) -> float:
    if J.size == 0:
        return 1.0
    s = np.linalg.svd(J, compute_uv=False)
    if s[-1] == 0.0 or not np.all(np.isfinite(s)):
        return math.inf
    return float(s[0] / s[-1])
