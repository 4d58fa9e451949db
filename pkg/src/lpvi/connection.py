"""Discrete principal connections in a local trivialization.

A connection is given by its local form ``A(p0, p1)``, a group element
depending on two consecutive shape points.  Shape derivatives are stored
left-trivialized: column ``s`` of ``D_slot A`` holds the algebra coordinates
of ``A^{-1} dA/dp_slot^s``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import liegroup as lg
from .liegroup import GroupElement


class ParameterError(ValueError):
    """Raised for physically invalid model or connection parameters."""


PartialsFn = Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class LocalDiscreteConnection:
    r: int
    tag: str
    evaluator: Callable[[np.ndarray, np.ndarray], GroupElement]
    partials: Optional[PartialsFn] = None
    name: str = "connection"
    trivial: bool = False

    def eval(self, p0, p1) -> GroupElement:
        return self.evaluator(np.asarray(p0, float), np.asarray(p1, float))

    def left_partials(self, p0, p1) -> tuple[np.ndarray, np.ndarray]:
        """(D1A, D2A), each a (dim g, r) matrix of left-trivialized columns."""
        p0 = np.asarray(p0, float)
        p1 = np.asarray(p1, float)
        if self.trivial:
            z = np.zeros((lg.algebra_dim(self.tag), self.r))
            return z, z.copy()
        if self.partials is not None:
            return self.partials(p0, p1)
        return fd_partials(self, p0, p1)


def fd_partials(conn: LocalDiscreteConnection, p0, p1) -> tuple[np.ndarray, np.ndarray]:
    """Central-difference left-trivialized partials of A."""
    p0 = np.asarray(p0, float)
    p1 = np.asarray(p1, float)
    a_inv = lg.inverse(conn.eval(p0, p1))
    d = lg.algebra_dim(conn.tag)
    out = []
    for slot in (0, 1):
        cols = np.zeros((d, conn.r))
        for s in range(conn.r):
            base = p0 if slot == 0 else p1
            step = 1e-6 * max(1.0, abs(base[s]))
            plus, minus = base.copy(), base.copy()
            plus[s] += step
            minus[s] -= step
            if slot == 0:
                ap, am = conn.eval(plus, p1), conn.eval(minus, p1)
            else:
                ap, am = conn.eval(p0, plus), conn.eval(p0, minus)
            cols[:, s] = (lg.log_map(lg.compose(a_inv, ap)) - lg.log_map(lg.compose(a_inv, am))) / (2 * step)
        out.append(cols)
    return out[0], out[1]


def eval_a(conn: LocalDiscreteConnection, p0, p1) -> GroupElement:
    return conn.eval(p0, p1)


def hat_l_contraction(conn: LocalDiscreteConnection, slot: int, W: GroupElement, p0, p1, group_covector) -> np.ndarray:
    """Transport a group-slot covector into a shape covector.

    ``group_covector`` is the left-trivialized derivative of some F at
    ``W A(p0, p1)``.  The result c satisfies
    d/dt F(W A(p0(t), p1(t))) = <c, p_slot'(t)> when only the given slot moves.
    """
    if slot not in (1, 2):
        raise lg.ContractError(f"slot must be 1 or 2, got {slot}")
    if conn.trivial:
        return np.zeros(conn.r)
    d1, d2 = conn.left_partials(p0, p1)
    dA = d1 if slot == 1 else d2
    return dA.T @ np.asarray(group_covector, float)


def trivial_connection(r: int, tag: str) -> LocalDiscreteConnection:
    ident = lg.identity(tag)
    return LocalDiscreteConnection(r=r, tag=tag, evaluator=lambda p0, p1: ident, name="trivial", trivial=True)


def beanie_connection(I1: float, I2: float) -> LocalDiscreteConnection:
    """Rotation by I2/(I1+I2) times the relative-angle increment, no translation."""
    if not (I1 > 0 and I2 > 0):
        raise ParameterError(f"inertias must be positive, got I1={I1}, I2={I2}")
    kappa = I2 / (I1 + I2)

    def evaluator(p0, p1):
        return GroupElement(lg.SE2, kappa * (p1[0] - p0[0]))

    # A = exp(-kappa * dpsi * e3) in the algebra basis, so A^{-1} dA/dpsi_1 = -kappa e3.
    d1 = np.array([[0.0], [0.0], [kappa]])
    d2 = np.array([[0.0], [0.0], [-kappa]])

    def partials(p0, p1):
        return d1, d2

    return LocalDiscreteConnection(r=1, tag=lg.SE2, evaluator=evaluator, partials=partials, name="beanie")
