"""Exact kernels for SO(2) and SE(2) and their (co)algebras.

Algebra coordinates use a fixed basis.  For se(2)::

    e1 = [[0, 0, 1], [0, 0, 0], [0, 0, 0]]   (translation along x)
    e2 = [[0, 0, 0], [0, 0, 1], [0, 0, 0]]   (translation along y)
    e3 = [[0, 1, 0], [-1, 0, 0], [0, 0, 0]]  (rotation, upper-right entry +1)

so ``exp(t * e3)`` is a rotation by the standard angle ``-t``.  For so(2) the
single generator is the standard one, ``[[0, -1], [1, 0]]``.

Covectors are coordinate arrays in the dual basis and the pairing is the
Euclidean dot product of coordinates.  Algebra and coalgebra vectors are
plain 1-d float arrays; the group tag travels with the group element.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

SO2 = "SO2"
SE2 = "SE2"
_DIMS = {SO2: 1, SE2: 3}

_SERIES_THRESHOLD = 1e-6


class ContractError(ValueError):
    """Raised when inputs violate an operation's preconditions."""


class NumericalEvaluationError(ArithmeticError):
    """Raised when a function under differentiation returns a non-finite value."""


def algebra_dim(tag: str) -> int:
    try:
        return _DIMS[tag]
    except KeyError:
        raise ContractError(f"unknown group tag {tag!r}") from None


def wrap_angle(theta: float) -> float:
    """Wrap to (-pi, pi]."""
    w = math.remainder(float(theta), 2.0 * math.pi)
    if w <= -math.pi:
        w += 2.0 * math.pi
    return w


@dataclass(frozen=True)
class GroupElement:
    """Element of SO(2) or SE(2) stored as (angle, x, y).

    The angle is the standard counter-clockwise rotation angle of the
    rotation block, always wrapped to (-pi, pi].  For SO(2) the translation
    is identically zero.
    """

    tag: str
    theta: float
    x: float = 0.0
    y: float = 0.0

    def __post_init__(self):
        algebra_dim(self.tag)
        object.__setattr__(self, "theta", wrap_angle(self.theta))
        if self.tag == SO2 and (self.x != 0.0 or self.y != 0.0):
            raise ContractError("SO2 elements carry no translation")

    @classmethod
    def identity(cls, tag: str) -> "GroupElement":
        return cls(tag, 0.0, 0.0, 0.0)

    @classmethod
    def from_matrix(cls, tag: str, mat) -> "GroupElement":
        mat = np.asarray(mat, dtype=float)
        theta = math.atan2(mat[1, 0], mat[0, 0])
        if tag == SO2:
            return cls(SO2, theta)
        return cls(SE2, theta, float(mat[0, 2]), float(mat[1, 2]))

    @property
    def dim(self) -> int:
        return _DIMS[self.tag]

    def rotation(self) -> np.ndarray:
        c, s = math.cos(self.theta), math.sin(self.theta)
        return np.array([[c, -s], [s, c]])

    def matrix(self) -> np.ndarray:
        """Homogeneous 3x3 matrix view."""
        c, s = math.cos(self.theta), math.sin(self.theta)
        return np.array([[c, -s, self.x], [s, c, self.y], [0.0, 0.0, 1.0]])

    def sup_norm(self) -> float:
        return max(1.0, abs(self.x), abs(self.y))

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return compose(self, other)


def _check_same(a: GroupElement, b: GroupElement):
    if a.tag != b.tag:
        raise ContractError(f"group tag mismatch: {a.tag} vs {b.tag}")


def _check_vec(tag: str, v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (_DIMS[tag],):
        raise ContractError(f"expected a {tag} (co)algebra vector of length {_DIMS[tag]}, got shape {v.shape}")
    return v


def identity(tag: str) -> GroupElement:
    return GroupElement.identity(tag)


def compose(g: GroupElement, h: GroupElement) -> GroupElement:
    _check_same(g, h)
    if g.tag == SO2:
        return GroupElement(SO2, g.theta + h.theta)
    c, s = math.cos(g.theta), math.sin(g.theta)
    return GroupElement(SE2, g.theta + h.theta, g.x + c * h.x - s * h.y, g.y + s * h.x + c * h.y)


def inverse(g: GroupElement) -> GroupElement:
    if g.tag == SO2:
        return GroupElement(SO2, -g.theta)
    c, s = math.cos(g.theta), math.sin(g.theta)
    return GroupElement(SE2, -g.theta, -(c * g.x + s * g.y), -(-s * g.x + c * g.y))


def hat(tag: str, xi) -> np.ndarray:
    """3x3 matrix of an algebra vector (so(2) embedded in the upper-left block)."""
    xi = _check_vec(tag, xi)
    if tag == SO2:
        w = xi[0]
        return np.array([[0.0, -w, 0.0], [w, 0.0, 0.0], [0.0, 0.0, 0.0]])
    return np.array([[0.0, xi[2], xi[0]], [-xi[2], 0.0, xi[1]], [0.0, 0.0, 0.0]])


def vee(tag: str, mat) -> np.ndarray:
    mat = np.asarray(mat, dtype=float)
    if tag == SO2:
        return np.array([mat[1, 0]])
    algebra_dim(tag)
    return np.array([mat[0, 2], mat[1, 2], mat[0, 1]])


def _v_coeffs(a: float) -> tuple[float, float]:
    """(sin a / a, (1 - cos a) / a) with a series branch near zero."""
    if abs(a) < _SERIES_THRESHOLD:
        a2 = a * a
        alpha = 1.0 - a2 / 6.0 + a2 * a2 / 120.0 - a2 * a2 * a2 / 5040.0
        beta = a * (0.5 - a2 / 24.0 + a2 * a2 / 720.0 - a2 * a2 * a2 / 40320.0)
        return alpha, beta
    # 1 - cos a = 2 sin^2(a/2) avoids cancellation for small a
    return math.sin(a) / a, 2.0 * math.sin(0.5 * a) ** 2 / a


def exp_map(tag: str, xi) -> GroupElement:
    xi = _check_vec(tag, xi)
    if tag == SO2:
        return GroupElement(SO2, xi[0])
    a = -xi[2]  # standard rotation angle generated by the e3 coefficient
    alpha, beta = _v_coeffs(a)
    u1, u2 = xi[0], xi[1]
    return GroupElement(SE2, a, alpha * u1 - beta * u2, beta * u1 + alpha * u2)


def log_map(g: GroupElement) -> np.ndarray:
    if g.tag == SO2:
        return np.array([g.theta])
    a = g.theta
    alpha, beta = _v_coeffs(a)
    det = alpha * alpha + beta * beta
    u1 = (alpha * g.x + beta * g.y) / det
    u2 = (-beta * g.x + alpha * g.y) / det
    return np.array([u1, u2, -a])


def adjoint_matrix(g: GroupElement) -> np.ndarray:
    """Matrix of Ad_g in algebra coordinates."""
    if g.tag == SO2:
        return np.eye(1)
    c, s = math.cos(g.theta), math.sin(g.theta)
    return np.array([[c, -s, -g.y], [s, c, g.x], [0.0, 0.0, 1.0]])


def adjoint_action(g: GroupElement, xi) -> np.ndarray:
    return adjoint_matrix(g) @ _check_vec(g.tag, xi)


def coadjoint_action(g: GroupElement, mu) -> np.ndarray:
    """Ad*_g, defined by <Ad*_g mu, xi> = <mu, Ad_g xi>."""
    return adjoint_matrix(g).T @ _check_vec(g.tag, mu)


def ad_matrix(tag: str, xi) -> np.ndarray:
    """Matrix of ad_xi = [xi, .] from the structure constants."""
    xi = _check_vec(tag, xi)
    if tag == SO2:
        return np.zeros((1, 1))
    # matrix commutator: [e1, e3] = e2, [e2, e3] = -e1, [e1, e2] = 0
    return np.array([[0.0, xi[2], -xi[1]], [-xi[2], 0.0, xi[0]], [0.0, 0.0, 0.0]])


def ad_operator(tag: str, xi, eta) -> np.ndarray:
    return ad_matrix(tag, xi) @ _check_vec(tag, eta)


def coad_operator(tag: str, xi, mu) -> np.ndarray:
    return ad_matrix(tag, xi).T @ _check_vec(tag, mu)


def pairing(mu, xi) -> float:
    return float(np.dot(mu, xi))


def basis(tag: str) -> np.ndarray:
    return np.eye(algebra_dim(tag))


def fd_step(g: GroupElement) -> float:
    return 1e-6 * g.sup_norm()


def _trivialized_gradient(f: Callable[[GroupElement], float], g: GroupElement, side: str) -> np.ndarray:
    d = g.dim
    step = fd_step(g)
    out = np.empty(d)
    for a in range(d):
        e = np.zeros(d)
        e[a] = step
        if side == "left":
            fp, fm = f(compose(g, exp_map(g.tag, e))), f(compose(g, exp_map(g.tag, -e)))
        else:
            fp, fm = f(compose(exp_map(g.tag, e), g)), f(compose(exp_map(g.tag, -e), g))
        if not (math.isfinite(fp) and math.isfinite(fm)):
            raise NumericalEvaluationError(f"non-finite value while differentiating at {g}")
        out[a] = (fp - fm) / (2.0 * step)
    return out


def left_trivialized_gradient(f: Callable[[GroupElement], float], g: GroupElement) -> np.ndarray:
    """Components d/dt f(g exp(t e_a)) at t = 0, by central differences."""
    return _trivialized_gradient(f, g, "left")


def right_trivialized_gradient(f: Callable[[GroupElement], float], g: GroupElement) -> np.ndarray:
    """Components d/dt f(exp(t e_a) g) at t = 0, by central differences."""
    return _trivialized_gradient(f, g, "right")


def left_to_right(g: GroupElement, mu_left) -> np.ndarray:
    """Convert a left-trivialized covector at g into the right-trivialized one."""
    return coadjoint_action(inverse(g), mu_left)


def right_to_left(g: GroupElement, mu_right) -> np.ndarray:
    return coadjoint_action(g, mu_right)
