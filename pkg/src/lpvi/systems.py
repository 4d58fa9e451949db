"""Benchmark systems: electron in a magnetic field and the two-body planar beanie.

Each system comes with a discrete model builder and a continuous RK4 oracle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import liegroup as lg
from .connection import ParameterError, beanie_connection, trivial_connection
from .liegroup import GroupElement
from .model import HOSystemModel, ReducedWindow, WindowDerivatives


# ---------------------------------------------------------------------------
# RK4 oracle


class OracleError(ArithmeticError):
    """The reference integration produced a non-finite state."""


def rk4_integrate(rhs: Callable[[np.ndarray], np.ndarray], y0, h_ref: float, N: int) -> np.ndarray:
    """Classical fourth-order Runge-Kutta for an autonomous system; returns N+1 states."""
    if not h_ref > 0:
        raise ValueError("h_ref must be positive")
    y = np.array(y0, dtype=float)
    out = np.empty((N + 1, y.size))
    out[0] = y
    for i in range(N):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * h_ref * k1)
        k3 = rhs(y + 0.5 * h_ref * k2)
        k4 = rhs(y + h_ref * k3)
        y = y + (h_ref / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise OracleError(f"non-finite oracle state after {i + 1} steps")
        out[i + 1] = y
    return out


def sample_oracle(rhs, y0, h: float, n_samples: int, substeps: int = 100) -> np.ndarray:
    """States at t = 0, h, ..., (n_samples-1) h from RK4 with step h/substeps."""
    dense = rk4_integrate(rhs, y0, h / substeps, (n_samples - 1) * substeps)
    return dense[::substeps]


# ---------------------------------------------------------------------------
# electron


@dataclass(frozen=True)
class ElectronParams:
    mass: float = 1.0
    charge: float = 1.0
    light_speed: float = 1.0
    field: tuple = (0.0, 0.0, 1.0)
    potential: str = "quadratic"

    def __post_init__(self):
        if not self.mass > 0:
            raise ParameterError("mass must be positive")
        if not self.light_speed > 0:
            raise ParameterError("light_speed must be positive")
        if len(self.field) != 3:
            raise ParameterError("field must have three components")
        if self.potential not in ("quadratic", "none"):
            raise ParameterError(f"unknown potential {self.potential!r} (quadratic | none)")
        if not abs(self.charge / self.light_speed) < math.pi:
            raise ParameterError("charge/light_speed must lie in (-pi, pi) to be an SO(2) coordinate")

    @property
    def charge_ratio(self) -> float:
        return self.charge / self.light_speed

    @property
    def omega(self) -> float:
        """Cyclotron frequency e B_z / (m c)."""
        return self.charge * self.field[2] / (self.mass * self.light_speed)

    @property
    def aligned(self) -> bool:
        return self.field[0] == 0.0 and self.field[1] == 0.0


def _cross_matrix(b) -> np.ndarray:
    """Matrix C with C v = v x b."""
    b1, b2, b3 = b
    return np.array([[0.0, b3, -b2], [-b3, 0.0, b1], [b2, -b1, 0.0]])


def electron_continuous_rhs(params: ElectronParams) -> Callable[[np.ndarray], np.ndarray]:
    """Right-hand side for the state (x, x', x'', x''') in R^12."""
    if params.aligned and params.potential == "quadratic":
        m, w = params.mass, params.omega

        def rhs(y):
            x, v, a, j = y[0:3], y[3:6], y[6:9], y[9:12]
            x4 = np.array([
                2 * w * j[1] + a[0] * (w * w - 4 / m) + 4 * w / m * v[1] - 4 * x[0] / m ** 2,
                -2 * w * j[0] + a[1] * (w * w - 4 / m) - 4 * w / m * v[0] - 4 * x[1] / m ** 2,
                -4 * a[2] / m - 4 * x[2] / m ** 2,
            ])
            return np.concatenate((v, a, j, x4))

        return rhs
    return _electron_general_rhs(params)


def _electron_general_rhs(params: ElectronParams):
    # Euler-Lagrange equation of 1/2 |m x'' + grad phi - (e/c) x' x B|^2:
    # m E'' + (e/c) B x E' + Hess(phi) E = 0.
    m, q = params.mass, params.charge_ratio
    B = np.asarray(params.field, float)
    hess = 2.0 if params.potential == "quadratic" else 0.0

    def rhs(y):
        x, v, a, j = y[0:3], y[3:6], y[6:9], y[9:12]
        E = m * a + hess * x - q * np.cross(v, B)
        dE = m * j + hess * v - q * np.cross(a, B)
        # E'' = m x'''' + hess a - q j x B
        E2 = -(q * np.cross(B, dE) + hess * E) / m
        x4 = (E2 - hess * a + q * np.cross(j, B)) / m
        return np.concatenate((v, a, j, x4))

    return rhs


def build_electron_model(params: ElectronParams, h: float) -> HOSystemModel:
    """Second-order model on R^3 x SO(2) with the charge constraint on the group slots."""
    if not h > 0:
        raise ParameterError("h must be positive")
    m, q = params.mass, params.charge_ratio
    B = np.asarray(params.field, float)
    C = _cross_matrix(B)
    pot = 2.0 if params.potential == "quadratic" else 0.0
    I3 = np.eye(3)
    J0 = (m / h ** 2 + pot) * I3 + (q / h) * C
    J1 = (-2 * m / h ** 2) * I3 - (q / h) * C
    J2 = (m / h ** 2) * I3
    JT = np.vstack((J0.T, J1.T, J2.T))

    def residual_vec(x0, x1, x2):
        return m * (x2 - 2 * x1 + x0) / h ** 2 + pot * x0 - (q / h) * (C @ (x1 - x0))

    def lagrangian(w: ReducedWindow) -> float:
        E = residual_vec(*w.shape)
        return 0.5 * h * float(E @ E)

    def constraints(w: ReducedWindow) -> np.ndarray:
        return np.array([0.5 * (w.group[0].theta + w.group[1].theta) - q])

    chi_group = np.full((1, 2, 1), 0.5)
    chi_shape = np.zeros((1, 3, 3))
    L_group = np.zeros((2, 1))

    absJT = np.abs(JT)
    absC = np.abs(C)
    unit = 4.0 * np.finfo(float).eps

    def derivatives(w: ReducedWindow) -> WindowDerivatives:
        x0, x1, x2 = w.shape
        E = residual_vec(x0, x1, x2)
        L_shape = h * (JT @ E).reshape(3, 3)
        # E is a second difference over h^2, so its rounding error scales with |x| / h^2, not with |E|
        E_mag = (m * (np.abs(x2) + 2 * np.abs(x1) + np.abs(x0)) / h ** 2 + pot * np.abs(x0)
                 + (abs(q) / h) * (absC @ (np.abs(x1) + np.abs(x0))) + np.abs(E))
        L_round = unit * h * (absJT @ E_mag).reshape(3, 3)
        return WindowDerivatives(L_shape, L_group.copy(), chi_shape.copy(), chi_group.copy(), L_round)

    def omega(p0, p1, g):
        return np.array([g.theta])

    def sample_window(rng):
        shape = rng.normal(size=(3, 3))
        group = tuple(GroupElement(lg.SO2, q + 0.1 * rng.normal()) for _ in range(2))
        return ReducedWindow(shape, group)

    def charge_monitor(traj):
        return np.array([abs(w.group[0].theta - q) for w in traj.windows()])

    return HOSystemModel(
        name="electron", k=2, r=3, m=1, tag=lg.SO2, h=h,
        connection=trivial_connection(3, lg.SO2),
        lagrangian=lagrangian, constraints=constraints, derivatives=derivatives,
        params={"electron": params}, omega_coordinates=omega, sample_window=sample_window,
        monitors={"charge": charge_monitor},
    )


def electron_initial_state(params: ElectronParams, h: float, y0, multiplier: float = 0.0):
    """Bootstrap history (four shape samples, three group parts) from continuous data."""
    from .integrator import initial_state

    model = build_electron_model(params, h)
    samples = sample_oracle(electron_continuous_rhs(params), y0, h, 4)
    xs = samples[:, 0:3]
    g = GroupElement(lg.SO2, params.charge_ratio)
    return model, initial_state(model, xs, [g, g, g], [[multiplier], [multiplier]])


# ---------------------------------------------------------------------------
# beanie


@dataclass(frozen=True)
class Potential:
    """V(psi) with its first three derivatives."""

    kind: str = "cosine"
    strength: float = 1.0
    table: Optional[tuple] = None
    _spline: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in ("zero", "cosine", "tabulated"):
            raise ParameterError(f"unknown potential {self.kind!r} (zero | cosine | tabulated)")
        if self.kind == "tabulated":
            from scipy.interpolate import CubicSpline

            if not self.table or len(self.table) < 4:
                raise ParameterError("tabulated potential needs at least four (psi, V) pairs")
            pts = np.array(sorted(self.table), dtype=float)
            if np.any(np.diff(pts[:, 0]) <= 0):
                raise ParameterError("tabulated potential needs strictly increasing psi values")
            object.__setattr__(self, "_spline", CubicSpline(pts[:, 0], pts[:, 1]))

    def derivative(self, psi: float, order: int = 0) -> float:
        if self.kind == "zero":
            return 0.0
        if self.kind == "cosine":
            s = self.strength
            return [s * (1 - math.cos(psi)), s * math.sin(psi), s * math.cos(psi), -s * math.sin(psi)][order]
        return float(self._spline(psi, order))

    def V(self, psi):
        return self.derivative(psi, 0)

    def dV(self, psi):
        return self.derivative(psi, 1)

    def d2V(self, psi):
        return self.derivative(psi, 2)

    def d3V(self, psi):
        return self.derivative(psi, 3)


@dataclass(frozen=True)
class BeanieParams:
    mass: float = 1.0
    inertia1: float = 1.0
    inertia2: float = 2.0
    potential: Potential = field(default_factory=Potential)

    def __post_init__(self):
        if not self.mass > 0:
            raise ParameterError("mass must be positive")
        if not (self.inertia1 > 0 and self.inertia2 > 0):
            raise ParameterError("inertias must be positive")

    @property
    def kappa(self) -> float:
        """Connection coefficient I2 / (I1 + I2)."""
        return self.inertia2 / (self.inertia1 + self.inertia2)

    @property
    def reduced_inertia(self) -> float:
        return self.inertia1 * self.inertia2 / (self.inertia1 + self.inertia2)


def omega_from_group(h: float, g: GroupElement) -> np.ndarray:
    """Locked body velocities of a group part g~ = g_i^{-1} g_{i+1} A.

    Omega_3 is the standard rotation angle of g~ over h, so the frame itself
    turns at Omega_3 - kappa dpsi / h.
    """
    return np.array([g.x / h, g.y / h, g.theta / h])


def group_from_omega(h: float, omega) -> GroupElement:
    return GroupElement(lg.SE2, h * omega[2], h * omega[0], h * omega[1])


def _left_from_omega_partials(g: GroupElement, F, h: float) -> np.ndarray:
    """Left-trivialized group gradient from partials with respect to Omega.

    g exp(t e3) turns g by -t, hence the sign of the last entry.
    """
    c, s = math.cos(g.theta), math.sin(g.theta)
    fx, fy = F[0] / h, F[1] / h
    return np.array([c * fx + s * fy, -s * fx + c * fy, -F[2] / h])


def beanie_continuous_rhs(params: BeanieParams, variant: str = "reduced") -> Callable[[np.ndarray], np.ndarray]:
    """Continuous oracles.

    ``reduced``: state (psi, psi', Omega_1, Omega_2, Omega_3).
    ``optimality``: state (psi, psi', psi'', psi''', l1, l1', l2, l2', l3, l3', Omega_1, Omega_2, Omega_3),
    the fourth-order necessary conditions of the energy-optimal control problem.
    """
    kap, mu = params.kappa, params.reduced_inertia
    I12 = params.inertia1 + params.inertia2
    V = params.potential
    if variant == "reduced":
        def rhs(y):
            psi, dpsi, o1, o2, o3 = y
            rel = o3 - kap * dpsi
            return np.array([dpsi, -V.dV(psi) / mu, o2 * rel, -o1 * rel, 0.0])

        return rhs
    if variant == "optimality":
        def rhs(y):
            psi, d1, d2, d3, l1, dl1, l2, dl2, l3, dl3, o1, o2, o3 = y
            do1 = o2 * o3 - kap * d1 * o2
            do2 = -o1 * o3 + kap * d1 * o1
            do3 = 0.0
            ddV = V.d3V(psi) * d1 * d1 + V.d2V(psi) * d2
            d4 = (l1 * (o1 * o3 + do2 - o1 * d1 * kap) + l2 * (o2 * o3 - do1 - o2 * d1 * kap)
                  - ddV - (I12 / params.inertia2) * V.d2V(psi) * (mu * d2 + V.dV(psi))) / mu
            ddl1 = l2 * (do3 - kap * d2) + l1 * kap * (2 * d1 * o3 - o3 * o3 - d1 * kap)
            ddl2 = (l1 * (kap * d2 - do3) + dl1 * d1 * kap * (1 - l2) - l2 * (o3 * o3 - kap * d1 * do3)
                    + (l2 * l2 * d1 / I12) * (o3 - kap * d1))
            ddl3 = (o2 * (dl2 - 2 * dl1) - l1 * do2 + l1 * do1 + dl2 * o1
                    + (l1 * o1 + l2 * o2) * (o3 - kap * d1))
            return np.array([d1, d2, d3, d4, dl1, ddl1, dl2, ddl2, dl3, ddl3, do1, do2, do3])

        return rhs
    raise ParameterError(f"unsupported beanie oracle variant {variant!r}")


def _beanie_sampler(params: BeanieParams, h: float, k: int):
    def sample_window(rng):
        psi = rng.uniform(-1.0, 1.0, size=k + 1)
        group = tuple(group_from_omega(h, rng.normal(size=3)) for j in range(k))
        return ReducedWindow(psi.reshape(-1, 1), group)

    return sample_window


def _omega3_monitor(params: BeanieParams, h: float):
    def monitor(traj):
        om = np.array([omega_from_group(h, w.group[0])[2]
                       for w in traj.windows()])
        return np.abs(om - om[0])

    return monitor


def build_beanie_model(params: BeanieParams, h: float, variant: str = "firstOrder") -> HOSystemModel:
    if not h > 0:
        raise ParameterError("h must be positive")
    kap, mu = params.kappa, params.reduced_inertia
    m_, I12 = params.mass, params.inertia1 + params.inertia2
    V = params.potential
    conn = beanie_connection(params.inertia1, params.inertia2)

    def omega(p0, p1, g):
        return omega_from_group(h, g)

    if variant == "firstOrder":
        def lagrangian(w):
            psi0, psi1 = w.shape[0, 0], w.shape[1, 0]
            o = omega_from_group(h, w.group[0])
            dpsi = psi1 - psi0
            return (0.5 * m_ * h * (o[0] ** 2 + o[1] ** 2) + 0.5 * I12 * h * o[2] ** 2
                    + 0.5 * mu * dpsi ** 2 / h - h * V.V(psi1))

        def derivatives(w):
            psi0, psi1 = w.shape[0, 0], w.shape[1, 0]
            g = w.group[0]
            o = omega_from_group(h, g)
            dpsi = psi1 - psi0
            F = np.array([m_ * h * o[0], m_ * h * o[1], I12 * h * o[2]])
            L_shape = np.array([[-mu * dpsi / h], [mu * dpsi / h - h * V.dV(psi1)]])
            L_group = _left_from_omega_partials(g, F, h).reshape(1, 3)
            return WindowDerivatives(L_shape, L_group, np.zeros((0, 2, 1)), np.zeros((0, 1, 3)))

        return HOSystemModel(
            name="beanie-first-order", k=1, r=1, m=0, tag=lg.SE2, h=h, connection=conn,
            lagrangian=lagrangian, derivatives=derivatives, params={"beanie": params},
            omega_coordinates=omega, sample_window=_beanie_sampler(params, h, 1),
            monitors={"omega3": _omega3_monitor(params, h)},
        )

    if variant == "optimalControl":
        def accel_term(psi):
            return mu * (psi[2] - 2 * psi[1] + psi[0]) / h ** 2 + V.dV(psi[1])

        def lagrangian(w):
            q = accel_term(w.shape[:, 0])
            return 0.5 * h * q * q

        def both_omegas(w):
            psi = w.shape[:, 0]
            return omega_from_group(h, w.group[0]), omega_from_group(h, w.group[1])

        def constraints(w):
            psi = w.shape[:, 0]
            o0, o1 = both_omegas(w)
            dpsi = psi[1] - psi[0]
            return np.array([
                o1[0] - o0[0] - h * o0[1] * o0[2] + kap * dpsi * o0[1],
                o1[1] - o0[1] + h * o0[0] * o0[2] - kap * dpsi * o0[0],
                o1[2] - o0[2],
            ])

        def derivatives(w):
            psi = w.shape[:, 0]
            g0, g1 = w.group
            o0, _ = both_omegas(w)
            dpsi = psi[1] - psi[0]
            q = accel_term(psi)
            c = h * q * mu / h ** 2
            L_shape = np.array([[c], [h * q * (-2 * mu / h ** 2 + V.d2V(psi[1]))], [c]])
            # partials with respect to Omega^n, Omega^{n+1} and explicit psi partials
            rel = h * o0[2] - kap * dpsi
            F0 = [np.array([-1.0, -rel, -h * o0[1]]), np.array([rel, -1.0, h * o0[0]]), np.array([0.0, 0.0, -1.0])]
            F1 = [np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0]), np.array([0.0, 0.0, 1.0])]
            e = [(-kap * o0[1], kap * o0[1], 0.0), (kap * o0[0], -kap * o0[0], 0.0), (0.0, 0.0, 0.0)]
            chi_shape = np.zeros((3, 3, 1))
            chi_group = np.zeros((3, 2, 3))
            for a in range(3):
                chi_shape[a, :, 0] = e[a]
                chi_group[a, 0] = _left_from_omega_partials(g0, F0[a], h)
                chi_group[a, 1] = _left_from_omega_partials(g1, F1[a], h)
            return WindowDerivatives(L_shape, np.zeros((2, 3)), chi_shape, chi_group)

        return HOSystemModel(
            name="beanie-optimal-control", k=2, r=1, m=3, tag=lg.SE2, h=h, connection=conn,
            lagrangian=lagrangian, constraints=constraints, derivatives=derivatives,
            params={"beanie": params}, omega_coordinates=omega, sample_window=_beanie_sampler(params, h, 2),
            monitors={"omega3": _omega3_monitor(params, h)},
        )
    raise ParameterError(f"unknown beanie variant {variant!r} (firstOrder | optimalControl)")


def constrained_omega_step(params: BeanieParams, h: float, omega, dpsi: float) -> np.ndarray:
    """Next Omega solving the three discrete constraints exactly."""
    kap = params.kappa
    o1, o2, o3 = omega
    return np.array([o1 + h * o2 * o3 - kap * dpsi * o2, o2 - h * o1 * o3 + kap * dpsi * o1, o3])


def beanie_first_order_initial_state(params: BeanieParams, h: float, psi0: float, dpsi0: float, omega0):
    from .integrator import initial_state

    model = build_beanie_model(params, h, "firstOrder")
    y0 = np.concatenate(([psi0, dpsi0], np.asarray(omega0, float)))
    samples = sample_oracle(beanie_continuous_rhs(params, "reduced"), y0, h, 2)
    psi = samples[:, 0]
    g0 = group_from_omega(h, samples[0, 2:5])
    return model, initial_state(model, psi.reshape(-1, 1), [g0], [np.zeros(0)])


def beanie_optimal_control_initial_state(params: BeanieParams, h: float, y0):
    """History from the optimality oracle; Omega history solves the discrete constraints exactly."""
    from .integrator import initial_state

    model = build_beanie_model(params, h, "optimalControl")
    samples = sample_oracle(beanie_continuous_rhs(params, "optimality"), y0, h, 4)
    psi = samples[:, 0]
    omegas = [samples[0, 10:13]]
    for j in range(2):
        omegas.append(constrained_omega_step(params, h, omegas[-1], psi[j + 1] - psi[j]))
    groups = [group_from_omega(h, omegas[j]) for j in range(3)]
    lams = [samples[j, [4, 6, 8]] for j in range(2)]
    return model, initial_state(model, psi.reshape(-1, 1), groups, lams)


# ---------------------------------------------------------------------------
# registry


@dataclass(frozen=True)
class SystemEntry:
    """A runnable system: parameter and initial-data schemas with defaults, a
    bootstrap from continuous data and the matching continuous oracle."""

    name: str
    description: str
    params: dict
    initial: dict
    make_params: Callable[[dict], object]
    bootstrap: Callable[[object, float, dict], tuple]
    oracle: Callable[[object, dict], tuple]


def _electron_params(cfg: dict) -> ElectronParams:
    return ElectronParams(cfg["mass"], cfg["charge"], cfg["light_speed"],
                          (cfg["field_x"], cfg["field_y"], cfg["field_z"]), cfg["potential"])


def _electron_y0(ini: dict) -> np.ndarray:
    return np.array([ini[f"{c}{i}"] for c in "xvaj" for i in (1, 2, 3)], float)


def _electron_bootstrap(params, h, ini):
    return electron_initial_state(params, h, _electron_y0(ini), ini["multiplier"])


def _electron_oracle(params, ini):
    return electron_continuous_rhs(params), _electron_y0(ini), lambda y: y[0:3]


def load_potential_table(path: str) -> tuple:
    """Rows ``psi,V`` (a header row is allowed)."""
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            try:
                rows.append((float(parts[0]), float(parts[1])))
            except (ValueError, IndexError):
                if rows:
                    raise ParameterError(f"malformed potential table row: {line!r}") from None
    return tuple(rows)


def _beanie_params(cfg: dict) -> BeanieParams:
    kind = cfg["potential"]
    table = None
    if kind == "tabulated":
        if not cfg["potential_table"]:
            raise ParameterError("potential = tabulated needs params.potential_table")
        try:
            table = load_potential_table(cfg["potential_table"])
        except OSError as exc:
            raise ParameterError(f"cannot read potential table: {exc}") from None
    pot = Potential(kind, cfg["potential_strength"], table)
    return BeanieParams(cfg["mass"], cfg["inertia1"], cfg["inertia2"], pot)


def _fo_bootstrap(params, h, ini):
    return beanie_first_order_initial_state(params, h, ini["psi"], ini["psi_dot"],
                                            [ini["omega1"], ini["omega2"], ini["omega3"]])


def _fo_oracle(params, ini):
    y0 = np.array([ini["psi"], ini["psi_dot"], ini["omega1"], ini["omega2"], ini["omega3"]])
    return beanie_continuous_rhs(params, "reduced"), y0, lambda y: y[0:1]


_OC_KEYS = ("psi", "psi_d1", "psi_d2", "psi_d3", "lambda1", "lambda1_dot", "lambda2", "lambda2_dot",
            "lambda3", "lambda3_dot", "omega1", "omega2", "omega3")


def _oc_y0(ini):
    return np.array([ini[k] for k in _OC_KEYS], float)


def _oc_bootstrap(params, h, ini):
    return beanie_optimal_control_initial_state(params, h, _oc_y0(ini))


def _oc_oracle(params, ini):
    return beanie_continuous_rhs(params, "optimality"), _oc_y0(ini), lambda y: y[0:1]


_BEANIE_PARAMS = {"mass": 1.0, "inertia1": 1.0, "inertia2": 2.0, "potential": "cosine",
                  "potential_strength": 1.0, "potential_table": ""}

REGISTRY = {
    "electron": SystemEntry(
        "electron",
        "charged particle in a constant magnetic field, second order, SO(2) charge slot",
        {"mass": 1.0, "charge": 1.0, "light_speed": 1.0, "field_x": 0.0, "field_y": 0.0, "field_z": 1.0,
         "potential": "quadratic"},
        {**{f"{c}{i}": 0.0 for c in "xvaj" for i in (1, 2, 3)}, "x1": 0.1, "x3": 0.05, "v2": 0.1,
         "multiplier": 0.5},
        _electron_params, _electron_bootstrap, _electron_oracle,
    ),
    "beanie-first-order": SystemEntry(
        "beanie-first-order",
        "two coupled planar rigid bodies, first-order reduced flow on SE(2)",
        dict(_BEANIE_PARAMS),
        {"psi": 0.3, "psi_dot": 0.0, "omega1": 1.0, "omega2": 0.0, "omega3": 0.5},
        _beanie_params, _fo_bootstrap, _fo_oracle,
    ),
    "beanie-optimal-control": SystemEntry(
        "beanie-optimal-control",
        "energy-optimal shape control of the two-body system, second order with three constraints",
        dict(_BEANIE_PARAMS),
        dict(zip(_OC_KEYS, (0.3, 0.0, 0.0, 0.0, 0.1, 0.0, 0.1, 0.0, 0.1, 0.0, 1.0, 0.0, 0.5))),
        _beanie_params, _oc_bootstrap, _oc_oracle,
    ),
}
