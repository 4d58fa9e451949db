import numpy as np
import pytest

from lpvi import connection as C
from lpvi import liegroup as lg
from lpvi.liegroup import SE2, GroupElement


def test_trivial_connection_is_identity():
    conn = C.trivial_connection(2, SE2)
    assert conn.eval([0.3, 1.0], [-2.0, 4.0]) == lg.identity(SE2)
    d1, d2 = conn.left_partials([0.3, 1.0], [-2.0, 4.0])
    assert not d1.any() and not d2.any()
    assert np.array_equal(C.hat_l_contraction(conn, 1, lg.identity(SE2), [0, 0], [1, 1], [1.0, 2.0, 3.0]), np.zeros(2))


def test_beanie_connection_values():
    conn = C.beanie_connection(1.0, 1.0)
    A = conn.eval([0.1], [0.3])
    assert A.x == 0 and A.y == 0
    assert A.theta == pytest.approx(0.5 * 0.2, abs=1e-16)
    assert conn.eval([0.7], [0.7]) == lg.identity(SE2)


@pytest.mark.parametrize("I1,I2", [(0.0, 1.0), (1.0, -1.0)])
def test_beanie_connection_rejects_bad_inertia(I1, I2):
    with pytest.raises(C.ParameterError):
        C.beanie_connection(I1, I2)


def test_analytic_partials_match_fd(rng):
    conn = C.beanie_connection(1.3, 0.7)
    for _ in range(20):
        p0, p1 = rng.normal(size=1), rng.normal(size=1)
        a1, a2 = conn.left_partials(p0, p1)
        f1, f2 = C.fd_partials(conn, p0, p1)
        assert np.allclose(a1, f1, atol=1e-8) and np.allclose(a2, f2, atol=1e-8)


def test_hat_l_contraction_is_chain_rule(rng):
    """d/dt F(W A(p0 + t v, p1)) equals <contraction, v> for a generic connection."""
    def ev(p0, p1):
        return GroupElement(SE2, p1[0] - 0.5 * p0[1], np.sin(p0[0]), p1[1] * p0[0])

    conn = C.LocalDiscreteConnection(r=2, tag=SE2, evaluator=ev)
    F = lambda g: g.x ** 2 + np.cos(g.theta) * g.y
    for _ in range(10):
        p0, p1, v = rng.normal(size=(3, 2))
        W = GroupElement(SE2, *rng.normal(size=3))
        for slot in (1, 2):
            g = lg.compose(W, conn.eval(p0, p1))
            cov = lg.left_trivialized_gradient(F, g)
            c = C.hat_l_contraction(conn, slot, W, p0, p1, cov)
            t = 1e-6

            def along(s):
                q0 = p0 + s * v if slot == 1 else p0
                q1 = p1 + s * v if slot == 2 else p1
                return F(lg.compose(W, conn.eval(q0, q1)))

            fd = (along(t) - along(-t)) / (2 * t)
            assert abs(c @ v - fd) <= 1e-6 * (1 + abs(fd))


def test_contraction_slot_check():
    conn = C.beanie_connection(1, 1)
    with pytest.raises(lg.ContractError):
        C.hat_l_contraction(conn, 3, lg.identity(SE2), [0.0], [0.0], np.zeros(3))
