import numpy as np
import pytest

from oracles import finite_difference
from rsp.errors import NotStrictlyFeasible
from rsp.model import BiaffineConstraint, Constraint, GeneralOracle, RobustProblem
from rsp.papc import compile_biaffine
from rsp.perspective import (
    LiftedVar,
    SlaterCertificate,
    dual_bounds,
    perspective_subgrad,
    perspective_value,
    r_pi_bound,
)
from rsp.sets import Box, L2Ball, LinfBall


def quad_oracle():
    """g(x, z) = x - z^2 (scalar, convex in x, concave in z)."""
    return GeneralOracle(
        lambda x, z: float(x[0] - z[0] ** 2),
        lambda x, z: np.array([1.0]),
        lambda x, z: np.array([2.0 * z[0]]),
    )


def bilinear_minus_square():
    """g(x, z) = x z - z^2."""
    return GeneralOracle(
        lambda x, z: float(x[0] * z[0] - z[0] ** 2),
        lambda x, z: np.array([z[0]]),
        lambda x, z: np.array([2.0 * z[0] - x[0]]),
    )


class TestPerspectiveValue:
    def test_apex_is_zero(self):
        con = Constraint(quad_oracle(), LinfBall(1.0), zdim=1)
        assert perspective_value(con, np.array([3.0]), LiftedVar(np.zeros(1), 0.0)) == 0.0

    def test_biaffine_linear_part_independent_of_lambda(self):
        con = Constraint(BiaffineConstraint([[1.0]], [0.0], [0.0], 0.0), LinfBall(1.0))
        for lam in (0.5, 1.0, 7.0):
            u = LiftedVar(np.array([3.0]), lam)
            assert perspective_value(con, np.array([2.0]), u) == pytest.approx(6.0)

    def test_direct_substitution(self):
        con = Constraint(quad_oracle(), LinfBall(2.0), zdim=1)
        u = LiftedVar(np.array([2.0]), 2.0)
        # 2 * (1 - (2/2)^2) = 0
        assert perspective_value(con, np.array([1.0]), u) == pytest.approx(0.0)

    def test_positive_homogeneity(self, rng):
        con = Constraint(bilinear_minus_square(), LinfBall(4.0), zdim=1)
        for _ in range(200):
            x = rng.uniform(-2, 2, 1)
            u = LiftedVar(rng.uniform(-2, 2, 1), rng.uniform(0.1, 3.0))
            t = rng.uniform(0.1, 5.0)
            v1 = perspective_value(con, x, LiftedVar(t * u.z_tilde, t * u.lam))
            v0 = perspective_value(con, x, u)
            assert v1 == pytest.approx(t * v0, rel=1e-10, abs=1e-12)


class TestPerspectiveSubgrad:
    def test_biaffine_constant_dual_subgradient(self, rng):
        o = BiaffineConstraint([[2.0]], [0.5], [1.5], -0.7)
        con = Constraint(o, LinfBall(1.0))
        x = np.array([0.8])
        want = np.array([-(2.0 * 0.8 + 1.5), -(0.5 * 0.8 - 0.7)])
        for lam in (0.3, 1.0, 4.0):
            _, du = perspective_subgrad(con, x, LiftedVar(np.array([0.4 * lam]), lam))
            np.testing.assert_allclose(du, want, atol=1e-12)

    def test_lambda_zero_branch(self):
        # du = (d_z at z=0, -g(x, 0))
        con = Constraint(bilinear_minus_square(), LinfBall(1.0), zdim=1)
        x = np.array([1.5])
        _, du = perspective_subgrad(con, x, LiftedVar(np.zeros(1), 0.0))
        np.testing.assert_allclose(du, [-1.5, 0.0], atol=1e-12)

    def test_finite_difference_oracle(self):
        con = Constraint(bilinear_minus_square(), LinfBall(4.0), zdim=1)
        x = np.array([1.0])
        u = LiftedVar(np.array([1.0]), 1.0)
        dx, du = perspective_subgrad(con, x, u)
        np.testing.assert_allclose(du, [1.0, -1.0], atol=1e-12)

        def neg_pers(v):
            zt, lam = v[:1], v[1]
            return -lam * (x[0] * zt[0] / lam - (zt[0] / lam) ** 2)

        fd = finite_difference(neg_pers, np.array([1.0, 1.0]))
        np.testing.assert_allclose(du, fd, atol=1e-5)

        def pers_x(v):
            return u.lam * (v[0] * u.z_tilde[0] / u.lam - (u.z_tilde[0] / u.lam) ** 2)

        np.testing.assert_allclose(dx, finite_difference(pers_x, x), atol=1e-5)

    def test_subgradient_inequality(self, rng):
        con = Constraint(bilinear_minus_square(), LinfBall(3.0), zdim=1)
        for _ in range(300):
            x = rng.uniform(-2, 2, 1)
            x2 = rng.uniform(-2, 2, 1)
            u = LiftedVar(rng.uniform(-2, 2, 1), rng.uniform(0.05, 2.0))
            u2 = LiftedVar(rng.uniform(-2, 2, 1), rng.uniform(0.05, 2.0))
            dx, du = perspective_subgrad(con, x, u)
            g0 = perspective_value(con, x, u)
            # convexity in x
            assert perspective_value(con, x2, u) >= g0 + dx @ (x2 - x) - 1e-9
            # convexity of the negated perspective in u
            lhs = -perspective_value(con, x, u2)
            rhs = -g0 + du @ (u2.as_array() - u.as_array())
            assert lhs >= rhs - 1e-9


class TestDualBounds:
    def make_problem(self, m=1):
        cons = [
            Constraint(BiaffineConstraint([[0.0]], [-1.0], [1.0], 0.0), Box([-1.0], [1.0]))
            for _ in range(m)
        ]
        return RobustProblem(c=[1.0], domain=Box([-2.0], [2.0]), constraints=cons)

    def test_lambda_bar_formula(self):
        p = self.make_problem()
        cert = SlaterCertificate(x_hat=[1.0], f_hat=[-0.5], eps_hat=1.0, v_lower=0.0)
        assert dual_bounds(p, cert).lambda_bar == pytest.approx(2.0)

    def test_r_w_formula(self):
        p = RobustProblem(c=[1.0], domain=Box([-2.0], [2.0]), eq_A=[[1.0]], eq_b=[1.0])
        cert = SlaterCertificate(x_hat=[1.0], f_hat=np.zeros(0), eps_hat=1.0, v_lower=0.0)
        b = dual_bounds(p, cert)
        assert b.r_w == pytest.approx(2.0)  # (1/1)*((1-0)/1 + 1)

    def test_vacuous_case(self):
        p = RobustProblem(c=[0.0], domain=Box([-1.0], [1.0]))
        cert = SlaterCertificate(x_hat=[0.5], f_hat=np.zeros(0), eps_hat=0.5, v_lower=-1.0)
        b = dual_bounds(p, cert)
        assert b.lambda_bar == 0.0 and b.r_w == 0.0 and b.r_u.size == 0

    def test_r_u_scaling(self):
        p = self.make_problem()
        cert = SlaterCertificate(x_hat=[1.5], f_hat=[-0.5], eps_hat=0.5, v_lower=-3.0)
        b = dual_bounds(p, cert)
        assert b.r_u[0] == pytest.approx(b.lambda_bar * np.sqrt(2.0))

    def test_not_strictly_feasible(self):
        with pytest.raises(NotStrictlyFeasible):
            SlaterCertificate(x_hat=[1.0], f_hat=[0.0], eps_hat=1.0, v_lower=0.0)

    def test_monotone_in_v_lower(self):
        p = self.make_problem()
        lam = []
        for vl in (-3.0, -1.0, 0.0):
            cert = SlaterCertificate(x_hat=[1.0], f_hat=[-0.5], eps_hat=1.0, v_lower=vl)
            lam.append(dual_bounds(p, cert).lambda_bar)
        assert lam[0] >= lam[1] >= lam[2]


class TestRPi:
    def test_no_constraints_gives_norm_c(self):
        p = RobustProblem(c=[3.0, 4.0], domain=L2Ball(1.0))
        compiled = compile_biaffine(p)
        b = dual_bounds(p, SlaterCertificate([0.0, 0.0], np.zeros(0), 1.0, -6.0))
        assert r_pi_bound(compiled, b) == pytest.approx(5.0)

    def test_identity_slice(self):
        # Qt = [Q d] = identity 2x3 slice with ||Qt|| = 1, lambda_bar = 1, R = 1
        o = BiaffineConstraint(Q=np.array([[1.0, 0.0], [0.0, 1.0]]), d=[0.0, 0.0],
                               q=[0.0, 0.0], gamma=-2.0)
        p = RobustProblem(c=[3.0, 4.0], domain=L2Ball(1.0),
                          constraints=[Constraint(o, L2Ball(1.0))])
        compiled = compile_biaffine(p)
        cert = SlaterCertificate([0.0, 0.0], [-1.0], 1.0, -1.0)
        b = dual_bounds(p, cert)
        assert b.lambda_bar == pytest.approx(1.0)
        assert r_pi_bound(compiled, b) == pytest.approx(5.0 + 2.0)

    def test_zero_everything(self):
        p = RobustProblem(c=[0.0, 0.0], domain=L2Ball(1.0))
        compiled = compile_biaffine(p)
        b = dual_bounds(p, SlaterCertificate([0.0, 0.0], np.zeros(0), 0.5, -1.0))
        assert r_pi_bound(compiled, b) == 0.0


def test_oracle_failure_wrapping():
    from rsp.errors import OracleFailure

    def boom(x, z):
        raise RuntimeError("user oracle broke")

    con = Constraint(GeneralOracle(boom, boom, boom), LinfBall(1.0), zdim=1)
    u = LiftedVar(np.array([0.5]), 1.0)
    with pytest.raises(OracleFailure):
        perspective_value(con, np.zeros(1), u)
    with pytest.raises(OracleFailure):
        perspective_subgrad(con, np.zeros(1), u)
