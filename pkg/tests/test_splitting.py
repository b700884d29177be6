import math

import numpy as np
import pytest

from oracles import dykstra_project
import rsp.sets as sets_mod
from rsp.errors import RankDeficient
from rsp.model import BiaffineConstraint, Constraint, RobustProblem, robust_value
from rsp.papc import compile_biaffine, default_config, papc_run
from rsp.perspective import LiftedVar, perspective_value
from rsp.sets import (
    Box,
    Intersection,
    L1Ball,
    L2Ball,
    LinfBall,
    contains,
    inscribed_radius,
    sample_point,
)
from rsp.splitting import (
    LiftedProblem,
    lift_domain_intersection,
    lift_problem,
    lift_uncertainty_intersection,
    omega_bounds,
    verify_assumption5,
)


def budgeted_problem(gamma=1.0):
    return RobustProblem(
        c=[-1.0, -2.0],
        domain=Box([-2, -2], [2, 2]),
        constraints=[
            Constraint(
                BiaffineConstraint(np.eye(2), [0.0, 0.0], [0.0, 0.0], -1.0),
                Intersection((LinfBall(1.0), L1Ball(gamma))),
                zdim=2,
            )
        ],
    )


class TestDomainLift:
    def test_single_part_identity(self):
        p = RobustProblem(c=[1.0], domain=Intersection((Box([-1.0], [1.0]),)))
        lifted = lift_domain_intersection(p)
        assert lifted.x_copies == 1 and lifted.base.n == 1
        assert isinstance(lifted.base.domain, Box)

    def test_two_part_structure(self):
        p = RobustProblem(c=[1.0, 1.0], domain=Intersection((L2Ball(1.0), Box([-1, -1], [1, 1]))))
        lifted = lift_domain_intersection(p)
        assert lifted.base.n == 4
        assert lifted.base.r == 2
        assert lifted.x_copies == 2
        # appended rows: x_1 - x_2 = 0
        np.testing.assert_array_equal(lifted.base.eq_A, [[1, 0, -1, 0], [0, 1, 0, -1]])

    def test_rank_deficient_rejected(self):
        p = RobustProblem(
            c=[1.0, 1.0], domain=Intersection((L2Ball(1.0), Box([-1, -1], [1, 1]))),
            eq_A=[[1.0, 0.0], [1.0, 0.0]], eq_b=[0.0, 0.0],
        )
        with pytest.raises(RankDeficient):
            lift_domain_intersection(p)

    def test_lifted_solve_matches_alternating_projection_oracle(self):
        # min c.x over X = L2Ball(1.1) /\ box([-1,1]x[-0.6,1]): both paths via PAPC
        dom = Intersection((L2Ball(1.1), Box([-1.0, -0.6], [1.0, 1.0])))
        c = np.array([1.0, 1.0])
        p = RobustProblem(c=c, domain=dom)
        lifted = lift_domain_intersection(p)
        comp = compile_biaffine(lifted.base)
        tr = papc_run(comp, cfg=default_config(comp, n_iters=30000))
        x_lift = lifted.unlift_x(tr.x)

        # oracle: projected gradient with the alternating-projection projector
        x = np.zeros(2)
        for k in range(1, 4000):
            x = dykstra_project(dom.parts, x - (1.0 / math.sqrt(k)) * c, tol=1e-10)
        assert abs(float(c @ x_lift) - float(c @ x)) <= 1e-3
        np.testing.assert_allclose(x_lift, x, atol=5e-3)


class TestUncertaintyLift:
    def test_budgeted_has_two_blocks(self):
        lifted = lift_uncertainty_intersection(budgeted_problem())
        assert lifted.splits == [2]
        assert isinstance(lifted.factors[0][0], LinfBall)
        assert isinstance(lifted.factors[0][1], L1Ball)

    def test_simple_sets_have_no_omegas(self):
        p = RobustProblem(
            c=[1.0], domain=Box([-1.0], [1.0]),
            constraints=[Constraint(BiaffineConstraint([[1.0]], [0.0], [0.0], 0.0),
                                    L2Ball(1.0))],
        )
        lifted = lift_uncertainty_intersection(p)
        assert lifted.splits == [1]
        assert omega_bounds(lifted, mu_bar=[1.0]) == [()]

    def test_coupling_terms_vanish_at_equal_copies(self, rng):
        p = budgeted_problem()
        lifted = lift_uncertainty_intersection(p)
        con = lifted.base.constraints[0]
        for _ in range(50):
            x = rng.uniform(-1, 1, 2)
            u = LiftedVar(rng.uniform(-0.5, 0.5, 2), rng.uniform(0.1, 2.0))
            base_val = perspective_value(con, x, u)
            omega = rng.standard_normal(3)
            copies = [u.as_array(), u.as_array()]
            coupling = float(omega @ (copies[0] - copies[1]))
            assert base_val + coupling == pytest.approx(base_val, abs=1e-12)


class TestOmegaBounds:
    def test_box_inscribed_ball(self):
        assert inscribed_radius(LinfBall(1.0), 5) == 1.0

    def test_l1_inscribed_ball_vs_oracle(self, rng):
        gamma, d = 1.3, 3
        s = L1Ball(gamma)
        # oracle: smallest boundary distance over sampled directions via bisection
        worst = math.inf
        for _ in range(500):
            u = rng.standard_normal(d)
            u /= np.linalg.norm(u)
            lo, hi = 0.0, 5.0
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if contains(s, mid * u, 0.0):
                    lo = mid
                else:
                    hi = mid
            worst = min(worst, lo)
        assert inscribed_radius(s, d) == pytest.approx(gamma / math.sqrt(d), abs=1e-3)
        assert inscribed_radius(s, d) <= worst + 1e-3

    def test_passthrough(self):
        p = budgeted_problem()
        specs = omega_bounds(p, eps=[0.5], mu_bar=[2.0])
        assert specs[0][0].mu_bar == 2.0 and specs[0][0].eps == 0.5

    def test_default_eps_uses_intersection(self):
        p = budgeted_problem(gamma=1.0)
        specs = omega_bounds(p, mu_bar=[1.0])
        assert specs[0][0].eps == pytest.approx(1.0 / math.sqrt(2.0))


class TestAssumption5:
    def test_constant_constraint(self):
        p = RobustProblem(
            c=[1.0], domain=Box([-1.0], [1.0]),
            constraints=[Constraint(
                BiaffineConstraint([[1.0]], [0.0], [0.0], -1.0), LinfBall(1.0))],
        )
        mu = verify_assumption5(p, budget=400)
        assert mu[0] == pytest.approx(1.1, abs=1e-6)

    def test_linear_vs_grid_oracle(self):
        p = RobustProblem(
            c=[1.0], domain=Box([-2.0], [2.0]),
            constraints=[Constraint(
                BiaffineConstraint([[0.0]], [1.0], [1.0], 0.0), LinfBall(1.0))],
        )
        mu = verify_assumption5(p, budget=3000)
        grid = min(x for x in np.linspace(-2, 2, 4001))
        assert mu[0] == pytest.approx(1.1 * (-grid), rel=2e-2)


class TestRoundTrip:
    def test_unlift_returns_first_copy(self):
        p = RobustProblem(c=[1.0, 1.0], domain=Intersection((L2Ball(1.0), Box([-1, -1], [1, 1]))))
        lifted = lift_domain_intersection(p)
        x = np.array([0.1, 0.2, 0.1, 0.2])
        np.testing.assert_array_equal(lifted.unlift_x(x), [0.1, 0.2])

    def test_unlifted_point_feasible_when_equalities_hold(self, rng):
        p = budgeted_problem()
        lifted = lift_problem(p)
        for _ in range(50):
            x = rng.uniform(-2, 2, lifted.base.n)
            if lifted.base.r:
                continue
            val = robust_value(
                Constraint(p.constraints[0].oracle, LinfBall(1.0), zdim=2), lifted.unlift_x(x)
            )[0]
            # with the box factor alone the worst case upper bounds the
            # budgeted worst case
            assert val >= robust_value(
                Constraint(p.constraints[0].oracle, L1Ball(1.0), zdim=2), lifted.unlift_x(x)
            )[0] - 2.0 - 1e-9


class TestInactiveCapEquivalence:
    """With Gamma >= d the l1 cap never binds and the budgeted problem
    coincides with the plain box problem."""

    def _setup(self):
        import numpy as np
        from oracles import budget_support
        from rsp.perspective import SlaterCertificate, dual_bounds

        gamma = 2.0
        z = Intersection((LinfBall(1.0), L1Ball(gamma)))
        p_split = budgeted_problem(gamma)
        p_box = RobustProblem(c=p_split.c, domain=p_split.domain,
                              constraints=[Constraint(p_split.constraints[0].oracle,
                                                      LinfBall(1.0), zdim=2)])
        lifted = lift_problem(p_split)
        om = omega_bounds(lifted, mu_bar=[1.1])
        cert = SlaterCertificate([0.0, 0.0], [-1.0], 1.0, -3.5)
        b = dual_bounds(p_box, cert)
        pess = lambda x: [budget_support(x, gamma) - 1.0]
        return lifted, om, p_box, b, pess

    def test_papc_split_matches_box_run(self):
        import numpy as np
        from rsp.papc import papc_run, papc_run_split, default_config

        lifted, om, p_box, b, pess = self._setup()
        comp_s = compile_biaffine(lifted.base)
        comp_b = compile_biaffine(p_box)
        n = 30000
        tr_s = papc_run_split(lifted, cfg=default_config(comp_s, n_iters=n,
                                                         splits=lifted.splits),
                              pessimizer=pess)
        tr_b = papc_run(comp_b, cfg=default_config(comp_b, n_iters=n))
        diff = float(np.linalg.norm(tr_s.extras["x_unlifted"] - tr_b.x))
        assert diff <= 1e-3

    def test_sgsp_split_tracks_box_run(self):
        import numpy as np
        from rsp.perspective import LiftedVar
        from rsp.sgsp import SaddleState, SgspConfig, TheoremScaled, sgsp_run, sgsp_run_split

        lifted, om, p_box, b, pess = self._setup()
        x0 = np.array([0.0, 1.0])
        policy = TheoremScaled(tau=0.7, theta=np.array([4.0]), theta_w=1.0)
        cfg = SgspConfig(n_iters=60000, step_policy=policy, checkpoint_every=60000,
                         n_constant_samples=100)
        st = lambda: SaddleState(x=x0.copy(), u=[LiftedVar(np.zeros(2), 0.0)],
                                 w=np.zeros(0))
        tr_s = sgsp_run_split(lifted, b, om, cfg, st(), pessimizer=pess)
        tr_b = sgsp_run(p_box, b, cfg, st(), pessimizer=pess)
        # the inactive extra dual blocks perturb the subgradient path, so the
        # two ergodic outputs agree at the 1e-2 scale at this budget
        diff = float(np.linalg.norm(tr_s.extras["x_unlifted"] - tr_b.x))
        assert diff <= 1e-2
