import numpy as np
import pytest

from rsp.model import BiaffineConstraint, Constraint, RobustProblem
from rsp.sets import Box, L2Ball


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def robust_lp_1d():
    """min x s.t. x >= z for z in [-1, 1], X = [-2, 2]; optimum x* = 1."""
    return RobustProblem(
        c=[1.0],
        domain=Box([-2.0], [2.0]),
        constraints=[
            Constraint(
                BiaffineConstraint(Q=[[0.0]], d=[-1.0], q=[1.0], gamma=0.0),
                Box([-1.0], [1.0]),
            )
        ],
    )


def robust_lp_2d():
    """min -x1-x2 s.t. z.x <= 1 for ||z|| <= 1, X = box(2); x* = (1,1)/sqrt(2)."""
    return RobustProblem(
        c=[-1.0, -1.0],
        domain=Box([-2.0, -2.0], [2.0, 2.0]),
        constraints=[
            Constraint(
                BiaffineConstraint(Q=np.eye(2), d=[0.0, 0.0], q=[0.0, 0.0], gamma=-1.0),
                L2Ball(1.0),
            )
        ],
    )


def papc_scalar_fixture():
    """min -x s.t. x z <= 0.5 for |z| <= 1, X = [-1, 1]; optimum x* = 0.5."""
    return RobustProblem(
        c=[-1.0],
        domain=Box([-1.0], [1.0]),
        constraints=[
            Constraint(
                BiaffineConstraint(Q=[[1.0]], d=[0.0], q=[0.0], gamma=-0.5),
                L2Ball(1.0),
            )
        ],
    )


def infeasible_fixture():
    """x + z <= 0 for z in [-1,1] with X = [1, 2]: empty robust feasible set."""
    return RobustProblem(
        c=[1.0],
        domain=Box([1.0], [2.0]),
        constraints=[
            Constraint(
                BiaffineConstraint(Q=[[0.0]], d=[1.0], q=[1.0], gamma=0.0),
                Box([-1.0], [1.0]),
            )
        ],
    )


def slater_region_fixture():
    """x + z <= 0 for z in [-1,1] with X = [-2, 2]: feasible iff x <= -1."""
    return RobustProblem(
        c=[1.0],
        domain=Box([-2.0], [2.0]),
        constraints=[
            Constraint(
                BiaffineConstraint(Q=[[0.0]], d=[1.0], q=[1.0], gamma=0.0),
                Box([-1.0], [1.0]),
            )
        ],
    )
