"""First-order solvers for robust convex programs via the convex-concave
saddle-point reformulation of the Lagrangian.

The public surface: set descriptors and the lifted-cone projection calculus
(`rsp.sets`), the robust problem model (`rsp.model`), perspective oracles and
dual bounds (`rsp.perspective`), the SGSP and PAPC solvers (`rsp.sgsp`,
`rsp.papc`), intersection splitting (`rsp.splitting`), the robust-QP
benchmark (`rsp.qpbench`, `rsp.bench`) and the `rsp` command line.
"""

from .model import (
    BiaffineConstraint,
    Constraint,
    GeneralOracle,
    RobustProblem,
    epigraph_lift,
    eval_constraint,
    normalize_origin,
    robust_value,
    shift_origin,
    validate_problem,
)
from .perspective import (
    DualBounds,
    LiftedVar,
    SlaterCertificate,
    dual_bounds,
    perspective_subgrad,
    perspective_value,
    r_pi_bound,
)
from .sets import (
    Box,
    ConeLiftSpec,
    Intersection,
    L1Ball,
    L2Ball,
    LinfBall,
    OmegaSpec,
    Product,
    Singleton,
    project_cone_lift,
    project_omega,
    project_simple,
    prox_support,
    scalar_root_mu,
)
from .sgsp import (
    AdaptiveNormalized,
    SaddleState,
    SgspConfig,
    TheoremScaled,
    certify,
    ergodic_average,
    sgsp_run,
    sgsp_run_split,
    slater_search,
)
from .papc import (
    CompiledBiaffine,
    PapcConfig,
    PapcState,
    certify_papc,
    compile_biaffine,
    papc_run,
    papc_run_split,
    validate_steps,
)
from .splitting import (
    LiftedProblem,
    lift_domain_intersection,
    lift_problem,
    lift_uncertainty_intersection,
    omega_bounds,
    verify_assumption5,
)
from .qpbench import (
    ConcaveQuadratic,
    QpInstance,
    concavify,
    cutting_planes,
    feasibility_gap,
    fo_pess,
    gen_instance,
    lambda_max,
    lower_bound_from_cuts,
    oco_ogd,
    optimality_gap_ratio,
    trs_solve,
    worst_case_objective,
    worst_case_value,
)
from .trace import Checkpoint, IterTrace, read_trace_csv, write_trace_csv

__version__ = "0.1.0"
