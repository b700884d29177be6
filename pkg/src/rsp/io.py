"""Instance file formats: robust problems (schema rsp-1) and QP tensors
(schema rsp-qp-1), serialized as JSON with round-trippable floats."""

import json

import numpy as np

from . import sets
from .errors import DimensionMismatch, UnsupportedSet
from .model import BiaffineConstraint, Constraint, RobustProblem
from .qpbench import QpInstance

SCHEMA_PROBLEM = "rsp-1"
SCHEMA_QP = "rsp-qp-1"


def set_to_json(s):
    if isinstance(s, sets.L2Ball):
        return {"kind": "l2ball", "radius": s.radius}
    if isinstance(s, sets.L1Ball):
        return {"kind": "l1ball", "radius": s.radius}
    if isinstance(s, sets.LinfBall):
        return {"kind": "linfball", "radius": s.radius}
    if isinstance(s, sets.Box):
        return {"kind": "box", "lo": s.lo.tolist(), "hi": s.hi.tolist()}
    if isinstance(s, sets.Singleton):
        return {"kind": "singleton", "point": s.point.tolist()}
    if isinstance(s, sets.Intersection):
        return {"kind": "intersection", "parts": [set_to_json(p) for p in s.parts]}
    if isinstance(s, sets.Product):
        return {
            "kind": "product",
            "parts": [set_to_json(p) for p in s.parts],
            "dims": list(s.dims),
        }
    raise UnsupportedSet(f"cannot serialize {type(s).__name__}")


def set_from_json(d):
    kind = d["kind"]
    if kind == "l2ball":
        return sets.L2Ball(float(d["radius"]))
    if kind == "l1ball":
        return sets.L1Ball(float(d["radius"]))
    if kind == "linfball":
        return sets.LinfBall(float(d["radius"]))
    if kind == "box":
        return sets.Box(np.array(d["lo"], dtype=float), np.array(d["hi"], dtype=float))
    if kind == "singleton":
        return sets.Singleton(np.array(d["point"], dtype=float))
    if kind == "intersection":
        return sets.Intersection(tuple(set_from_json(p) for p in d["parts"]))
    if kind == "product":
        return sets.Product(
            tuple(set_from_json(p) for p in d["parts"]), tuple(int(x) for x in d["dims"])
        )
    raise UnsupportedSet(f"unknown set kind '{kind}'")


def problem_to_json(p):
    """Serializable dict for a biaffine robust problem."""
    cons = []
    for i, con in enumerate(p.constraints):
        if not isinstance(con.oracle, BiaffineConstraint):
            raise UnsupportedSet(f"constraint {i} is not biaffine; only biaffine "
                                 "constraints serialize")
        o = con.oracle
        cons.append(
            {
                "zset": set_to_json(con.zset),
                "biaffine": {
                    "Q": o.Q.tolist(),
                    "d": o.d.tolist(),
                    "q": o.q.tolist(),
                    "gamma": o.gamma,
                },
            }
        )
    return {
        "schema": SCHEMA_PROBLEM,
        "n": p.n,
        "m": p.m,
        "r": p.r,
        "c": p.c.tolist(),
        "A": p.eq_A.tolist(),
        "b": p.eq_b.tolist(),
        "domain": set_to_json(p.domain),
        "constraints": cons,
    }


def problem_from_json(d):
    if d.get("schema") != SCHEMA_PROBLEM:
        raise DimensionMismatch(f"expected schema {SCHEMA_PROBLEM}")
    cons = []
    for cd in d["constraints"]:
        bd = cd["biaffine"]
        oracle = BiaffineConstraint(
            np.array(bd["Q"], dtype=float), np.array(bd["d"], dtype=float),
            np.array(bd["q"], dtype=float), float(bd["gamma"]),
        )
        cons.append(Constraint(oracle, set_from_json(cd["zset"])))
    A = np.array(d["A"], dtype=float) if d["r"] else None
    b = np.array(d["b"], dtype=float) if d["r"] else None
    return RobustProblem(
        c=np.array(d["c"], dtype=float), domain=set_from_json(d["domain"]),
        constraints=tuple(cons), eq_A=A, eq_b=b,
    )


def qp_to_json(inst):
    return {
        "schema": SCHEMA_QP,
        "n": inst.n,
        "K": inst.K,
        "L": inst.L,
        "m": inst.m,
        "seed": inst.seed,
        "P": inst.P.tolist(),
        "b": inst.b.tolist(),
        "c": inst.c_const.tolist(),
    }


def qp_from_json(d):
    if d.get("schema") != SCHEMA_QP:
        raise DimensionMismatch(f"expected schema {SCHEMA_QP}")
    return QpInstance(
        P=np.array(d["P"], dtype=float), b=np.array(d["b"], dtype=float),
        c_const=np.array(d["c"], dtype=float), seed=int(d["seed"]),
    )


def save_instance(obj, path):
    """Write a problem or QP instance; floats keep shortest-roundtrip form."""
    if isinstance(obj, QpInstance):
        doc = qp_to_json(obj)
    elif isinstance(obj, RobustProblem):
        doc = problem_to_json(obj)
    else:
        raise TypeError("expected a RobustProblem or QpInstance")
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def load_instance(path):
    """Load either file kind; returns a RobustProblem or QpInstance."""
    with open(path) as fh:
        d = json.load(fh)
    schema = d.get("schema")
    if schema == SCHEMA_QP:
        return qp_from_json(d)
    if schema == SCHEMA_PROBLEM:
        return problem_from_json(d)
    raise DimensionMismatch(f"unknown schema '{schema}'")
