"""Mixed-integer model over the restricted arc sets.

Decision variables: binary route indicators x[k,i,j] on each commodity's arc
subset and integer vehicle counts N[i,j] on the union of those subsets. The
objective charges distance times per-km cost per vehicle. Flow conservation
is stored in unit-flow form (coefficients +-1, rhs in {+1,-1,0}); dividing
Eq. (load-scaled) rows by the positive load gives the same verdicts, and the
unit form keeps downstream penalty coefficients small. Capacity rows keep
their load coefficients.

Zero-load commodities are dropped at build time: their rows are vacuous and
would only add degenerate binary variables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import BoundExceedsIncumbent, InfeasibleCommodity, KeyMismatch
from .instance import Arc, Commodity, CommodityId, Instance, NodeId
from .preprocess import PreprocessedInstance

XKey = tuple[CommodityId, NodeId, NodeId]

FEAS_TOL = 1e-9  # relative feasibility tolerance


@dataclass(frozen=True)
class FlowConstraint:
    """Unit-flow conservation at one (node, commodity): out - in = rhs."""

    node: NodeId
    commodity: CommodityId
    outgoing: tuple[XKey, ...]
    incoming: tuple[XKey, ...]
    rhs: int  # +1 at the origin, -1 at the destination, 0 elsewhere
    load: float  # retained to report residuals in load scale


@dataclass(frozen=True)
class CapacityConstraint:
    """Load on one arc must fit the vehicles assigned to it."""

    arc: Arc
    terms: tuple[tuple[XKey, float], ...]  # (x key, load)


@dataclass(frozen=True)
class MipModel:
    x_keys: tuple[XKey, ...]
    n_keys: tuple[Arc, ...]
    n_max: dict[Arc, int]
    objective: dict[Arc, float]  # coefficient of N[i,j]: d_ij * cost_per_km
    flow_constraints: tuple[FlowConstraint, ...]
    capacity_constraints: tuple[CapacityConstraint, ...]
    capacity: float  # vehicle capacity W
    loads: dict[CommodityId, float]  # kept commodities only
    instance: Instance
    pre: PreprocessedInstance


@dataclass(frozen=True)
class Assignment:
    x: dict[XKey, int]
    n: dict[Arc, int]


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    flow_violations: tuple[tuple[NodeId, CommodityId, float], ...]  # residual, load scale
    capacity_violations: tuple[tuple[Arc, float], ...]  # excess weight


@dataclass(frozen=True)
class ModelStats:
    num_variables: int
    num_constraints: int


def ceil_div(x: float, w: float) -> int:
    """Smallest integer n with n*w >= x, robust to float noise near multiples."""
    return max(0, int(math.ceil(x / w - FEAS_TOL)))


def kept_commodities(inst: Instance) -> list[Commodity]:
    return [c for c in inst.commodities if c.load > 0]


def x_keys_for(inst: Instance, pre: PreprocessedInstance) -> list[XKey]:
    keys: list[XKey] = []
    for c in kept_commodities(inst):
        for (i, j) in sorted(pre.arcs_for.get(c.id, frozenset())):
            keys.append((c.id, i, j))
    return keys


def n_arcs_for(inst: Instance, pre: PreprocessedInstance) -> list[Arc]:
    union: set[Arc] = set()
    for c in kept_commodities(inst):
        union.update(pre.arcs_for.get(c.id, frozenset()))
    return sorted(union)


def variable_count(inst: Instance, pre: PreprocessedInstance) -> int:
    """Model size without building constraints; used by the sizing helper."""
    return len(x_keys_for(inst, pre)) + len(n_arcs_for(inst, pre))


def build_mip(inst: Instance, pre: PreprocessedInstance) -> MipModel:
    kept = kept_commodities(inst)
    for c in kept:
        if not pre.paths.get(c.id):
            raise InfeasibleCommodity(c.id)

    x_keys = tuple(x_keys_for(inst, pre))
    n_keys = tuple(n_arcs_for(inst, pre))
    w = inst.vehicle_capacity

    arc_load: dict[Arc, float] = {a: 0.0 for a in n_keys}
    for c in kept:
        for a in pre.arcs_for[c.id]:
            arc_load[a] += c.load
    n_max = {a: ceil_div(arc_load[a], w) for a in n_keys}
    objective = {
        (i, j): inst.distances[(i, j)] * inst.vehicle_cost_per_km for (i, j) in n_keys
    }

    flow: list[FlowConstraint] = []
    for c in kept:
        arcs = pre.arcs_for[c.id]
        for i in inst.nodes:
            outgoing = tuple((c.id, i, j) for (a, j) in sorted(arcs) if a == i)
            incoming = tuple((c.id, j, i) for (j, a) in sorted(arcs) if a == i)
            rhs = 1 if i == c.origin else (-1 if i == c.destination else 0)
            flow.append(FlowConstraint(i, c.id, outgoing, incoming, rhs, c.load))

    capacity: list[CapacityConstraint] = []
    for a in n_keys:
        terms = tuple(
            ((c.id, a[0], a[1]), c.load) for c in kept if a in pre.arcs_for[c.id]
        )
        capacity.append(CapacityConstraint(a, terms))

    return MipModel(
        x_keys=x_keys,
        n_keys=n_keys,
        n_max=n_max,
        objective=objective,
        flow_constraints=tuple(flow),
        capacity_constraints=tuple(capacity),
        capacity=w,
        loads={c.id: c.load for c in kept},
        instance=inst,
        pre=pre,
    )


def zero_assignment(m: MipModel) -> Assignment:
    return Assignment(x={k: 0 for k in m.x_keys}, n={a: 0 for a in m.n_keys})


def _check_keys(m: MipModel, a: Assignment):
    if set(a.x) != set(m.x_keys) or set(a.n) != set(m.n_keys):
        raise KeyMismatch("assignment variables do not match the model")


def objective_value(m: MipModel, a: Assignment) -> float:
    """Total deployment cost: sum of d_ij * cost_per_km * N_ij. The route
    indicators carry no cost of their own."""
    _check_keys(m, a)
    return sum(m.objective[arc] * a.n[arc] for arc in m.n_keys)


def check_feasibility(m: MipModel, a: Assignment) -> FeasibilityReport:
    _check_keys(m, a)
    flow_viol: list[tuple[NodeId, CommodityId, float]] = []
    for fc in m.flow_constraints:
        residual = sum(a.x[k] for k in fc.outgoing) - sum(a.x[k] for k in fc.incoming) - fc.rhs
        if abs(residual) > FEAS_TOL:
            flow_viol.append((fc.node, fc.commodity, residual * fc.load))
    cap_viol: list[tuple[Arc, float]] = []
    for cc in m.capacity_constraints:
        used = sum(load * a.x[k] for k, load in cc.terms)
        excess = used - a.n[cc.arc] * m.capacity
        if excess > FEAS_TOL * max(1.0, m.capacity):
            cap_viol.append((cc.arc, excess))
    return FeasibilityReport(
        feasible=not flow_viol and not cap_viol,
        flow_violations=tuple(flow_viol),
        capacity_violations=tuple(cap_viol),
    )


def model_stats(m: MipModel) -> ModelStats:
    return ModelStats(
        num_variables=len(m.x_keys) + len(m.n_keys),
        num_constraints=len(m.flow_constraints) + len(m.capacity_constraints),
    )


def mip_gap(incumbent: float, bound: float) -> float:
    """Relative distance between the best solution and the best bound,
    guarded against a zero incumbent."""
    if bound < 0 or incumbent < 0:
        raise BoundExceedsIncumbent("incumbent and bound must be nonnegative")
    if bound > incumbent:
        raise BoundExceedsIncumbent(f"bound {bound} exceeds incumbent {incumbent}")
    return abs(incumbent - bound) / (1e-10 + abs(incumbent))
