"""Independent reference implementations the tests check production code
against. Everything here is deliberately written from the definitions
(breadth-first enumeration, raw penalized objective from constraint rows,
product-of-paths search) rather than sharing code paths with the package.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from linehaul.instance import Instance
from linehaul.preprocess import PreprocessedInstance, RestrictionMatrix


def all_bit_vectors(size: int) -> np.ndarray:
    """(2^size, size) matrix of every bit vector, row index = binary value."""
    count = 1 << size
    return ((np.arange(count, dtype=np.int64)[:, None] >> np.arange(size)) & 1).astype(np.int8)


def terms_energies(q, bit_matrix: np.ndarray) -> np.ndarray:
    """Vectorized evaluation of the QUBO terms over many bit vectors; the
    tests tie this to qubo_energy on sampled rows."""
    b = bit_matrix.astype(np.float64)
    energies = np.full(len(b), q.offset, dtype=np.float64)
    for (p, r), coeff in q.terms.items():
        if p == r:
            energies += coeff * b[:, p]
        else:
            energies += coeff * b[:, p] * b[:, r]
    return energies


def penalized_energies(q, bit_matrix: np.ndarray) -> np.ndarray:
    """The energy the encoder claims to produce, recomputed from scratch:
    decoded objective plus squared flow and capacity residuals, built from
    the model's constraint rows and the varmap only."""
    m, cfg = q.model, q.config
    b = bit_matrix.astype(np.float64)
    size = q.size

    x_col = {}
    for idx, role in q.varmap.items():
        if role[0] == "x":
            x_col[(role[1], role[2], role[3])] = idx

    obj = np.zeros(size)
    for idx, role in q.varmap.items():
        if role[0] == "n":
            obj[idx] = m.objective[(role[1], role[2])] * role[3]
    energies = b @ obj

    for fc in m.flow_constraints:
        row = np.zeros(size)
        for key in fc.outgoing:
            row[x_col[key]] += 1.0
        for key in fc.incoming:
            row[x_col[key]] -= 1.0
        energies += cfg.flow_penalty * (b @ row - fc.rhs) ** 2

    for cc in m.capacity_constraints:
        row = np.zeros(size)
        for key, load in cc.terms:
            row[x_col[key]] += load / cfg.slack_unit
        for idx, role in q.varmap.items():
            if role[0] == "n" and (role[1], role[2]) == cc.arc:
                row[idx] -= m.capacity / cfg.slack_unit * role[3]
            elif role[0] == "s" and (role[1], role[2]) == cc.arc:
                row[idx] += float(role[3])
        energies += cfg.capacity_penalty * (b @ row) ** 2

    return energies


def ising_energies_exhaustive(ising, size: int) -> np.ndarray:
    """Energy of every spin vector, row index = binary value of (s+1)/2."""
    spins = all_bit_vectors(size).astype(np.float64) * 2.0 - 1.0
    energies = np.full(len(spins), ising.offset, dtype=np.float64)
    for p, bias in ising.h.items():
        energies += bias * spins[:, p]
    for (p, r), coupling in ising.J.items():
        energies += coupling * spins[:, p] * spins[:, r]
    return energies


def breadth_first_paths(
    inst: Instance, rm: RestrictionMatrix, origin: str, dest: str, max_hops: int
) -> set[tuple[str, ...]]:
    """All simple paths as node tuples, by frontier expansion."""
    done: set[tuple[str, ...]] = set()
    frontier = [(origin,)]
    for _ in range(max_hops):
        grown = []
        for trail in frontier:
            last = trail[-1]
            for j in rm.allowed.get(last, frozenset()):
                if j in trail or (last, j) not in inst.distances:
                    continue
                extended = trail + (j,)
                if j == dest:
                    done.add(extended)
                else:
                    grown.append(extended)
        frontier = grown
    return done


def exhaustive_best_objective(inst: Instance, pre: PreprocessedInstance) -> float:
    """Minimum cost over the full product of per-commodity path choices."""
    kept = [c for c in inst.commodities if c.load > 0]
    if not kept:
        return 0.0
    w = inst.vehicle_capacity
    cv = inst.vehicle_cost_per_km
    best = math.inf
    for combo in itertools.product(*(pre.paths[c.id] for c in kept)):
        flows: dict[tuple[str, str], float] = {}
        for c, path in zip(kept, combo):
            for a in zip(path.nodes, path.nodes[1:]):
                flows[a] = flows.get(a, 0.0) + c.load
        cost = sum(inst.distances[a] * cv * math.ceil(f / w - 1e-12) for a, f in flows.items())
        best = min(best, cost)
    return best


def random_complete_instance(
    rng: np.random.Generator,
    max_nodes: int,
    max_commodities: int,
    tat_slack_range=(1.0, 2.0),
) -> Instance:
    """Small complete digraph with integer-ish loads; every commodity has a
    direct arc, so a tat at least the direct time keeps it feasible."""
    from linehaul.instance import Commodity

    n = int(rng.integers(2, max_nodes + 1))
    nodes = tuple(str(i + 1) for i in range(n))
    distances = {}
    for i in nodes:
        for j in nodes:
            if i != j:
                distances[(i, j)] = float(round(rng.uniform(1.0, 20.0), 1))
    capacity = float(rng.integers(10, 21))
    pairs = [(i, j) for i in nodes for j in nodes if i != j]
    count = int(rng.integers(1, min(max_commodities, len(pairs)) + 1))
    chosen = rng.choice(len(pairs), size=count, replace=False)
    commodities = []
    for rank, pick in enumerate(chosen):
        o, d = pairs[int(pick)]
        load = float(rng.integers(1, 13))
        tat = float(rng.uniform(*tat_slack_range)) * distances[(o, d)]
        commodities.append(Commodity(f"k{rank + 1}", o, d, load, tat))
    return Instance(
        nodes=nodes,
        distances=distances,
        vehicle_capacity=capacity,
        vehicle_cost_per_km=1.0,
        commodities=tuple(commodities),
    )


def tiny_encode_problem(seed: int, max_bits: int = 20):
    """Random instance small enough to sweep every QUBO bit vector.
    Loads are multiples of a granularity dividing the capacity, keeping the
    slack groups short."""
    from linehaul.encode import encode_qubo
    from linehaul.model import build_mip
    from linehaul.instance import Commodity
    from linehaul.preprocess import ALL_ARCS, build_restriction_matrix, restrict

    rng = np.random.default_rng(seed)
    for _ in range(64):
        capacity = float(rng.choice([6.0, 12.0, 15.0]))
        grain = capacity / float(rng.choice([2, 3]))
        if rng.random() < 0.5:
            nodes = ("1", "2")
            distances = {
                ("1", "2"): float(round(rng.uniform(2, 12), 1)),
                ("2", "1"): float(round(rng.uniform(2, 12), 1)),
            }
            ods = [("1", "2"), ("2", "1")][: int(rng.integers(1, 3))]
        else:
            nodes = ("1", "2", "3")
            distances = {}
            for i in nodes:
                for j in nodes:
                    if i != j and rng.random() < 0.9:
                        distances[(i, j)] = float(round(rng.uniform(2, 12), 1))
            o, d = ("1", "3") if rng.random() < 0.5 else ("3", "1")
            if (o, d) not in distances:
                distances[(o, d)] = float(round(rng.uniform(2, 12), 1))
            ods = [(o, d)]
        commodities = tuple(
            Commodity(f"k{i + 1}", o, d, grain * float(rng.integers(1, 5)), 999.0)
            for i, (o, d) in enumerate(ods)
        )
        inst = Instance(
            nodes=nodes,
            distances=distances,
            vehicle_capacity=capacity,
            vehicle_cost_per_km=1.0,
            commodities=commodities,
        )
        pre = restrict(inst, build_restriction_matrix(inst, ALL_ARCS), 2)
        if any(not pre.paths[c.id] for c in commodities):
            continue
        m = build_mip(inst, pre)
        q = encode_qubo(m)
        if 1 <= q.size <= max_bits:
            return inst, pre, m, q
    raise RuntimeError(f"no tiny encode problem for seed {seed}")
