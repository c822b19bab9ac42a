"""Samplers and solvers over the encoded model.

simulated_anneal is a classical single-flip Metropolis sampler standing in
for the annealing hardware: per restart, a deterministic substream seeded by
(seed, restart) drives random init, per-sweep visit order and acceptance
draws, with an inverse temperature ramped geometrically across sweeps.
hybrid_solve wraps it the way the hardware hybrid workflow does: a greedy
incumbent seeds one restart, every sample is decoded with capacity repair,
and the best feasible assignment wins (the incumbent is the floor).

exact_solve is the in-repo optimality oracle: branch and bound over each
commodity's enumerated paths with an admissible fractional-vehicle bound.

The sweep kernel is jitted with numba when available; all randomness is
drawn outside the kernel, so results are identical either way.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleCommodity
from .encode import Qubo, assignment_to_bits, decode, qubo_energy
from .instance import Arc, Instance
from .model import (
    Assignment,
    MipModel,
    ceil_div,
    check_feasibility,
    kept_commodities,
    mip_gap,
    n_arcs_for,
    objective_value,
    x_keys_for,
)
from .preprocess import PreprocessedInstance

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    _HAVE_NUMBA = False

_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class AnnealSchedule:
    sweeps: int = 2000
    restarts: int = 8
    beta_start: float = 0.1
    beta_end: float = 10.0
    seed: int = 0

    def __post_init__(self):
        if self.sweeps < 1 or self.restarts < 1:
            raise ValueError("sweeps and restarts must be >= 1")
        if not 0 < self.beta_start < self.beta_end:
            raise ValueError("need 0 < beta_start < beta_end")


@dataclass(frozen=True)
class SampleSet:
    samples: tuple[tuple[tuple[int, ...], float, int], ...]  # (bits, energy, restart)
    best: int

    def best_bits(self) -> tuple[int, ...]:
        return self.samples[self.best][0]

    def best_energy(self) -> float:
        return self.samples[self.best][1]


@dataclass(frozen=True)
class SolveResult:
    assignment: Assignment
    objective: float
    feasible: bool
    bound: float  # certified lower bound; 0 for heuristics
    gap: float
    wall_time: float
    solver_name: str
    annotations: tuple[str, ...] = ()


def _sweep(bits, field, diag, indptr, indices, data, beta, order, unif, accept, energy):
    """One Metropolis sweep; mutates bits/field/accept, returns
    (energy, best energy seen, position of the best state in the sweep)."""
    best_e = energy
    best_pos = -1
    for pos in range(order.shape[0]):
        v = order[pos]
        delta = (1 - 2 * bits[v]) * (diag[v] + field[v])
        if delta <= 0.0 or unif[pos] < math.exp(-beta * delta):
            step = 1 - 2 * bits[v]
            bits[v] = 1 - bits[v]
            energy += delta
            for t in range(indptr[v], indptr[v + 1]):
                field[indices[t]] += step * data[t]
            accept[pos] = 1
            if energy < best_e:
                best_e = energy
                best_pos = pos
        else:
            accept[pos] = 0
    return energy, best_e, best_pos


if _HAVE_NUMBA:
    _sweep_kernel = njit(cache=True)(_sweep)
else:  # pragma: no cover
    _sweep_kernel = _sweep


def _csr(q: Qubo):
    """Symmetric off-diagonal adjacency in CSR form plus the diagonal."""
    diag = np.zeros(q.size, dtype=np.float64)
    neighbor_lists: list[list[tuple[int, float]]] = [[] for _ in range(q.size)]
    for (p, r), coeff in q.terms.items():
        if p == r:
            diag[p] = coeff
        else:
            neighbor_lists[p].append((r, coeff))
            neighbor_lists[r].append((p, coeff))
    indptr = np.zeros(q.size + 1, dtype=np.int64)
    total = 0
    for v, row in enumerate(neighbor_lists):
        row.sort()
        total += len(row)
        indptr[v + 1] = total
    indices = np.zeros(total, dtype=np.int64)
    data = np.zeros(total, dtype=np.float64)
    pos = 0
    for row in neighbor_lists:
        for r, coeff in row:
            indices[pos] = r
            data[pos] = coeff
            pos += 1
    rows = np.repeat(np.arange(q.size, dtype=np.int64), np.diff(indptr))
    return diag, indptr, indices, data, rows


def _field_of(bits, data, indices, rows, size):
    if len(data) == 0:
        return np.zeros(size, dtype=np.float64)
    return np.bincount(rows, weights=data * bits[indices], minlength=size)


def _restart_rng(seed: int, restart: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence([seed & _SEED_MASK, restart]))
    )


def _betas(sched: AnnealSchedule) -> np.ndarray:
    if sched.sweeps == 1:
        return np.array([sched.beta_end])
    t = np.arange(sched.sweeps) / (sched.sweeps - 1)
    return sched.beta_start * (sched.beta_end / sched.beta_start) ** t


def auto_schedule(
    q: Qubo, sweeps: int = 2000, restarts: int | None = None, seed: int = 0
) -> AnnealSchedule:
    """Self-scaling schedule: beta_start = ln(2)/dE_max and
    beta_end = ln(100)/dE_min, with the flip-energy extremes estimated from
    100 random states. Keeps acceptance rates sane across penalty magnitudes."""
    if restarts is None or restarts < 1:
        restarts = max(8, q.size // 64)
    if q.size == 0:
        return AnnealSchedule(sweeps, restarts, 0.1, 10.0, seed)
    diag, indptr, indices, data, rows = _csr(q)
    rng = np.random.Generator(
        np.random.PCG64(np.random.SeedSequence([seed & _SEED_MASK, 0xB_E7A]))
    )
    d_max, d_min = 0.0, math.inf
    for _ in range(100):
        bits = rng.integers(0, 2, q.size).astype(np.float64)
        field = _field_of(bits, data, indices, rows, q.size)
        deltas = np.abs((1.0 - 2.0 * bits) * (diag + field))
        nonzero = deltas[deltas > 0]
        if len(nonzero):
            d_max = max(d_max, float(nonzero.max()))
            d_min = min(d_min, float(nonzero.min()))
    if not (d_max > 0 and math.isfinite(d_min)):
        return AnnealSchedule(sweeps, restarts, 0.1, 10.0, seed)
    beta_start = math.log(2.0) / d_max
    beta_end = math.log(100.0) / d_min
    if beta_end <= beta_start:
        beta_end = beta_start * 100.0
    return AnnealSchedule(sweeps, restarts, beta_start, beta_end, seed)


def _run_restarts(q: Qubo, sched: AnnealSchedule, initial_bits=None, deadline=None):
    """Shared annealing loop. Returns (samples, truncated)."""
    diag, indptr, indices, data, rows = _csr(q)
    betas = _betas(sched)
    samples: list[tuple[tuple[int, ...], float, int]] = []
    accept = np.zeros(q.size, dtype=np.uint8)
    truncated = False
    for restart in range(sched.restarts):
        if deadline is not None and time.monotonic() >= deadline:
            truncated = True
            break
        rng = _restart_rng(sched.seed, restart)
        if restart == 0 and initial_bits is not None:
            bits = np.asarray(initial_bits, dtype=np.int8).copy()
        else:
            bits = rng.integers(0, 2, q.size).astype(np.int8)
        field = _field_of(bits, data, indices, rows, q.size)
        bf = bits.astype(np.float64)
        energy = float(q.offset + diag @ bf + 0.5 * (bf @ field))
        best_bits = bits.copy()
        best_energy = energy
        for sweep in range(sched.sweeps):
            if deadline is not None and time.monotonic() >= deadline:
                truncated = True
                break
            order = rng.permutation(q.size)
            unif = rng.random(q.size)
            start_bits = bits.copy()
            energy, sweep_best, best_pos = _sweep_kernel(
                bits, field, diag, indptr, indices, data,
                float(betas[sweep]), order, unif, accept, energy,
            )
            if sweep_best < best_energy:
                best_energy = sweep_best
                best_bits = start_bits
                if best_pos >= 0:
                    flips = order[: best_pos + 1][accept[: best_pos + 1].astype(bool)]
                    best_bits = start_bits.copy()
                    best_bits[flips] ^= 1
        samples.append((tuple(int(b) for b in best_bits), qubo_energy(q, best_bits), restart))
        samples.append((tuple(int(b) for b in bits), qubo_energy(q, bits), restart))
    return samples, truncated


def _argmin_energy(samples) -> int:
    best = 0
    for idx in range(1, len(samples)):
        if samples[idx][1] < samples[best][1]:
            best = idx
    return best


def simulated_anneal(q: Qubo, sched: AnnealSchedule) -> SampleSet:
    """Deterministic multi-restart Metropolis sampling of the QUBO."""
    if q.size < 1:
        raise ValueError("cannot anneal an empty model")
    samples, _ = _run_restarts(q, sched)
    return SampleSet(samples=tuple(samples), best=_argmin_energy(samples))


def greedy_construct(inst: Instance, pre: PreprocessedInstance) -> Assignment:
    """Quickest surviving path per commodity, fleet sized to the flows.
    Always feasible; deliberately blind to consolidation."""
    kept = kept_commodities(inst)
    for c in kept:
        if not pre.paths.get(c.id):
            raise InfeasibleCommodity(c.id)
    x = {key: 0 for key in x_keys_for(inst, pre)}
    flows: dict[Arc, float] = {}
    for c in kept:
        path = min(pre.paths[c.id], key=lambda p: (p.time, p.length_km, p.nodes))
        for arc in path.arcs():
            x[(c.id, arc[0], arc[1])] = 1
            flows[arc] = flows.get(arc, 0.0) + c.load
    n = {arc: ceil_div(flows.get(arc, 0.0), inst.vehicle_capacity) for arc in n_arcs_for(inst, pre)}
    return Assignment(x=x, n=n)


def greedy_solve(inst: Instance, pre: PreprocessedInstance, m: MipModel) -> SolveResult:
    start = time.monotonic()
    a = greedy_construct(inst, pre)
    obj = objective_value(m, a)
    return SolveResult(
        assignment=a,
        objective=obj,
        feasible=check_feasibility(m, a).feasible,
        bound=0.0,
        gap=mip_gap(obj, 0.0),
        wall_time=time.monotonic() - start,
        solver_name="greedy",
    )


def anneal_solve(m: MipModel, q: Qubo, sched: AnnealSchedule, repair: bool = True) -> SolveResult:
    """Plain annealing: best sample decoded, no incumbent floor."""
    start = time.monotonic()
    sampleset = simulated_anneal(q, sched)
    a = decode(q, sampleset.best_bits(), repair=repair)
    obj = objective_value(m, a)
    return SolveResult(
        assignment=a,
        objective=obj,
        feasible=check_feasibility(m, a).feasible,
        bound=0.0,
        gap=mip_gap(obj, 0.0),
        wall_time=time.monotonic() - start,
        solver_name="anneal",
    )


def hybrid_solve(
    m: MipModel, q: Qubo, sched: AnnealSchedule, time_limit: float | None = None
) -> SolveResult:
    """Greedy incumbent plus annealing refinement, never worse than greedy.

    One restart starts from the incumbent's bit image, the rest at random;
    every sample is decoded with capacity repair and the best feasible
    assignment by objective wins. The time limit truncates between sweeps.
    """
    start = time.monotonic()
    incumbent = greedy_construct(m.instance, m.pre)
    best_obj = objective_value(m, incumbent)
    annotations: list[str] = []

    if q.size >= 1 and (time_limit is None or time_limit > 0):
        deadline = None if time_limit is None else start + time_limit
        samples, truncated = _run_restarts(
            q, sched, initial_bits=assignment_to_bits(q, incumbent), deadline=deadline
        )
        if truncated:
            annotations.append("time_limit_truncated")
        for bits, _, _ in samples:
            a = decode(q, bits, repair=True)
            if not check_feasibility(m, a).feasible:
                continue
            obj = objective_value(m, a)
            if obj < best_obj:
                best_obj = obj
                incumbent = a

    return SolveResult(
        assignment=incumbent,
        objective=best_obj,
        feasible=True,
        bound=0.0,
        gap=mip_gap(best_obj, 0.0),
        wall_time=time.monotonic() - start,
        solver_name="hybrid",
        annotations=tuple(annotations),
    )


def exact_solve(
    inst: Instance,
    pre: PreprocessedInstance,
    node_limit: int = 10**9,
    time_limit_s: float | None = None,
) -> SolveResult:
    """Branch and bound over per-commodity path choices.

    Commodities branch largest load first; each node's lower bound is the
    fractional-vehicle cost of committed flows plus the cheapest fractional
    completion of the unassigned commodities, which never exceeds the true
    completion cost. Exhausting the tree certifies the optimum (gap 0);
    hitting the node or time budget returns the incumbent with the best
    remaining open bound.
    """
    start = time.monotonic()
    w = inst.vehicle_capacity
    cv = inst.vehicle_cost_per_km
    kept = sorted(kept_commodities(inst), key=lambda c: (-c.load, c.id))
    for c in kept:
        if not pre.paths.get(c.id):
            raise InfeasibleCommodity(c.id)

    # fractional vehicle cost of each candidate path, per commodity
    path_arcs: list[list[tuple[Arc, ...]]] = []
    path_frac: list[list[float]] = []
    for c in kept:
        arcs_list, frac_list = [], []
        for p in pre.paths[c.id]:
            arcs = p.arcs()
            arcs_list.append(arcs)
            frac_list.append(sum(inst.distances[a] * cv * c.load / w for a in arcs))
        path_arcs.append(arcs_list)
        path_frac.append(frac_list)
    depth_total = len(kept)
    suffix_min = [0.0] * (depth_total + 1)
    for d in range(depth_total - 1, -1, -1):
        suffix_min[d] = suffix_min[d + 1] + min(path_frac[d])

    def leaf_objective(flows: dict[Arc, float]) -> float:
        return sum(inst.distances[a] * cv * ceil_div(f, w) for a, f in flows.items())

    best_obj = math.inf
    best_choices: tuple[int, ...] | None = None
    open_bounds: list[float] = []
    # stack entries: (bound, depth, choices, parent flow dict, frac cost);
    # the node's own flows materialize lazily at pop, so pushing children
    # costs O(1) each
    stack = [(suffix_min[0], 0, (), {}, 0.0)]
    node_count = 0
    stopped = ""

    while stack:
        over_nodes = node_count >= node_limit
        over_time = time_limit_s is not None and time.monotonic() - start >= time_limit_s
        if (over_nodes or over_time) and best_choices is not None:
            stopped = "node_limit_exceeded" if over_nodes else "time_limit_exceeded"
            break
        bound, depth, choices, parent_flows, frac = stack.pop()
        node_count += 1
        if best_choices is not None and bound >= best_obj - 1e-12:
            continue
        if choices:
            flows = dict(parent_flows)
            load = kept[depth - 1].load
            for a in path_arcs[depth - 1][choices[-1]]:
                flows[a] = flows.get(a, 0.0) + load
        else:
            flows = parent_flows
        if depth == depth_total:
            obj = leaf_objective(flows)
            if obj < best_obj - 1e-12:
                best_obj = obj
                best_choices = choices
            continue
        children = []
        for pi in range(len(path_arcs[depth])):
            child_frac = frac + path_frac[depth][pi]
            child_bound = child_frac + suffix_min[depth + 1]
            children.append((child_bound, pi, child_frac))
        children.sort(key=lambda ch: (ch[0], ch[1]))
        if (over_nodes or over_time) and best_choices is None:
            # budget already blown: finish one dive to secure an incumbent,
            # accounting the skipped siblings as open bounds
            if not stopped:
                stopped = "node_limit_exceeded" if over_nodes else "time_limit_exceeded"
            open_bounds.extend(ch[0] for ch in children[1:])
            children = children[:1]
        for child_bound, pi, child_frac in reversed(children):
            stack.append((child_bound, depth + 1, choices + (pi,), flows, child_frac))

    exhausted = not stack and not stopped and not open_bounds
    open_bounds.extend(entry[0] for entry in stack)

    # build the assignment for the best leaf
    x = {key: 0 for key in x_keys_for(inst, pre)}
    flows: dict[Arc, float] = {}
    if best_choices is not None:
        for d, pi in enumerate(best_choices):
            c = kept[d]
            for a in path_arcs[d][pi]:
                x[(c.id, a[0], a[1])] = 1
                flows[a] = flows.get(a, 0.0) + c.load
    n = {a: ceil_div(flows.get(a, 0.0), w) for a in n_arcs_for(inst, pre)}
    assignment = Assignment(x=x, n=n)
    objective = 0.0 if best_choices is None and depth_total == 0 else best_obj

    if exhausted:
        bound_final = objective
    else:
        bound_final = min(objective, min(open_bounds, default=objective))
    annotations = (stopped,) if stopped else ()
    return SolveResult(
        assignment=assignment,
        objective=objective,
        feasible=True,
        bound=bound_final,
        gap=mip_gap(objective, bound_final),
        wall_time=time.monotonic() - start,
        solver_name="exact",
        annotations=annotations,
    )
