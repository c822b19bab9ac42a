import math

import numpy as np
import pytest

from linehaul.encode import Qubo, decode, encode_qubo, qubo_energy
from linehaul.errors import InfeasibleCommodity
from linehaul.model import build_mip, check_feasibility, objective_value
from linehaul.preprocess import build_restriction_matrix, restrict
from linehaul.solve import (
    AnnealSchedule,
    auto_schedule,
    exact_solve,
    greedy_construct,
    hybrid_solve,
    simulated_anneal,
)

from conftest import make_t1
from oracles import exhaustive_best_objective, random_complete_instance


def _pipeline(inst, max_hops=2):
    pre = restrict(inst, build_restriction_matrix(inst), max_hops)
    m = build_mip(inst, pre)
    return pre, m, encode_qubo(m)


# --- simulated annealing ----------------------------------------------------


def test_single_variable_descent():
    q = Qubo(size=1, terms={(0, 0): -1.0})
    sched = AnnealSchedule(sweeps=10, restarts=2, beta_start=0.5, beta_end=5.0, seed=1)
    result = simulated_anneal(q, sched)
    assert result.best_bits() == (1,)
    assert result.best_energy() == -1.0


def test_anneal_finds_t1_optimum(t1_wide):
    _, m, q = _pipeline(t1_wide)
    sched = auto_schedule(q, sweeps=500, restarts=8, seed=42)
    result = simulated_anneal(q, sched)
    a = decode(q, result.best_bits(), repair=True)
    assert objective_value(m, a) == 10.0


def test_anneal_deterministic(t1_wide):
    _, _, q = _pipeline(t1_wide)
    sched = auto_schedule(q, sweeps=200, restarts=4, seed=42)
    assert simulated_anneal(q, sched) == simulated_anneal(q, sched)


def test_sampleset_invariants(t1_wide):
    _, _, q = _pipeline(t1_wide)
    sched = auto_schedule(q, sweeps=100, restarts=5, seed=3)
    result = simulated_anneal(q, sched)
    assert len(result.samples) == 2 * sched.restarts  # best + final per restart
    energies = []
    for bits, energy, restart in result.samples:
        assert energy == qubo_energy(q, bits)
        assert 0 <= restart < sched.restarts
        energies.append(energy)
    best = min(range(len(energies)), key=lambda i: (energies[i], i))
    assert result.best == best


def test_best_energy_monotone_in_restart_prefix(t1_wide):
    _, _, q = _pipeline(t1_wide)
    previous = math.inf
    for restarts in (1, 2, 4, 8):
        sched = auto_schedule(q, sweeps=150, restarts=restarts, seed=11)
        best = simulated_anneal(q, sched).best_energy()
        assert best <= previous + 1e-12
        previous = best


def test_anneal_rejects_empty_model():
    with pytest.raises(ValueError):
        simulated_anneal(Qubo(size=0, terms={}), AnnealSchedule())


def test_schedule_validation():
    with pytest.raises(ValueError):
        AnnealSchedule(sweeps=0)
    with pytest.raises(ValueError):
        AnnealSchedule(beta_start=2.0, beta_end=1.0)


# --- greedy -----------------------------------------------------------------


def test_greedy_t1_direct(t1):
    pre, m, _ = _pipeline(t1)
    a = greedy_construct(t1, pre)
    assert objective_value(m, a) == 10.0
    assert check_feasibility(m, a).feasible


def test_greedy_t2_ships_direct(t2):
    pre, m, _ = _pipeline(t2)
    a = greedy_construct(t2, pre)
    assert objective_value(m, a) == 16.0  # quickest paths, no consolidation


def test_greedy_zero_commodities():
    import json

    from linehaul.instance import load_instance

    from conftest import t1_document

    doc = json.loads(t1_document())
    doc["commodities"] = []
    inst = load_instance(json.dumps(doc))
    pre, m, _ = _pipeline(inst)
    a = greedy_construct(inst, pre)
    assert objective_value(m, a) == 0.0


def test_greedy_raises_without_paths():
    tight = make_t1(tat=5)
    pre = restrict(tight, build_restriction_matrix(tight), 2)
    with pytest.raises(InfeasibleCommodity):
        greedy_construct(tight, pre)


def test_greedy_always_feasible_random():
    rng = np.random.default_rng(17)
    for _ in range(20):
        inst = random_complete_instance(rng, max_nodes=5, max_commodities=4)
        pre = restrict(inst, build_restriction_matrix(inst), 3)
        m = build_mip(inst, pre)
        a = greedy_construct(inst, pre)
        assert check_feasibility(m, a).feasible


# --- hybrid -----------------------------------------------------------------


def test_hybrid_t1(t1):
    _, m, q = _pipeline(t1)
    res = hybrid_solve(m, q, auto_schedule(q, sweeps=300, restarts=4, seed=5))
    assert res.objective == 10.0
    assert res.feasible
    assert res.solver_name == "hybrid"


def test_hybrid_t2_escapes_greedy(t2):
    _, m, q = _pipeline(t2)
    res = hybrid_solve(m, q, auto_schedule(q, sweeps=2000, restarts=16, seed=7))
    assert res.objective == 9.0


def test_hybrid_zero_time_limit_returns_greedy(t2):
    pre, m, q = _pipeline(t2)
    res = hybrid_solve(m, q, auto_schedule(q, sweeps=2000, restarts=16, seed=7), time_limit=0)
    greedy_obj = objective_value(m, greedy_construct(t2, pre))
    assert res.objective == greedy_obj == 16.0


def test_hybrid_never_worse_than_greedy():
    rng = np.random.default_rng(23)
    for seed in range(8):
        inst = random_complete_instance(rng, max_nodes=4, max_commodities=3)
        pre = restrict(inst, build_restriction_matrix(inst), 3)
        m = build_mip(inst, pre)
        q = encode_qubo(m)
        res = hybrid_solve(m, q, auto_schedule(q, sweeps=300, restarts=4, seed=seed))
        greedy_obj = objective_value(m, greedy_construct(inst, pre))
        assert res.objective <= greedy_obj + 1e-9
        assert res.feasible
        assert check_feasibility(m, res.assignment).feasible
        assert abs(objective_value(m, res.assignment) - res.objective) <= 1e-9


# --- exact ------------------------------------------------------------------


def test_exact_t1(t1):
    pre, m, _ = _pipeline(t1)
    res = exact_solve(t1, pre)
    assert res.objective == 10.0
    assert res.gap == 0.0
    assert res.bound == 10.0
    assert check_feasibility(m, res.assignment).feasible


def test_exact_t2(t2):
    pre, _, _ = _pipeline(t2)
    res = exact_solve(t2, pre)
    assert res.objective == 9.0
    assert res.gap == 0.0


def test_exact_node_limit_reports_honest_gap(t2):
    pre, _, _ = _pipeline(t2)
    res = exact_solve(t2, pre, node_limit=1)
    assert res.objective == 9.0  # first dive follows the best bound
    assert res.gap > 0.0
    assert res.bound < res.objective
    assert "node_limit_exceeded" in res.annotations


def test_exact_matches_exhaustive_enumeration():
    rng = np.random.default_rng(29)
    for _ in range(25):
        inst = random_complete_instance(rng, max_nodes=5, max_commodities=4)
        pre = restrict(inst, build_restriction_matrix(inst), 3)
        m = build_mip(inst, pre)
        res = exact_solve(inst, pre)
        oracle = exhaustive_best_objective(inst, pre)
        assert math.isclose(res.objective, oracle, rel_tol=0, abs_tol=1e-9)
        assert res.gap == 0.0
        assert check_feasibility(m, res.assignment).feasible
        assert abs(objective_value(m, res.assignment) - res.objective) <= 1e-9


def test_exact_budget_bound_is_admissible():
    rng = np.random.default_rng(31)
    for _ in range(15):
        inst = random_complete_instance(rng, max_nodes=5, max_commodities=3)
        pre = restrict(inst, build_restriction_matrix(inst), 3)
        optimum = exhaustive_best_objective(inst, pre)
        budget = exact_solve(inst, pre, node_limit=1)
        assert budget.bound <= optimum + 1e-9
        assert budget.objective >= optimum - 1e-9


def test_exact_zero_commodities():
    import json

    from linehaul.instance import load_instance

    from conftest import t1_document

    doc = json.loads(t1_document())
    doc["commodities"] = []
    inst = load_instance(json.dumps(doc))
    pre = restrict(inst, build_restriction_matrix(inst), 2)
    res = exact_solve(inst, pre)
    assert res.objective == 0.0
    assert res.gap == 0.0
