import json

import pytest

from linehaul.instance import Instance, load_instance


def t1_document(tat: float = 11, capacity: float = 15) -> str:
    """Three hubs in a triangle, one 10-unit load across it. tat=11 keeps only
    the direct path; tat=12 keeps the two-hop route as well."""
    return json.dumps(
        {
            "nodes": ["1", "2", "3"],
            "arcs": [
                {"from": "1", "to": "2", "km": 6},
                {"from": "2", "to": "3", "km": 6},
                {"from": "1", "to": "3", "km": 10},
            ],
            "symmetric": True,
            "vehicle": {"capacity": capacity, "cost_per_km": 1},
            "time_model": {"speed": 1, "hop_processing_time": 0},
            "commodities": [
                {"id": "k1", "origin": "1", "destination": "3", "load": 10, "tat": tat}
            ],
        }
    )


def t2_document() -> str:
    """Consolidation fixture: two 5-unit loads into hub 3. Routing k1 through
    hub 2 shares one vehicle on (2,3) for cost 9; the greedy quickest-path
    routing ships both direct for 16 because of the 2h hop processing time."""
    return json.dumps(
        {
            "nodes": ["1", "2", "3"],
            "arcs": [
                {"from": "1", "to": "3", "km": 10},
                {"from": "1", "to": "2", "km": 3},
                {"from": "2", "to": "3", "km": 6},
            ],
            "symmetric": True,
            "vehicle": {"capacity": 15, "cost_per_km": 1},
            "time_model": {"speed": 1, "hop_processing_time": 2},
            "commodities": [
                {"id": "k1", "origin": "1", "destination": "3", "load": 5, "tat": 100},
                {"id": "k2", "origin": "2", "destination": "3", "load": 5, "tat": 100},
            ],
        }
    )


def make_t1(tat: float = 11, capacity: float = 15) -> Instance:
    return load_instance(t1_document(tat=tat, capacity=capacity))


def make_t2() -> Instance:
    return load_instance(t2_document())


@pytest.fixture
def t1() -> Instance:
    return make_t1()


@pytest.fixture
def t1_wide() -> Instance:
    return make_t1(tat=12)


@pytest.fixture
def t2() -> Instance:
    return make_t2()
