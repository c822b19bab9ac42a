"""Problem data model: the hub network, vehicle parameters, and commodities.

An instance is a directed graph over intermediate processing centers with
per-arc distances in km, a single vehicle type (weight capacity, cost per km)
and a list of commodities, each an origin-destination pair carrying a load
under a turnaround-time budget. Instances are immutable after construction;
every operation in this module is a pure function.

The travel-time model is: time(path) = sum(d_ij) / speed plus
hop_processing_time per intermediate node. Missing arcs are nonexistent,
not zero-length.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .errors import ParseError, SchemaError, UnknownId

NodeId = str
CommodityId = str
Arc = tuple[NodeId, NodeId]


@dataclass(frozen=True)
class Commodity:
    """One origin-destination load with its turnaround-time budget (hours)."""

    id: CommodityId
    origin: NodeId
    destination: NodeId
    load: float
    tat: float


@dataclass(frozen=True)
class Instance:
    nodes: tuple[NodeId, ...]
    distances: dict[Arc, float]  # directed arcs, km
    vehicle_capacity: float  # weight units per vehicle
    vehicle_cost_per_km: float
    commodities: tuple[Commodity, ...]
    speed: float = 1.0  # km per hour
    hop_processing_time: float = 0.0  # hours per intermediate node

    def arcs(self) -> list[Arc]:
        return list(self.distances.keys())

    def has_arc(self, i: NodeId, j: NodeId) -> bool:
        return (i, j) in self.distances

    def distance(self, i: NodeId, j: NodeId) -> float:
        try:
            return self.distances[(i, j)]
        except KeyError:
            raise UnknownId(f"no arc {i}->{j}") from None

    def commodity(self, k: CommodityId) -> Commodity:
        for c in self.commodities:
            if c.id == k:
                return c
        raise UnknownId(f"no commodity {k!r}")

    def successors(self, i: NodeId) -> list[NodeId]:
        return sorted(j for (a, j) in self.distances if a == i)

    def path_length(self, nodes: tuple[NodeId, ...]) -> float:
        return sum(self.distance(a, b) for a, b in zip(nodes, nodes[1:]))

    def path_time(self, nodes: tuple[NodeId, ...]) -> float:
        """Travel time of a node sequence under the instance time model."""
        hops = max(0, len(nodes) - 2)
        return self.path_length(nodes) / self.speed + self.hop_processing_time * hops


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    issues: tuple[tuple[str, str, str], ...]  # (severity, message, location)


_TOP_KEYS = {"nodes", "arcs", "symmetric", "vehicle", "time_model", "commodities"}
_ARC_KEYS = {"from", "to", "km"}
_VEHICLE_KEYS = {"capacity", "cost_per_km"}
_TIME_KEYS = {"speed", "hop_processing_time"}
_COMMODITY_KEYS = {"id", "origin", "destination", "load", "tat"}


def _require(obj: dict, key: str, path: str):
    if key not in obj:
        raise SchemaError(f"missing required field {key!r}", path)
    return obj[key]


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError("expected a number", path)
    return float(value)


def _string(value, path: str) -> str:
    if not isinstance(value, str):
        raise SchemaError("expected a string", path)
    return value


def _check_keys(obj: dict, allowed: set, path: str):
    if not isinstance(obj, dict):
        raise SchemaError("expected an object", path)
    for key in obj:
        if key not in allowed:
            raise SchemaError(f"unknown key {key!r}", path)


def load_instance(document: str) -> Instance:
    """Parse and schema-check an instance document (see package README).

    Raises ParseError for malformed JSON and SchemaError for structural
    problems: missing/unknown keys, wrong types, duplicate or dangling ids.
    Value-level invariants (positive capacity, positive distances, ...) are
    the job of validate_instance, which reports instead of raising.
    """
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("top level must be an object", "$")
    _check_keys(doc, _TOP_KEYS, "$")

    raw_nodes = _require(doc, "nodes", "$")
    if not isinstance(raw_nodes, list):
        raise SchemaError("expected an array", "nodes")
    nodes = tuple(_string(n, f"nodes[{p}]") for p, n in enumerate(raw_nodes))
    known = set(nodes)
    if len(known) != len(nodes):
        raise SchemaError("duplicate node id", "nodes")

    symmetric = doc.get("symmetric", False)
    if not isinstance(symmetric, bool):
        raise SchemaError("expected a boolean", "symmetric")

    raw_arcs = _require(doc, "arcs", "$")
    if not isinstance(raw_arcs, list):
        raise SchemaError("expected an array", "arcs")
    distances: dict[Arc, float] = {}
    for p, entry in enumerate(raw_arcs):
        path = f"arcs[{p}]"
        _check_keys(entry, _ARC_KEYS, path)
        i = _string(_require(entry, "from", path), path + ".from")
        j = _string(_require(entry, "to", path), path + ".to")
        km = _number(_require(entry, "km", path), path + ".km")
        for node in (i, j):
            if node not in known:
                raise SchemaError(f"unknown node {node!r}", path)
        if (i, j) in distances:
            raise SchemaError(f"duplicate arc {i}->{j}", path)
        distances[(i, j)] = km
        if symmetric and i != j:
            if (j, i) in distances:
                raise SchemaError(f"duplicate arc {j}->{i} after symmetric expansion", path)
            distances[(j, i)] = km

    raw_vehicle = _require(doc, "vehicle", "$")
    _check_keys(raw_vehicle, _VEHICLE_KEYS, "vehicle")
    capacity = _number(_require(raw_vehicle, "capacity", "vehicle"), "vehicle.capacity")
    cost_per_km = _number(_require(raw_vehicle, "cost_per_km", "vehicle"), "vehicle.cost_per_km")

    speed, hop_time = 1.0, 0.0
    if "time_model" in doc:
        raw_time = doc["time_model"]
        _check_keys(raw_time, _TIME_KEYS, "time_model")
        if "speed" in raw_time:
            speed = _number(raw_time["speed"], "time_model.speed")
        if "hop_processing_time" in raw_time:
            hop_time = _number(raw_time["hop_processing_time"], "time_model.hop_processing_time")

    raw_comms = _require(doc, "commodities", "$")
    if not isinstance(raw_comms, list):
        raise SchemaError("expected an array", "commodities")
    commodities = []
    seen_ids = set()
    for p, entry in enumerate(raw_comms):
        path = f"commodities[{p}]"
        _check_keys(entry, _COMMODITY_KEYS, path)
        cid = _string(_require(entry, "id", path), path + ".id")
        if cid in seen_ids:
            raise SchemaError(f"duplicate commodity id {cid!r}", path)
        seen_ids.add(cid)
        origin = _string(_require(entry, "origin", path), path + ".origin")
        destination = _string(_require(entry, "destination", path), path + ".destination")
        for node in (origin, destination):
            if node not in known:
                raise SchemaError(f"unknown node {node!r}", path)
        load = _number(_require(entry, "load", path), path + ".load")
        tat = _number(_require(entry, "tat", path), path + ".tat")
        commodities.append(Commodity(cid, origin, destination, load, tat))

    return Instance(
        nodes=nodes,
        distances=distances,
        vehicle_capacity=capacity,
        vehicle_cost_per_km=cost_per_km,
        commodities=tuple(commodities),
        speed=speed,
        hop_processing_time=hop_time,
    )


def dump_instance(inst: Instance) -> str:
    """Serialize an Instance back to canonical document text.

    Arcs are written fully directed (no symmetric flag) and sorted, so
    load -> dump -> load is the identity.
    """
    doc = {
        "nodes": list(inst.nodes),
        "arcs": [
            {"from": i, "to": j, "km": inst.distances[(i, j)]}
            for (i, j) in sorted(inst.distances)
        ],
        "vehicle": {
            "capacity": inst.vehicle_capacity,
            "cost_per_km": inst.vehicle_cost_per_km,
        },
        "time_model": {
            "speed": inst.speed,
            "hop_processing_time": inst.hop_processing_time,
        },
        "commodities": [
            {
                "id": c.id,
                "origin": c.origin,
                "destination": c.destination,
                "load": c.load,
                "tat": c.tat,
            }
            for c in inst.commodities
        ],
    }
    return json.dumps(doc, indent=2)


def validate_instance(inst: Instance) -> ValidationReport:
    """Report every invariant violation. Never raises; pure function of inst."""
    issues: list[tuple[str, str, str]] = []

    def err(message, location):
        issues.append(("error", message, location))

    def warn(message, location):
        issues.append(("warning", message, location))

    known = set(inst.nodes)
    if len(known) != len(inst.nodes):
        err("duplicate node id", "nodes")

    for (i, j), km in inst.distances.items():
        where = f"arc {i}->{j}"
        if i == j:
            err("self-arc not allowed", where)
        for node in (i, j):
            if node not in known:
                err(f"unknown node {node!r}", where)
        if not isinstance(km, (int, float)) or not math.isfinite(km):
            err("distance must be finite", where)
        elif km <= 0:
            err("distance must be positive", where)

    if not (math.isfinite(inst.vehicle_capacity) and inst.vehicle_capacity > 0):
        err("vehicle_capacity must be positive", "vehicle.capacity")
    if not (math.isfinite(inst.vehicle_cost_per_km) and inst.vehicle_cost_per_km > 0):
        err("vehicle_cost_per_km must be positive", "vehicle.cost_per_km")
    if not (math.isfinite(inst.speed) and inst.speed > 0):
        err("speed must be positive", "time_model.speed")
    if not (math.isfinite(inst.hop_processing_time) and inst.hop_processing_time >= 0):
        err("hop_processing_time must be nonnegative", "time_model.hop_processing_time")

    seen = set()
    for c in inst.commodities:
        where = f"commodity {c.id}"
        if c.id in seen:
            err("duplicate commodity id", where)
        seen.add(c.id)
        for node in (c.origin, c.destination):
            if node not in known:
                err(f"unknown node {node!r}", where)
        if c.origin == c.destination:
            err("origin equals destination", where)
        if not (isinstance(c.load, (int, float)) and math.isfinite(c.load) and c.load >= 0):
            err("load must be nonnegative", where)
        elif c.load == 0:
            warn("zero load; commodity is dropped when the model is built", where)
        if not (isinstance(c.tat, (int, float)) and math.isfinite(c.tat) and c.tat > 0):
            err("tat must be positive", where)

    ok = not any(severity == "error" for severity, _, _ in issues)
    return ValidationReport(ok=ok, issues=tuple(issues))


def supply_value(inst: Instance, k: CommodityId, i: NodeId) -> float:
    """Net supply of commodity k at node i: +load at the origin, -load at the
    destination, zero elsewhere."""
    if i not in inst.nodes:
        raise UnknownId(f"no node {i!r}")
    c = inst.commodity(k)
    if i == c.origin:
        return c.load
    if i == c.destination:
        return -c.load
    return 0.0
