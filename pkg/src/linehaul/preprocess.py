"""Graph reduction before model building.

The pipeline: a restriction matrix prunes each node's allowed successors,
all simple paths per commodity are enumerated exhaustively under a hop
limit, paths over the commodity's turnaround-time budget are dropped, and
the union of arcs on surviving paths becomes that commodity's arc subset.

Paths are simple (cycles never pay with positive distances) and ordering is
deterministic everywhere: by length, then by node sequence.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import PathExplosion
from .instance import Arc, CommodityId, Instance, NodeId

DEFAULT_MAX_HOPS = 4
DEFAULT_PATH_CAP = 10_000


@dataclass(frozen=True)
class RestrictionPolicy:
    """How to prune direct successors: keep all arcs, the m nearest outgoing
    neighbors per node, or neighbors within a km radius."""

    kind: str  # "all" | "nearest_m" | "radius"
    m: int = 0
    r_km: float = 0.0

    def __post_init__(self):
        if self.kind not in ("all", "nearest_m", "radius"):
            raise ValueError(f"unknown policy kind {self.kind!r}")
        if self.kind == "nearest_m" and self.m < 1:
            raise ValueError("nearest_m requires m >= 1")
        if self.kind == "radius" and not self.r_km > 0:
            raise ValueError("radius requires r_km > 0")

    @classmethod
    def all_arcs(cls) -> "RestrictionPolicy":
        return cls("all")

    @classmethod
    def nearest_m(cls, m: int) -> "RestrictionPolicy":
        return cls("nearest_m", m=m)

    @classmethod
    def radius(cls, r_km: float) -> "RestrictionPolicy":
        return cls("radius", r_km=r_km)

    @classmethod
    def parse(cls, text: str) -> "RestrictionPolicy":
        """Parse CLI-style policy strings: "all", "nearest_m:3", "radius:7.5"."""
        if text == "all":
            return cls.all_arcs()
        kind, sep, arg = text.partition(":")
        if not sep:
            raise ValueError(f"cannot parse policy {text!r}")
        if kind == "nearest_m":
            return cls.nearest_m(int(arg))
        if kind == "radius":
            return cls.radius(float(arg))
        raise ValueError(f"cannot parse policy {text!r}")


ALL_ARCS = RestrictionPolicy("all")


@dataclass(frozen=True)
class RestrictionMatrix:
    allowed: dict[NodeId, frozenset[NodeId]]

    def permits(self, i: NodeId, j: NodeId) -> bool:
        return j in self.allowed.get(i, frozenset())


@dataclass(frozen=True)
class Path:
    nodes: tuple[NodeId, ...]
    length_km: float
    time: float

    def arcs(self) -> tuple[Arc, ...]:
        return tuple(zip(self.nodes, self.nodes[1:]))


@dataclass(frozen=True)
class PreprocessedInstance:
    paths: dict[CommodityId, tuple[Path, ...]]
    arcs_for: dict[CommodityId, frozenset[Arc]]
    union_arcs: frozenset[Arc]
    infeasible: tuple[CommodityId, ...] = ()  # commodities left with zero paths


def build_restriction_matrix(inst: Instance, policy: RestrictionPolicy = ALL_ARCS) -> RestrictionMatrix:
    outgoing: dict[NodeId, list[NodeId]] = {n: [] for n in inst.nodes}
    for (i, j) in inst.distances:
        outgoing.setdefault(i, []).append(j)

    allowed: dict[NodeId, frozenset[NodeId]] = {}
    for i, succs in outgoing.items():
        if policy.kind == "all":
            keep = succs
        elif policy.kind == "nearest_m":
            # ties broken by node-id order
            ranked = sorted(succs, key=lambda j: (inst.distances[(i, j)], j))
            keep = ranked[: policy.m]
        else:
            keep = [j for j in succs if inst.distances[(i, j)] <= policy.r_km]
        allowed[i] = frozenset(keep)
    return RestrictionMatrix(allowed=allowed)


def enumerate_paths(
    inst: Instance,
    rm: RestrictionMatrix,
    k: CommodityId,
    max_hops: int,
    cap: int = DEFAULT_PATH_CAP,
) -> list[Path]:
    """All simple origin-to-destination paths for commodity k over the
    restricted arcs, at most max_hops arcs each.

    Exhaustive DFS; raises PathExplosion past the per-commodity cap. Output
    sorted by length_km, ties by node sequence.
    """
    if max_hops < 1:
        raise ValueError("max_hops must be >= 1")
    c = inst.commodity(k)
    found: list[tuple[NodeId, ...]] = []

    def visit(node: NodeId, trail: list[NodeId]):
        if node == c.destination:
            found.append(tuple(trail))
            if len(found) > cap:
                raise PathExplosion(k, cap)
            return
        if len(trail) - 1 == max_hops:
            return
        for nxt in sorted(rm.allowed.get(node, frozenset())):
            if nxt in trail or (node, nxt) not in inst.distances:
                continue
            trail.append(nxt)
            visit(nxt, trail)
            trail.pop()

    visit(c.origin, [c.origin])
    paths = [
        Path(nodes=nodes, length_km=inst.path_length(nodes), time=inst.path_time(nodes))
        for nodes in found
    ]
    paths.sort(key=lambda p: (p.length_km, p.nodes))
    return paths


def filter_paths_by_tat(inst: Instance, paths: list[Path], k: CommodityId) -> list[Path]:
    """Keep exactly the paths within the commodity's time budget (inclusive)."""
    tat = inst.commodity(k).tat
    return [p for p in paths if p.time <= tat]


def _paths_from_origin(
    inst: Instance, rm: RestrictionMatrix, origin: NodeId, max_hops: int
) -> dict[NodeId, list[tuple[NodeId, ...]]]:
    """One DFS per origin, bucketing simple paths by endpoint. Yields the same
    per-destination sets as enumerate_paths; commodities sharing an origin
    then share the tree walk."""
    buckets: dict[NodeId, list[tuple[NodeId, ...]]] = {}

    def visit(node: NodeId, trail: list[NodeId]):
        if node != origin:
            buckets.setdefault(node, []).append(tuple(trail))
        if len(trail) - 1 == max_hops:
            return
        for nxt in sorted(rm.allowed.get(node, frozenset())):
            if nxt in trail or (node, nxt) not in inst.distances:
                continue
            trail.append(nxt)
            visit(nxt, trail)
            trail.pop()

    visit(origin, [origin])
    return buckets


def restrict(
    inst: Instance,
    rm: RestrictionMatrix,
    max_hops: int = DEFAULT_MAX_HOPS,
    cap: int = DEFAULT_PATH_CAP,
) -> PreprocessedInstance:
    """Run enumeration and TAT filtering for every commodity.

    Commodities with zero surviving paths are listed in `infeasible`, never
    silently dropped. PathExplosion propagates with the commodity id.
    """
    by_origin: dict[NodeId, dict[NodeId, list[tuple[NodeId, ...]]]] = {}
    sorted_cache: dict[tuple[NodeId, NodeId], list[Path]] = {}
    paths: dict[CommodityId, tuple[Path, ...]] = {}
    arcs_for: dict[CommodityId, frozenset[Arc]] = {}
    union: set[Arc] = set()
    infeasible: list[CommodityId] = []
    for c in inst.commodities:
        if c.origin not in by_origin:
            by_origin[c.origin] = _paths_from_origin(inst, rm, c.origin, max_hops)
        od = (c.origin, c.destination)
        if od not in sorted_cache:
            node_seqs = by_origin[c.origin].get(c.destination, [])
            if len(node_seqs) > cap:
                raise PathExplosion(c.id, cap)
            candidates = [
                Path(nodes=seq, length_km=inst.path_length(seq), time=inst.path_time(seq))
                for seq in node_seqs
            ]
            candidates.sort(key=lambda p: (p.length_km, p.nodes))
            sorted_cache[od] = candidates
        survivors = filter_paths_by_tat(inst, sorted_cache[od], c.id)
        paths[c.id] = tuple(survivors)
        arcs: set[Arc] = set()
        for p in survivors:
            arcs.update(p.arcs())
        arcs_for[c.id] = frozenset(arcs)
        union.update(arcs)
        if not survivors:
            infeasible.append(c.id)
    return PreprocessedInstance(
        paths=paths,
        arcs_for=arcs_for,
        union_arcs=frozenset(union),
        infeasible=tuple(infeasible),
    )


def paths_document(pre: PreprocessedInstance) -> dict:
    """JSON-ready view of the surviving paths: commodity -> list of node arrays."""
    return {k: [list(p.nodes) for p in plist] for k, plist in sorted(pre.paths.items())}
