"""Unconstrained quadratic encoding of the routing model.

Integer vehicle counts and capacity slacks are binary-expanded; flow and
capacity rows are folded into the objective as squared penalties. The
resulting energy satisfies, for EVERY bit vector b (not only feasible ones):

    energy(b) = objective(decode(b))
              + flow_penalty * sum of squared unit-flow residuals
              + capacity_penalty * sum of squared scaled capacity residuals

where the capacity residual on arc (i,j) is load/unit - N*W/unit + slack.
Loads and W are scaled by a slack unit (their common decimal granularity by
default) so the inequality becomes an equality with integer coefficients
wherever the granularity divides exactly.

QUBO coefficients are stored upper-triangular with the diagonal holding the
linear part. The Ising form uses the exact change of variables x = (1+s)/2.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import gcd

from .errors import SizeMismatch
from .instance import Arc, CommodityId
from .model import Assignment, MipModel, XKey, ceil_div

MAX_SLACK_BITS = 12


@dataclass(frozen=True)
class BitGroup:
    """Binary expansion of an integer range [0, upper].

    Weights are 1, 2, 4, ..., 2^(m-2) and a final weight upper - (2^(m-1)-1),
    so every value in the range is representable and none above it.
    """

    bits: tuple[int, ...]  # QUBO variable ids
    weights: tuple[int, ...]
    upper: int


def binary_expand(upper: int, first_bit: int = 0) -> BitGroup:
    if upper < 0:
        raise ValueError("upper must be nonnegative")
    if upper == 0:
        return BitGroup(bits=(), weights=(), upper=0)
    m = upper.bit_length()  # ceil(log2(upper + 1))
    weights = [1 << p for p in range(m - 1)]
    weights.append(upper - ((1 << (m - 1)) - 1))
    return BitGroup(
        bits=tuple(range(first_bit, first_bit + m)),
        weights=tuple(weights),
        upper=upper,
    )


def group_value(group: BitGroup, bits) -> int:
    """Integer encoded by the group's bits in a full QUBO bit vector."""
    return sum(w for b, w in zip(group.bits, group.weights) if bits[b])


def encode_int(group: BitGroup, value: int) -> dict[int, int]:
    """Bit settings representing `value`; greedy from the largest weight.

    Always succeeds for 0 <= value <= upper with this weight system.
    """
    if not 0 <= value <= group.upper:
        raise ValueError(f"{value} outside [0, {group.upper}]")
    remaining = value
    setting = {b: 0 for b in group.bits}
    for b, w in sorted(zip(group.bits, group.weights), key=lambda t: -t[1]):
        if w <= remaining:
            setting[b] = 1
            remaining -= w
    assert remaining == 0
    return setting


@dataclass(frozen=True)
class PenaltyConfig:
    flow_penalty: float
    capacity_penalty: float
    slack_unit: float

    def __post_init__(self):
        if not (self.flow_penalty > 0 and self.capacity_penalty > 0 and self.slack_unit > 0):
            raise ValueError("penalties and slack_unit must be positive")


def default_slack_unit(m: MipModel) -> float:
    """Common decimal granularity of the loads and the vehicle capacity,
    doubled until no arc needs more than MAX_SLACK_BITS slack bits."""
    values = [m.capacity] + [m.loads[k] for k in sorted(m.loads)]
    if not values:
        return 1.0
    # smallest power of ten making every value integral
    scale = 0
    for scale in range(7):
        if all(abs(v * 10**scale - round(v * 10**scale)) <= 1e-6 * max(1.0, abs(v)) for v in values):
            break
    ints = [max(1, round(v * 10**scale)) for v in values]
    g = 0
    for v in ints:
        g = gcd(g, v)
    unit = g / 10**scale
    while m.n_keys and _max_slack_bits(m, unit) > MAX_SLACK_BITS:
        unit *= 2
    return unit


def _slack_upper(n_max: int, capacity: float, unit: float) -> int:
    return int(round(n_max * capacity / unit))


def _max_slack_bits(m: MipModel, unit: float) -> int:
    return max(
        binary_expand(_slack_upper(m.n_max[a], m.capacity, unit)).upper.bit_length()
        for a in m.n_keys
    )


def penalty_floor(m: MipModel) -> float:
    """Heuristic safety bound: twice the largest cost any single commodity's
    full arc subset could incur, which dominates any of its single paths."""
    per_commodity: dict[CommodityId, float] = {}
    for (k, i, j) in m.x_keys:
        per_commodity[k] = per_commodity.get(k, 0.0) + m.objective[(i, j)]
    return 2.0 * max(per_commodity.values(), default=0.0)


def default_penalty_config(m: MipModel) -> PenaltyConfig:
    """Penalties above any achievable objective difference (factor 2 margin),
    so constraint violation is never energetically favorable."""
    max_objective = sum(m.objective[a] * m.n_max[a] for a in m.n_keys)
    p = 2.0 * max_objective if max_objective > 0 else 1.0
    return PenaltyConfig(flow_penalty=p, capacity_penalty=p, slack_unit=default_slack_unit(m))


@dataclass(frozen=True)
class Qubo:
    size: int
    terms: dict[tuple[int, int], float]  # (p, q) with p <= q; diagonal = linear
    offset: float = 0.0
    varmap: dict[int, tuple] = field(default_factory=dict)
    # provenance of the encoding; None for bare QUBOs built directly
    model: MipModel | None = None
    config: PenaltyConfig | None = None
    x_index: dict[XKey, int] = field(default_factory=dict)
    n_groups: dict[Arc, BitGroup] = field(default_factory=dict)
    s_groups: dict[Arc, BitGroup] = field(default_factory=dict)
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class Ising:
    h: dict[int, float]
    J: dict[tuple[int, int], float]  # (p, q) with p < q
    offset: float


def _add_term(terms: dict, p: int, q: int, value: float):
    key = (p, q) if p <= q else (q, p)
    terms[key] = terms.get(key, 0.0) + value


def _add_square(terms: dict, linear: list[tuple[int, float]], const: float, weight: float) -> float:
    """Accumulate weight * (sum a_t b_t + const)^2 over binary b; returns the
    constant part for the offset."""
    for t, (p, a) in enumerate(linear):
        _add_term(terms, p, p, weight * (a * a + 2.0 * const * a))
        for (q, b) in linear[t + 1 :]:
            _add_term(terms, p, q, 2.0 * weight * a * b)
    return weight * const * const


def _scaled(value: float, unit: float) -> float:
    ratio = value / unit
    snapped = round(ratio)
    return float(snapped) if abs(ratio - snapped) <= 1e-6 else ratio


def encode_qubo(m: MipModel, cfg: PenaltyConfig | None = None) -> Qubo:
    if not m.x_keys and not m.n_keys:
        empty_cfg = cfg or PenaltyConfig(1.0, 1.0, 1.0)
        return Qubo(0, {}, 0.0, {}, m, empty_cfg, {}, {}, {})
    if cfg is None:
        cfg = default_penalty_config(m)

    varmap: dict[int, tuple] = {}
    x_index: dict[XKey, int] = {}
    next_id = 0
    for key in m.x_keys:
        x_index[key] = next_id
        varmap[next_id] = ("x",) + key
        next_id += 1

    n_groups: dict[Arc, BitGroup] = {}
    for arc in m.n_keys:
        group = binary_expand(m.n_max[arc], next_id)
        n_groups[arc] = group
        for b, w in zip(group.bits, group.weights):
            varmap[b] = ("n", arc[0], arc[1], w)
        next_id += len(group.bits)

    s_groups: dict[Arc, BitGroup] = {}
    for arc in m.n_keys:
        group = binary_expand(_slack_upper(m.n_max[arc], m.capacity, cfg.slack_unit), next_id)
        s_groups[arc] = group
        for b, w in zip(group.bits, group.weights):
            varmap[b] = ("s", arc[0], arc[1], w)
        next_id += len(group.bits)

    terms: dict[tuple[int, int], float] = {}
    offset = 0.0

    # deployment cost, linear in the vehicle-count bits
    for arc in m.n_keys:
        coeff = m.objective[arc]
        group = n_groups[arc]
        for b, w in zip(group.bits, group.weights):
            _add_term(terms, b, b, coeff * w)

    # flow conservation penalties in unit-flow form
    for fc in m.flow_constraints:
        linear = [(x_index[k], 1.0) for k in fc.outgoing]
        linear += [(x_index[k], -1.0) for k in fc.incoming]
        offset += _add_square(terms, linear, -float(fc.rhs), cfg.flow_penalty)

    # capacity penalties: load/unit - N*W/unit + slack = 0 at feasibility
    cap_scaled = _scaled(m.capacity, cfg.slack_unit)
    for cc in m.capacity_constraints:
        linear = [(x_index[k], _scaled(load, cfg.slack_unit)) for k, load in cc.terms]
        for b, w in zip(n_groups[cc.arc].bits, n_groups[cc.arc].weights):
            linear.append((b, -cap_scaled * w))
        for b, w in zip(s_groups[cc.arc].bits, s_groups[cc.arc].weights):
            linear.append((b, float(w)))
        offset += _add_square(terms, linear, 0.0, cfg.capacity_penalty)

    terms = {key: v for key, v in terms.items() if v != 0.0}

    warnings = []
    floor = penalty_floor(m)
    if cfg.flow_penalty < floor:
        warnings.append(
            f"flow_penalty {cfg.flow_penalty:g} below the safety floor {floor:g}; "
            "minimum-energy states may violate flow conservation"
        )

    return Qubo(
        size=next_id,
        terms=terms,
        offset=offset,
        varmap=varmap,
        model=m,
        config=cfg,
        x_index=x_index,
        n_groups=n_groups,
        s_groups=s_groups,
        warnings=tuple(warnings),
    )


def qubo_energy(q: Qubo, bits) -> float:
    if len(bits) != q.size:
        raise SizeMismatch(f"expected {q.size} bits, got {len(bits)}")
    total = q.offset
    for (p, r), coeff in q.terms.items():
        if bits[p] and bits[r]:
            total += coeff
    return total


def qubo_to_ising(q: Qubo) -> Ising:
    """Exact change of variables x = (1 + s) / 2: diagonal terms map to spin
    biases, cross terms to couplings."""
    h: dict[int, float] = {}
    J: dict[tuple[int, int], float] = {}
    offset = q.offset
    for (p, r), coeff in q.terms.items():
        if p == r:
            h[p] = h.get(p, 0.0) + coeff / 2.0
            offset += coeff / 2.0
        else:
            J[(p, r)] = J.get((p, r), 0.0) + coeff / 4.0
            h[p] = h.get(p, 0.0) + coeff / 4.0
            h[r] = h.get(r, 0.0) + coeff / 4.0
            offset += coeff / 4.0
    h = {p: v for p, v in h.items() if v != 0.0}
    J = {key: v for key, v in J.items() if v != 0.0}
    return Ising(h=h, J=J, offset=offset)


def ising_energy(ising: Ising, spins) -> float:
    total = ising.offset
    for p, bias in ising.h.items():
        total += bias * spins[p]
    for (p, r), coupling in ising.J.items():
        total += coupling * spins[p] * spins[r]
    return total


def decode(q: Qubo, bits, repair: bool = False) -> Assignment:
    """Read an assignment out of a bit vector.

    With repair=True the decoded vehicle counts are discarded and recomputed
    as the minimum fleet covering the decoded flows, which guarantees the
    capacity rows; flow violations are left alone.
    """
    if len(bits) != q.size:
        raise SizeMismatch(f"expected {q.size} bits, got {len(bits)}")
    if q.model is None:
        raise ValueError("decode requires an encoder-produced qubo")
    m = q.model
    x = {key: int(bool(bits[q.x_index[key]])) for key in m.x_keys}
    if repair:
        n = {}
        for cc in m.capacity_constraints:
            flow = sum(load * x[key] for key, load in cc.terms)
            n[cc.arc] = ceil_div(flow, m.capacity)
    else:
        n = {arc: group_value(q.n_groups[arc], bits) for arc in m.n_keys}
    return Assignment(x=x, n=n)


def assignment_to_bits(q: Qubo, a: Assignment) -> list[int]:
    """Bit image of an assignment (x and N directly, slack to tighten each
    capacity row), used to seed annealing restarts."""
    bits = [0] * q.size
    for key, value in a.x.items():
        bits[q.x_index[key]] = int(value)
    m = q.model
    for cc in m.capacity_constraints:
        arc = cc.arc
        n_val = min(a.n[arc], q.n_groups[arc].upper)
        for b, v in encode_int(q.n_groups[arc], n_val).items():
            bits[b] = v
        flow = sum(load * a.x[key] for key, load in cc.terms)
        slack = round((n_val * m.capacity - flow) / q.config.slack_unit)
        slack = min(max(slack, 0), q.s_groups[arc].upper)
        for b, v in encode_int(q.s_groups[arc], slack).items():
            bits[b] = v
    return bits


def qubo_file_text(q: Qubo) -> str:
    """Render the QUBO in the text format: comments, a `p qubo` header,
    one `p q coefficient` line per term, offset in a trailing comment."""
    diagonal = sorted((p, r) for (p, r) in q.terms if p == r)
    off_diagonal = sorted((p, r) for (p, r) in q.terms if p != r)
    lines = [
        "c linehaul qubo",
        f"p qubo 0 {q.size} {len(diagonal)} {len(off_diagonal)}",
    ]
    for p, r in diagonal:
        lines.append(f"{p} {r} {q.terms[(p, r)]!r}")
    for p, r in off_diagonal:
        lines.append(f"{p} {r} {q.terms[(p, r)]!r}")
    lines.append(f"c offset {q.offset!r}")
    return "\n".join(lines) + "\n"


def read_qubo_file(text: str) -> tuple[int, dict[tuple[int, int], float], float]:
    """Parse the QUBO text format back to (size, terms, offset); bit-exact
    with qubo_file_text output."""
    size = 0
    terms: dict[tuple[int, int], float] = {}
    offset = 0.0
    saw_header = False
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("c"):
            parts = line.split()
            if len(parts) == 3 and parts[1] == "offset":
                offset = float(parts[2])
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 6 or parts[1] != "qubo":
                raise ValueError(f"bad header: {line!r}")
            size = int(parts[3])
            saw_header = True
            continue
        p_str, q_str, c_str = line.split()
        p, r = int(p_str), int(q_str)
        if p > r:
            raise ValueError(f"term {p} {r} not upper-triangular")
        terms[(p, r)] = float(c_str)
    if not saw_header:
        raise ValueError("missing `p qubo` header")
    return size, terms, offset


def varmap_json(q: Qubo) -> str:
    """Serialize the variable map alongside the QUBO file."""
    return json.dumps(
        {
            "size": q.size,
            "variables": {str(i): list(q.varmap[i]) for i in sorted(q.varmap)},
        },
        indent=2,
    )
