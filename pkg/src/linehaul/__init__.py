"""Line-haul multicommodity flow optimization toolkit.

Pipeline: load or generate an instance, reduce the graph by restriction and
turnaround-time preprocessing, build the routing model, encode it as a
QUBO/Ising energy, and solve with a simulated-annealing hybrid or the exact
branch-and-bound oracle. The harness benchmarks solvers against each other
on seeded synthetic networks.
"""

from .errors import (
    BoundExceedsIncumbent,
    InfeasibleCommodity,
    KeyMismatch,
    ParseError,
    PathExplosion,
    SchemaError,
    SizeMismatch,
    UnknownId,
)
from .instance import (
    Commodity,
    Instance,
    ValidationReport,
    dump_instance,
    load_instance,
    supply_value,
    validate_instance,
)
from .preprocess import (
    ALL_ARCS,
    DEFAULT_MAX_HOPS,
    Path,
    PreprocessedInstance,
    RestrictionMatrix,
    RestrictionPolicy,
    build_restriction_matrix,
    enumerate_paths,
    filter_paths_by_tat,
    restrict,
)
from .model import (
    Assignment,
    FeasibilityReport,
    MipModel,
    ModelStats,
    build_mip,
    check_feasibility,
    mip_gap,
    model_stats,
    objective_value,
)
from .encode import (
    BitGroup,
    Ising,
    PenaltyConfig,
    Qubo,
    binary_expand,
    decode,
    default_penalty_config,
    encode_qubo,
    ising_energy,
    qubo_energy,
    qubo_to_ising,
)
from .solve import (
    AnnealSchedule,
    SampleSet,
    SolveResult,
    auto_schedule,
    exact_solve,
    greedy_construct,
    hybrid_solve,
    simulated_anneal,
)
from .harness import (
    BenchRecord,
    GeneratorConfig,
    SolverConfig,
    emit_report,
    generate_instance,
    run_benchmark,
    size_config,
)

__version__ = "0.1.0"
