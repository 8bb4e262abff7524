"""Landmark-based shortest-path distance bounds on large sparse graphs."""

from .errors import (
    EmptySampleError,
    FormatError,
    LmdistError,
    ParameterError,
    ParseError,
    UnsupportedOperationError,
)
from .graph import (
    UNREACHED,
    ComponentLabeling,
    Graph,
    IngestResult,
    bfs,
    components,
    er_generate,
    extract_lcc,
    ingest_edgelist,
    multi_source_bfs,
    read_graph,
    serialize_edgelist,
    write_graph,
)
from .embedding import (
    BoundPair,
    Embedding,
    LandmarkFamily,
    build_embedding,
    lower_bound,
    query,
    read_embedding,
    read_family,
    sample_family,
    upper_bound,
    write_embedding,
    write_family,
)
from .bench import (
    CSV_HEADER,
    DistortionReport,
    SweepSpec,
    TimingRecord,
    exact_distances,
    mask_timing_columns,
    parse_sweep_spec,
    run_distortion,
    run_sweep,
    sample_pairs,
    sweep_csv_lines,
    timing_bench,
)
from .randomlab import (
    BranchingTrace,
    CouplingResult,
    CouplingTrend,
    GrowthCheck,
    GrowthSurvey,
    IntersectionSurvey,
    ShellProfile,
    TheoremParams,
    TypicalDistanceResult,
    branching_final_sizes,
    branching_trace,
    coupling_check,
    coupling_trend,
    growth_survey,
    intersection_survey,
    ks_statistic,
    params_lb,
    params_ub,
    shell_growth_check,
    shell_intersection,
    shell_profile,
    typical_distance_check,
)

__version__ = "0.1.0"

__all__ = [
    "CSV_HEADER",
    "UNREACHED",
    "BoundPair",
    "BranchingTrace",
    "ComponentLabeling",
    "CouplingResult",
    "CouplingTrend",
    "DistortionReport",
    "Embedding",
    "EmptySampleError",
    "FormatError",
    "Graph",
    "GrowthCheck",
    "GrowthSurvey",
    "IngestResult",
    "IntersectionSurvey",
    "LandmarkFamily",
    "LmdistError",
    "ParameterError",
    "ParseError",
    "ShellProfile",
    "SweepSpec",
    "TheoremParams",
    "TimingRecord",
    "TypicalDistanceResult",
    "UnsupportedOperationError",
    "bfs",
    "branching_final_sizes",
    "branching_trace",
    "build_embedding",
    "components",
    "coupling_check",
    "coupling_trend",
    "er_generate",
    "exact_distances",
    "extract_lcc",
    "growth_survey",
    "ingest_edgelist",
    "intersection_survey",
    "ks_statistic",
    "lower_bound",
    "mask_timing_columns",
    "multi_source_bfs",
    "params_lb",
    "params_ub",
    "parse_sweep_spec",
    "query",
    "read_embedding",
    "read_family",
    "read_graph",
    "run_distortion",
    "run_sweep",
    "sample_family",
    "sample_pairs",
    "serialize_edgelist",
    "shell_growth_check",
    "shell_intersection",
    "shell_profile",
    "sweep_csv_lines",
    "timing_bench",
    "typical_distance_check",
    "upper_bound",
    "write_embedding",
    "write_family",
    "write_graph",
    "__version__",
]
