"""tradenet: weighted trade-network analysis toolkit.

Builds a symmetric weighted network from dyadic flow data, fits a gravity
equation by (zero-inflated) Poisson pseudo-maximum likelihood, derives the
residual network, and compares the topological properties of the two.
"""

__version__ = "0.1.0"

from .association import (
    AreaShares,
    ConditionalMeanCurve,
    CorrelationTable,
    RankComparison,
    area_trade_shares,
    correlation,
    correlation_table,
    kernel_conditional_mean,
    rank_comparison,
)
from .config import AnalysisConfig, load_config
from .design import CovariateSet, DyadCovariates, build_design, compute_remoteness
from .distfit import (
    LogNormalFit,
    RankSizeFit,
    fit_log_normal,
    fit_power_law,
    hill_exponent,
    rank_size,
)
from .errors import (
    ConvergenceError,
    EstimationError,
    IngestError,
    RankDeficiencyError,
    SeparationError,
    TradenetError,
    ValidationError,
)
from .export import export_graph, read_network_csv
from .gravity import (
    GravityFit,
    LogitFit,
    SelectionStep,
    VuongResult,
    adjusted_pseudo_r2,
    fit_logit_zero_stage,
    fit_ols_log,
    fit_ppml,
    fit_zippml,
    select_general_to_specific,
    vuong_test,
)
from .ingest import great_circle_km, great_circle_matrix, ingest
from .mst import SpanningTree, kruskal_mst, mantegna_distance
from .network import (
    AdjacencyView,
    CountryTable,
    DirectedFlowMatrix,
    WeightedNetwork,
    adjacency,
    assemble_residual_network,
    density,
    symmetrize,
)
from .pipeline import PipelineRun, RunManifest, run_pipeline
from .synthetic import SyntheticWorld, synthetic_world, write_world_csv
from .topology import (
    NodeStatistics,
    all_statistics,
    avg_nn_strength,
    clustering,
    current_flow_betweenness,
    node_degree,
    node_strength,
    rw_betweenness,
)
