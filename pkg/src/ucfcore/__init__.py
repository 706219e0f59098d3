"""(k, eta)-core decomposition and eta-tree index construction for uncertain graphs."""

from .decompose import (
    AuditError,
    PeelResult,
    PeelStats,
    PeelState,
    count_refreshes,
    decompose,
    partition_vertices,
    peel_baseline,
    peel_ec,
    peel_optiucf,
)
from .graph import (
    CoreResult,
    GraphParseError,
    UncertainGraph,
    fingerprint,
    k_core,
    k_max,
    parse_edge_list,
    write_edge_list,
)
from .index import (
    EtaNode,
    EtaTree,
    IndexFormatError,
    UcfIndex,
    build_eta_tree,
    build_ucf_index,
    deserialize,
    serialize,
)
from .kprob import (
    DegreeDistribution,
    ProbBounds,
    beta_tail,
    bounds,
    ec_remove_edge,
    kprob_dp,
    kprob_value,
)
from .oracle import direct_core, enumerate_kprob, world_probabilities
from .synth import ba_graph, gnm_graph, random_graph

__version__ = "0.1.0"
