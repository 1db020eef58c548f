"""percolab: a square-lattice bond percolation laboratory.

Lattice regions and bond configurations, duality transforms, cluster
diagnostics, exact and MCMC samplers with enumeration oracles, an adaptive
column-revealing exploration, and a reproducible experiment harness.
"""

from .lattice import (
    RIGHT,
    UP,
    BondConfig,
    EdgeRef,
    Region,
    Vertex,
    edge_at,
    edge_index,
    from_text,
    halfplane_restrict,
    incident_edges,
    to_text,
    translate,
)
from .duality import DualConfig, complement, crossing_duality_check, dual, enclosure_check
from .clusters import (
    ArmInterval,
    ArmSequence,
    ClusterLabeling,
    arms,
    crossing,
    label,
    largest_cluster_fraction,
    tenuous_check,
    trifurcation_count,
)
from .samplers import (
    ExactTable,
    SampleSpec,
    enumerate_exact,
    p_sd,
    rc_conditional,
    sample,
    tv_distance,
)
from .exploration import ExplorationTrace, explore, halting_bound
from .harness import ExperimentSpec, build_experiment, derive_seed, render, run

__all__ = [
    "RIGHT",
    "UP",
    "BondConfig",
    "EdgeRef",
    "Region",
    "Vertex",
    "edge_at",
    "edge_index",
    "from_text",
    "halfplane_restrict",
    "incident_edges",
    "to_text",
    "translate",
    "DualConfig",
    "complement",
    "crossing_duality_check",
    "dual",
    "enclosure_check",
    "ArmInterval",
    "ArmSequence",
    "ClusterLabeling",
    "arms",
    "crossing",
    "label",
    "largest_cluster_fraction",
    "tenuous_check",
    "trifurcation_count",
    "ExactTable",
    "SampleSpec",
    "enumerate_exact",
    "p_sd",
    "rc_conditional",
    "sample",
    "tv_distance",
    "ExplorationTrace",
    "explore",
    "halting_bound",
    "ExperimentSpec",
    "build_experiment",
    "derive_seed",
    "render",
    "run",
]
