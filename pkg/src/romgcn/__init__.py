"""romgcn: robust directional node pair descriptors and an edge-aware GCN.

The package has three layers:

* :mod:`romgcn.geometry` / :mod:`romgcn.descriptor` — vector algebra and the
  rigid-invariant, chirality-aware pair descriptor plus baselines.
* :mod:`romgcn.molgraph` — structure parsers and directional-node graph
  construction with descriptor edge features.
* :mod:`romgcn.network` / :mod:`romgcn.evaluation` — a self-contained numpy
  message-passing network with exact gradients, Adam training,
  cross-validation, metrics, and synthetic ablation datasets.

:mod:`romgcn.checks` packages the invariance/injectivity/chirality/gradient
property suites used by ``romgcn check`` and the acceptance tests.
"""

from .descriptor import (
    DirectionalNode,
    DnpQuadruplet,
    PairAngles,
    SourceTargetAssignment,
    distance_only,
    distance_theta,
    dnp,
    pair_angles,
    ppf,
    reconstruct_canonical_pair,
    source_target,
)
from .errors import (
    CheckpointError,
    CoincidentNodes,
    ConfigError,
    DegenerateVector,
    MissingDirection,
    ParseError,
    RomGcnError,
)
from .geometry import (
    EPS_ALG,
    EPS_GEOM,
    RigidTransform,
    apply_transform,
    compose,
    cross,
    dot,
    identity_transform,
    kabsch_rmsd,
    mirror_xy,
    norm,
    normalize,
    random_rotation,
    random_transform,
    vec3,
)
from .molgraph import (
    Dataset,
    MolGraph,
    Residue,
    SmallMolecule,
    build_molecule_graph,
    build_protein_graph,
    featurize_edges,
    load_archive,
    parse_molecule,
    parse_pdb,
    save_archive,
)
from .network import (
    AdamState,
    ModelConfig,
    ModelParams,
    TrainOptions,
    adam_step,
    backward,
    evaluate,
    forward,
    init_params,
    load_checkpoint,
    loss_weighted_ce,
    make_batch,
    save_checkpoint,
    train,
)
from .evaluation import (
    AblationSpec,
    FoldSplit,
    MetricReport,
    auc,
    cross_validate,
    f1,
    gen_chirality_dataset,
    gen_orientation_dataset,
    kfold,
    run_ablation,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
