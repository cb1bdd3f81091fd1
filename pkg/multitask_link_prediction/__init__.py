""""""
from .graph import (
    Multigraph,
    Perm,
    TripletMask,
    TaskPartition,
    apply_perms,
    mask_split,
    read_graph_tsv,
    write_graph_tsv,
)
from .exchangeability import (
    EmpiricalDistribution,
    exchangeable_bruteforce,
    relational_tasks,
)

from .datasets import (
    DatasetSplit,
    NegativeBatch,
    load_split_dir,
    load_tsv,
    sample_negatives,
    save_split_dir,
    save_tsv,
    self_supervised_split,
)
from .datasets.kinship import FamilyTree, KinshipOntology, kinship_closure
from .datasets.metafam import metafam_generate

from .model import (
    AttentionWeights,
    ModelConfig,
    ModelParams,
    RelationStates,
)
from .model.network import (
    forward,
    homogeneous_score,
    make_scorer,
    score_triplet,
    score_triplets,
)
from .loss import LossConfig, dual_loss, total_loss
from .training import TrainConfig, TrainHistory, adapt, train
from .checkpoint import checkpoint_load, checkpoint_save

from .evaluation import (
    DualScheme,
    EntityScheme,
    MetricsReport,
    RelationScheme,
    evaluate,
    metrics_from_ranks,
    rank_pessimistic,
)
from .verify import (
    EquivarianceSuite,
    ExchangeabilitySuite,
    GradcheckSuite,
    RankingSuite,
    run_suite,
)
from .config import RunConfig
from .experiments import (
    metafam_config,
    run_metafam_experiment,
    summarize_results,
)

from .decorators import scheme, suite

from ._version import __version__  # noqa


__all__ = [
    # Graphs
    "Multigraph",
    "Perm",
    "TripletMask",
    "TaskPartition",
    "apply_perms",
    "mask_split",
    "read_graph_tsv",
    "write_graph_tsv",
    # Exchangeability
    "EmpiricalDistribution",
    "exchangeable_bruteforce",
    "relational_tasks",
    # Datasets
    "DatasetSplit",
    "NegativeBatch",
    "load_split_dir",
    "load_tsv",
    "sample_negatives",
    "save_split_dir",
    "save_tsv",
    "self_supervised_split",
    "FamilyTree",
    "KinshipOntology",
    "kinship_closure",
    "metafam_generate",
    # Model
    "AttentionWeights",
    "ModelConfig",
    "ModelParams",
    "RelationStates",
    "forward",
    "homogeneous_score",
    "make_scorer",
    "score_triplet",
    "score_triplets",
    # Training
    "LossConfig",
    "dual_loss",
    "total_loss",
    "TrainConfig",
    "TrainHistory",
    "adapt",
    "train",
    "checkpoint_load",
    "checkpoint_save",
    # Evaluation
    "DualScheme",
    "EntityScheme",
    "MetricsReport",
    "RelationScheme",
    "evaluate",
    "metrics_from_ranks",
    "rank_pessimistic",
    # Property suites
    "EquivarianceSuite",
    "ExchangeabilitySuite",
    "GradcheckSuite",
    "RankingSuite",
    "run_suite",
    # Experiments
    "metafam_config",
    "run_metafam_experiment",
    "summarize_results",
    # Decorators
    "scheme",
    "suite",
    # other
    "RunConfig",
]
