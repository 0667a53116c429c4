"""Community scoring, robustness, ranking, and seed-based detection on graphs."""

from .evaluation import Matching, PrfTriple, eval_seed_run, hungarian_match, prf
from .goodness import GoodnessId, clustering_coefficient, cohesiveness, density, separability
from .graph import (
    CommunitySet,
    Graph,
    GraphFormatError,
    SetStats,
    Source,
    induced_subgraph,
    load_communities,
    load_edge_list,
    median_degree,
    preprocess_communities,
    set_stats,
)
from .perturbation import PerturbSpec, Strategy, ZScoreReport, perturb, zscore, zscore_increment
from .scoring import ALL_SCORES, Orientation, ScoreId, compute_score, orientation, score_all
from .seed import (
    approximate_ppr,
    detect_all_communities,
    detect_community,
    detect_lc_baseline,
    find_local_minima,
    sweep_curve,
    sweep_order,
)
from .synth import PlantedPartitionSpec, synth_planted_partition

__version__ = "0.1.0"
