"""Security event detection from annotated short-post streams.

Pipeline: multi-label category tagging gates security posts, an
entity-sharing relation graph feeds a contrastively trained graph
attention embedder, embeddings are density-clustered, and clusters are
filtered by user-density score.
"""

__version__ = "0.1.0"

from .categorizer import (
    CATEGORY_LABELS,
    SECURITY_LABELS,
    CategorizerConfig,
    CategorizerModel,
    category_loss,
    predict_categories,
    train_categorizer,
)
from .clustering import ClusterAssignment, DbscanConfig, EventInstance, dbscan, filter_clusters, score_cluster
from .config import PipelineConfig
from .corpus import (
    Corpus,
    TemporalFeature,
    TweetRecord,
    Window,
    load_corpus,
    load_features,
    save_corpus,
    save_features,
    temporal_features,
    window_stream,
)
from .entities import (
    DEFAULT_ENTITY_TYPES,
    EntityMention,
    Gazetteer,
    extract_gazetteer,
    import_annotations,
    ner_evaluate,
)
from .errors import DataValidationError, NumericalError, UsageError
from .evalmetrics import ami, ari, event_eval, multilabel_metrics, nmi
from .gatnet import (
    GatParams,
    LayerParams,
    TrainConfig,
    attention_weights,
    gat_forward,
    load_checkpoint,
    pairwise_loss,
    save_checkpoint,
    total_loss,
    train,
    triplet_loss,
)
from .pipeline import StageTimings, export_trend, merge_events, run_detect
from .trg import (
    FeatureBlocks,
    NodeFeatures,
    TweetRelationGraph,
    assemble_features,
    build_graph,
    hashing_featurizer,
)
from .userscore import UserActivity, rank_users, score_user
