"""protestlens: desk-scale protest-news text classification toolkit.

Pipeline: corpus loading/statistics -> cleaning regimes -> word or contextual
embeddings -> SMOTE rebalancing -> one of three small neural classifiers ->
macro-averaged evaluation and misclassification analysis.
"""

from .corpus import (
    CorpusStats,
    DatasetFormatError,
    DatasetSchema,
    LabeledExample,
    corpus_stats,
    lexical_density,
    load_dataset,
    protest_ratio,
    save_dataset,
    sentence_token_stats,
)
from .preprocess import (
    CLEAN,
    LIGHT_CLEAN,
    NOT_CLEAN,
    PROFILES,
    CleanProfile,
    TokenSequence,
    apply_profile,
    lemmatize,
    load_stopwords,
    strip_related_titles,
    tokenize,
)
from .embeddings import (
    PAD_TOKEN,
    EmbedConfig,
    EmbedServiceError,
    ProtocolError,
    RetriableError,
    TransportError,
    VectorTable,
    embed_remote,
    embed_static,
    load_static_vectors,
    pad_or_truncate,
    pool_to_length,
    service_health,
)
from .resample import FeatureMatrix, nearest_neighbors, smote
from .models import (
    ModelSpec,
    TrainedModel,
    TrainingDivergence,
    build_model,
    classify,
    load_model,
    predict_proba,
    predict_proba_batch,
    save_model,
    train,
)
from .evaluation import (
    ConfusionMatrix,
    MetricsReport,
    confusion_matrix,
    error_analysis,
    metrics_report,
)

__version__ = "0.1.0"
