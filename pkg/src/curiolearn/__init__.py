"""Curiosity-driven online class-incremental learning over feature vectors."""

from .aggvar import (
    Centroid,
    ClassModel,
    ModelStore,
    agg_var_insert,
    class_statistics,
    closest_centroid,
    learn_object,
    load_model_store,
    save_model_store,
)
from .classifier import (
    LinearClassifier,
    TrainConfig,
    evaluate,
    predict,
    softmax_probs,
    train,
)
from .dataset import (
    Dataset,
    IncrementBatch,
    ObjectInstance,
    SynthConfig,
    make_increments,
    oracle_label,
    read_feature_pack,
    split_by_session,
    synth_generate,
    write_feature_pack,
)
from .errors import (
    CuriolearnError,
    DivergenceError,
    NoModelError,
    PackCorruptionError,
    PackFormatError,
    ValidationError,
)
from .harness import (
    ExperimentConfig,
    IncrementRecord,
    MetricsLog,
    aggregate_logs,
    desk_benchmark_config,
    run_experiment,
    run_suite,
    write_metrics,
)
from .rehearsal import (
    LabeledExample,
    build_rehearsal_set,
    sample_pseudo_exemplars,
)
from .sampler import (
    CuriosityScore,
    SelectionResult,
    StrategyConfig,
    curiosity_score,
    select_objects,
    softmax_confidence,
)

__version__ = "0.1.0"
