"""Experiment orchestration: increment loop, metrics, aggregation, file output.

One run processes a seeded schedule of candidate batches. Each increment it
scores the candidates, labels the budgeted picks, folds them into the
centroid store, regenerates pseudo-exemplars of everything learned before
this increment, retrains the classifier from scratch on pseudo + fresh real
views, and (within the reporting window) evaluates on the fixed test set.

Per-increment rng streams are derived from (run seed, increment index), so
every strategy facing the same seed sees identical candidate batches and
identical cold-start draws: strategies are compared paired.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .aggvar import ModelStore, learn_object, load_model_store, save_model_store
from .classifier import LinearClassifier, TrainConfig, evaluate, train
from .dataset import (
    Dataset,
    SynthConfig,
    make_increments,
    oracle_label,
    read_feature_pack,
    split_by_session,
    synth_generate,
)
from .errors import CuriolearnError, ValidationError
from .rehearsal import REAL, LabeledExample, build_rehearsal_set
from .sampler import SelectionResult, StrategyConfig, select_objects

# stream tags so selection, rehearsal, and training draw independent rngs
_SELECT_STREAM = 0
_REHEARSAL_STREAM = 1
_TRAIN_STREAM = 2


@dataclass
class ExperimentConfig:
    strategies: list[StrategyConfig]
    seeds: list[int]
    distance_threshold: float = 17.5
    batch_m: int = 5
    increments_to_report: int = 50
    max_increments: int | None = None     # None runs the full schedule
    train_cfg: TrainConfig = field(default_factory=TrainConfig)
    test_sessions: frozenset[int] = frozenset({3, 7, 10})
    pack_path: Path | None = None
    synth: SynthConfig | None = None
    synth_seed: int = 0
    load_model: Path | None = None

    def validate(self) -> None:
        if not self.strategies:
            raise ValidationError("at least one strategy is required")
        for strategy in self.strategies:
            strategy.validate()
            if strategy.budget > self.batch_m:
                raise ValidationError(
                    f"label budget {strategy.budget} exceeds batch size {self.batch_m}")
        if not self.seeds:
            raise ValidationError("at least one seed is required")
        if any(s < 0 for s in self.seeds) or self.synth_seed < 0:
            raise ValidationError("seeds must be >= 0")
        if self.distance_threshold <= 0:
            raise ValidationError(
                f"distance threshold must be > 0, got {self.distance_threshold}")
        if self.batch_m < 1:
            raise ValidationError(f"batch size must be >= 1, got {self.batch_m}")
        if self.increments_to_report < 0:
            raise ValidationError("increments_to_report must be >= 0")
        if self.max_increments is not None and self.max_increments < 0:
            raise ValidationError("max_increments must be >= 0")
        if (self.pack_path is None) == (self.synth is None):
            raise ValidationError("exactly one of pack_path or synth must be set")
        self.train_cfg.validate()


@dataclass
class IncrementRecord:
    increment_index: int
    test_accuracy: float
    classes_learned: int
    selected_object_ids: list[int]
    candidate_scores: list[dict] | None  # None for random / cold-start picks


@dataclass
class MetricsLog:
    """One seeded run: reported increments plus run-level summaries.

    ``increments_to_all_classes`` is the 1-based count of increments after
    which every class had at least one labeled object, observed over the
    whole run (not just the reporting window); None if never reached.
    ``average_incremental_accuracy`` is the mean of the reported
    per-increment accuracies.
    """

    strategy: str
    seed: int
    records: list[IncrementRecord]
    average_incremental_accuracy: float | None
    increments_to_all_classes: int | None
    config: dict

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "seed": self.seed,
            "average_incremental_accuracy": self.average_incremental_accuracy,
            "increments_to_all_classes": self.increments_to_all_classes,
            "increments": [
                {
                    "increment": r.increment_index,
                    "accuracy": r.test_accuracy,
                    "classes_learned": r.classes_learned,
                    "selected_object_ids": r.selected_object_ids,
                    "candidate_scores": r.candidate_scores,
                }
                for r in self.records
            ],
        }


def config_echo(cfg: ExperimentConfig) -> dict:
    """The configuration block embedded in every output file."""
    echo = {
        "strategies": [
            {
                "kind": s.kind,
                "lambda": s.distance_weight,
                "budget_k": s.budget,
                "softmax_direction": s.softmax_direction,
                "normalize_q": s.normalize_distances,
            }
            for s in cfg.strategies
        ],
        "seeds": list(cfg.seeds),
        "distance_threshold": cfg.distance_threshold,
        "batch_m": cfg.batch_m,
        "increments_to_report": cfg.increments_to_report,
        "max_increments": cfg.max_increments,
        "train": {
            "epochs": cfg.train_cfg.epochs,
            "learning_rate": cfg.train_cfg.learning_rate,
            "batch_size": cfg.train_cfg.batch_size,
        },
        "test_sessions": sorted(cfg.test_sessions),
        "pack_path": str(cfg.pack_path) if cfg.pack_path else None,
        "synth": vars(cfg.synth) if cfg.synth else None,
        "synth_seed": cfg.synth_seed if cfg.synth else None,
        "load_model": str(cfg.load_model) if cfg.load_model else None,
    }
    return echo


def load_experiment_data(cfg: ExperimentConfig) -> tuple[Dataset, Dataset]:
    """Resolve the dataset source and split it into (train, test)."""
    cfg.validate()
    if cfg.pack_path is not None:
        full = read_feature_pack(cfg.pack_path)
    else:
        full = synth_generate(cfg.synth, cfg.synth_seed)
    return split_by_session(full, set(cfg.test_sessions))


def _scores_payload(result: SelectionResult) -> list[dict] | None:
    if result.cold_start:
        return None
    if result.scores:
        return [
            {
                "object_id": s.object_id,
                "score": float(s.score),
                "mean_distance": float(s.mean_distance),
                "top_votes": int(s.top_votes),
                "votes": {str(cid): int(n) for cid, n in sorted(s.votes.items())},
            }
            for s in result.scores
        ]
    if result.confidences:
        return [
            {"object_id": oid, "confidence": float(conf)}
            for oid, conf in sorted(result.confidences.items())
        ]
    return None


def run_experiment(
    cfg: ExperimentConfig,
    seed: int,
    strategy: StrategyConfig | None = None,
    data: tuple[Dataset, Dataset] | None = None,
    save_model_path: Path | None = None,
) -> MetricsLog:
    """One seeded run of one strategy; fully deterministic given (cfg, seed)."""
    cfg.validate()
    strategy = strategy or cfg.strategies[0]
    train_set, test_set = data if data is not None else load_experiment_data(cfg)
    num_classes = train_set.num_classes

    if cfg.load_model is not None:
        store = load_model_store(cfg.load_model)
        if store.dimension != train_set.dimension:
            raise ValidationError(
                f"loaded model dimension {store.dimension} != dataset "
                f"dimension {train_set.dimension}")
        store.distance_threshold = cfg.distance_threshold
    else:
        store = ModelStore(train_set.dimension, cfg.distance_threshold)

    schedule = make_increments(train_set, cfg.batch_m, seed)
    if cfg.max_increments is not None:
        schedule = schedule[:cfg.max_increments]
    by_id = {obj.object_id: obj for obj in train_set.objects}

    clf: LinearClassifier | None = None
    records: list[IncrementRecord] = []
    increments_to_all: int | None = None
    if not schedule and len(store.models) == num_classes and store.models:
        increments_to_all = 0

    for batch in schedule:
        index = batch.increment_index
        select_rng = np.random.default_rng((seed, index, _SELECT_STREAM))
        result = select_objects(batch, strategy, store, clf, select_rng)

        rehearsal_rng = np.random.default_rng((seed, index, _REHEARSAL_STREAM))
        pseudo = build_rehearsal_set(store, rehearsal_rng)

        real: list[LabeledExample] = []
        for object_id in result.selected_ids:
            obj = by_id[object_id]
            label = oracle_label(obj)
            learn_object(store, label, obj.views)
            real.extend(
                LabeledExample(view.astype(np.float64), label, REAL)
                for view in obj.views)

        train_seed = int(np.random.SeedSequence(
            (seed, index, _TRAIN_STREAM)).generate_state(1)[0])
        clf = train(pseudo + real, num_classes,
                    replace(cfg.train_cfg, seed=train_seed))

        classes_learned = len(store.models)
        if increments_to_all is None and classes_learned == num_classes:
            increments_to_all = index + 1
        if index < cfg.increments_to_report:
            records.append(IncrementRecord(
                increment_index=index,
                test_accuracy=evaluate(clf, test_set),
                classes_learned=classes_learned,
                selected_object_ids=list(result.selected_ids),
                candidate_scores=_scores_payload(result),
            ))

    if save_model_path is not None:
        save_model_store(store, save_model_path)

    accuracies = [r.test_accuracy for r in records]
    return MetricsLog(
        strategy=strategy.kind,
        seed=seed,
        records=records,
        average_incremental_accuracy=float(np.mean(accuracies)) if accuracies else None,
        increments_to_all_classes=increments_to_all,
        config=config_echo(cfg),
    )


def run_suite(
    cfg: ExperimentConfig,
    save_model_dir: Path | None = None,
) -> list[MetricsLog]:
    """Independent runs for every (strategy, seed) pair, data loaded once."""
    cfg.validate()
    data = load_experiment_data(cfg)
    logs: list[MetricsLog] = []
    for strategy in cfg.strategies:
        for seed in cfg.seeds:
            save_path = None
            if save_model_dir is not None:
                save_path = Path(save_model_dir) / f"model_{strategy.kind}_seed{seed}.bin"
            try:
                logs.append(run_experiment(
                    cfg, seed, strategy=strategy, data=data,
                    save_model_path=save_path))
            except CuriolearnError as err:
                raise type(err)(
                    f"run failed (strategy={strategy.kind}, seed={seed}): {err}"
                ) from err
    return logs


def aggregate_logs(logs: list[MetricsLog]) -> dict[str, dict]:
    """Per-strategy mean and population std curves across seeds.

    Assumes each strategy's runs report the same increments (true whenever
    they share one config), which is asserted.
    """
    by_strategy: dict[str, list[MetricsLog]] = {}
    for log in logs:
        by_strategy.setdefault(log.strategy, []).append(log)

    out: dict[str, dict] = {}
    for strategy, runs in by_strategy.items():
        lengths = {len(r.records) for r in runs}
        if len(lengths) != 1:
            raise ValidationError(
                f"strategy {strategy}: runs report different increment counts {lengths}")
        acc = np.array([[r.test_accuracy for r in run.records] for run in runs])
        classes = np.array([[r.classes_learned for r in run.records] for run in runs],
                           dtype=np.float64)
        to_all = [run.increments_to_all_classes for run in runs]
        avg_acc = [run.average_incremental_accuracy for run in runs]
        n_inc = acc.shape[1] if acc.size else 0
        out[strategy] = {
            "seeds": [run.seed for run in runs],
            "increments": list(range(n_inc)),
            "accuracy_mean": [float(v) for v in acc.mean(axis=0)] if n_inc else [],
            "accuracy_std": [float(v) for v in acc.std(axis=0)] if n_inc else [],
            "classes_learned_mean": [float(v) for v in classes.mean(axis=0)] if n_inc else [],
            "classes_learned_std": [float(v) for v in classes.std(axis=0)] if n_inc else [],
            "average_incremental_accuracy": avg_acc,
            "average_incremental_accuracy_mean": (
                float(np.mean([a for a in avg_acc]))
                if all(a is not None for a in avg_acc) and avg_acc else None),
            "increments_to_all_classes": to_all,
            "increments_to_all_classes_mean": (
                float(np.mean(to_all)) if all(v is not None for v in to_all) and to_all
                else None),
        }
    return out


def _csv_text(logs: list[MetricsLog]) -> str:
    buf = io.StringIO()
    buf.write("# config: " + json.dumps(logs[0].config, separators=(",", ":")) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["strategy", "seed", "increment", "accuracy",
                     "classes_learned", "selected_ids"])
    for log in logs:
        for r in log.records:
            writer.writerow([
                log.strategy, log.seed, r.increment_index, repr(r.test_accuracy),
                r.classes_learned, ";".join(str(i) for i in r.selected_object_ids),
            ])
    return buf.getvalue()


def _aggregate_csv_text(logs: list[MetricsLog]) -> str:
    aggregates = aggregate_logs(logs)
    buf = io.StringIO()
    buf.write("# config: " + json.dumps(logs[0].config, separators=(",", ":")) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["strategy", "increment", "accuracy_mean", "accuracy_std",
                     "classes_learned_mean", "classes_learned_std"])
    for strategy, agg in aggregates.items():
        for i in agg["increments"]:
            writer.writerow([
                strategy, i,
                repr(agg["accuracy_mean"][i]), repr(agg["accuracy_std"][i]),
                repr(agg["classes_learned_mean"][i]),
                repr(agg["classes_learned_std"][i]),
            ])
    return buf.getvalue()


def aggregate_path_for(path: Path | str) -> Path:
    path = Path(path)
    return path.with_name(path.stem + "_aggregate" + (path.suffix or ".csv"))


def write_metrics(logs: list[MetricsLog], path: Path | str, format: str = "csv") -> None:
    """Write run metrics plus the per-increment aggregate.

    CSV: one data row per (strategy, seed, increment) at ``path`` and the
    mean/std curves at ``<stem>_aggregate<suffix>``. JSON: a single document
    with the config echo, all runs (candidate scores included), and the
    aggregates. Output bytes depend only on the logs.
    """
    if not logs:
        raise ValidationError("no metrics logs to write")
    path = Path(path)
    if format == "csv":
        path.write_text(_csv_text(logs))
        aggregate_path_for(path).write_text(_aggregate_csv_text(logs))
    elif format == "json":
        document = {
            "config": logs[0].config,
            "runs": [log.to_dict() for log in logs],
            "aggregates": aggregate_logs(logs),
        }
        path.write_text(json.dumps(document, indent=2) + "\n")
    else:
        raise ValidationError(f"unknown metrics format {format!r}")


def desk_benchmark_config(
    seeds: list[int] | None = None,
    strategies: list[StrategyConfig] | None = None,
) -> ExperimentConfig:
    """The calibrated desk-scale benchmark: 10 classes x 40 train instances
    x 5 views at d=32, batches of 5, budget 1, full-schedule runs with a
    50-increment reporting window. The distance threshold and distance
    weight come from a calibration sweep over the default synthetic
    geometry (noisy views, overlapping classes)."""
    if strategies is None:
        strategies = [StrategyConfig(kind=k, distance_weight=0.7)
                      for k in ("curiosity", "softmax", "random")]
    return ExperimentConfig(
        strategies=strategies,
        seeds=seeds if seeds is not None else [1, 2, 3, 4, 5],
        distance_threshold=6.0,
        batch_m=5,
        increments_to_report=50,
        synth=SynthConfig(),
        synth_seed=0,
        test_sessions=frozenset({4}),
    )
