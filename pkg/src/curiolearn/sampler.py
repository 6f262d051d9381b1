"""Scoring and selection of objects to label within an increment.

The curiosity score for an object combines how far its views sit from all
learned centroids (mean closest-centroid distance) with how inconsistently
those nearest centroids vote for a single class (inverse of the plurality
vote count). The softmax baseline scores an object by its mean maximum
softmax probability; the random baseline ignores the model entirely.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .aggvar import ModelStore, closest_centroid
from .classifier import LinearClassifier, softmax_probs
from .dataset import IncrementBatch, ObjectInstance
from .errors import NoModelError, ValidationError

CURIOSITY = "curiosity"
SOFTMAX = "softmax"
RANDOM = "random"
STRATEGIES = (CURIOSITY, SOFTMAX, RANDOM)


@dataclass
class CuriosityScore:
    object_id: int
    score: float                 # combined score driving selection
    mean_distance: float         # mean closest-centroid distance over views
    votes: dict[int, int]        # class_id -> number of views voting for it
    top_votes: int               # plurality count among the votes


@dataclass
class StrategyConfig:
    kind: str = CURIOSITY
    distance_weight: float = 0.7   # CLI --lambda: weight on the distance term
    budget: int = 1                # CLI --budget-k: labels granted per batch
    softmax_direction: str = "lowest"
    normalize_distances: bool = False  # CLI --normalize-q: min-max per batch

    def validate(self) -> None:
        if self.kind not in STRATEGIES:
            raise ValidationError(f"unknown strategy {self.kind!r}")
        if not 0.0 <= self.distance_weight <= 1.0:
            raise ValidationError(
                f"distance weight must be in [0, 1], got {self.distance_weight}")
        if self.budget < 1:
            raise ValidationError(f"label budget must be >= 1, got {self.budget}")
        if self.softmax_direction not in ("lowest", "highest"):
            raise ValidationError(
                f"softmax_direction must be lowest or highest, got "
                f"{self.softmax_direction!r}")


def combine_score(distance_weight: float, mean_distance: float, top_votes: int) -> float:
    """The one arithmetic path producing every curiosity score."""
    return distance_weight * mean_distance + (1.0 - distance_weight) * (1.0 / top_votes)


def curiosity_score(
    obj: ObjectInstance, store: ModelStore, distance_weight: float,
) -> CuriosityScore:
    """Score one object against the learned centroids.

    Raises NoModelError on an empty store; callers handle the cold start.
    """
    if not store.models:
        raise NoModelError("cannot score against an empty store")
    distances = []
    votes: dict[int, int] = {}
    for view in obj.views:
        class_id, _, dist = closest_centroid(store, view)
        distances.append(dist)
        votes[class_id] = votes.get(class_id, 0) + 1
    mean_distance = float(np.mean(distances))
    top_votes = max(votes.values())
    return CuriosityScore(
        object_id=obj.object_id,
        score=combine_score(distance_weight, mean_distance, top_votes),
        mean_distance=mean_distance,
        votes=votes,
        top_votes=top_votes,
    )


def softmax_confidence(obj: ObjectInstance, clf: LinearClassifier) -> float:
    """Mean over views of the maximum softmax probability."""
    per_view = [float(np.max(softmax_probs(clf, view))) for view in obj.views]
    return float(np.mean(per_view))


@dataclass
class SelectionResult:
    selected_ids: list[int]
    cold_start: bool = False
    scores: list[CuriosityScore] = field(default_factory=list)
    confidences: dict[int, float] = field(default_factory=dict)


def select_objects(
    batch: IncrementBatch,
    cfg: StrategyConfig,
    store: ModelStore,
    clf: LinearClassifier | None,
    rng: np.random.Generator,
) -> SelectionResult:
    """Pick the object ids to label from one batch.

    Curiosity takes the top-k scores, the softmax strategy ranks by mean
    confidence in the configured direction (``lowest`` = least-confidence
    uncertainty sampling), random samples uniformly without replacement.
    Without any centroids (or any classifier, for the softmax strategy)
    selection falls back to uniform random. Ties break to lower object_id.
    """
    cfg.validate()
    if not batch.candidates:
        raise ValidationError("cannot select from an empty batch")
    k = min(cfg.budget, len(batch.candidates))

    def random_pick() -> list[int]:
        idx = rng.choice(len(batch.candidates), size=k, replace=False)
        return [batch.candidates[i].object_id for i in idx]

    if cfg.kind == RANDOM:
        return SelectionResult(random_pick())

    if cfg.kind == CURIOSITY:
        if not store.models:
            return SelectionResult(random_pick(), cold_start=True)
        scores = [curiosity_score(obj, store, cfg.distance_weight)
                  for obj in batch.candidates]
        if cfg.normalize_distances:
            lo = min(s.mean_distance for s in scores)
            hi = max(s.mean_distance for s in scores)
            span = hi - lo
            for s in scores:
                scaled = (s.mean_distance - lo) / span if span > 0 else 0.0
                s.score = combine_score(cfg.distance_weight, scaled, s.top_votes)
        ranked = sorted(scores, key=lambda s: (-s.score, s.object_id))
        return SelectionResult([s.object_id for s in ranked[:k]], scores=scores)

    # softmax confidence baseline
    if clf is None:
        return SelectionResult(random_pick(), cold_start=True)
    confidences = {obj.object_id: softmax_confidence(obj, clf)
                   for obj in batch.candidates}
    sign = 1.0 if cfg.softmax_direction == "lowest" else -1.0
    ranked_ids = sorted(confidences, key=lambda oid: (sign * confidences[oid], oid))
    return SelectionResult(ranked_ids[:k], confidences=confidences)
