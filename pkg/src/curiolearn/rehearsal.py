"""Pseudo-exemplar generation: sampling the per-centroid Gaussians.

Old-class training data is regenerated, never stored. Each centroid yields
exactly as many samples as the vectors it absorbed, drawn per dimension from
Normal(mean, variance); dimensions with zero variance reproduce the mean
coordinate exactly, so a count-1 centroid emits itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .aggvar import Centroid, ModelStore

REAL = "real"
PSEUDO = "pseudo"


@dataclass
class LabeledExample:
    features: np.ndarray
    label: int
    provenance: str = REAL


def sample_pseudo_exemplars(centroid: Centroid, rng: np.random.Generator) -> list[np.ndarray]:
    """Draw ``centroid.count`` vectors from the centroid's diagonal Gaussian."""
    std = np.sqrt(centroid.variance())
    draws = centroid.mean + std * rng.standard_normal((centroid.count, centroid.mean.shape[0]))
    return [draws[i] for i in range(centroid.count)]


def build_rehearsal_set(store: ModelStore, rng: np.random.Generator) -> list[LabeledExample]:
    """Pseudo-exemplars for every learned class, one class at a time.

    The per-class pseudo count equals the class's total sample count, so the
    classifier sees as many stand-ins as there were real vectors.
    """
    examples: list[LabeledExample] = []
    for class_id in store.class_ids():
        for centroid in store.models[class_id].centroids:
            for features in sample_pseudo_exemplars(centroid, rng):
                examples.append(LabeledExample(features, class_id, PSEUDO))
    return examples
