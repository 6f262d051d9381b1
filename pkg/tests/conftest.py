import numpy as np
import pytest

from curiolearn.dataset import Dataset, ObjectInstance


def make_object(object_id, class_id, session_id, rows):
    return ObjectInstance(object_id, class_id, session_id,
                          np.asarray(rows, dtype=np.float32))


@pytest.fixture
def tiny_dataset():
    """Two classes, four objects over two sessions, d=3."""
    objects = [
        make_object(0, 0, 0, [[0.0, 0.0, 0.0], [0.5, 0.0, 0.0]]),
        make_object(1, 1, 0, [[5.0, 5.0, 5.0]]),
        make_object(2, 1, 1, [[5.5, 5.0, 5.0], [5.0, 5.5, 5.0], [5.0, 5.0, 5.5]]),
        make_object(3, 0, 1, [[0.0, 0.5, 0.0]]),
    ]
    return Dataset(dimension=3, num_classes=2, objects=objects)
