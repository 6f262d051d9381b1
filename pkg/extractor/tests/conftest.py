import numpy as np
import pytest
from PIL import Image


def write_image(path, seed, size=32):
    """Small deterministic RGB noise image."""
    rng = np.random.default_rng(seed)
    arr = rng.integers(0, 256, size=(size, size, 3), dtype=np.uint8)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(arr).save(path)


@pytest.fixture(scope="session")
def core50_corpus(tmp_path_factory):
    """Two sessions, objects o1/o2 (class 0) and o6 (class 1), 3 images each."""
    root = tmp_path_factory.mktemp("core50")
    seed = 0
    for session in (1, 2):
        for obj in (1, 2, 6):
            for frame in range(3):
                seed += 1
                write_image(
                    root / f"s{session}" / f"o{obj}" / f"C_{session:02d}_{obj:02d}_{frame:03d}.png",
                    seed)
    return root


@pytest.fixture(scope="session")
def generic_corpus(tmp_path_factory):
    """Two classes x one object x two sessions, 2 images each."""
    root = tmp_path_factory.mktemp("generic")
    seed = 100
    for class_name in ("cup", "mug"):
        for obj in ("a",):
            for session in ("0", "1"):
                for frame in range(2):
                    seed += 1
                    write_image(root / class_name / obj / session / f"{frame}.png", seed)
    return root
