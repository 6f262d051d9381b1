"""Frozen CNN backbone producing per-image feature vectors.

Features are the penultimate-layer activations (post global pooling, before
the classification head) of an 18-layer residual network, 512 values per
image. Weights pretrained on the large natural-image corpus are used when
they can be loaded; otherwise a fixed-seed initialization keeps extraction
deterministic and format-compatible, with a warning (features are then not
semantically meaningful).
"""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
import torch
from PIL import Image
from torchvision import models, transforms

log = logging.getLogger(__name__)

BACKBONES = {"resnet18": (models.resnet18, 512)}
_FALLBACK_SEED = 0x5EED

# normalization statistics matching the backbone's pretraining corpus
_NORM_MEAN = [0.485, 0.456, 0.406]
_NORM_STD = [0.229, 0.224, 0.225]


class BackboneError(Exception):
    pass


class FeatureBackbone:
    def __init__(self, name: str = "resnet18", image_size: int = 128,
                 device: str = "auto", batch_size: int = 32):
        if name not in BACKBONES:
            raise BackboneError(
                f"unknown backbone {name!r}; available: {sorted(BACKBONES)}")
        factory, self.dimension = BACKBONES[name]
        self.name = name
        self.pretrained = True
        try:
            model = factory(weights="IMAGENET1K_V1")
        except Exception as err:  # no cached weights and no way to fetch them
            log.warning(
                "pretrained weights for %s unavailable (%s); "
                "falling back to a fixed-seed initialization", name, err)
            torch.manual_seed(_FALLBACK_SEED)
            model = factory(weights=None)
            self.pretrained = False
        model.fc = torch.nn.Identity()
        model.eval()
        for param in model.parameters():
            param.requires_grad_(False)
        if device == "auto":
            device = "cuda" if torch.cuda.is_available() else "cpu"
        self.device = torch.device(device)
        self.model = model.to(self.device)
        self.batch_size = batch_size
        self.transform = transforms.Compose([
            transforms.Resize((image_size, image_size)),
            transforms.ToTensor(),
            transforms.Normalize(mean=_NORM_MEAN, std=_NORM_STD),
        ])

    def load_image(self, path: Path) -> torch.Tensor:
        with Image.open(path) as img:
            return self.transform(img.convert("RGB"))

    def extract_images(self, paths: list[Path]) -> tuple[np.ndarray, list[Path]]:
        """Feature matrix for the readable images plus the skipped paths."""
        tensors = []
        skipped = []
        for path in paths:
            try:
                tensors.append(self.load_image(path))
            except (OSError, ValueError) as err:
                log.warning("skipping unreadable image %s: %s", path, err)
                skipped.append(path)
        if not tensors:
            return np.empty((0, self.dimension), dtype=np.float32), skipped
        chunks = []
        with torch.no_grad():
            for start in range(0, len(tensors), self.batch_size):
                batch = torch.stack(tensors[start:start + self.batch_size])
                features = self.model(batch.to(self.device))
                chunks.append(features.cpu().numpy().astype(np.float32))
        return np.concatenate(chunks), skipped
