"""Encoder providers: the boundary where text and images become vectors.

Two kinds exist. The stub provider is fully deterministic (output depends
only on the input string or image identifier, the seed, and dim) and needs
no weights, so every downstream test can run hermetically. The CLIP provider
wraps a pretrained vision-language checkpoint through the transformers
library; its exact model id, output dim and preprocessing provenance are
recorded in every sidecar it produces.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import EncodingFailure, ProviderUnavailable, UnreadableImage
from .stub import stub_encode

STUB_ID = "stub"


class StubProvider:
    """Hash-derived deterministic vectors; see stub.stub_encode for the recipe."""

    requires_images = False
    deterministic = True

    def __init__(self, dim: int, seed: int):
        if dim < 1:
            raise ProviderUnavailable("stub provider needs dim >= 1")
        self.dim = dim
        self.seed = seed
        self.provider_id = STUB_ID

    @property
    def provenance(self) -> str:
        return f"stub(dim={self.dim},seed={self.seed})"

    def encode_texts(self, texts: Sequence[str]) -> np.ndarray:
        return np.stack([stub_encode(t, self.dim, self.seed) for t in texts])

    def encode_images(self, ids: Sequence[str], paths: Sequence[Path | None],
                      batch_size: int = 16) -> np.ndarray:
        # the stub keys off item ids; paths are ignored
        return np.stack([stub_encode(i, self.dim, self.seed) for i in ids])


class ClipProvider:
    """Pretrained CLIP-style dual encoder via transformers, loaded lazily."""

    requires_images = True
    deterministic = False

    def __init__(self, model_id: str):
        try:
            import torch  # noqa: F401
            from transformers import CLIPModel, CLIPProcessor
        except ImportError as exc:
            raise ProviderUnavailable(
                f"transformers/torch not installed; cannot load {model_id!r}"
            ) from exc
        try:
            self._model = CLIPModel.from_pretrained(model_id)
            self._processor = CLIPProcessor.from_pretrained(model_id)
        except Exception as exc:
            raise ProviderUnavailable(f"cannot load {model_id!r}: {exc}") from exc
        self._model.eval()
        self.provider_id = model_id
        self.dim = int(self._model.config.projection_dim)

    @property
    def provenance(self) -> str:
        return f"clip:{self.provider_id}(dim={self.dim},preprocessing=model-default)"

    def encode_texts(self, texts: Sequence[str]) -> np.ndarray:
        import torch

        def encode(batch: list[str]) -> np.ndarray:
            inputs = self._processor(text=batch, return_tensors="pt",
                                     padding=True, truncation=True)
            with torch.no_grad():
                features = self._model.get_text_features(**inputs)
            return features.cpu().numpy().astype(np.float32)

        try:
            return encode(list(texts))
        except Exception as batch_exc:
            # retry one at a time so the failure names the offending text
            for text in texts:
                try:
                    encode([text])
                except Exception as exc:
                    raise EncodingFailure(f"description {text[:80]!r}: {exc}") from exc
            raise EncodingFailure(f"text batch failed: {batch_exc}") from batch_exc

    def encode_images(self, ids: Sequence[str], paths: Sequence[Path | None],
                      batch_size: int = 16) -> np.ndarray:
        import torch
        from PIL import Image

        out = []
        for start in range(0, len(ids), batch_size):
            chunk_ids = ids[start:start + batch_size]
            chunk_paths = paths[start:start + batch_size]
            images = []
            for item_id, path in zip(chunk_ids, chunk_paths):
                if path is None:
                    raise UnreadableImage(f"{item_id}: no image path given")
                try:
                    images.append(Image.open(path).convert("RGB"))
                except OSError as exc:
                    raise UnreadableImage(f"{item_id}: {path}: {exc}") from exc
            try:
                inputs = self._processor(images=images, return_tensors="pt")
                with torch.no_grad():
                    features = self._model.get_image_features(**inputs)
                out.append(features.cpu().numpy().astype(np.float32))
            except UnreadableImage:
                raise
            except Exception as exc:
                raise EncodingFailure(f"image batch at {start} failed: {exc}") from exc
        return np.concatenate(out, axis=0)


def make_provider(provider_id: str, dim: int | None = None,
                  seed: int = 0) -> StubProvider | ClipProvider:
    """Build a provider from its id: "stub" or a pretrained model identifier."""
    if provider_id == STUB_ID:
        return StubProvider(dim=dim if dim is not None else 8, seed=seed)
    return ClipProvider(provider_id)
