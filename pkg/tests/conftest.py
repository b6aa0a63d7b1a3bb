from __future__ import annotations

import random

import numpy as np
import pytest

from zeroleaf.exchange import (
    KIND_IMAGE_SET,
    ImageRowInfo,
    Sidecar,
    write_embedding_file,
)
from zeroleaf.promptbank import BankClass, TextEmbeddingBank
from zeroleaf.vecspace import EmbeddingMatrix, l2_normalize_rows

# Per-source (label, count) structure of the real-world 945-image test set:
# labels 0 = Early Blight, 1 = Late Blight, 2 = Healthy.
FIELD_SOURCES = (
    ("Farmy", ((0, 34), (1, 58), (2, 132))),
    ("Africa", ((1, 68), (2, 26))),
    ("Peru", ((0, 71), (1, 254), (2, 21))),
    ("Internet", ((0, 98), (1, 100), (2, 83))),
)
FIELD_CLASS_NAMES = ("Potato Early Blight", "Potato Late Blight", "Potato Healthy")


def pytest_runtest_logreport(report):
    # One visible pass/fail line per acceptance criterion.
    if report.when == "call" and "test_acceptance" in report.nodeid:
        status = "PASS" if report.passed else "FAIL"
        name = report.nodeid.split("::")[-1]
        print(f"\n[ACCEPTANCE {status}] {name}")


def random_unit_rows(rng: random.Random, rows: int, dim: int) -> np.ndarray:
    data = np.asarray(
        [[rng.gauss(0.0, 1.0) for _ in range(dim)] for _ in range(rows)],
        dtype=np.float32,
    )
    return l2_normalize_rows(EmbeddingMatrix(data)).data


def make_separated_centroids(rng: random.Random, n_classes: int, dim: int,
                             max_abs_cos: float = 0.1) -> list[np.ndarray]:
    """Unit centroids with pairwise |cosine| below max_abs_cos, by rejection."""
    while True:
        cents = []
        for _ in range(n_classes):
            v = np.asarray([rng.gauss(0.0, 1.0) for _ in range(dim)], dtype=np.float64)
            cents.append(v / np.linalg.norm(v))
        if all(
            abs(float(np.dot(cents[i], cents[j]))) < max_abs_cos
            for i in range(n_classes) for j in range(i + 1, n_classes)
        ):
            return cents


def make_separated_bank(rng: random.Random, n_classes: int, n_descriptions: int,
                        dim: int, noise: float = 0.05,
                        ) -> tuple[TextEmbeddingBank, list[np.ndarray]]:
    """Bank whose classes cluster around well-separated centroids."""
    cents = make_separated_centroids(rng, n_classes, dim)
    classes = []
    for c in range(n_classes):
        rows = np.asarray([
            cents[c] + noise * np.asarray([rng.gauss(0.0, 1.0) for _ in range(dim)])
            for _ in range(n_descriptions)
        ], dtype=np.float32)
        classes.append(BankClass(
            class_id=c,
            class_name=f"class{c}",
            descriptions=tuple(f"description {c}.{j}" for j in range(n_descriptions)),
            matrix=l2_normalize_rows(EmbeddingMatrix(rows)),
        ))
    return TextEmbeddingBank(classes=tuple(classes), provenance="separated-bank"), cents


def make_random_bank(rng: random.Random, n_classes: int, max_descriptions: int,
                     dim: int) -> TextEmbeddingBank:
    classes = []
    for c in range(n_classes):
        n = rng.randint(1, max_descriptions)
        rows = random_unit_rows(rng, n, dim)
        classes.append(BankClass(
            class_id=c,
            class_name=f"class{c}",
            descriptions=tuple(f"description {c}.{j}" for j in range(n)),
            matrix=EmbeddingMatrix(rows, normalized=True),
        ))
    return TextEmbeddingBank(classes=tuple(classes), provenance="test-bank")


def field_ids_sources_labels() -> tuple[list[str], list[str], list[int]]:
    ids, sources, labels = [], [], []
    i = 0
    for source, pairs in FIELD_SOURCES:
        for label, count in pairs:
            for _ in range(count):
                ids.append(f"img{i:04d}")
                sources.append(source)
                labels.append(label)
                i += 1
    return ids, sources, labels


def write_manifest_fixture(tmp_path, ids, sources, labels, class_names,
                           rows: np.ndarray, name: str = "manifest.tsv",
                           normalized: bool = True) -> str:
    """Write an embedding file plus a manifest referencing it row-by-row."""
    emb_path = tmp_path / (name + ".zseb")
    sidecar = Sidecar(
        kind=KIND_IMAGE_SET,
        provenance="fixture",
        rows=tuple(
            ImageRowInfo(item_id=i, source=s, true_label=l)
            for i, s, l in zip(ids, sources, labels)
        ),
    )
    write_embedding_file(EmbeddingMatrix(rows, normalized=normalized), sidecar, emb_path)
    lines = ["zeroleaf-manifest v1",
             "classes\t" + "|".join(class_names),
             "embeddings\t" + emb_path.name]
    for row, (item_id, source, label) in enumerate(zip(ids, sources, labels)):
        lines.append(f"{item_id}\t{source}\t{label}\t{row}")
    manifest_path = tmp_path / name
    manifest_path.write_text("\n".join(lines) + "\n")
    return str(manifest_path)


def write_field_fixture(tmp_path, dim: int = 8, seed: int = 7) -> str:
    """Write a manifest plus backing embedding file mirroring the 945-item
    four-source test set; returns the manifest path."""
    ids, sources, labels = field_ids_sources_labels()
    rng = random.Random(seed)
    rows = random_unit_rows(rng, len(ids), dim)
    emb_path = tmp_path / "images.zseb"
    sidecar = Sidecar(
        kind=KIND_IMAGE_SET,
        provenance="fixture",
        rows=tuple(
            ImageRowInfo(item_id=i, source=s, true_label=l)
            for i, s, l in zip(ids, sources, labels)
        ),
    )
    write_embedding_file(EmbeddingMatrix(rows, normalized=True), sidecar, emb_path)

    lines = ["zeroleaf-manifest v1",
             "classes\t" + "|".join(FIELD_CLASS_NAMES),
             "embeddings\timages.zseb"]
    for row, (item_id, source, label) in enumerate(zip(ids, sources, labels)):
        lines.append(f"{item_id}\t{source}\t{label}\t{row}")
    manifest_path = tmp_path / "manifest.tsv"
    manifest_path.write_text("\n".join(lines) + "\n")
    return str(manifest_path)


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240901)
