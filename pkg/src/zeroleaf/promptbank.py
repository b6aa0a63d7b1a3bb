"""Per-class description sets and the immutable normalized text-embedding bank.

The bank is the offline, one-time artifact of the pipeline: every class's
description embeddings, unit-normalized, in document order. Construction is
single-threaded; the result is frozen and safe to share across workers.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    DuplicateClassName,
    EmptyClass,
    ParseError,
    RowCountMismatch,
)
from .exchange import (
    KIND_TEXT_BANK,
    Sidecar,
    TextRowInfo,
    read_embedding_file,
    write_embedding_file,
)
from .ioutil import read_text
from .vecspace import EmbeddingMatrix, l2_normalize_rows

PROMPT_DOC_HEADER = "zeroleaf-prompts v1"
CLASS_MARKER = "[class]"


@dataclass(frozen=True)
class ClassPromptSet:
    """One class's ordered description strings."""

    class_id: int
    class_name: str
    descriptions: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "descriptions", tuple(self.descriptions))
        if len(self.descriptions) < 1:
            raise EmptyClass(f"class {self.class_name!r} has no descriptions")
        for j, d in enumerate(self.descriptions):
            if not d.strip():
                raise ParseError(
                    f"class {self.class_name!r} description {j} is empty after trimming"
                )

    @property
    def n_descriptions(self) -> int:
        return len(self.descriptions)


@dataclass(frozen=True)
class BankClass:
    """One class inside a built bank: descriptions plus their unit-norm rows."""

    class_id: int
    class_name: str
    descriptions: tuple[str, ...]
    matrix: EmbeddingMatrix = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "descriptions", tuple(self.descriptions))
        if self.matrix.rows != len(self.descriptions):
            raise RowCountMismatch(
                f"class {self.class_name!r}: {self.matrix.rows} rows for "
                f"{len(self.descriptions)} descriptions"
            )
        if not self.matrix.normalized:
            raise ParseError(f"class {self.class_name!r}: bank rows must be normalized")


@dataclass(frozen=True)
class TextEmbeddingBank:
    """Immutable normalized description embeddings for all classes."""

    classes: tuple[BankClass, ...]
    provenance: str

    def __post_init__(self):
        object.__setattr__(self, "classes", tuple(self.classes))
        if not self.classes:
            raise EmptyClass("bank needs at least one class")
        for expect, bc in enumerate(self.classes):
            if bc.class_id != expect:
                raise ParseError(
                    f"class ids must be contiguous from 0; got {bc.class_id} at position {expect}"
                )
        dims = {bc.matrix.dim for bc in self.classes}
        if len(dims) != 1:
            raise RowCountMismatch(f"classes disagree on dim: {sorted(dims)}")

    @property
    def dim(self) -> int:
        return self.classes[0].matrix.dim

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    @property
    def class_names(self) -> tuple[str, ...]:
        return tuple(bc.class_name for bc in self.classes)

    @property
    def total_rows(self) -> int:
        return sum(bc.matrix.rows for bc in self.classes)


@dataclass(frozen=True)
class ClassDiagnostics:
    class_id: int
    class_name: str
    n_descriptions: int
    min_row_norm: float
    max_row_norm: float
    mean_intra_cosine: float | None


@dataclass(frozen=True)
class DuplicateRowWarning:
    class_id: int
    first_index: int
    second_index: int


@dataclass(frozen=True)
class BankDiagnostics:
    dim: int
    per_class: tuple[ClassDiagnostics, ...]
    warnings: tuple[DuplicateRowWarning, ...]


def parse_prompt_document(text: str) -> list[ClassPromptSet]:
    """Parse the versioned prompt-definition document.

    Format: a "zeroleaf-prompts v1" header line, then "[class] <name>" block
    markers, one description per line. Blank lines and '#' comments are
    skipped. Class order defines 0-based class ids; description order within
    a block is preserved exactly as written.
    """
    lines = text.splitlines()
    idx = 0
    while idx < len(lines) and not lines[idx].strip():
        idx += 1
    if idx >= len(lines) or lines[idx].strip() != PROMPT_DOC_HEADER:
        raise ParseError(f"first line must be {PROMPT_DOC_HEADER!r}")
    idx += 1

    names: list[str] = []
    blocks: list[list[str]] = []
    for lineno in range(idx, len(lines)):
        line = lines[lineno].strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith(CLASS_MARKER):
            name = line[len(CLASS_MARKER):].strip()
            if not name:
                raise ParseError(f"line {lineno + 1}: class marker without a name")
            if name in names:
                raise DuplicateClassName(f"class {name!r} listed twice")
            names.append(name)
            blocks.append([])
        else:
            if not blocks:
                raise ParseError(f"line {lineno + 1}: description before any [class] marker")
            blocks[-1].append(line)

    if not names:
        raise ParseError("document defines no classes")
    for name, block in zip(names, blocks):
        if not block:
            raise EmptyClass(f"class {name!r} has no descriptions")
    return [
        ClassPromptSet(class_id=i, class_name=name, descriptions=tuple(block))
        for i, (name, block) in enumerate(zip(names, blocks))
    ]


def load_prompt_sets(path: str | Path) -> list[ClassPromptSet]:
    """Read and parse a prompt-definition document from disk."""
    return parse_prompt_document(read_text(path))


def build_text_bank(prompt_sets: list[ClassPromptSet], embeddings: EmbeddingMatrix,
                    provenance: str) -> TextEmbeddingBank:
    """Slice encoder output rows class-major and normalize them into a bank.

    The embedding matrix must hold one row per description, ordered by class
    then by description position. Rows are re-normalized even if the source
    claimed unit norm: a lossy 32-bit round-trip can perturb norms, and the
    operation is idempotent on rows that are already unit.
    """
    for expect, ps in enumerate(prompt_sets):
        if ps.class_id != expect:
            raise ParseError(
                f"prompt sets must carry contiguous class ids; got {ps.class_id} at {expect}"
            )
    total = sum(ps.n_descriptions for ps in prompt_sets)
    if embeddings.rows != total:
        raise RowCountMismatch(
            f"{embeddings.rows} embedding rows for {total} descriptions"
        )
    classes = []
    offset = 0
    for ps in prompt_sets:
        block = EmbeddingMatrix(embeddings.data[offset:offset + ps.n_descriptions])
        offset += ps.n_descriptions
        classes.append(BankClass(
            class_id=ps.class_id,
            class_name=ps.class_name,
            descriptions=ps.descriptions,
            matrix=l2_normalize_rows(block),
        ))
    return TextEmbeddingBank(classes=tuple(classes), provenance=provenance)


def validate_bank(bank: TextEmbeddingBank) -> BankDiagnostics:
    """Diagnostics over a built bank; never mutates it.

    Row norms are recomputed here with an explicit 64-bit loop, independent
    of the normalization path that produced them.
    """
    per_class = []
    warnings = []
    for bc in bank.classes:
        norms = []
        for i in range(bc.matrix.rows):
            acc = 0.0
            for x in bc.matrix.data[i]:
                acc += float(x) * float(x)
            norms.append(acc ** 0.5)
        cosines = []
        for a in range(bc.matrix.rows):
            for b in range(a + 1, bc.matrix.rows):
                cosines.append(float(np.dot(
                    np.asarray(bc.matrix.data[a], dtype=np.float64),
                    np.asarray(bc.matrix.data[b], dtype=np.float64),
                )))
                if np.array_equal(bc.matrix.data[a], bc.matrix.data[b]):
                    warnings.append(DuplicateRowWarning(
                        class_id=bc.class_id, first_index=a, second_index=b,
                    ))
        per_class.append(ClassDiagnostics(
            class_id=bc.class_id,
            class_name=bc.class_name,
            n_descriptions=bc.matrix.rows,
            min_row_norm=min(norms),
            max_row_norm=max(norms),
            mean_intra_cosine=(sum(cosines) / len(cosines)) if cosines else None,
        ))
    return BankDiagnostics(
        dim=bank.dim, per_class=tuple(per_class), warnings=tuple(warnings),
    )


def bank_to_file(bank: TextEmbeddingBank, path: str | Path) -> None:
    """Persist a bank as a text_bank-kind ZSEB file plus sidecar."""
    rows = []
    for bc in bank.classes:
        for j, text in enumerate(bc.descriptions):
            rows.append(TextRowInfo(
                class_id=bc.class_id,
                class_name=bc.class_name,
                description_index=j,
                description_text=text,
            ))
    stacked = EmbeddingMatrix(
        np.concatenate([bc.matrix.data for bc in bank.classes], axis=0),
        normalized=True,
    )
    sidecar = Sidecar(kind=KIND_TEXT_BANK, provenance=bank.provenance, rows=tuple(rows))
    write_embedding_file(stacked, sidecar, path)


def bank_from_file(path: str | Path) -> TextEmbeddingBank:
    """Load a text_bank ZSEB file back into an immutable bank."""
    matrix, sidecar = read_embedding_file(path)
    if sidecar.kind != KIND_TEXT_BANK:
        raise ParseError(f"{path}: sidecar kind {sidecar.kind!r}, expected text_bank")
    prompt_sets: list[ClassPromptSet] = []
    pos = 0
    while pos < len(sidecar.rows):
        row = sidecar.rows[pos]
        descriptions = []
        while pos < len(sidecar.rows) and sidecar.rows[pos].class_id == row.class_id:
            r = sidecar.rows[pos]
            if r.class_name != row.class_name:
                raise ParseError(f"{path}: class {row.class_id} has conflicting names")
            if r.description_index != len(descriptions):
                raise ParseError(
                    f"{path}: class {row.class_id} description indices out of order"
                )
            descriptions.append(r.description_text)
            pos += 1
        prompt_sets.append(ClassPromptSet(
            class_id=row.class_id,
            class_name=row.class_name,
            descriptions=tuple(descriptions),
        ))
    seen = [ps.class_name for ps in prompt_sets]
    if len(set(seen)) != len(seen):
        raise DuplicateClassName(f"{path}: repeated class name in sidecar")
    # build_text_bank re-normalizes, so a lossy or unflagged file still loads.
    return build_text_bank(prompt_sets, matrix, sidecar.provenance)


def potato_prompts_path() -> Path:
    """Path of the shipped three-class potato prompt fixture."""
    res = importlib.resources.files("zeroleaf").joinpath("fixtures/potato_prompts.txt")
    return Path(str(res))
