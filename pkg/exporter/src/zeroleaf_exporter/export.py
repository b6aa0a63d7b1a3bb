"""Export operations: prompts and images in, ZSEB files plus sidecars out.

Rows are written unnormalized in both directions; the consuming side owns
normalization (offline at bank build for text, online per input for images).
The exporter never reads files the core produced.
"""

from __future__ import annotations

from pathlib import Path

from .documents import load_image_manifest, load_prompt_document
from .errors import UnreadableImage
from .zseb import KIND_IMAGE_SET, KIND_TEXT_BANK, image_row, text_row, write_zseb


def encode_prompts(provider, prompt_document: str | Path, out_path: str | Path) -> int:
    """Encode every class description, class-major, in document order.

    Returns the number of rows written. The sidecar carries the verbatim
    description text for each payload row.
    """
    classes = load_prompt_document(prompt_document)
    texts = []
    descriptors = []
    for pc in classes:
        for j, text in enumerate(pc.descriptions):
            texts.append(text)
            descriptors.append(text_row(pc.class_id, pc.class_name, j, text))
    rows = provider.encode_texts(texts)
    write_zseb(rows, KIND_TEXT_BANK, descriptors, provider.provenance, out_path)
    return len(texts)


def encode_images(provider, manifest_path: str | Path, out_path: str | Path,
                  batch_size: int = 16) -> int:
    """Encode every manifest image, in manifest order.

    Providers that read pixels get their paths validated up front so a
    missing file fails before any encoding work starts.
    """
    entries = load_image_manifest(manifest_path)
    if provider.requires_images:
        for e in entries:
            if e.path is None:
                raise UnreadableImage(f"{e.item_id}: no image path given")
            if not e.path.is_file():
                raise UnreadableImage(f"{e.item_id}: {e.path}: no such file")
    rows = provider.encode_images(
        [e.item_id for e in entries],
        [e.path for e in entries],
        batch_size=batch_size,
    )
    descriptors = [image_row(e.item_id, e.source, e.true_label) for e in entries]
    write_zseb(rows, KIND_IMAGE_SET, descriptors, provider.provenance, out_path)
    return len(entries)
