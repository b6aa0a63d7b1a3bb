"""Parsers for the two input document formats the exporter consumes.

Both formats are part of the zeroleaf exchange surface and are implemented
here independently of the core package, against the documented layouts:

prompt document      "zeroleaf-prompts v1" header, "[class] Name" block
                     markers, one description per line.
image-path manifest  "zeroleaf-images v1" header, then TSV lines
                     item_id <TAB> source <TAB> label-or-'-' <TAB> path-or-'-'.

Blank lines and '#' comments are skipped in both.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .errors import DuplicateClassName, DuplicateItemId, EmptyClass, ParseError

PROMPTS_HEADER = "zeroleaf-prompts v1"
IMAGES_HEADER = "zeroleaf-images v1"
CLASS_MARKER = "[class]"


@dataclass(frozen=True)
class PromptClass:
    class_id: int
    class_name: str
    descriptions: tuple[str, ...]


@dataclass(frozen=True)
class ImageEntry:
    item_id: str
    source: str
    true_label: int | None
    path: Path | None


def parse_prompt_document(text: str) -> list[PromptClass]:
    lines = text.splitlines()
    idx = 0
    while idx < len(lines) and not lines[idx].strip():
        idx += 1
    if idx >= len(lines) or lines[idx].strip() != PROMPTS_HEADER:
        raise ParseError(f"first line must be {PROMPTS_HEADER!r}")

    names: list[str] = []
    blocks: list[list[str]] = []
    for lineno in range(idx + 1, len(lines)):
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
        PromptClass(class_id=i, class_name=n, descriptions=tuple(b))
        for i, (n, b) in enumerate(zip(names, blocks))
    ]


def load_prompt_document(path: str | Path) -> list[PromptClass]:
    return parse_prompt_document(Path(path).read_text(encoding="utf-8"))


def parse_image_manifest(text: str, base_dir: Path) -> list[ImageEntry]:
    lines = text.splitlines()
    body = [
        (n + 1, ln) for n, ln in enumerate(lines)
        if ln.strip() and not ln.strip().startswith("#")
    ]
    if not body or body[0][1].strip() != IMAGES_HEADER:
        raise ParseError(f"first line must be {IMAGES_HEADER!r}")
    entries = []
    seen = set()
    for lineno, line in body[1:]:
        parts = [p.strip() for p in line.split("\t")]
        if len(parts) != 4:
            raise ParseError(f"line {lineno}: expected 4 tab-separated fields")
        item_id, source, label_s, path_s = parts
        if not item_id or not source:
            raise ParseError(f"line {lineno}: empty item id or source")
        if item_id in seen:
            raise DuplicateItemId(f"line {lineno}: repeated item id {item_id!r}")
        seen.add(item_id)
        if label_s == "-":
            label = None
        else:
            try:
                label = int(label_s)
            except ValueError as exc:
                raise ParseError(f"line {lineno}: label must be an integer or '-'") from exc
        path = None if path_s == "-" else (base_dir / path_s)
        entries.append(ImageEntry(item_id=item_id, source=source,
                                  true_label=label, path=path))
    if not entries:
        raise ParseError("manifest lists no images")
    return entries


def load_image_manifest(path: str | Path) -> list[ImageEntry]:
    p = Path(path)
    return parse_image_manifest(p.read_text(encoding="utf-8"), p.parent)


def potato_prompts_path() -> Path:
    """Path of the bundled three-class potato prompt document."""
    import importlib.resources

    res = importlib.resources.files("zeroleaf_exporter").joinpath(
        "fixtures/potato_prompts.txt"
    )
    return Path(str(res))
