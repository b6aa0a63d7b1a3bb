"""Command-line surface: build banks, classify, plan folds, evaluate, report.

Exit codes: 0 success, 1 runtime failure (printed as the error name plus
context), 2 usage error. Reference behavior is the no-flag path:
aggregation sum, seed 42, exact tie-breaking toward the lower class index.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import harness, promptbank, zeroshot
from .errors import ParseError, ZeroleafError
from .exchange import read_embedding_file
from .ioutil import atomic_write_text, read_text
from .vecspace import l2_normalize_rows

DEFAULT_SEED = 42
DEFAULT_FORMATS = "json,csv,text"


def _cmd_bank(args) -> int:
    prompt_sets = promptbank.load_prompt_sets(args.prompts)
    matrix, sidecar = read_embedding_file(args.embeddings)
    provenance = args.provenance if args.provenance else sidecar.provenance
    bank = promptbank.build_text_bank(prompt_sets, matrix, provenance)
    promptbank.bank_to_file(bank, args.out)
    print(f"bank: {bank.n_classes} classes, {bank.total_rows} descriptions, "
          f"dim {bank.dim} -> {args.out}")
    return 0


def _cmd_classify(args) -> int:
    bank = promptbank.bank_from_file(args.bank)
    matrix, sidecar = read_embedding_file(args.images)
    if sidecar.kind != "image_set":
        raise ParseError(f"{args.images}: expected an image_set file, got {sidecar.kind!r}")
    images = l2_normalize_rows(matrix)
    ids = [r.item_id for r in sidecar.rows]
    labels = [r.true_label for r in sidecar.rows]
    aggregation = zeroshot.Aggregation(args.aggregation)
    records = zeroshot.classify_batch(images, ids, bank, aggregation, true_labels=labels)
    zeroshot.write_prediction_records(records, bank.class_names, args.out)
    print(f"classify: {len(records)} items, {bank.n_classes} classes, "
          f"aggregation {aggregation.value} -> {args.out}")
    return 0


def _cmd_folds(args) -> int:
    manifest = harness.load_manifest(args.manifest)
    plan = harness.stratified_kfold(manifest, args.k, args.seed)
    atomic_write_text(args.out, plan.to_json())
    print(f"folds: k={plan.k} seed={plan.seed} "
          f"{len(plan.assignments)} items -> {args.out}")
    return 0


def _cmd_evaluate(args) -> int:
    manifest = harness.load_manifest(args.manifest)
    if args.mode == "zero-shot":
        if args.folds is not None:
            print("usage error: --folds is not allowed with --mode zero-shot "
                  "(ModeMismatch: zero-shot results are single-run)", file=sys.stderr)
            return 2
        if args.bank is None:
            print("usage error: --mode zero-shot requires --bank", file=sys.stderr)
            return 2
        if args.scores is not None:
            print("usage error: --scores is not allowed with --mode zero-shot",
                  file=sys.stderr)
            return 2
        bank = promptbank.bank_from_file(args.bank)
        images = harness.load_manifest_embeddings(manifest)
        result = harness.run_evaluation(
            manifest,
            bank=bank,
            images=images,
            aggregation=zeroshot.Aggregation(args.aggregation),
            run_id=args.run_id,
            model_name=args.model,
            group_name=args.group,
            include_ovr_mcc=args.ovr_mcc,
        )
    else:
        if args.scores is None or args.folds is None:
            print("usage error: --mode external requires --scores and --folds",
                  file=sys.stderr)
            return 2
        if args.bank is not None:
            print("usage error: --bank is not allowed with --mode external",
                  file=sys.stderr)
            return 2
        scores = harness.ingest_external_scores(args.scores, manifest)
        plan = harness.FoldPlan.from_json(read_text(args.folds))
        result = harness.run_evaluation(
            manifest,
            scores=scores,
            fold_plan=plan,
            run_id=args.run_id,
            model_name=args.model,
            group_name=args.group,
            include_ovr_mcc=args.ovr_mcc,
        )

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    zeroshot.write_prediction_records(result.records, result.class_names,
                                      out / "predictions.jsonl")
    doc = harness.result_to_dict(result)
    doc["predictions_file"] = "predictions.jsonl"
    atomic_write_text(out / "result.json", json.dumps(doc, indent=2, sort_keys=True) + "\n")
    print(f"evaluate: mode={result.mode} items={result.overall.n_items} "
          f"macro_f1={result.overall.f1_macro:.6f} -> {out}")
    return 0


def _cmd_report(args) -> int:
    result_path = Path(args.result)
    try:
        doc = json.loads(read_text(result_path))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{result_path}: invalid JSON: {exc}") from exc
    records = []
    predictions_file = doc.get("predictions_file")
    if predictions_file:
        records = zeroshot.read_prediction_records(result_path.parent / predictions_file)
    result = harness.result_from_dict(doc, records)
    formats = {f.strip() for f in args.formats.split(",") if f.strip()}
    written = harness.emit_report(result, formats, args.out)
    names = ",".join(sorted(written))
    print(f"report: formats={names} -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zeroleaf",
        description="Zero-shot prompt-ensemble classification and evaluation "
                    "over embedding exchange files.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bank", help="build a text-embedding bank file")
    p.add_argument("--prompts", required=True, help="prompt-definition document")
    p.add_argument("--embeddings", required=True, help="ZSEB file of description embeddings")
    p.add_argument("--out", required=True, help="output bank path (.zseb)")
    p.add_argument("--provenance", default="", help="override encoder provenance string")
    p.set_defaults(func=_cmd_bank)

    p = sub.add_parser("classify", help="classify an image-embedding file")
    p.add_argument("--bank", required=True, help="bank ZSEB file")
    p.add_argument("--images", required=True, help="image-set ZSEB file")
    p.add_argument("--out", required=True, help="output predictions (JSONL)")
    p.add_argument("--aggregation", choices=["sum", "mean"], default="sum")
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("folds", help="write a stratified k-fold plan")
    p.add_argument("--manifest", required=True)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_folds)

    p = sub.add_parser("evaluate", help="run a full evaluation over a manifest")
    p.add_argument("--mode", choices=["zero-shot", "external"], required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--bank", help="bank ZSEB file (zero-shot mode)")
    p.add_argument("--aggregation", choices=["sum", "mean"], default="sum")
    p.add_argument("--scores", help="external score file (external mode)")
    p.add_argument("--folds", help="fold plan JSON (external mode)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--run-id", default="run")
    p.add_argument("--model", default="", help="model name for the summary table")
    p.add_argument("--group", default="", help="model group for the summary table")
    p.add_argument("--ovr-mcc", action="store_true",
                   help="also compute macro one-vs-rest binary MCC")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("report", help="render an evaluation result")
    p.add_argument("--result", required=True, help="result.json from evaluate")
    p.add_argument("--formats", default=DEFAULT_FORMATS,
                   help=f"comma-separated subset of {DEFAULT_FORMATS}")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("ZEROLEAF_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except ZeroleafError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: IoFailure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
