import json
import subprocess
import sys

import numpy as np
import pytest

from zeroleaf.cli import main
from zeroleaf.exchange import (
    KIND_TEXT_BANK,
    Sidecar,
    TextRowInfo,
    image_sidecar,
    write_embedding_file,
)
from zeroleaf.promptbank import load_prompt_sets, potato_prompts_path
from zeroleaf.vecspace import EmbeddingMatrix

from conftest import (
    make_separated_centroids,
    write_manifest_fixture,
    write_field_fixture,
)


@pytest.fixture
def pipeline_files(tmp_path, rng):
    """Prompt doc + text embeddings + image embeddings for a small pipeline."""
    dim = 24
    prompts = tmp_path / "prompts.txt"
    doc = ["zeroleaf-prompts v1"]
    cents = make_separated_centroids(rng, 3, dim)
    names = ["early", "late", "healthy"]
    text_rows = []
    for c, name in enumerate(names):
        doc.append(f"[class] {name}")
        for j in range(3):
            doc.append(f"{name} description {j}")
            text_rows.append(
                cents[c] + 0.05 * np.asarray([rng.gauss(0, 1) for _ in range(dim)])
            )
    prompts.write_text("\n".join(doc) + "\n")

    prompt_sets = load_prompt_sets(prompts)
    sidecar_rows = []
    for ps in prompt_sets:
        for j, text in enumerate(ps.descriptions):
            sidecar_rows.append(TextRowInfo(ps.class_id, ps.class_name, j, text))
    text_path = tmp_path / "text.zseb"
    write_embedding_file(
        EmbeddingMatrix(np.asarray(text_rows, dtype=np.float32)),
        Sidecar(kind=KIND_TEXT_BANK, provenance="stub-encoder", rows=tuple(sidecar_rows)),
        text_path,
    )

    ids = [f"img{i}" for i in range(12)]
    labels = [i % 3 for i in range(12)]
    image_rows = np.asarray(
        [cents[l] + 0.05 * np.asarray([rng.gauss(0, 1) for _ in range(dim)])
         for l in labels],
        dtype=np.float32,
    )
    images_path = tmp_path / "field.zseb"
    write_embedding_file(
        EmbeddingMatrix(image_rows),
        image_sidecar(ids, ["site"] * 12, labels, "stub-encoder"),
        images_path,
    )
    manifest_path = write_manifest_fixture(
        tmp_path, ids, ["site"] * 12, labels, names, image_rows, normalized=False,
    )
    return {
        "prompts": prompts,
        "text": text_path,
        "images": images_path,
        "manifest": manifest_path,
        "tmp": tmp_path,
        "labels": labels,
    }


class TestBankAndClassify:
    def test_bank_then_classify(self, pipeline_files, capsys):
        f = pipeline_files
        bank_path = f["tmp"] / "bank.zseb"
        assert main(["bank", "--prompts", str(f["prompts"]),
                     "--embeddings", str(f["text"]),
                     "--out", str(bank_path)]) == 0
        assert "3 classes, 9 descriptions" in capsys.readouterr().out

        preds = f["tmp"] / "preds.jsonl"
        assert main(["classify", "--bank", str(bank_path),
                     "--images", str(f["images"]),
                     "--out", str(preds)]) == 0
        lines = preds.read_text().strip().splitlines()
        assert len(lines) == 12
        records = [json.loads(l) for l in lines]
        # separable fixture: predictions match the construction labels
        assert [r["predicted_label"] for r in records] == f["labels"]
        assert all(r["best_description"] is not None for r in records)

    def test_classify_repeat_runs_byte_identical(self, pipeline_files):
        f = pipeline_files
        bank_path = f["tmp"] / "bank.zseb"
        main(["bank", "--prompts", str(f["prompts"]),
              "--embeddings", str(f["text"]), "--out", str(bank_path)])
        p1, p2 = f["tmp"] / "a.jsonl", f["tmp"] / "b.jsonl"
        for out in (p1, p2):
            assert main(["classify", "--bank", str(bank_path),
                         "--images", str(f["images"]), "--out", str(out)]) == 0
        assert p1.read_bytes() == p2.read_bytes()

    def test_bank_determinism(self, pipeline_files):
        f = pipeline_files
        b1, b2 = f["tmp"] / "b1.zseb", f["tmp"] / "b2.zseb"
        for out in (b1, b2):
            assert main(["bank", "--prompts", str(f["prompts"]),
                         "--embeddings", str(f["text"]), "--out", str(out)]) == 0
        assert b1.read_bytes() == b2.read_bytes()


class TestFoldsCommand:
    def test_writes_plan(self, tmp_path, capsys):
        manifest = write_field_fixture(tmp_path)
        out = tmp_path / "plan.json"
        assert main(["folds", "--manifest", manifest, "--k", "5",
                     "--seed", "42", "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert doc["k"] == 5 and len(doc["assignments"]) == 945
        assert "k=5 seed=42" in capsys.readouterr().out

    def test_identical_across_runs(self, tmp_path):
        manifest = write_field_fixture(tmp_path)
        p1, p2 = tmp_path / "p1.json", tmp_path / "p2.json"
        for out in (p1, p2):
            main(["folds", "--manifest", manifest, "--out", str(out)])
        assert p1.read_bytes() == p2.read_bytes()


class TestEvaluateAndReport:
    def test_zero_shot_end_to_end(self, pipeline_files):
        f = pipeline_files
        bank_path = f["tmp"] / "bank.zseb"
        main(["bank", "--prompts", str(f["prompts"]),
              "--embeddings", str(f["text"]), "--out", str(bank_path)])
        out = f["tmp"] / "run"
        assert main(["evaluate", "--mode", "zero-shot",
                     "--manifest", f["manifest"], "--bank", str(bank_path),
                     "--model", "stub-clip", "--group", "Zero-Shot",
                     "--out", str(out)]) == 0
        doc = json.loads((out / "result.json").read_text())
        assert doc["mode"] == "zero_shot_single"
        assert doc["overall"]["macro_f1"] == 1.0
        assert (out / "predictions.jsonl").exists()

        report_dir = f["tmp"] / "report"
        assert main(["report", "--result", str(out / "result.json"),
                     "--out", str(report_dir)]) == 0
        summary = (report_dir / "summary.txt").read_text()
        assert "Zero-Shot | stub-clip | 100.00 | 100.00 | 100.00" in summary

    def test_evaluate_artifacts_byte_identical_across_runs(self, pipeline_files):
        f = pipeline_files
        bank_path = f["tmp"] / "bank.zseb"
        main(["bank", "--prompts", str(f["prompts"]),
              "--embeddings", str(f["text"]), "--out", str(bank_path)])
        outs = []
        for name in ("r1", "r2"):
            out = f["tmp"] / name
            assert main(["evaluate", "--mode", "zero-shot",
                         "--manifest", f["manifest"], "--bank", str(bank_path),
                         "--out", str(out)]) == 0
            outs.append(out)
        assert (outs[0] / "result.json").read_bytes() == (outs[1] / "result.json").read_bytes()
        assert (outs[0] / "predictions.jsonl").read_bytes() == (outs[1] / "predictions.jsonl").read_bytes()

    def test_external_end_to_end(self, tmp_path):
        manifest_path = write_field_fixture(tmp_path)
        from zeroleaf.harness import load_manifest
        manifest = load_manifest(manifest_path)
        plan_path = tmp_path / "plan.json"
        main(["folds", "--manifest", manifest_path, "--out", str(plan_path)])

        scores_path = tmp_path / "scores.tsv"
        lines = ["zeroleaf-scores v1", "classes\t" + "|".join(manifest.class_names)]
        onehot = np.eye(3)[manifest.labels]
        for item_id, row in zip(manifest.ids, onehot):
            lines.append(item_id + "\t" + "\t".join(str(v) for v in row))
        scores_path.write_text("\n".join(lines) + "\n")

        out = tmp_path / "run"
        assert main(["evaluate", "--mode", "external",
                     "--manifest", manifest_path, "--scores", str(scores_path),
                     "--folds", str(plan_path), "--out", str(out)]) == 0
        doc = json.loads((out / "result.json").read_text())
        assert doc["mode"] == "external_scores_kfold"
        assert len(doc["fold_reports"]) == 5
        assert doc["cross_fold_mean"]["macro_f1"] == 1.0

        report_dir = tmp_path / "report"
        assert main(["report", "--result", str(out / "result.json"),
                     "--formats", "csv,text", "--out", str(report_dir)]) == 0
        assert (report_dir / "folds.csv").exists()
        assert not (report_dir / "report.json").exists()


class TestExitCodes:
    def test_unknown_subcommand_is_usage_error(self):
        assert main(["frobnicate"]) == 2

    def test_unknown_flag_is_usage_error(self):
        assert main(["folds", "--manifest", "x", "--out", "y", "--bogus"]) == 2

    def test_zero_shot_with_folds_is_usage_error(self, pipeline_files, capsys):
        f = pipeline_files
        code = main(["evaluate", "--mode", "zero-shot",
                     "--manifest", f["manifest"], "--bank", "whatever.zseb",
                     "--folds", "plan.json", "--out", str(f["tmp"] / "o")])
        assert code == 2
        assert "ModeMismatch" in capsys.readouterr().err

    def test_missing_file_is_runtime_error(self, tmp_path, capsys):
        code = main(["classify", "--bank", str(tmp_path / "none.zseb"),
                     "--images", str(tmp_path / "none2.zseb"),
                     "--out", str(tmp_path / "o.jsonl")])
        assert code == 1
        assert "IoFailure" in capsys.readouterr().err

    def test_bad_magic_is_runtime_error_with_name(self, tmp_path, capsys):
        bad = tmp_path / "bad.zseb"
        bad.write_bytes(b"XXXXgarbage")
        code = main(["classify", "--bank", str(bad),
                     "--images", str(bad), "--out", str(tmp_path / "o")])
        assert code == 1
        assert "BadMagic" in capsys.readouterr().err

    def test_unknown_report_format_is_runtime_error(self, pipeline_files, capsys):
        f = pipeline_files
        bank_path = f["tmp"] / "bank.zseb"
        main(["bank", "--prompts", str(f["prompts"]),
              "--embeddings", str(f["text"]), "--out", str(bank_path)])
        out = f["tmp"] / "run"
        main(["evaluate", "--mode", "zero-shot", "--manifest", f["manifest"],
              "--bank", str(bank_path), "--out", str(out)])
        code = main(["report", "--result", str(out / "result.json"),
                     "--formats", "xml", "--out", str(f["tmp"] / "r")])
        assert code == 1
        assert "UnknownFormat" in capsys.readouterr().err

    def test_malformed_manifest_is_runtime_error(self, tmp_path, capsys):
        bad = tmp_path / "m.tsv"
        bad.write_text("definitely not a manifest\n")
        code = main(["folds", "--manifest", str(bad),
                     "--out", str(tmp_path / "plan.json")])
        assert code == 1
        assert "ParseError" in capsys.readouterr().err

    def test_truncated_embedding_file_is_runtime_error(self, pipeline_files, capsys):
        f = pipeline_files
        raw = f["text"].read_bytes()
        f["text"].write_bytes(raw[:-4])
        code = main(["bank", "--prompts", str(f["prompts"]),
                     "--embeddings", str(f["text"]),
                     "--out", str(f["tmp"] / "bank.zseb")])
        assert code == 1
        assert "TruncatedPayload" in capsys.readouterr().err

    def test_console_entry_via_subprocess(self):
        proc = subprocess.run(
            [sys.executable, "-m", "zeroleaf", "--help"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        assert "zeroleaf" in proc.stdout


class TestPotatoFixtureThroughCli:
    def test_potato_prompt_fixture_builds_bank(self, tmp_path, rng, capsys):
        # 18 descriptions, class-major rows, as the exporter would emit them
        sets = load_prompt_sets(potato_prompts_path())
        rows = []
        sidecar_rows = []
        for ps in sets:
            for j, text in enumerate(ps.descriptions):
                sidecar_rows.append(TextRowInfo(ps.class_id, ps.class_name, j, text))
                rows.append([rng.gauss(0, 1) for _ in range(64)])
        text_path = tmp_path / "potato_text.zseb"
        write_embedding_file(
            EmbeddingMatrix(np.asarray(rows, dtype=np.float32)),
            Sidecar(kind=KIND_TEXT_BANK, provenance="enc", rows=tuple(sidecar_rows)),
            text_path,
        )
        bank_path = tmp_path / "potato.zseb"
        assert main(["bank", "--prompts", str(potato_prompts_path()),
                     "--embeddings", str(text_path),
                     "--out", str(bank_path)]) == 0
        assert "3 classes, 18 descriptions, dim 64" in capsys.readouterr().out
