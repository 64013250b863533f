import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from lexcite.cli import main
from lexcite.fusion import collapse_verdicts, rank as fusion_rank, vote_set
from lexcite.gateway import parse_verdict
from lexcite.lexical import minmax_normalize


def run_cli(args):
    runner = CliRunner()
    result = runner.invoke(main, args, catch_exceptions=False)
    return result


def run_pipeline(fixture_dir: Path, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    config = str(fixture_dir / "config.json")
    steps = [
        ["ingest", "--decisions", str(fixture_dir / "decisions.jsonl"),
         "--articles", str(fixture_dir / "articles.jsonl"),
         "--out-dir", str(out_dir / "store")],
        ["chunk", "--decisions", str(out_dir / "store" / "decisions.jsonl"),
         "--out", str(out_dir / "chunks.jsonl"),
         "--masked-out", str(out_dir / "masked_chunks.jsonl")],
        ["extract-explicit", "--chunks", str(out_dir / "chunks.jsonl"),
         "--articles", str(out_dir / "store" / "articles.jsonl"),
         "--out", str(out_dir / "explicit.jsonl")],
        ["build-index", "--embeddings", str(fixture_dir / "embeddings_articles.jsonl"),
         "--out", str(out_dir / "index.jsonl")],
        ["gen-candidates", "--chunks", str(out_dir / "chunks.jsonl"),
         "--decisions", str(out_dir / "store" / "decisions.jsonl"),
         "--index", str(out_dir / "index.jsonl"),
         "--chunk-embeddings", str(fixture_dir / "embeddings_chunks.jsonl"),
         "--out", str(out_dir / "candidates.jsonl")],
        ["filter", "--candidates", str(out_dir / "candidates.jsonl"),
         "--scores", str(fixture_dir / "scores.jsonl"),
         "--out", str(out_dir / "filtered.jsonl"),
         "--rejects", str(out_dir / "rejects.json"),
         "--checkpoint", str(out_dir / "checkpoint.jsonl")],
        ["score", "--candidates", str(out_dir / "candidates.jsonl"),
         "--chunks", str(out_dir / "chunks.jsonl"),
         "--articles", str(out_dir / "store" / "articles.jsonl"),
         "--scores", str(fixture_dir / "scores.jsonl"),
         "--out", str(out_dir / "pair_scores.jsonl")],
        ["rank", "--candidates", str(out_dir / "candidates.jsonl"),
         "--pair-scores", str(out_dir / "pair_scores.jsonl"),
         "--scores", str(fixture_dir / "scores.jsonl"),
         "--method", "ensemble",
         "--out", str(out_dir / "rank_ensemble.jsonl")],
        ["rank", "--candidates", str(out_dir / "candidates.jsonl"),
         "--pair-scores", str(out_dir / "pair_scores.jsonl"),
         "--scores", str(fixture_dir / "scores.jsonl"),
         "--method", "inter4",
         "--out", str(out_dir / "rank_inter4.jsonl")],
    ]
    for step in steps:
        result = run_cli(["--config", config, "--seed", "11", *step])
        assert result.exit_code == 0, f"{step[0]} failed: {result.output}"


class TestEvalCommand:
    def test_cm_prints_paper_metrics(self):
        result = run_cli(["eval", "--cm", "278,499,66,172"])
        assert result.exit_code == 0
        assert "mcc=0.53" in result.output
        assert "f1=0.70" in result.output
        assert "accuracy=0.77" in result.output

    def test_cm_json_mode(self):
        result = run_cli(["eval", "--cm", "10,10,0,0", "--json"])
        payload = json.loads(result.output)
        assert payload["mcc"] == 1.0

    def test_bad_cm_rejected(self):
        runner = CliRunner()
        result = runner.invoke(main, ["eval", "--cm", "1,2,3"])
        assert result.exit_code != 0

    def test_probs_gold_threshold_optimization(self, benchmark_dir, tmp_path):
        gold_path = tmp_path / "gold.jsonl"
        labels = {}
        for name in ("labels_primary.jsonl", "labels_adjudication.jsonl"):
            for line in open(benchmark_dir / name, encoding="utf-8"):
                rec = json.loads(line)
                labels.setdefault(rec["pair_id"], {})[rec["annotator_id"]] = rec["label"]
        with open(gold_path, "w", encoding="utf-8") as fh:
            for pid, ann in sorted(labels.items()):
                c1 = "yes" if ann["A1"] == "yes" else "no"
                c2 = "yes" if ann["A2"] == "yes" else "no"
                gold = c1 if c1 == c2 else ("yes" if ann["A3"] == "yes" else "no")
                fh.write(json.dumps({"pair_id": pid, "label": gold}) + "\n")
        result = run_cli([
            "eval",
            "--probs", str(benchmark_dir / "ensemble_probs.jsonl"),
            "--gold", str(gold_path),
            "--optimize",
        ])
        assert result.exit_code == 0
        assert "threshold 0.61" in result.output
        assert "tp=278 tn=499 fp=66 fn=172" in result.output


class TestMissingInputs:
    def test_named_path_error(self, tmp_path):
        runner = CliRunner()
        result = runner.invoke(
            main,
            ["chunk", "--decisions", str(tmp_path / "nope.jsonl"), "--out", str(tmp_path / "o")],
        )
        assert result.exit_code != 0
        assert "nope.jsonl" in result.output

    def test_missing_config_file(self, tmp_path):
        runner = CliRunner()
        result = runner.invoke(main, ["--config", str(tmp_path / "no.json"), "eval", "--cm", "1,1,1,1"])
        assert result.exit_code != 0


class TestPipelineGoldenTree:
    def test_byte_identical_across_runs(self, pipeline20_dir, tmp_path):
        run_pipeline(pipeline20_dir, tmp_path / "run_a")
        run_pipeline(pipeline20_dir, tmp_path / "run_b")
        files_a = sorted(p.relative_to(tmp_path / "run_a") for p in (tmp_path / "run_a").rglob("*") if p.is_file())
        files_b = sorted(p.relative_to(tmp_path / "run_b") for p in (tmp_path / "run_b").rglob("*") if p.is_file())
        assert files_a == files_b
        assert files_a, "pipeline produced no artifacts"
        for rel in files_a:
            a = (tmp_path / "run_a" / rel).read_bytes()
            b = (tmp_path / "run_b" / rel).read_bytes()
            assert a == b, f"artifact differs across runs: {rel}"

    def test_pipeline_artifacts_nonempty(self, pipeline20_dir, tmp_path):
        run_pipeline(pipeline20_dir, tmp_path / "run")
        candidates = (tmp_path / "run" / "candidates.jsonl").read_text().splitlines()
        filtered = (tmp_path / "run" / "filtered.jsonl").read_text().splitlines()
        explicit = (tmp_path / "run" / "explicit.jsonl").read_text().splitlines()
        assert len(candidates) > 0
        assert 0 < len(filtered) <= len(candidates)
        assert len(explicit) > 0
        # filtered positives form a subset of the candidate pool
        pool_ids = {json.loads(l)["pair_id"] for l in candidates}
        kept_ids = {json.loads(l)["pair_id"] for l in filtered}
        assert kept_ids <= pool_ids

    def test_rank_inter4_matches_library_oracle(self, pipeline20_dir, tmp_path):
        out = tmp_path / "run"
        run_pipeline(pipeline20_dir, out)
        config = json.loads((pipeline20_dir / "config.json").read_text())
        models = config["fusion_models"]
        verdicts = {}
        for line in open(pipeline20_dir / "scores.jsonl", encoding="utf-8"):
            rec = json.loads(line)
            if rec["kind"] == "llm_verdict" and rec["model_id"] in models:
                verdicts.setdefault(rec["pair_id"], {})[rec["model_id"]] = parse_verdict(
                    rec["value"], mode="binary"
                )
        pair_ids = [json.loads(l)["pair_id"] for l in open(out / "candidates.jsonl")]
        cross = {
            json.loads(l)["pair_id"]: json.loads(l)["cross"]
            for l in open(out / "pair_scores.jsonl")
        }
        cross_n = dict(zip(pair_ids, minmax_normalize([cross[p] for p in pair_ids])))
        primary = [
            1.0 if vote_set(collapse_verdicts(verdicts.get(p, {}), models), "inter4") else 0.0
            for p in pair_ids
        ]
        expected = fusion_rank(pair_ids, primary, [cross_n[p] for p in pair_ids])
        got = [json.loads(l)["pair_id"] for l in open(out / "rank_inter4.jsonl")]
        assert got == expected


class TestHttpFilterTransport:
    def test_live_transport_with_stub_endpoint(self, pipeline20_dir, tmp_path, monkeypatch):
        import httpx

        from lexcite import gateway

        run_pipeline(pipeline20_dir, tmp_path / "run")

        def handler(request):
            body = json.loads(request.content)
            assert "Article" in body["prompt"]
            return httpx.Response(200, json={"text": "OUI — principe repris."})

        def fake_from_env(cls=None, **kwargs):
            client = httpx.Client(transport=httpx.MockTransport(handler), base_url="http://stub")
            return gateway.HttpTransport("http://stub", client=client)

        monkeypatch.setattr(gateway.HttpTransport, "from_env", classmethod(lambda cls, **kw: fake_from_env()))
        result = run_cli([
            "--jobs", "4",
            "filter",
            "--candidates", str(tmp_path / "run" / "candidates.jsonl"),
            "--transport", "http",
            "--model", "live-model",
            "--chunks", str(tmp_path / "run" / "chunks.jsonl"),
            "--articles", str(tmp_path / "run" / "store" / "articles.jsonl"),
            "--cache", str(tmp_path / "cache.jsonl"),
            "--out", str(tmp_path / "filtered_http.jsonl"),
            "--rejects", str(tmp_path / "rejects_http.json"),
        ])
        assert result.exit_code == 0, result.output
        kept = [json.loads(l) for l in open(tmp_path / "filtered_http.jsonl")]
        pool = [json.loads(l) for l in open(tmp_path / "run" / "candidates.jsonl")]
        assert len(kept) == len(pool)  # stub says OUI to everything
        assert (tmp_path / "cache.jsonl").exists()


class TestStatsCommands:
    def test_corpus_stats_on_benchmark(self, benchmark_dir):
        result = run_cli([
            "stats", "corpus",
            "--decisions", str(benchmark_dir / "decisions.jsonl"),
            "--articles", str(benchmark_dir / "articles.jsonl"),
        ])
        assert result.exit_code == 0
        payload = json.loads(result.output)
        assert payload["n_decisions"] == 829
        assert abs(payload["chunks"]["mean"] - 49.9) <= 5.0
        assert payload["chunks"]["median"] == 50

    def test_agreement_stats(self, benchmark_dir, benchmark_full_label_log, tmp_path):
        result = run_cli([
            "stats", "agreement",
            "--labels", str(benchmark_full_label_log),
            "--pairs", str(benchmark_dir / "pairs.jsonl"),
            "--out-dir", str(tmp_path / "reports"),
        ])
        assert result.exit_code == 0
        payload = json.loads(result.output)
        assert payload["gold"] == {"yes": 450, "no": 565}
        assert (tmp_path / "reports" / "agreement.json").exists()
        assert (tmp_path / "reports" / "disagreement_structure.csv").exists()

    def test_tables_report(self, benchmark_dir, benchmark_full_label_log, tmp_path):
        out_dir = tmp_path / "tables"
        result = run_cli([
            "stats", "tables",
            "--labels", str(benchmark_full_label_log),
            "--pairs", str(benchmark_dir / "pairs.jsonl"),
            "--probs", str(benchmark_dir / "ensemble_probs.jsonl"),
            "--model-id", "stacking-ensemble",
            "--out-dir", str(out_dir),
        ])
        assert result.exit_code == 0, result.output
        report = json.loads((out_dir / "report.json").read_text())
        assert report["threshold"] == 0.61
        row = report["classification"][0]
        assert (row["tp"], row["tn"], row["fp"], row["fn"]) == (278, 499, 66, 172)
        assert abs(row["mcc"] - 0.53) <= 0.005
        sig = report["fp_by_agreement"][0]
        assert abs(sig["odds_ratio"] - 1.83) <= 0.01
        agree_bins = report["calibration"]["agree"]["bins"]
        assert [b["count"] for b in agree_bins] == [241, 108, 111, 215]
        for name in (
            "annotator_confusion.csv",
            "disagreement_structure.csv",
            "classification.csv",
            "ranking_cutoffs.csv",
            "fp_by_agreement.csv",
            "calibration_agree.csv",
            "calibration_disagree.csv",
        ):
            assert (out_dir / name).exists(), name


class TestEvalFeatures:
    def test_stacking_cv_from_files(self, tmp_path):
        import random

        rng = random.Random(4)
        features_path = tmp_path / "features.jsonl"
        gold_path = tmp_path / "gold.jsonl"
        with open(features_path, "w") as ffh, open(gold_path, "w") as gfh:
            for d in range(30):
                for j in range(2):
                    pid = f"p{d:03d}_{j}"
                    y = rng.randint(0, 1)
                    base = 0.7 if y else 0.3
                    for model in ("m1", "m2"):
                        ffh.write(json.dumps({
                            "pair_id": pid,
                            "model_id": model,
                            "probability": round(min(1, max(0, base + 0.2 * (rng.random() - 0.5))), 4),
                        }) + "\n")
                    gfh.write(json.dumps({
                        "pair_id": pid,
                        "label": "yes" if y else "no",
                        "decision_id": f"d{d:03d}",
                    }) + "\n")
        report_path = tmp_path / "cv_report.json"
        result = run_cli([
            "eval",
            "--features", str(features_path),
            "--gold", str(gold_path),
            "--folds", "5",
            "--cv-report", str(report_path),
        ])
        assert result.exit_code == 0, result.output
        assert "threshold" in result.output
        report = json.loads(report_path.read_text())
        assert report["models"] == ["m1", "m2"]
        assert sum(report["fold_sizes"]) == 60
        assert len(report["folds"]) == 5
