"""Batch entry points wiring the pipeline stages together. Each stage reads
the previous stage's files and writes its documented format; runs are
idempotent over identical inputs and seeds."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import candidates as cand
from . import citations as cite
from . import corpus as corp
from . import fusion
from . import gateway
from . import lexical
from . import vectors
from .config import load_config
from .ensemble import confusion_at, optimize_threshold
from .reports import (
    PairAnnotations,
    agreement_report,
    calibration_table,
    classification_table,
    write_report_json,
    write_table_csv,
)
from .stats import ConfusionMatrix, classification_metrics


class StageError(click.ClickException):
    exit_code = 1


def _require(path: str | Path, label: str) -> Path:
    p = Path(path)
    if not p.exists():
        raise StageError(f"{label} not found: {p}")
    return p


def _write_jsonl(rows, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")


@click.group()
@click.option("--config", "config_path", type=click.Path(), default=None, help="JSON config file.")
@click.option("--seed", type=int, default=None, help="Deterministic seed.")
@click.option("--jobs", type=int, default=None, help="Worker count for parallel stages.")
@click.pass_context
def main(ctx, config_path, seed, jobs):
    """Implicit statutory citation pipeline."""
    try:
        ctx.obj = load_config(config_path, seed=seed, jobs=jobs)
    except FileNotFoundError as exc:
        raise StageError(str(exc))


@main.command()
@click.option("--decisions", required=True, type=click.Path(), help="Decisions jsonl.")
@click.option("--articles", type=click.Path(), default=None, help="Articles jsonl.")
@click.option("--out-dir", required=True, type=click.Path())
def ingest(decisions, articles, out_dir):
    """Validate and normalize raw decisions (and articles) into a store."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    store = corp.CorpusStore()
    with open(_require(decisions, "decisions file"), encoding="utf-8") as fh:
        n_decisions = store.ingest_decisions(fh)
    n_articles = 0
    if articles:
        with open(_require(articles, "articles file"), encoding="utf-8") as fh:
            n_articles = store.ingest_articles(fh)
    _write_jsonl(
        (
            {
                "id": d.id,
                "court_id": d.court_id,
                "date": d.date,
                "motivation": d.motivation,
            }
            for d in sorted(store.decisions.values(), key=lambda d: d.id)
        ),
        out / "decisions.jsonl",
    )
    if articles:
        _write_jsonl(
            (
                {
                    "number": a.number,
                    "book": a.book,
                    "hierarchy": [list(h) for h in a.hierarchy],
                    "text": a.text,
                }
                for a in sorted(store.articles.values(), key=lambda a: a.number)
            ),
            out / "articles.jsonl",
        )
    if store.ingest_errors:
        _write_jsonl(
            (
                {"line": e.line_number, "message": e.message}
                for e in store.ingest_errors
            ),
            out / "ingest_errors.jsonl",
        )
        for e in store.ingest_errors:
            click.echo(f"line {e.line_number}: {e.message}", err=True)
    click.echo(f"ingested {n_decisions} decisions, {n_articles} articles")


@main.command()
@click.option("--decisions", required=True, type=click.Path())
@click.option("--out", required=True, type=click.Path())
@click.option("--masked-out", type=click.Path(), default=None, help="Also write reference-masked chunk text.")
@click.option("--max-tokens", type=int, default=None)
@click.pass_obj
def chunk(config, decisions, out, masked_out, max_tokens):
    """Chunk decision motivations into sentence-aligned spans."""
    max_tokens = max_tokens or config.max_tokens
    store = corp.CorpusStore()
    with open(_require(decisions, "decisions file"), encoding="utf-8") as fh:
        store.ingest_decisions(fh)
    chunks = store.chunk_all(max_tokens=max_tokens)
    corp.write_chunks_jsonl(chunks, Path(out))
    if masked_out:
        _write_jsonl(
            (
                {
                    "decision_id": c.decision_id,
                    "index": c.index,
                    "text": corp.mask_references(c.text),
                }
                for c in chunks
            ),
            Path(masked_out),
        )
    click.echo(f"wrote {len(chunks)} chunks")


@main.command("extract-explicit")
@click.option("--chunks", "chunks_path", required=True, type=click.Path())
@click.option("--articles", "articles_path", required=True, type=click.Path())
@click.option("--out", required=True, type=click.Path())
@click.option("--min-similarity", type=float, default=None)
@click.pass_obj
def extract_explicit(config, chunks_path, articles_path, out, min_similarity):
    """Extract explicit (chunk, article) pairs above the lexical floor."""
    min_similarity = (
        min_similarity if min_similarity is not None else config.thresholds["tfidf_pos"]
    )
    chunks = corp.read_chunks_jsonl(_require(chunks_path, "chunks file"))
    articles = _load_articles(articles_path)
    model = lexical.fit(
        [a.text for a in articles.values()] + [c.text for c in chunks]
    )
    mentions = {
        (c.decision_id, c.index): cite.extract_citations(c.text) for c in chunks
    }
    pairs = cand.extract_explicit_pairs(
        chunks, mentions, articles, model, min_similarity=min_similarity
    )
    cand.write_candidates_jsonl(pairs, Path(out))
    click.echo(f"extracted {len(pairs)} explicit pairs")


@main.command("build-index")
@click.option("--embeddings", required=True, type=click.Path())
@click.option("--out", required=True, type=click.Path())
@click.option("--tau", type=float, default=None)
@click.pass_obj
def build_index(config, embeddings, out, tau):
    """Validate, normalize and freeze the article embedding index."""
    tau = tau if tau is not None else config.thresholds["vector_tau"]
    entries = vectors.load_embeddings_jsonl(_require(embeddings, "embeddings file"))
    index = vectors.build(entries, threshold=tau)
    out_path = Path(out)
    vectors.write_embeddings_jsonl(
        zip(index.ids, index.matrix), out_path
    )
    meta = {"entries": len(index), "dim": index.dim, "tau": index.threshold}
    out_path.with_suffix(".meta.json").write_text(json.dumps(meta, sort_keys=True) + "\n")
    click.echo(f"indexed {len(index)} vectors (dim {index.dim})")


@main.command("gen-candidates")
@click.option("--chunks", "chunks_path", required=True, type=click.Path())
@click.option("--decisions", required=True, type=click.Path())
@click.option("--index", "index_path", required=True, type=click.Path())
@click.option("--chunk-embeddings", required=True, type=click.Path())
@click.option("--out", required=True, type=click.Path())
@click.option("--k", type=int, default=None)
@click.option("--tau", type=float, default=None)
@click.option("--tau-prune/--no-tau-prune", default=True, help="Prune neighbors beyond the distance threshold.")
@click.option("--renumbering", type=click.Path(), default=None, help="Replacement renumbering table csv.")
@click.pass_obj
def gen_candidates(config, chunks_path, decisions, index_path, chunk_embeddings, out, k, tau, tau_prune, renumbering):
    """Generate the implicit-candidate pool from nearest-neighbor retrieval."""
    k = k or config.k
    tau = tau if tau is not None else config.thresholds["vector_tau"]
    chunks = corp.read_chunks_jsonl(_require(chunks_path, "chunks file"))
    index = vectors.build(
        vectors.load_embeddings_jsonl(_require(index_path, "index file")), threshold=tau
    )
    chunk_vecs = {}
    for vec_id, vec in vectors.load_embeddings_jsonl(_require(chunk_embeddings, "chunk embeddings")):
        decision_id, _, idx = vec_id.rpartition(":")
        chunk_vecs[(decision_id, int(idx))] = vec
    mentions = {}
    with open(_require(decisions, "decisions file"), encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                rec = json.loads(line)
                mentions[rec["id"]] = cite.extract_citations(rec["motivation"])
    table = (
        cite.RenumberingTable.from_csv(_require(renumbering, "renumbering table"))
        if renumbering
        else cite.RenumberingTable.bundled()
    )
    pool = cand.generate_implicit_candidates(
        chunks, chunk_vecs, index, mentions, table, k=k, prune_by_threshold=tau_prune
    )
    cand.write_candidates_jsonl(pool, Path(out))
    click.echo(f"generated {len(pool)} candidate pairs (tau_prune={tau_prune})")


@main.command("filter")
@click.option("--candidates", "candidates_path", required=True, type=click.Path())
@click.option("--scores", type=click.Path(), default=None, help="Verdict records (file transport).")
@click.option("--transport", type=click.Choice(["file", "http"]), default="file")
@click.option("--model", default=None, help="Verdict model id.")
@click.option("--template", default="adversarial_strict", help="Prompt template for http transport.")
@click.option("--parse-mode", type=click.Choice(["strict", "binary", "reasoning"]), default="strict")
@click.option("--chunks", "chunks_path", type=click.Path(), default=None, help="Needed to render prompts (http).")
@click.option("--articles", "articles_path", type=click.Path(), default=None, help="Needed to render prompts (http).")
@click.option("--cache", "cache_path", type=click.Path(), default=None)
@click.option("--timeout", type=float, default=30.0)
@click.option("--out", required=True, type=click.Path())
@click.option("--rejects", type=click.Path(), default=None)
@click.option("--checkpoint", type=click.Path(), default=None)
@click.pass_obj
def filter_cmd(config, candidates_path, scores, transport, model, template, parse_mode,
               chunks_path, articles_path, cache_path, timeout, out, rejects, checkpoint):
    """Keep candidates the filtering model judged positive.

    The file transport replays verdicts from score records; the http
    transport renders prompts and calls the configured scorer endpoint with
    bounded concurrency (--jobs).
    """
    model = model or config.filter_model
    if not model:
        raise StageError("no filter model configured (--model or config filter_model)")
    pool = cand.read_candidates_jsonl(_require(candidates_path, "candidates file"))

    if transport == "file":
        if not scores:
            raise StageError("--scores is required with the file transport")
        file_transport = gateway.FileTransport(_require(scores, "scores file"))

        def provider(pair: cand.CandidatePair) -> str:
            resolved = file_transport.resolve(
                gateway.ScoreRequest(pair.pair_id, model, gateway.KIND_LLM_VERDICT)
            )
            if isinstance(resolved, gateway.FetchFailure):
                raise StageError(
                    f"verdict missing for pair {pair.pair_id} (model {model}); "
                    "checkpoint keeps progress"
                )
            return gateway.to_verdict(resolved, parse_mode).parsed

    else:
        if not (chunks_path and articles_path):
            raise StageError("http transport needs --chunks and --articles to render prompts")
        chunk_map = {
            (c.decision_id, c.index): c
            for c in corp.read_chunks_jsonl(_require(chunks_path, "chunks file"))
        }
        articles = _load_articles(articles_path)
        http = gateway.HttpTransport.from_env(timeout=timeout)
        cache = gateway.ScoreCache(cache_path) if cache_path else None

        def request_for(pair: cand.CandidatePair) -> gateway.ScoreRequest:
            chunk = chunk_map.get((pair.decision_id, pair.chunk_index))
            article = articles.get(pair.article_number)
            if chunk is None or article is None:
                raise StageError(f"pair {pair.pair_id} references unknown chunk or article")
            prompt = gateway.render_prompt(template, article, chunk)
            return gateway.ScoreRequest(
                pair.pair_id,
                model,
                gateway.KIND_LLM_VERDICT,
                payload={"prompt": prompt, "template_id": template},
            )

        from concurrent.futures import ThreadPoolExecutor

        prefetched: dict[str, str] = {}
        todo = [p for p in pool]
        with ThreadPoolExecutor(max_workers=max(1, config.jobs)) as executor:
            results = executor.map(
                lambda pair: (pair.pair_id, gateway.fetch([request_for(pair)], http, cache=cache)),
                todo,
            )
            for pair_id_, (records, failures) in results:
                if failures:
                    continue  # handled as missing below, keeps checkpoint intact
                prefetched[pair_id_] = str(records[0].value)

        def provider(pair: cand.CandidatePair) -> str:
            raw = prefetched.get(pair.pair_id)
            if raw is None:
                raise StageError(
                    f"verdict fetch failed for pair {pair.pair_id}; checkpoint keeps progress"
                )
            return gateway.parse_verdict(raw, mode=parse_mode)

    outcome = cand.adversarial_filter(pool, provider, checkpoint_path=checkpoint)
    cand.write_candidates_jsonl(outcome.positives, Path(out))
    rejects_path = Path(rejects) if rejects else Path(out).with_name("rejects.json")
    rejects_path.write_text(json.dumps(outcome.rejects_report(), indent=2, sort_keys=True) + "\n")
    click.echo(
        f"kept {len(outcome.positives)}/{len(pool)} pairs "
        f"({len(outcome.unparseable)} unparseable)"
    )


@main.command()
@click.option("--candidates", "candidates_path", required=True, type=click.Path())
@click.option("--chunks", "chunks_path", required=True, type=click.Path())
@click.option("--articles", "articles_path", required=True, type=click.Path())
@click.option("--scores", type=click.Path(), default=None, help="External score records.")
@click.option("--cross-model", default=None)
@click.option("--out", required=True, type=click.Path())
@click.pass_obj
def score(config, candidates_path, chunks_path, articles_path, scores, cross_model, out):
    """Compute lexical similarities per pair and merge external signals."""
    cross_model = cross_model or config.cross_encoder_model
    pool = cand.read_candidates_jsonl(_require(candidates_path, "candidates file"))
    chunks = {
        (c.decision_id, c.index): c
        for c in corp.read_chunks_jsonl(_require(chunks_path, "chunks file"))
    }
    articles = _load_articles(articles_path)
    model = lexical.fit(
        [a.text for a in articles.values()] + [c.text for c in chunks.values()]
    )
    cross = {}
    if scores and cross_model:
        for rec in gateway.load_scores_jsonl(_require(scores, "scores file")):
            if rec.model_id == cross_model and rec.kind == gateway.KIND_CROSS_ENCODER:
                cross[rec.pair_id] = float(rec.value)
    rows = []
    for pair in pool:
        chunk = chunks.get((pair.decision_id, pair.chunk_index))
        article = articles.get(pair.article_number)
        if chunk is None or article is None:
            raise StageError(
                f"pair {pair.pair_id} references unknown chunk or article"
            )
        rows.append(
            {
                "pair_id": pair.pair_id,
                "tfidf": lexical.tfidf_cosine(model, chunk.text, article.text),
                "bm25": lexical.bm25(model, chunk.text, article.text),
                "cross": cross.get(pair.pair_id),
                "distance": pair.distance,
            }
        )
    rows.sort(key=lambda r: r["pair_id"])
    _write_jsonl(rows, Path(out))
    click.echo(f"scored {len(rows)} pairs")


RANK_METHODS = ("tfidf", "bm25", "cross", "union", "inter2", "inter3", "inter4", "ensemble")


@main.command()
@click.option("--candidates", "candidates_path", required=True, type=click.Path())
@click.option("--pair-scores", required=True, type=click.Path())
@click.option("--scores", type=click.Path(), default=None, help="Verdict records for vote methods.")
@click.option("--method", type=click.Choice(RANK_METHODS), required=True)
@click.option("--out", required=True, type=click.Path())
@click.option("--eps", type=float, default=1e-6)
@click.option("--cumulative-bonus", is_flag=True, default=False)
@click.pass_obj
def rank(config, candidates_path, pair_scores, scores, method, out, eps, cumulative_bonus):
    """Rank candidate pairs by a lexical, vote-set or ensemble method."""
    pool = cand.read_candidates_jsonl(_require(candidates_path, "candidates file"))
    pair_ids = [p.pair_id for p in pool]
    raw = {}
    with open(_require(pair_scores, "pair scores file"), encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                rec = json.loads(line)
                raw[rec["pair_id"]] = rec
    missing = [p for p in pair_ids if p not in raw]
    if missing:
        raise StageError(f"pair scores missing for {len(missing)} pairs (e.g. {missing[:3]})")

    def norm_column(name):
        column = [raw[p].get(name) for p in pair_ids]
        if any(v is None for v in column):
            return None
        return dict(zip(pair_ids, lexical.minmax_normalize(column)))

    tfidf_n = norm_column("tfidf")
    bm25_n = norm_column("bm25")
    cross_n = norm_column("cross")
    tie = cross_n or {p: 0.0 for p in pair_ids}

    votes = {}
    quality = fusion.VerdictCollapseReport()
    if method in ("union", "inter2", "inter3", "inter4", "ensemble"):
        if not config.fusion_models or len(config.fusion_models) != 4:
            raise StageError("config fusion_models must list exactly 4 model ids")
        if not scores:
            raise StageError("--scores required for vote-based methods")
        transport = gateway.FileTransport(_require(scores, "scores file"))
        for pid in pair_ids:
            verdicts = {}
            for m in config.fusion_models:
                resolved = transport.resolve(
                    gateway.ScoreRequest(pid, m, gateway.KIND_LLM_VERDICT)
                )
                if isinstance(resolved, gateway.ScoreRecord):
                    verdicts[m] = gateway.parse_verdict(str(resolved.value), mode="binary")
            votes[pid] = fusion.collapse_verdicts(
                verdicts, config.fusion_models, pair_id=pid, report=quality
            )

    fusion_config = fusion.FusionConfig(epsilon=eps, cumulative_bonus=cumulative_bonus)
    if method in ("tfidf", "bm25", "cross"):
        column = {"tfidf": tfidf_n, "bm25": bm25_n, "cross": cross_n}[method]
        if column is None:
            raise StageError(f"column {method} unavailable in pair scores")
        primary = column
    elif method == "ensemble":
        if tfidf_n is None or bm25_n is None or cross_n is None:
            raise StageError("ensemble needs tfidf, bm25 and cross columns")
        primary = {
            p: fusion.ensemble_score(
                votes[p], tfidf_n[p], bm25_n[p], cross_n[p], fusion_config
            )
            for p in pair_ids
        }
    else:
        primary = {p: 1.0 if fusion.vote_set(votes[p], method) else 0.0 for p in pair_ids}

    ordered = fusion.rank(
        pair_ids,
        [primary[p] for p in pair_ids],
        [tie[p] for p in pair_ids],
        epsilon=eps,
    )
    rows = [
        {
            "pair_id": pid,
            "method": method,
            "score": primary[pid] + eps * tie[pid],
            "rank": position,
        }
        for position, pid in enumerate(ordered, start=1)
    ]
    _write_jsonl(rows, Path(out))
    if votes:
        Path(out).with_suffix(".quality.json").write_text(
            json.dumps(
                {
                    "n_votes": quality.n_votes,
                    "n_unparseable": quality.n_unparseable,
                },
                sort_keys=True,
            )
            + "\n"
        )
    click.echo(f"ranked {len(rows)} pairs by {method}")


def _load_gold(path: Path) -> tuple[dict[str, int], dict[str, str]]:
    labels: dict[str, int] = {}
    decisions: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            labels[rec["pair_id"]] = 1 if rec["label"] == "yes" else 0
            if "decision_id" in rec:
                decisions[rec["pair_id"]] = rec["decision_id"]
    return labels, decisions


@main.command("eval")
@click.option("--cm", default=None, help="tp,tn,fp,fn counts.")
@click.option("--probs", type=click.Path(), default=None, help="Probability records jsonl.")
@click.option("--gold", type=click.Path(), default=None, help="{pair_id, label[, decision_id]} jsonl.")
@click.option("--features", type=click.Path(), default=None, help="Base-model probabilities jsonl for stacking CV.")
@click.option("--folds", type=int, default=5)
@click.option("--cv-report", "cv_report_path", type=click.Path(), default=None)
@click.option("--threshold", type=float, default=None)
@click.option("--optimize", is_flag=True, default=False, help="Pick the MCC-optimal threshold.")
@click.option("--json", "as_json", is_flag=True, default=False)
@click.pass_obj
def eval_cmd(config, cm, probs, gold, features, folds, cv_report_path, threshold, optimize, as_json):
    """Classification metrics from a confusion matrix, probabilities, or a
    stacking cross-validation over base-model features."""
    if features:
        if not gold:
            raise StageError("--features requires --gold with decision ids")
        from . import ensemble as ens

        table = ens.load_features_jsonl(_require(features, "features file"))
        labels, decisions = _load_gold(_require(gold, "gold labels file"))
        pair_ids, model_order, rows, excluded = ens.feature_matrix(table)
        usable = [p for p in pair_ids if p in labels and p in decisions]
        if excluded:
            click.echo(f"excluded {len(excluded)} pairs with missing features", err=True)
        if not usable:
            raise StageError("no pairs with features, gold label and decision id")
        oof, report = ens.cross_validated_stack(
            {p: rows[p] for p in usable},
            {p: labels[p] for p in usable},
            {p: decisions[p] for p in usable},
            n_folds=folds,
            seed=config.seed,
        )
        report["models"] = model_order
        report["n_excluded"] = len(excluded)
        if cv_report_path:
            write_report_json(report, cv_report_path)
        click.echo(json.dumps(report["pooled_metrics"], sort_keys=True) if as_json else (
            f"threshold {report['threshold']}\n"
            + " ".join(
                f"{k}={v:.2f}" if v is not None else f"{k}=undefined"
                for k, v in report["pooled_metrics"].items()
            )
        ))
        return
    if cm:
        try:
            tp, tn, fp, fn = (int(x) for x in cm.split(","))
        except ValueError:
            raise StageError("--cm expects four comma-separated integers tp,tn,fp,fn")
        matrix = ConfusionMatrix(tp=tp, tn=tn, fp=fp, fn=fn)
    elif probs and gold:
        prob_by_pair = {}
        for rec in gateway.load_scores_jsonl(_require(probs, "probabilities file")):
            prob_by_pair[rec.pair_id] = float(rec.value)
        labels = {}
        with open(_require(gold, "gold labels file"), encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    rec = json.loads(line)
                    labels[rec["pair_id"]] = 1 if rec["label"] == "yes" else 0
        pair_ids = sorted(set(prob_by_pair) & set(labels))
        ps = [prob_by_pair[p] for p in pair_ids]
        ys = [labels[p] for p in pair_ids]
        if optimize or threshold is None:
            threshold = optimize_threshold(ps, ys)
        matrix = confusion_at(ps, ys, threshold)
        click.echo(f"threshold {threshold}")
    else:
        raise StageError("provide --cm or both --probs and --gold")
    metrics = classification_metrics(matrix)
    if as_json:
        click.echo(json.dumps({"cm": matrix.__dict__, **metrics}, sort_keys=True))
        return
    click.echo(
        f"tp={matrix.tp} tn={matrix.tn} fp={matrix.fp} fn={matrix.fn}"
    )
    parts = []
    for name in ("mcc", "f1", "accuracy", "precision", "recall", "balanced_accuracy"):
        value = metrics[name]
        parts.append(f"{name}={value:.2f}" if value is not None else f"{name}=undefined")
    click.echo(" ".join(parts))


@main.group()
def stats():
    """Corpus and campaign statistics reports."""


@stats.command("corpus")
@click.option("--decisions", required=True, type=click.Path())
@click.option("--articles", type=click.Path(), default=None)
@click.option("--max-tokens", type=int, default=None)
@click.option("--out-dir", type=click.Path(), default=None)
@click.pass_obj
def stats_corpus(config, decisions, articles, max_tokens, out_dir):
    """Word-length distributions for chunks and articles."""
    store = corp.CorpusStore()
    with open(_require(decisions, "decisions file"), encoding="utf-8") as fh:
        store.ingest_decisions(fh)
    if articles:
        with open(_require(articles, "articles file"), encoding="utf-8") as fh:
            store.ingest_articles(fh)
    store.chunk_all(max_tokens=max_tokens or config.max_tokens)
    report = corp.corpus_stats(store)
    payload = {
        "n_decisions": report["n_decisions"],
        "n_articles": report["n_articles"],
        "n_chunks": report["n_chunks"],
    }
    for key in ("chunks", "articles"):
        if key in report:
            s = report[key]
            payload[key] = {
                "n": s.n, "mean": s.mean, "median": s.median, "min": s.min, "max": s.max
            }
    click.echo(json.dumps(payload, indent=2, sort_keys=True))
    if out_dir:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_report_json(payload, out / "corpus_stats.json")


@stats.command("agreement")
@click.option("--labels", "labels_path", required=True, type=click.Path(), help="Label log jsonl.")
@click.option("--pairs", "pairs_path", required=True, type=click.Path())
@click.option("--a1", default="A1")
@click.option("--a2", default="A2")
@click.option("--adjudicator", default="A3")
@click.option("--out-dir", type=click.Path(), default=None)
def stats_agreement(labels_path, pairs_path, a1, a2, adjudicator, out_dir):
    """Inter-annotator agreement, disagreement structure and gold totals."""
    latest: dict[str, dict[str, str]] = {}
    with open(_require(labels_path, "labels file"), encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                rec = json.loads(line)
                latest.setdefault(rec["pair_id"], {})[rec["annotator_id"]] = rec["label"]
    pair_ids = []
    with open(_require(pairs_path, "pairs file"), encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                pair_ids.append(json.loads(line)["pair_id"])
    annotations = [
        PairAnnotations(
            pair_id=pid,
            a1=latest.get(pid, {}).get(a1),
            a2=latest.get(pid, {}).get(a2),
            a3=latest.get(pid, {}).get(adjudicator),
        )
        for pid in sorted(pair_ids)
    ]
    report = agreement_report(annotations)
    click.echo(json.dumps(report, indent=2, sort_keys=True))
    if out_dir:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_report_json(report, out / "agreement.json")
        write_table_csv(
            [
                {"a1": pair[0], "a2": pair[1], "count": count}
                for pair, count in (
                    (("yes", "yes"), report["confusion_a1_a2"]["yes_yes"]),
                    (("yes", "no"), report["confusion_a1_a2"]["yes_no"]),
                    (("no", "yes"), report["confusion_a1_a2"]["no_yes"]),
                    (("no", "no"), report["confusion_a1_a2"]["no_no"]),
                )
            ],
            out / "annotator_confusion.csv",
        )
        write_table_csv(
            [
                {"category": k, "count": v}
                for k, v in sorted(report["disagreement_structure"].items())
            ],
            out / "disagreement_structure.csv",
        )


@stats.command("tables")
@click.option("--labels", "labels_path", required=True, type=click.Path(), help="Label log jsonl.")
@click.option("--pairs", "pairs_path", required=True, type=click.Path())
@click.option("--probs", "probs_path", required=True, type=click.Path(), help="Probability score records.")
@click.option("--model-id", default=None, help="Restrict probability records to one model.")
@click.option("--threshold", type=float, default=None, help="Decision threshold (default: MCC-optimal).")
@click.option("--cutoffs", default="50,100,200,300")
@click.option("--bin-edges", default="0.1,0.3,0.5,0.7,0.9")
@click.option("--out-dir", required=True, type=click.Path())
def stats_tables(labels_path, pairs_path, probs_path, model_id, threshold, cutoffs, bin_edges, out_dir):
    """Full evaluation report: agreement, classification, ranking,
    error concentration by agreement, and calibration tables."""
    from .stats import (
        calibration_by_agreement,
        fp_by_agreement,
        precision_recall_at_k,
        resolve_gold,
    )
    from .reports import ranking_table, significance_table

    latest: dict[str, dict[str, str]] = {}
    with open(_require(labels_path, "labels file"), encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                rec = json.loads(line)
                latest.setdefault(rec["pair_id"], {})[rec["annotator_id"]] = rec["label"]
    pair_ids = []
    with open(_require(pairs_path, "pairs file"), encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                pair_ids.append(json.loads(line)["pair_id"])
    annotations = [
        PairAnnotations(
            pair_id=pid,
            a1=latest.get(pid, {}).get("A1"),
            a2=latest.get(pid, {}).get("A2"),
            a3=latest.get(pid, {}).get("A3"),
        )
        for pid in sorted(pair_ids)
    ]
    agreement = agreement_report(annotations)

    probs: dict[str, float] = {}
    for rec in gateway.load_scores_jsonl(_require(probs_path, "probabilities file")):
        if rec.kind != gateway.KIND_PROBABILITY:
            continue
        if model_id and rec.model_id != model_id:
            continue
        probs[rec.pair_id] = float(rec.value)

    gold: dict[str, int] = {}
    agree: dict[str, bool] = {}
    for ann in annotations:
        if ann.a1 is None or ann.a2 is None:
            continue
        try:
            label, ok = resolve_gold(ann.a1, ann.a2, ann.a3)
        except ValueError:
            continue
        gold[ann.pair_id] = 1 if label == "yes" else 0
        agree[ann.pair_id] = ok

    scored = sorted(set(probs) & set(gold))
    if not scored:
        raise StageError("no pair has both a probability and a resolved gold label")
    ps = [probs[p] for p in scored]
    ys = [gold[p] for p in scored]
    ags = [agree[p] for p in scored]
    if threshold is None:
        threshold = optimize_threshold(ps, ys)
    matrix = confusion_at(ps, ys, threshold)
    preds = [1 if p >= threshold else 0 for p in ps]

    ranked = sorted(scored, key=lambda p: (-probs[p], p))
    ranked_labels = [gold[p] for p in ranked]
    cut_list = [int(c) for c in cutoffs.split(",") if c.strip()]
    ranked_eval = precision_recall_at_k(ranked_labels, [c for c in cut_list if c <= len(ranked)])

    edges = [float(e) for e in bin_edges.split(",")]
    strata = calibration_by_agreement(ps, ys, ags, edges)
    significance = significance_table({model_id or "model": fp_by_agreement(preds, ys, ags)})

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    classification = classification_table({model_id or "model": matrix})
    report = {
        "agreement": agreement,
        "threshold": threshold,
        "classification": classification,
        "ranking": {"ap": ranked_eval.ap, "cutoffs": ranking_table(ranked_eval)},
        "fp_by_agreement": significance,
        "calibration": {
            name: {"ece": rep.ece, "bins": calibration_table(rep)}
            for name, rep in strata.items()
        },
    }
    write_report_json(report, out / "report.json")
    write_table_csv(
        [
            {"a1": "yes", "a2": "yes", "count": agreement["confusion_a1_a2"]["yes_yes"]},
            {"a1": "yes", "a2": "no", "count": agreement["confusion_a1_a2"]["yes_no"]},
            {"a1": "no", "a2": "yes", "count": agreement["confusion_a1_a2"]["no_yes"]},
            {"a1": "no", "a2": "no", "count": agreement["confusion_a1_a2"]["no_no"]},
        ],
        out / "annotator_confusion.csv",
    )
    write_table_csv(
        [{"category": k, "count": v} for k, v in sorted(agreement["disagreement_structure"].items())],
        out / "disagreement_structure.csv",
    )
    write_table_csv(classification, out / "classification.csv")
    write_table_csv(ranking_table(ranked_eval), out / "ranking_cutoffs.csv")
    write_table_csv(significance, out / "fp_by_agreement.csv")
    for name, rep in strata.items():
        write_table_csv(calibration_table(rep), out / f"calibration_{name}.csv")
    click.echo(f"report written to {out / 'report.json'}")


@main.command()
@click.option("--pairs", required=True, type=click.Path())
@click.option("--decisions", required=True, type=click.Path())
@click.option("--articles", required=True, type=click.Path())
@click.option("--rankings", type=click.Path(), default=None)
@click.option("--label-log", type=click.Path(), default=None)
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8470)
@click.option("--ui-dir", type=click.Path(), default=None, help="Static frontend build to mount at /ui.")
def serve(pairs, decisions, articles, rankings, label_log, host, port, ui_dir):
    """Run the annotation service."""
    from .service import create_app, load_campaign

    store = load_campaign(
        _require(pairs, "pairs file"),
        _require(decisions, "decisions file"),
        _require(articles, "articles file"),
        rankings_path=_require(rankings, "rankings file") if rankings else None,
        label_log_path=label_log,
    )
    app = create_app(store)
    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")
    import uvicorn

    uvicorn.run(app, host=host, port=port, log_level="warning")


def _load_articles(path: str | Path) -> dict[str, corp.Article]:
    articles = {}
    with open(_require(path, "articles file"), encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                rec = json.loads(line)
                articles[rec["number"]] = corp.Article(
                    number=rec["number"],
                    book=rec.get("book", "III"),
                    hierarchy=tuple((str(l), str(h)) for l, h in rec.get("hierarchy", [])),
                    text=rec["text"],
                )
    return articles


if __name__ == "__main__":
    main()
