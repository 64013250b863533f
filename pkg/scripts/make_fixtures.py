#!/usr/bin/env python3
"""Generate the deterministic fixture trees under fixtures/.

benchmark/   annotated pair corpus with probabilities and rankings used by
             the evaluation, service and frontend tests
pipeline20/  a small end-to-end corpus (decisions, articles, embeddings,
             stub verdict scores) driven through the CLI pipeline

Running the script twice produces byte-identical files.
"""

from __future__ import annotations

import json
import math
import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from lexcite.candidates import generate_implicit_candidates, pair_id
from lexcite.citations import RenumberingTable, extract_citations
from lexcite.corpus import CorpusStore, chunk_motivation
from lexcite.fusion import rank
from lexcite.vectors import build

ROOT = Path(__file__).resolve().parents[1]
SEED = 20250810

# ---------------------------------------------------------------- benchmark

# (probability, count) cells per stratum and gold label; probabilities sit
# inside the reporting bins [0.1,0.3) [0.3,0.5) [0.5,0.7) [0.7,0.9) with one
# low outlier, and thresholding at 0.61 is MCC-optimal by construction.
AGREE_YES_CELLS = [(0.20, 72), (0.40, 67), (0.55, 23), (0.61, 57), (0.78, 206)]
AGREE_NO_CELLS = [(0.05, 1), (0.20, 169), (0.40, 41), (0.55, 19), (0.61, 12), (0.78, 9)]
DIS_YES_CELLS = [(0.20, 7), (0.40, 3), (0.61, 4), (0.78, 11)]
DIS_NO_CELLS = [(0.20, 164), (0.40, 73), (0.55, 32), (0.61, 8), (0.78, 37)]

DIS_NO_CATEGORIES = [("no_facts", 147), ("no", 106), ("no_special_regime", 61)]
N_DISAGREE_A1_YES = 83  # remaining 256 disagreements have A2 = yes

N_ARTICLES_PER_BOOK = {"I": 52, "II": 11, "III": 310, "IV": 43, "V": 2}
BOOK_NUMBER_RANGES = {
    "I": (7, 515),
    "II": (516, 710),
    "III": (711, 2283),
    "IV": (2284, 2488),
    "V": (2534, 2535),
}

LEGAL_WORDS = (
    "la cour le tribunal retient que demande paiement créance débiteur bailleur "
    "preneur contrat clause obligation faute dommage préjudice réparation intérêts "
    "résiliation indemnité caution garantie vente bail responsabilité prescription "
    "bonne foi mise demeure inexécution manquement engagement preuve élément pièce "
    "justificatif solde montant somme due consorts époux société partie défendeur "
    "demandeur juge relève constate considère écarte rejette accueille condamne"
).split()

ARTICLE_WORDS = (
    "toute personne obligation contracter celui qui cause autrui dommage oblige "
    "réparer faute négligence imprudence présomption preuve écrit acte créancier "
    "débiteur paiement chose terme condition solidarité caution nullité résolution "
    "restitution fruits intérêts délai prescription possession propriété usufruit "
    "servitude hypothèque gage privilège succession héritier légataire communauté"
).split()


def make_text(rng: random.Random, n_words: int, vocabulary, forbidden=("article", "loi", "code")) -> str:
    words = []
    while len(words) < n_words:
        w = rng.choice(vocabulary)
        if w.lower() in forbidden:
            continue
        words.append(w)
    # two sentences when long enough, no keyword tokens
    if n_words >= 8:
        cut = n_words // 2
        first = " ".join(words[:cut])
        second = " ".join(words[cut:])
        text = f"{first.capitalize()}. {second.capitalize()}."
    else:
        text = " ".join(words).capitalize() + "."
    return text


def chunk_word_counts(rng: random.Random, n: int) -> list[int]:
    """Word counts with mean near 49.9, median 50, clipped to [14, 88]."""
    counts = [max(14, min(88, round(rng.gauss(49.9, 11.0)))) for _ in range(n)]
    counts[0], counts[1] = 14, 88  # pin the extremes
    # force the sorted middle element to 50
    mid = (n - 1) // 2
    for _ in range(n):
        ordered = sorted(counts)
        if ordered[mid] == 50:
            break
        if ordered[mid] < 50:
            victim = counts.index(min((c for c in counts if c < 50), key=lambda c: 50 - c))
        else:
            victim = counts.index(min((c for c in counts if c > 50), key=lambda c: c - 50))
        counts[victim] = 50
    return counts


def article_word_counts(rng: random.Random, n: int) -> list[int]:
    counts = []
    for _ in range(n):
        c = round(46 * math.exp(rng.gauss(0.0, 0.75)))
        counts.append(max(7, min(564, c)))
    counts[0], counts[1] = 7, 564
    return counts


def generate_articles(rng: random.Random) -> list[dict]:
    articles = []
    for book, n in N_ARTICLES_PER_BOOK.items():
        lo, hi = BOOK_NUMBER_RANGES[book]
        bases = rng.sample(range(lo, hi + 1), n)
        counts = article_word_counts(rng, n)
        for base, n_words in zip(sorted(bases), counts):
            number = str(base)
            if book == "III" and rng.random() < 0.12:
                number = f"{base}-{rng.randint(1, 9)}"
            articles.append(
                {
                    "number": number,
                    "book": book,
                    "hierarchy": [
                        ["livre", f"Livre {book}"],
                        ["titre", f"Titre {1 + base % 9}"],
                        ["chapitre", f"Chapitre {1 + base % 4}"],
                    ],
                    "text": make_text(rng, n_words, ARTICLE_WORDS),
                }
            )
    return articles


def build_benchmark(out_dir: Path) -> None:
    rng = random.Random(SEED)
    out_dir.mkdir(parents=True, exist_ok=True)

    specs = []  # (a1, a2, a3, prob)
    for prob, n in AGREE_YES_CELLS:
        specs += [("yes", "yes", None, prob)] * n
    for prob, n in AGREE_NO_CELLS:
        specs += [("no", "no", None, prob)] * n
    dis = [("yes", prob) for prob, n in DIS_YES_CELLS for _ in range(n)]
    categories = [cat for cat, n in DIS_NO_CATEGORIES for _ in range(n)]
    rng.shuffle(categories)
    dis += [
        (categories[i], prob)
        for i, prob in enumerate(
            p for prob, n in DIS_NO_CELLS for p in [prob] * n
        )
    ]
    rng.shuffle(dis)
    directions = ["a1_yes"] * N_DISAGREE_A1_YES + ["a2_yes"] * (len(dis) - N_DISAGREE_A1_YES)
    rng.shuffle(directions)
    for (a3, prob), direction in zip(dis, directions):
        a1, a2 = ("yes", "no") if direction == "a1_yes" else ("no", "yes")
        specs.append((a1, a2, a3, prob))
    rng.shuffle(specs)
    n_pairs = len(specs)
    assert n_pairs == 1015

    articles = generate_articles(rng)
    multiplicities = [3] * 179 + [2] * 239
    assert sum(multiplicities) == n_pairs and len(multiplicities) == len(articles)
    article_assignment = []
    chosen = rng.sample(articles, len(multiplicities))
    for art, m in zip(chosen, multiplicities):
        article_assignment += [art["number"]] * m
    rng.shuffle(article_assignment)

    counts = chunk_word_counts(rng, n_pairs)
    chunk_texts = [make_text(rng, c, LEGAL_WORDS) for c in counts]

    pairs = []
    decisions: dict[str, list[dict]] = {}
    for i, (spec, art_number, text) in enumerate(zip(specs, article_assignment, chunk_texts)):
        if i < 372:
            decision_id = f"B{i // 2 + 1:04d}"
            chunk_index = i % 2
        else:
            decision_id = f"B{i - 372 + 187:04d}"
            chunk_index = 0
        pairs.append(
            {
                "decision_id": decision_id,
                "chunk_index": chunk_index,
                "article_number": art_number,
                "chunk_text": text,
                "a1": spec[0],
                "a2": spec[1],
                "a3": spec[2],
                "prob": spec[3],
            }
        )
        decisions.setdefault(decision_id, []).append(pairs[-1])

    # assemble motivations and chunk spans
    decision_rows = []
    for decision_id in sorted(decisions):
        chunks = sorted(decisions[decision_id], key=lambda p: p["chunk_index"])
        cursor = 0
        texts = []
        for c in chunks:
            start = cursor
            end = start + len(c["chunk_text"])
            c["chunk_span"] = [start, end]
            texts.append(c["chunk_text"])
            cursor = end + 1
        decision_rows.append(
            {
                "id": decision_id,
                "court_id": f"tj{(int(decision_id[1:]) % 86) + 1:03d}",
                "date": f"2024-{(int(decision_id[1:]) % 12) + 1:02d}-{(int(decision_id[1:]) % 28) + 1:02d}",
                "motivation": " ".join(texts),
            }
        )

    pair_rows = []
    label_rows = []
    adjudication_rows = []
    prob_rows = []
    ts = 0
    for p in sorted(pairs, key=lambda p: (p["decision_id"], p["chunk_index"])):
        pid = pair_id(p["decision_id"], p["chunk_index"], p["article_number"])
        pair_rows.append(
            {
                "pair_id": pid,
                "decision_id": p["decision_id"],
                "chunk_index": p["chunk_index"],
                "article_number": p["article_number"],
                "chunk_text": p["chunk_text"],
                "chunk_span": p["chunk_span"],
            }
        )
        for annotator, label in (("A1", p["a1"]), ("A2", p["a2"])):
            label_rows.append(
                {
                    "pair_id": pid,
                    "annotator_id": annotator,
                    "label": label,
                    "ts": f"2025-09-{ts % 28 + 1:02d}T10:{ts % 60:02d}:00+00:00",
                }
            )
            ts += 1
        if p["a3"] is not None:
            adjudication_rows.append(
                {
                    "pair_id": pid,
                    "annotator_id": "A3",
                    "label": p["a3"],
                    "ts": f"2025-10-{ts % 28 + 1:02d}T10:{ts % 60:02d}:00+00:00",
                }
            )
            ts += 1
        prob_rows.append(
            {
                "pair_id": pid,
                "model_id": "stacking-ensemble",
                "kind": "probability",
                "value": p["prob"],
            }
        )

    # unsupervised-ensemble style ranking over the probability fixture with a
    # deterministic pair-derived tie-break
    tie = {r["pair_id"]: int(r["pair_id"][:8], 16) / 0xFFFFFFFF for r in prob_rows}
    primary = {r["pair_id"]: r["value"] for r in prob_rows}
    ordered = rank(
        [r["pair_id"] for r in prob_rows],
        [primary[r["pair_id"]] for r in prob_rows],
        [tie[r["pair_id"]] for r in prob_rows],
    )
    ranking_rows = [
        {
            "pair_id": pid,
            "method": "unsupervised_ensemble",
            "score": primary[pid] + 1e-6 * tie[pid],
            "rank": position,
        }
        for position, pid in enumerate(ordered, start=1)
    ]

    write_jsonl(out_dir / "articles.jsonl", articles)
    write_jsonl(out_dir / "decisions.jsonl", decision_rows)
    write_jsonl(out_dir / "pairs.jsonl", pair_rows)
    write_jsonl(out_dir / "labels_primary.jsonl", label_rows)
    write_jsonl(out_dir / "labels_adjudication.jsonl", adjudication_rows)
    write_jsonl(out_dir / "ensemble_probs.jsonl", prob_rows)
    write_jsonl(out_dir / "rankings.jsonl", ranking_rows)
    (out_dir / "meta.json").write_text(
        json.dumps(
            {
                "n_pairs": n_pairs,
                "n_decisions": len(decision_rows),
                "n_articles": len(articles),
                "threshold": 0.61,
                "annotators": {"a1": "A1", "a2": "A2", "adjudicator": "A3"},
            },
            indent=2,
            sort_keys=True,
        )
        + "\n"
    )


# --------------------------------------------------------------- pipeline20

PIPELINE_ARTICLES = [
    ("1103", "Les contrats légalement formés tiennent lieu de loi à ceux qui les ont faits."),
    ("1104", "Les contrats doivent être négociés, formés et exécutés de bonne foi."),
    ("1192", "On ne peut interpréter les clauses claires et précises à peine de dénaturation."),
    ("1219", "Une partie peut refuser d'exécuter son obligation si l'autre n'exécute pas la sienne et si cette inexécution est suffisamment grave."),
    ("1231-5", "Lorsque le contrat stipule que celui qui manquera de l'exécuter paiera une certaine somme à titre de dommages et intérêts, il ne peut être alloué à l'autre partie une somme plus forte ni moindre."),
    ("1240", "Tout fait quelconque de l'homme, qui cause à autrui un dommage, oblige celui par la faute duquel il est arrivé à le réparer."),
    ("1241", "Chacun est responsable du dommage qu'il a causé non seulement par son fait, mais encore par sa négligence ou par son imprudence."),
    ("1242", "On est responsable non seulement du dommage que l'on cause par son propre fait, mais encore de celui qui est causé par le fait des personnes dont on doit répondre, ou des choses que l'on a sous sa garde."),
    ("1302", "Tout paiement suppose une dette ; ce qui a été reçu sans être dû est sujet à restitution."),
    ("1310", "La solidarité est légale ou conventionnelle ; elle ne se présume pas."),
    ("1343-2", "Les intérêts échus, dus au moins pour une année entière, produisent intérêt si le contrat l'a prévu ou si une décision de justice le précise."),
    ("1352", "La restitution d'une chose autre que d'une somme d'argent a lieu en nature ou, lorsque cela est impossible, en valeur, estimée au jour de la restitution."),
    ("1352-1", "Celui qui restitue la chose répond des dégradations et détériorations qui en ont diminué la valeur, à moins qu'il ne soit de bonne foi et que celles-ci ne soient pas dues à sa faute."),
    ("1352-9", "Les sûretés constituées pour le paiement de l'obligation sont reportées de plein droit sur l'obligation de restituer sans que les constituants puissent jamais être privés de leur bénéfice."),
    ("1353", "Celui qui réclame l'exécution d'une obligation doit la prouver. Réciproquement, celui qui se prétend libéré doit justifier le paiement ou le fait qui a produit l'extinction de son obligation."),
    ("1361", "Il peut être suppléé à l'écrit par l'aveu judiciaire, le serment décisoire ou un commencement de preuve par écrit corroboré par un autre moyen de preuve."),
    ("2274", "La bonne foi est toujours présumée, et c'est à celui qui allègue la mauvaise foi à la prouver."),
    ("1128", "Sont nécessaires à la validité d'un contrat le consentement des parties, leur capacité de contracter et un contenu licite et certain."),
]

IMPLICIT_SENTENCES = [
    "Ce seul constat de l'accroissement de la dette locative ne suffit pas à caractériser la mauvaise foi de la débitrice.",
    "Le juge est tenu d'appliquer les clauses claires du contrat qui lui est soumis, si aucune interprétation n'en est nécessaire.",
    "Il n'est pas établi que la société est privée en permanence d'électricité et l'exception totale d'inexécution n'est donc pas justifiée.",
    "La solidarité ne se présume pas et aucun texte ne l'institue pour le paiement des charges de copropriété.",
    "La copie de cet acte juridique ne constitue ici qu'un commencement de preuve par écrit.",
    "Celui qui réclame l'exécution d'une obligation doit la prouver devant le juge du fond.",
    "Le gardien de la chose répond du dommage causé par celle-ci, sauf cas fortuit dûment établi.",
    "Chaque partie doit exécuter ses engagements de bonne foi et sans réticence dolosive.",
    "Le paiement reçu sans être dû est sujet à restitution intégrale envers le solvens.",
    "La négligence et l'imprudence du conducteur engagent sa responsabilité pleine et entière.",
]

EXPLICIT_SENTENCES = [
    "Aux termes de l'article 1240 du code civil, tout fait quelconque de l'homme qui cause à autrui un dommage oblige celui par la faute duquel il est arrivé à le réparer.",
    "Vu les articles 1103 et 1104 du code civil, les contrats légalement formés tiennent lieu de loi et doivent être exécutés de bonne foi.",
    "Il résulte des articles 1352 à 1352-9 du code civil que la restitution s'opère en nature ou en valeur.",
    "Selon l'article 1134 du code civil, dans sa rédaction antérieure, les conventions légalement formées tiennent lieu de loi.",
    "L'article 1382 du code civil, devenu applicable sous une autre numérotation, fonde la responsabilité délictuelle.",
    "En application de l'art. 2274 C. civ., la bonne foi est toujours présumée en matière de prescription.",
    "La demande au titre de l'article 700 du code de procédure civile sera accueillie.",
    "La clause pénale sera modérée sur le fondement de l'article 1231-5 du code civil.",
]

FILLER_SENTENCES = [
    "La procédure a été régulièrement communiquée au ministère public.",
    "Les parties ont comparu à l'audience et formulé leurs observations.",
    "Le défendeur a été condamné à payer la somme de 1 500 euros par provision.",
    "L'affaire a été mise en délibéré après clôture des débats.",
    "Par jugement du 12 mars 2024, le tribunal avait ordonné une expertise.",
    "La banque produit un décompte arrêté à la somme de 12 340,50 euros.",
    "L'ordonnance n° 2016-131 du 10 février 2016 a réformé le droit des contrats.",
    "Les dépens seront à la charge de la partie succombante.",
]


def build_pipeline20(out_dir: Path) -> None:
    rng = random.Random(SEED + 1)
    out_dir.mkdir(parents=True, exist_ok=True)

    articles = [
        {
            "number": number,
            "book": "III",
            "hierarchy": [["livre", "Livre III"], ["titre", "Titre III"]],
            "text": text,
        }
        for number, text in PIPELINE_ARTICLES
    ]
    write_jsonl(out_dir / "articles.jsonl", articles)

    decision_rows = []
    for i in range(20):
        sentences = []
        sentences.append(rng.choice(EXPLICIT_SENTENCES))
        sentences.append(rng.choice(FILLER_SENTENCES))
        sentences.append(rng.choice(IMPLICIT_SENTENCES))
        sentences.append(rng.choice(IMPLICIT_SENTENCES))
        if i % 3 == 0:
            sentences.append(rng.choice(EXPLICIT_SENTENCES))
        rows = " ".join(sentences)
        decision_rows.append(
            {
                "id": f"P{i + 1:03d}",
                "court_id": f"tj{i % 7 + 1:03d}",
                "date": f"2024-{i % 12 + 1:02d}-09",
                "motivation": rows,
            }
        )
    write_jsonl(out_dir / "decisions.jsonl", decision_rows)

    # deterministic synthetic embeddings: every article gets a unit vector,
    # every chunk hugs the vector of a deterministically chosen article
    dim = 16
    article_vecs = {}
    for art in articles:
        vec = [rng.gauss(0, 1) for _ in range(dim)]
        norm = math.sqrt(sum(v * v for v in vec))
        article_vecs[art["number"]] = [round(v / norm, 6) for v in vec]
    write_jsonl(
        out_dir / "embeddings_articles.jsonl",
        [
            {"id": n, "dim": dim, "vector": v}
            for n, v in sorted(article_vecs.items())
        ],
    )

    store = CorpusStore()
    store.ingest_decisions(json.dumps(r) for r in decision_rows)
    store.chunk_all(max_tokens=100)
    numbers = sorted(article_vecs)
    chunk_rows = []
    chunk_vectors = {}
    for j, chunk in enumerate(store.chunks):
        target = article_vecs[numbers[j % len(numbers)]]
        vec = [t + 0.13 * rng.gauss(0, 1) for t in target]
        norm = math.sqrt(sum(v * v for v in vec))
        vec = [round(v / norm, 6) for v in vec]
        chunk_vectors[(chunk.decision_id, chunk.index)] = vec
        chunk_rows.append(
            {"id": f"{chunk.decision_id}:{chunk.index}", "dim": dim, "vector": vec}
        )
    write_jsonl(out_dir / "embeddings_chunks.jsonl", chunk_rows)

    # stub scorer records for every candidate the default pipeline retrieves
    table = RenumberingTable.bundled()
    mentions = {
        d.id: extract_citations(d.motivation) for d in store.decisions.values()
    }
    index = build(sorted(article_vecs.items()))
    pool = generate_implicit_candidates(
        store.chunks, chunk_vectors, index, mentions, table, k=5
    )
    score_rows = []
    for pair in pool:
        h = int(pair.pair_id[:8], 16)
        verdict = "OUI — la règle est appliquée." if h % 100 < 30 else "NON — simple similarité."
        score_rows.append(
            {
                "pair_id": pair.pair_id,
                "model_id": "filter-stub",
                "kind": "llm_verdict",
                "value": verdict,
            }
        )
        for m, modulus in (("llm-a", 7), ("llm-b", 5), ("llm-c", 3), ("llm-d", 2)):
            score_rows.append(
                {
                    "pair_id": pair.pair_id,
                    "model_id": m,
                    "kind": "llm_verdict",
                    "value": "oui" if h % modulus == 0 else "non",
                }
            )
        score_rows.append(
            {
                "pair_id": pair.pair_id,
                "model_id": "reranker-stub",
                "kind": "cross_encoder",
                "value": round((h % 1000) / 1000, 6),
            }
        )
    write_jsonl(out_dir / "scores.jsonl", score_rows)

    config = {
        "paths": {
            "decisions": "decisions.jsonl",
            "articles": "articles.jsonl",
            "article_embeddings": "embeddings_articles.jsonl",
            "chunk_embeddings": "embeddings_chunks.jsonl",
            "scores": "scores.jsonl",
        },
        "thresholds": {"tfidf_pos": 0.15, "tfidf_neg": 0.05, "vector_tau": 0.574},
        "k": 5,
        "filter_model": "filter-stub",
        "fusion_models": ["llm-a", "llm-b", "llm-c", "llm-d"],
        "cross_encoder_model": "reranker-stub",
        "seed": SEED,
    }
    (out_dir / "config.json").write_text(json.dumps(config, indent=2, sort_keys=True) + "\n")


def write_jsonl(path: Path, rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")


def main() -> None:
    build_benchmark(ROOT / "fixtures" / "benchmark")
    build_pipeline20(ROOT / "fixtures" / "pipeline20")
    print("fixtures written under", ROOT / "fixtures")


if __name__ == "__main__":
    main()
