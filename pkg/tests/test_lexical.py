import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lexcite.lexical import LexicalModel, bm25, fit, minmax_normalize, tfidf_cosine, tokenize


FIXTURE_CORPUS = [
    "le débiteur doit exécuter son obligation",
    "la faute du débiteur engage sa responsabilité",
    "la clause pénale prévue aux articles 1231-5",
]


class TestFit:
    def test_single_doc_all_df_one(self):
        model = fit(["un seul document"])
        assert set(model.df.values()) == {1}

    def test_shared_term_df_two(self):
        model = fit(["contrat clair", "contrat obscur"])
        assert model.df["contrat"] == 2
        assert model.df["clair"] == 1

    def test_df_equals_brute_force_count(self):
        model = fit(FIXTURE_CORPUS)
        for term, df in model.df.items():
            brute = sum(1 for doc in FIXTURE_CORPUS if term in tokenize(doc))
            assert df == brute

    def test_order_insensitive(self):
        a = fit(FIXTURE_CORPUS)
        b = fit(list(reversed(FIXTURE_CORPUS)))
        assert a.df == b.df and a.avg_doc_len == b.avg_doc_len

    def test_empty_corpus(self):
        with pytest.raises(ValueError):
            fit([])

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            LexicalModel(df={}, n_docs=1, avg_doc_len=1.0, k1=0.0)
        with pytest.raises(ValueError):
            LexicalModel(df={"a": 5}, n_docs=2, avg_doc_len=1.0)

    def test_dump_load_round_trip(self, tmp_path):
        model = fit(FIXTURE_CORPUS)
        model.dump(tmp_path / "model.json")
        loaded = LexicalModel.load(tmp_path / "model.json")
        assert loaded.df == model.df
        assert loaded.avg_doc_len == model.avg_doc_len


class TestTokenize:
    def test_article_numbers_survive(self):
        assert "1352-9" in tokenize("les articles 1352-9 du code")

    def test_lowercase_strip_punctuation(self):
        assert tokenize("La Faute, établie!") == ["la", "faute", "établie"]


class TestTfidfCosine:
    def test_identity(self):
        model = fit(FIXTURE_CORPUS)
        assert tfidf_cosine(model, FIXTURE_CORPUS[0], FIXTURE_CORPUS[0]) == pytest.approx(1.0)

    def test_disjoint(self):
        model = fit(FIXTURE_CORPUS)
        assert tfidf_cosine(model, "aaa bbb", "ccc ddd") == 0.0

    def test_three_term_fixture_matches_hand_cosine(self):
        # corpus of 2 docs; idf(t) = ln((1+2)/(1+df)) + 1
        model = fit(["a b", "b c"])
        idf_a = math.log(3 / 2) + 1
        idf_b = math.log(3 / 3) + 1
        va = {"a": idf_a, "b": idf_b}
        vb = {"b": idf_b, "c": math.log(3 / 2) + 1}
        dot = va["b"] * vb["b"]
        expected = dot / (
            math.hypot(*va.values()) * math.hypot(*vb.values())
        )
        assert tfidf_cosine(model, "a b", "b c") == pytest.approx(expected)

    def test_symmetry_and_bounds(self):
        model = fit(FIXTURE_CORPUS)
        pairs = [
            (FIXTURE_CORPUS[0], FIXTURE_CORPUS[1]),
            (FIXTURE_CORPUS[1], FIXTURE_CORPUS[2]),
            ("obligation du débiteur", FIXTURE_CORPUS[0]),
        ]
        for a, b in pairs:
            s1, s2 = tfidf_cosine(model, a, b), tfidf_cosine(model, b, a)
            assert s1 == pytest.approx(s2)
            assert 0.0 <= s1 <= 1.0

    def test_empty_text(self):
        model = fit(FIXTURE_CORPUS)
        assert tfidf_cosine(model, "", "") == 0.0


class TestBm25:
    def test_no_overlap_zero(self):
        model = fit(FIXTURE_CORPUS)
        assert bm25(model, "xyz", FIXTURE_CORPUS[0]) == 0.0

    def test_monotone_in_term_frequency(self):
        model = fit(FIXTURE_CORPUS)
        low = bm25(model, "faute", "faute grave retenue ici")
        high = bm25(model, "faute", "faute faute grave retenue")
        assert high >= low

    def test_okapi_formula_oracle(self):
        model = fit(["a b c", "b c d"])
        doc = "a a b"
        # brute-force Okapi with k1=1.5, b=0.75 and the +1-shifted idf
        k1, b = 1.5, 0.75
        avgdl = 3.0
        dl = 3
        expected = 0.0
        for term, tf in (("a", 2), ("b", 1)):
            df = model.df[term]
            idf = math.log(1 + (2 - df + 0.5) / (df + 0.5))
            expected += idf * tf * (k1 + 1) / (tf + k1 * (1 - b + b * dl / avgdl))
        assert bm25(model, "a b", doc) == pytest.approx(expected)

    def test_non_negative(self):
        model = fit(FIXTURE_CORPUS)
        for doc in FIXTURE_CORPUS:
            assert bm25(model, "la du débiteur", doc) >= 0.0


class TestMinmaxNormalize:
    def test_arithmetic(self):
        assert minmax_normalize([2, 4, 6]) == [0.0, 0.5, 1.0]

    def test_constant_list(self):
        assert minmax_normalize([5, 5]) == [0.5, 0.5]

    def test_singleton(self):
        assert minmax_normalize([3.2]) == [0.5]

    def test_empty_errors(self):
        with pytest.raises(ValueError):
            minmax_normalize([])

    @given(st.lists(st.floats(min_value=-1e6, max_value=1e6), min_size=1, max_size=30))
    def test_bounds_and_extremes(self, scores):
        normalized = minmax_normalize(scores)
        assert all(0.0 <= v <= 1.0 for v in normalized)
        if max(scores) > min(scores):
            assert normalized[scores.index(min(scores))] == 0.0
            assert normalized[scores.index(max(scores))] == 1.0
