from __future__ import annotations

import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smarthome_qa.metrics import (
    OneHotEmbedder,
    lcs_length,
    normalize_answer,
    rouge_l,
    semantic_f1,
    token_f1,
)

import oracles

TOKENS = st.lists(
    st.sampled_from("router camera lock the password a vlan yes no sensor".split()),
    max_size=12,
)


class TestNormalizeAnswer:
    def test_article_and_punctuation_removal(self):
        assert normalize_answer("The Router!") == ["router"]

    def test_empty(self):
        assert normalize_answer("") == []

    def test_articles_only(self):
        assert normalize_answer("a an the") == []

    def test_matches_oracle_twin(self):
        rng = random.Random(5)
        for _ in range(100):
            text = oracles.random_token_text(rng)
            assert normalize_answer(text) == oracles.squad_tokens(text)


class TestTokenF1:
    def test_identical(self):
        assert token_f1("change the password", "change the password") == (1.0, 1.0, 1.0)

    def test_disjoint(self):
        assert token_f1("yes", "no").f1 == 0.0

    def test_worked_example(self):
        result = token_f1(
            "change the default password",
            "you should change your default password immediately",
        )
        assert result.precision == pytest.approx(1.0, abs=1e-12)
        assert result.recall == pytest.approx(3 / 7, abs=1e-12)
        assert result.f1 == pytest.approx(0.6, abs=1e-12)

    def test_empty_conventions(self):
        assert token_f1("", "") == (1.0, 1.0, 1.0)
        assert token_f1("", "something") == (0.0, 0.0, 0.0)
        assert token_f1("something", "") == (0.0, 0.0, 0.0)
        # normalization can empty a side
        assert token_f1("the", "router").f1 == 0.0
        assert token_f1("the", "an") == (1.0, 1.0, 1.0)

    def test_multiset_not_set_semantics(self):
        # "lock lock" vs "lock": overlap 1, p=1/2, r=1
        result = token_f1("lock lock", "lock")
        assert result == pytest.approx((0.5, 1.0, 2 / 3))


class TestRougeL:
    def test_identical(self):
        assert rouge_l("isolate iot devices", "isolate iot devices") == (1.0, 1.0, 1.0)

    def test_one_substitution(self):
        result = rouge_l("lock door now", "lock window now")
        assert result.f1 == pytest.approx(2 / 3, abs=1e-12)

    def test_disjoint(self):
        assert rouge_l("yes", "no").f1 == 0.0

    def test_order_matters(self):
        swapped = rouge_l("password default", "default password")
        assert swapped.f1 == pytest.approx(1 / 2)
        assert token_f1("password default", "default password").f1 == 1.0

    def test_lcs_known_value(self):
        assert lcs_length("a b c d".split(), "b a c d".split()) == 3


class TestSemanticF1:
    def test_identical_is_one(self):
        embedder = OneHotEmbedder()
        assert semantic_f1("secure the camera", "secure the camera", embedder) == (1.0, 1.0, 1.0)

    def test_empty_conventions(self):
        embedder = OneHotEmbedder()
        assert semantic_f1("", "", embedder) == (1.0, 1.0, 1.0)
        assert semantic_f1("", "router", embedder) == (0.0, 0.0, 0.0)
        assert semantic_f1("router", "", embedder) == (0.0, 0.0, 0.0)

    def test_one_hot_equals_set_membership_oracle(self):
        rng = random.Random(77)
        embedder = OneHotEmbedder()
        for _ in range(100):
            pred = oracles.random_token_text(rng)
            gold = oracles.random_token_text(rng)
            got = semantic_f1(pred, gold, embedder)
            want = oracles.set_membership_prf(pred, gold)
            assert got.precision == want[0]
            assert got.recall == want[1]
            assert got.f1 == want[2]

    def test_unit_vector_contract(self):
        class HalfEmbedder:
            def embed(self, texts):
                return [np.full((len(normalize_answer(t)), 4), 0.5) for t in texts]

        # 0.5-vectors of dim 4 are unit length, pairwise cosine 1.0
        assert semantic_f1("x y", "z w", HalfEmbedder()).f1 == pytest.approx(1.0)


class TestCrossMetricProperties:
    @settings(max_examples=100, deadline=None)
    @given(TOKENS, TOKENS)
    def test_swap_symmetry(self, a, b):
        pred, gold = " ".join(a), " ".join(b)
        for metric in (token_f1, rouge_l):
            fwd, rev = metric(pred, gold), metric(gold, pred)
            assert fwd.precision == pytest.approx(rev.recall, abs=1e-12)
            assert fwd.recall == pytest.approx(rev.precision, abs=1e-12)
            assert fwd.f1 == pytest.approx(rev.f1, abs=1e-12)
        embedder = OneHotEmbedder()
        fwd = semantic_f1(pred, gold, embedder)
        rev = semantic_f1(gold, pred, embedder)
        assert fwd.precision == pytest.approx(rev.recall, abs=1e-12)
        assert fwd.f1 == pytest.approx(rev.f1, abs=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(TOKENS, TOKENS)
    def test_lcs_never_exceeds_bag_overlap(self, a, b):
        lcs = oracles.full_table_lcs(a, b)
        overlap = sum(min(a.count(t), b.count(t)) for t in set(a) | set(b))
        assert lcs <= overlap

    def test_all_metrics_one_for_identical_nonempty(self):
        embedder = OneHotEmbedder()
        for text in ("router", "use a vlan", "change default password now"):
            assert token_f1(text, text).f1 == 1.0
            assert rouge_l(text, text).f1 == 1.0
            assert semantic_f1(text, text, embedder).f1 == 1.0

    def test_oracle_equivalence_random_pairs(self):
        rng = random.Random(2024)
        for _ in range(200):
            pred = oracles.random_token_text(rng)
            gold = oracles.random_token_text(rng)
            tf = token_f1(pred, gold)
            rf = rouge_l(pred, gold)
            for got, want in ((tf, oracles.bag_overlap_prf(pred, gold)),
                              (rf, oracles.lcs_prf(pred, gold))):
                assert got.precision == pytest.approx(want[0], abs=1e-12)
                assert got.recall == pytest.approx(want[1], abs=1e-12)
                assert got.f1 == pytest.approx(want[2], abs=1e-12)
