import math
import random
from collections import Counter

import pytest
from corpus import PYTHON_CORPUS
from hypothesis import given, settings
from hypothesis import strategies as st

from honest.analysis import DataflowGraph, SubtreeBag, extract_dataflow, extract_subtrees, parse_cst
from honest.embeddings import EmbeddingVector
from honest.errors import ComponentOutOfRange
from honest.model import Language, Program, TokenSequence, tokenize
from honest.similarity import (
    SimilarityWeights,
    sim_dataflow,
    sim_embed,
    sim_hybrid,
    sim_syntax,
    sim_text,
)


def brute_force_sim_text(tokens_i, tokens_j):
    """Independent oracle: explicit n-gram enumeration, no clipping shortcuts."""
    ratios = []
    for n in range(1, 5):
        grams_j = [tuple(tokens_j[k:k + n]) for k in range(len(tokens_j) - n + 1)]
        if not grams_j:
            continue
        grams_i = [tuple(tokens_i[k:k + n]) for k in range(len(tokens_i) - n + 1)]
        overlap = 0
        remaining = list(grams_i)
        for g in grams_j:
            if g in remaining:
                remaining.remove(g)
                overlap += 1
        if overlap == 0:
            return 0.0
        ratios.append(overlap / len(grams_j))
    if not ratios:
        return 1.0 if not tokens_i else 0.0
    return math.exp(sum(math.log(r) for r in ratios) / len(ratios))


def seq(*tokens):
    return TokenSequence(tuple(tokens))


class TestSimText:
    def test_identical_sequences(self):
        s = seq("def", "f", "(", ")", ":")
        assert sim_text(s, s) == pytest.approx(1.0, abs=1e-9)

    def test_worked_example(self):
        # ratios 4/5, 3/4, 2/3, 1/2 -> geometric mean 0.2 ** 0.25
        value = sim_text(seq("a", "b", "c", "d", "e"), seq("a", "b", "c", "d", "f"))
        assert value == pytest.approx(0.2 ** 0.25, abs=1e-9)
        assert value == pytest.approx(0.66874, abs=1e-4)

    def test_zero_unigram_overlap(self):
        assert sim_text(seq("x", "=", "1"), seq("y", "+", "2")) == 0.0

    def test_empty_vs_empty(self):
        assert sim_text(seq(), seq()) == 1.0

    def test_nonempty_vs_empty(self):
        assert sim_text(seq("x"), seq()) == 0.0
        assert sim_text(seq(), seq("x")) == 0.0

    def test_short_sequences_renormalized(self):
        # two tokens: only orders 1 and 2 exist for the denominator side
        assert sim_text(seq("a", "b"), seq("a", "b")) == pytest.approx(1.0)

    def test_asymmetry_exists(self):
        a = seq("a", "a", "b")
        b = seq("a", "b")
        assert sim_text(a, b) != sim_text(b, a)

    def test_matches_brute_force_oracle(self):
        rng = random.Random(20240817)
        alphabet = ["a", "b", "c", "x", "y", "="]
        for _ in range(50):
            ti = [rng.choice(alphabet) for _ in range(rng.randint(0, 40))]
            tj = [rng.choice(alphabet) for _ in range(rng.randint(0, 40))]
            expected = brute_force_sim_text(ti, tj)
            got = sim_text(TokenSequence(tuple(ti)), TokenSequence(tuple(tj)))
            assert got == pytest.approx(expected, abs=1e-9), (ti, tj)

    @given(st.lists(st.sampled_from("abcxy"), max_size=25),
           st.lists(st.sampled_from("abcxy"), max_size=25))
    @settings(max_examples=200, deadline=None)
    def test_range_property(self, ti, tj):
        value = sim_text(TokenSequence(tuple(ti)), TokenSequence(tuple(tj)))
        assert 0.0 <= value <= 1.0


class TestSimSyntaxAndDataflow:
    def test_identical_bags(self):
        bag = SubtreeBag(Counter({"a(b)": 2, "b(c)": 1}))
        assert sim_syntax(bag, bag) == 1.0

    def test_disjoint_bags(self):
        a = SubtreeBag(Counter({"a(b)": 1}))
        b = SubtreeBag(Counter({"c(d)": 1}))
        assert sim_syntax(a, b) == 0.0

    def test_empty_empty_scores_one(self):
        empty = SubtreeBag(Counter())
        assert sim_syntax(empty, empty) == 1.0

    def test_empty_denominator_scores_zero(self):
        a = SubtreeBag(Counter({"a(b)": 1}))
        assert sim_syntax(a, SubtreeBag(Counter())) == 0.0

    def test_clipping(self):
        a = SubtreeBag(Counter({"k": 1}))
        b = SubtreeBag(Counter({"k": 3}))
        assert sim_syntax(a, b) == pytest.approx(1 / 3)
        assert sim_syntax(b, a) == 1.0

    def test_real_programs_small_edit(self):
        bag1 = extract_subtrees(parse_cst(Program("x = 1", Language.PYTHON)))
        bag2 = extract_subtrees(parse_cst(Program("x = 2", Language.PYTHON)))
        assert sim_syntax(bag1, bag2) == 1.0  # literal kinds are identical

    def test_dataflow_identical(self):
        g = DataflowGraph(Counter({("a", "b"): 1}))
        assert sim_dataflow(g, g) == 1.0

    def test_dataflow_disjoint(self):
        a = DataflowGraph(Counter({("a", "b"): 1}))
        b = DataflowGraph(Counter({("a", "c"): 1}))
        assert sim_dataflow(a, b) == 0.0

    def test_dataflow_two_pass_programs(self):
        g1 = extract_dataflow(Program("pass", Language.PYTHON))
        g2 = extract_dataflow(Program("pass", Language.PYTHON))
        assert sim_dataflow(g1, g2) == 1.0


class TestSimEmbed:
    def test_identical(self):
        v = EmbeddingVector((0.3, 0.4))
        assert sim_embed(v, v) == pytest.approx(1.0, abs=1e-9)

    def test_orthogonal(self):
        assert sim_embed(EmbeddingVector((1.0, 0.0)), EmbeddingVector((0.0, 1.0))) == 0.0

    def test_analytic_value(self):
        value = sim_embed(EmbeddingVector((3.0, 4.0)), EmbeddingVector((4.0, 3.0)))
        assert value == pytest.approx(24 / 25, abs=1e-9)


class TestSimHybrid:
    def test_all_ones(self):
        w = SimilarityWeights(0.1, 0.2, 0.3, 0.4)
        assert sim_hybrid(1.0, 1.0, 1.0, 1.0, w) == pytest.approx(1.0, abs=1e-9)

    def test_uniform_weights_arithmetic(self):
        value = sim_hybrid(0.8, 0.6, 0.4, 0.2, SimilarityWeights.uniform())
        assert value == pytest.approx(0.5, abs=1e-9)

    def test_single_modality_projection(self):
        value = sim_hybrid(0.3, 0.9, 0.9, 0.9, SimilarityWeights(1.0, 0.0, 0.0, 0.0))
        assert value == pytest.approx(0.3, abs=1e-9)

    def test_component_out_of_range(self):
        with pytest.raises(ComponentOutOfRange):
            sim_hybrid(1.2, 0.5, 0.5, 0.5, SimilarityWeights.uniform())

    def test_weights_validated(self):
        with pytest.raises(ValueError):
            SimilarityWeights(0.5, 0.5, 0.5, 0.5)
        with pytest.raises(ValueError):
            SimilarityWeights(-0.1, 0.4, 0.4, 0.3)

    @given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), st.floats(0, 1),
           st.floats(0, 1))
    @settings(max_examples=100, deadline=None)
    def test_monotone_in_each_component(self, text, syntax, dataflow, embedding, bump):
        w = SimilarityWeights(0.4, 0.3, 0.2, 0.1)
        base = sim_hybrid(text, syntax, dataflow, embedding, w)
        bumped_text = min(1.0, text + bump)
        assert sim_hybrid(bumped_text, syntax, dataflow, embedding, w) >= base - 1e-12


class TestIdentityOnRealPrograms:
    @pytest.mark.parametrize("source", PYTHON_CORPUS[:5])
    def test_all_structural_sims_are_one_on_self(self, source):
        program = Program(source, Language.PYTHON)
        toks = tokenize(program)
        bag = extract_subtrees(parse_cst(program))
        dfg = extract_dataflow(program)
        assert sim_text(toks, toks) == pytest.approx(1.0, abs=1e-9)
        assert sim_syntax(bag, bag) == pytest.approx(1.0, abs=1e-9)
        assert sim_dataflow(dfg, dfg) == pytest.approx(1.0, abs=1e-9)
