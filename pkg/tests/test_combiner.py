import itertools
import json
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from parsecombo.combiner import (
    NaiveBayesModel,
    NBCounts,
    VoteConfig,
    bayes_switch,
    bayes_switch_scores,
    constituent_voting,
    count_naive_bayes,
    has_crossing,
    nb_hybridize,
    nb_posterior,
    similarity_scores,
    similarity_switch,
    spans_cross,
    train_naive_bayes,
)
from parsecombo.errors import EmptyTrainingSet, LengthMismatch, MissingGold
from parsecombo.treebank_io import Constituent, ConstituentSet, SentenceBundle

from conftest import random_bundle

A = Constituent("A", 0, 2)
B = Constituent("B", 1, 3)
Cc = Constituent("C", 2, 3)
D = Constituent("D", 0, 1)


def bundle(*sets, gold=None, n=4):
    return SentenceBundle(
        tokens=tuple(f"w{i}" for i in range(n)),
        candidates=[ConstituentSet(frozenset(s), n) for s in sets],
        gold=None if gold is None else ConstituentSet(frozenset(gold), n),
    )


def direct_posterior(prior, ct, cf, m):
    """Exact rational evaluation of the product form."""
    prior = Fraction(prior)
    st_ = prior
    sf = 1 - prior
    for bit, pt, pf in zip(m, ct, cf):
        pt, pf = Fraction(pt), Fraction(pf)
        st_ *= pt if bit else 1 - pt
        sf *= pf if bit else 1 - pf
    return st_ / (st_ + sf)


def model(prior, ct, cf):
    return NaiveBayesModel(k=len(ct), prior_true=prior, cond_true=ct, cond_false=cf)


class TestCrossing:
    def test_strict_overlap(self):
        assert spans_cross(Constituent("NP", 0, 3), Constituent("VP", 2, 5))
        assert spans_cross(Constituent("VP", 2, 5), Constituent("NP", 0, 3))

    def test_nested(self):
        assert not spans_cross(Constituent("NP", 0, 3), Constituent("DT", 1, 2))

    def test_adjacent(self):
        assert not spans_cross(Constituent("NP", 0, 3), Constituent("VP", 3, 5))

    def test_has_crossing_examples(self):
        assert not has_crossing(set())
        tree = {Constituent("S", 0, 3), Constituent("NP", 0, 2), Constituent("VP", 2, 3)}
        assert not has_crossing(tree)
        assert has_crossing({A, B, Constituent("C", 0, 3)})

    def test_has_crossing_matches_pairwise(self):
        rng = random.Random(2)
        for _ in range(2000):
            n = rng.randint(2, 8)
            items = set()
            for _ in range(rng.randint(0, 6)):
                s = rng.randrange(n)
                items.add(Constituent(rng.choice("XY"), s, rng.randint(s + 1, n)))
            brute = any(spans_cross(a, b) for a, b in itertools.combinations(items, 2))
            assert has_crossing(items) == brute


class TestVoting:
    def test_majority_of_three(self):
        b = bundle({A}, {A}, {B})
        assert constituent_voting(b, VoteConfig(2)).items == {A}

    def test_unanimous(self):
        s = {A, Cc}
        assert constituent_voting(bundle(s, s, s)).items == s

    def test_k4_threshold3(self):
        b = bundle({A}, {A}, {Cc}, {D})
        assert constituent_voting(b, VoteConfig(3)).items == set()
        assert constituent_voting(b).items == set()  # default threshold 3 for k=4
        assert constituent_voting(b, VoteConfig(2)).items == {A}

    def test_threshold_range(self):
        with pytest.raises(ValueError):
            constituent_voting(bundle({A}, {A}), VoteConfig(3))

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(2, 6))
    def test_monotone_in_threshold(self, seed, k):
        b = random_bundle(random.Random(seed), k)
        for t in range(1, k):
            hi = constituent_voting(b, VoteConfig(t + 1)).items
            lo = constituent_voting(b, VoteConfig(t)).items
            assert hi <= lo

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(2, 6))
    def test_unanimity_and_no_invention(self, seed, k):
        b = random_bundle(random.Random(seed), k)
        union = frozenset().union(*(s.items for s in b.candidates))
        common = frozenset.intersection(*(s.items for s in b.candidates))
        for t in range(1, k + 1):
            out = constituent_voting(b, VoteConfig(t)).items
            assert common <= out <= union


class TestTraining:
    def test_single_sentence_counts(self):
        b = bundle({A, B}, {A}, set(), gold={A})
        c = count_naive_bayes([b])
        assert (c.n_candidates, c.n_true) == (2, 1)
        assert c.joint_true == (1, 1, 0) and c.joint_false == (1, 0, 0)
        m = NaiveBayesModel.from_counts(c, 1.0)
        assert m.cond_true[0] == pytest.approx(2 / 3)
        assert m.cond_false[0] == pytest.approx(2 / 3)
        assert m.prior_true == pytest.approx(1 / 2)

    def test_perfect_parser_limit(self):
        rng = random.Random(9)
        bundles = []
        for _ in range(30):
            b = random_bundle(rng, 2)
            bundles.append(SentenceBundle(b.tokens, [b.gold, b.candidates[1]], gold=b.gold))
        m = train_naive_bayes(bundles, alpha=1e-9)
        assert m.cond_true[0] == pytest.approx(1.0, abs=1e-6)
        assert m.cond_false[0] == pytest.approx(0.0, abs=1e-6)

    def test_smoothing_keeps_probabilities_interior(self):
        b = bundle({A}, {A}, {A}, gold={A})  # no incorrect candidates at all
        m = train_naive_bayes([b])
        for p in (m.prior_true, *m.cond_true, *m.cond_false):
            assert 0 < p < 1

    def test_errors(self):
        with pytest.raises(EmptyTrainingSet):
            train_naive_bayes([])
        with pytest.raises(MissingGold):
            train_naive_bayes([bundle({A}, {A})])
        with pytest.raises(EmptyTrainingSet):
            train_naive_bayes([bundle(set(), set(), gold=set())])

    def test_json_round_trip_and_resmooth(self, tmp_path):
        b = bundle({A, B}, {A}, {Cc}, gold={A, Cc})
        m = train_naive_bayes([b], alpha=0.5, normalization={"x": 1})
        path = tmp_path / "m.json"
        m.save(path)
        doc = json.loads(path.read_text())
        assert set(doc) == {"k", "alpha", "prior_true", "cond_true", "cond_false", "counts", "normalization_config"}
        assert set(doc["counts"]) == {"n_candidates", "n_true", "joint_true", "joint_false"}
        back = NaiveBayesModel.load(path)
        assert back == m
        assert back.resmooth(1.0) == train_naive_bayes([b], alpha=1.0)

    def test_counts_additive(self):
        rng = random.Random(4)
        bs = [random_bundle(rng, 3) for _ in range(20)]
        whole = count_naive_bayes(bs)
        parts = count_naive_bayes(bs[:7]) + count_naive_bayes(bs[7:])
        assert whole == parts

    def test_counts_invariants(self):
        with pytest.raises(ValueError):
            NBCounts(3, 4, (0,), (0,))
        with pytest.raises(ValueError):
            NBCounts(3, 1, (2,), (0,))


class TestPosterior:
    def test_example_ttf(self):
        m = model(0.8, [0.9] * 3, [0.4] * 3)
        expected = float(direct_posterior(0.8, [0.9] * 3, [0.4] * 3, (1, 1, 0)))
        assert expected == pytest.approx(0.0648 / 0.0840, rel=1e-12)
        assert nb_posterior(m, (True, True, False)) == pytest.approx(expected, rel=1e-12)
        assert round(nb_posterior(m, (True, True, False)), 4) == 0.7714

    def test_example_tff(self):
        m = model(0.8, [0.9] * 3, [0.4] * 3)
        assert nb_posterior(m, (True, False, False)) == pytest.approx(0.2, rel=1e-12)

    def test_symmetric_complement(self):
        m = model(0.5, [0.7, 0.9, 0.6], [0.3, 0.1, 0.4])
        for bits in itertools.product([False, True], repeat=3):
            comp = tuple(not b for b in bits)
            assert nb_posterior(m, bits) + nb_posterior(m, comp) == pytest.approx(1.0, abs=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            nb_posterior(model(0.5, [0.7, 0.7], [0.3, 0.3]), (True,))

    def test_extreme_parameters_no_underflow(self):
        m = model(0.5, [1 - 1e-15] * 60, [1e-15] * 60)
        assert nb_posterior(m, (True,) * 60) == 1.0
        assert nb_posterior(m, (False,) * 60) < 1e-300


class TestHybridize:
    def test_composition(self):
        m = model(0.8, [0.9] * 3, [0.4] * 3)
        a, b_ = Constituent("A", 0, 1), Constituent("B", 1, 2)
        out = nb_hybridize(m, bundle({a, b_}, {a}, set()))
        assert out.items == {a}

    def test_exact_half_excluded(self):
        m = model(0.5, [0.8, 0.8], [0.2, 0.2])
        b = bundle({A}, {Cc})  # each candidate gets one vote of two: posterior exactly 0.5
        assert nb_posterior(m, (True, False)) == 0.5
        assert nb_hybridize(m, b).items == set()

    def test_symmetric_model_equals_majority_vote(self):
        m = model(0.5, [0.8] * 3, [0.2] * 3)
        rng = random.Random(12)
        for _ in range(300):
            b = random_bundle(rng, 3)
            assert nb_hybridize(m, b) == constituent_voting(b, VoteConfig(2))

    def test_unanimity_preserved(self):
        rng = random.Random(8)
        for _ in range(200):
            k = rng.randint(2, 6)
            ct = [rng.uniform(0.3, 0.95) for _ in range(k)]
            cf = [rng.uniform(0.01, t - 0.01) for t in ct]
            m = model(rng.uniform(0.5, 0.9), ct, cf)
            b = random_bundle(rng, k)
            common = frozenset.intersection(*(s.items for s in b.candidates))
            union = frozenset().union(*(s.items for s in b.candidates))
            out = nb_hybridize(m, b).items
            assert common <= out <= union

    def test_k_mismatch(self):
        with pytest.raises(LengthMismatch):
            nb_hybridize(model(0.5, [0.8] * 3, [0.2] * 3), bundle({A}, {A}))


class TestSwitching:
    def test_similarity_example(self):
        b = bundle({A, B}, {A, Cc}, {A, B, D})
        assert similarity_scores(b) == [3, 2, 3]
        assert similarity_switch(b) == 1

    def test_similarity_identical(self):
        assert similarity_switch(bundle({A}, {A}, {A})) == 1

    def test_similarity_k2(self):
        b = bundle({A}, {A, B})
        assert similarity_scores(b) == [1, 1]
        assert similarity_switch(b) == 1

    def test_bayes_example(self):
        m = model(0.5, [0.8, 0.8], [0.3, 0.3])
        b = bundle({A, B}, {A})
        pa = float(direct_posterior(0.5, [0.8, 0.8], [0.3, 0.3], (1, 1)))
        pb = float(direct_posterior(0.5, [0.8, 0.8], [0.3, 0.3], (1, 0)))
        assert round(pa, 4) == 0.8767 and round(pb, 4) == 0.4324
        s1, s2 = bayes_switch_scores(m, b)
        assert math.exp(s1) == pytest.approx(pa * pb, rel=1e-12)
        assert math.exp(s2) == pytest.approx(pa * (1 - pb), rel=1e-12)
        assert bayes_switch(m, b) == 2

    def test_bayes_identical(self):
        m = model(0.6, [0.7, 0.8, 0.9], [0.2, 0.3, 0.1])
        assert bayes_switch(m, bundle({A, D}, {A, D}, {A, D})) == 1

    def test_bayes_perfect_parser(self):
        universe = [Constituent("X", 0, 1), Constituent("Y", 1, 2), Constituent("X", 0, 2)]
        subsets = [set(s) for r in range(len(universe) + 1) for s in itertools.combinations(universe, r)]
        for i in range(3):
            ct = [0.5] * 3
            cf = [0.5] * 3
            ct[i], cf[i] = 1 - 1e-9, 1e-9
            m = model(0.5, ct, cf)
            for sets in itertools.product(subsets, repeat=3):
                if any(sets[j] == sets[i] for j in range(3) if j != i):
                    continue
                assert bayes_switch(m, bundle(*sets)) == i + 1

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(2, 6))
    def test_closure_and_determinism(self, seed, k):
        rng = random.Random(seed)
        b = random_bundle(rng, k)
        ct = [rng.uniform(0.2, 0.95) for _ in range(k)]
        cf = [rng.uniform(0.05, 0.8) for _ in range(k)]
        m = model(rng.uniform(0.1, 0.9), ct, cf)
        for choose in (lambda: similarity_switch(b), lambda: bayes_switch(m, b)):
            i = choose()
            assert 1 <= i <= k
            assert choose() == i

    def test_lowest_index_on_ties(self):
        rng = random.Random(21)
        for _ in range(100):
            b = random_bundle(rng, 3)
            dup = SentenceBundle(b.tokens, [b.candidates[2], b.candidates[1], b.candidates[2]])
            m = model(0.5, [0.8] * 3, [0.3] * 3)
            # parsers 1 and 3 are identical, so parser 3 can never win
            assert similarity_switch(dup) in (1, 2)
            assert bayes_switch(m, dup) in (1, 2)


def test_nb_voting_equivalence_exhaustive():
    for k in range(2, 7):
        for p in (0.6, 0.8, 0.95):
            m = model(0.5, [p] * k, [1 - p] * k)
            for bits in itertools.product([False, True], repeat=k):
                by_vote = sum(bits) >= k // 2 + 1
                assert (nb_posterior(m, bits) > 0.5) == by_vote, (k, p, bits)
