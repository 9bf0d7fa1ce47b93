import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gestlex import (ConfigError, EnumerationCapError, RatingTable, best_lexicon,
                     best_lexicon_exact, best_lexicon_greedy, lexicon_score, sm_matrix,
                     subjective_measure, total_measure_matrix)
from gestlex.selection import load_ratings

from oracles import brute_best_subset

RATINGS = {"a": 0.9, "b": 0.2, "c": 0.7, "d": 0.5}
LABELS = list("abcd")


@pytest.fixture
def rated_sm():
    return sm_matrix(RATINGS, LABELS)


def random_tm(rng, m):
    A = rng.uniform(0, 1, (m, m))
    A = np.triu(A, 1)
    return A + A.T


# -- subjective / total measure ----------------------------------------------------

def test_subjective_measure_values():
    assert subjective_measure(RATINGS, "a", "b") == 0.55
    assert subjective_measure(RATINGS, "a", "c") == 0.80
    assert subjective_measure({"x": 0.37, "y": 0.37}, "x", "y") == 0.37


def test_unrated_label_named():
    with pytest.raises(KeyError, match="'z'"):
        subjective_measure(RATINGS, "a", "z")


def test_rating_range_enforced():
    with pytest.raises(ConfigError):
        RatingTable({"a": 1.2})


def test_ratings_csv(tmp_path):
    p = tmp_path / "r.csv"
    p.write_text("class,rating\na,0.9\nb,0.2\n")
    assert load_ratings(p) == {"a": 0.9, "b": 0.2}


def test_total_measure_endpoints_and_midpoint(rated_sm):
    E = np.full((4, 4), 0.4) - 0.4 * np.eye(4)
    assert np.array_equal(total_measure_matrix(E, rated_sm, 0.0), E)
    assert np.array_equal(total_measure_matrix(E, rated_sm, 1.0), rated_sm)
    mid = total_measure_matrix(np.array([[0, 0.4], [0.4, 0]]), np.array([[0, 0.8], [0.8, 0]]), 0.5)
    assert mid[0, 1] == pytest.approx(0.6, abs=1e-15)
    with pytest.raises(ConfigError):
        total_measure_matrix(E, rated_sm, 1.5)


# -- exact search --------------------------------------------------------------------

def test_counting_m5_n3():
    tm = random_tm(np.random.default_rng(0), 5)
    r = best_lexicon_exact(tm, list("abcde"), 3)
    assert (r.evaluated_subsets, r.evaluated_pairsums) == (10, 30)
    assert r.evaluated_pairsums == math.factorial(5) // (2 * math.factorial(1) * math.factorial(2))


def test_rated_best_pair(rated_sm):
    r = best_lexicon_exact(rated_sm, LABELS, 2)
    assert r.members == ("a", "c") and r.score == 0.80


def test_rated_best_triple_brute_force(rated_sm):
    ref = brute_best_subset(rated_sm, LABELS, 3)
    assert len(ref) == 4
    r = best_lexicon_exact(rated_sm, LABELS, 3)
    assert r.members == ref[0][1] == ("a", "c", "d")
    assert r.score == pytest.approx(2.10, abs=1e-12)


def test_constraints(rated_sm):
    r = best_lexicon_exact(rated_sm, LABELS, 2, must_include=["b"])
    assert r.members == ("a", "b") and r.evaluated_subsets == 3
    r = best_lexicon_exact(rated_sm, LABELS, 2, exclude=["a"])
    assert r.members == ("c", "d") and r.evaluated_subsets == 3
    r = best_lexicon_exact(rated_sm, LABELS, 3, must_include=["b", "d"], exclude=["a"])
    assert r.members == ("b", "c", "d") and r.evaluated_subsets == 1
    with pytest.raises(ConfigError):
        best_lexicon_exact(rated_sm, LABELS, 2, must_include=["a"], exclude=["a"])
    with pytest.raises(ConfigError):
        best_lexicon_exact(rated_sm, LABELS, 4, exclude=["a"])
    with pytest.raises(ConfigError):
        best_lexicon_exact(rated_sm, LABELS, 2, must_include=["a", "b", "c"])


def test_tie_break_is_lexicographic():
    tm = np.ones((4, 4)) - np.eye(4)
    assert best_lexicon_exact(tm, list("dcba"), 2).members == ("a", "b")
    assert best_lexicon_greedy(tm, list("dcba"), 3).members == ("a", "b", "c")


def test_enumeration_cap():
    tm = random_tm(np.random.default_rng(1), 12)
    labels = [f"g{i:02d}" for i in range(12)]
    with pytest.raises(EnumerationCapError) as exc:
        best_lexicon_exact(tm, labels, 6, cap=100)
    assert exc.value.count == math.comb(12, 6)
    assert best_lexicon_exact(tm, labels, 6, cap=100, force=True).evaluated_subsets == 924


def test_one_of_constraint():
    rng = np.random.default_rng(5)
    tm = random_tm(rng, 6)
    labels = list("abcdef")
    r = best_lexicon(tm, labels, 3, one_of=["e", "f"])
    ref = [row for row in brute_best_subset(tm, labels, 3) if {"e", "f"} & set(row[1])]
    assert r.members == ref[0][1]
    assert r.evaluated_subsets == 2 * math.comb(5, 2)


# -- greedy search --------------------------------------------------------------------

def test_greedy_equals_exact_at_n2():
    rng = np.random.default_rng(2)
    for _ in range(20):
        tm = random_tm(rng, 7)
        labels = list("abcdefg")
        assert best_lexicon_greedy(tm, labels, 2).members == best_lexicon_exact(tm, labels, 2).members


def test_greedy_rated_full_lexicon(rated_sm):
    r = best_lexicon_greedy(rated_sm, LABELS, 4)
    assert r.members == tuple(LABELS)
    assert r.score == pytest.approx(0.55 + 0.80 + 0.70 + 0.45 + 0.35 + 0.60, abs=1e-12)
    assert r.mode == "greedy"


def test_greedy_can_miss_the_optimum_hand_instance():
    # {A,B} is the best pair, but C and D are jointly better partners for A
    tm = np.array([[0, 1.0, 0.5, 0.5],
                   [1.0, 0, 0, 0],
                   [0.5, 0, 0, 0.9],
                   [0.5, 0, 0.9, 0]])
    labels = list("ABCD")
    g = best_lexicon_greedy(tm, labels, 3)
    e = best_lexicon_exact(tm, labels, 3)
    assert g.members == ("A", "B", "C") and e.members == ("A", "C", "D")
    assert g.score < e.score


def test_greedy_can_miss_the_optimum_searched_instance():
    rng = np.random.default_rng(0)
    for _ in range(10000):
        tm = random_tm(rng, 4)
        g = best_lexicon_greedy(tm, list("ABCD"), 3)
        e = best_lexicon_exact(tm, list("ABCD"), 3)
        if g.members != e.members:
            break
    else:
        pytest.fail("no adversarial instance found")
    assert g.score < e.score
    assert brute_best_subset(tm, list("ABCD"), 3)[0][1] == e.members


def test_greedy_respects_constraints():
    rng = np.random.default_rng(8)
    tm = random_tm(rng, 7)
    labels = list("abcdefg")
    r = best_lexicon_greedy(tm, labels, 4, must_include=["g"], exclude=["a", "b"])
    assert "g" in r.members and not {"a", "b"} & set(r.members)
    r2 = best_lexicon_greedy(tm, labels, 4, must_include=["c", "d"])
    assert {"c", "d"} <= set(r2.members)


# -- properties ---------------------------------------------------------------------

problems = st.tuples(st.integers(2, 9), st.integers(0, 2**32 - 1)).flatmap(
    lambda t: st.tuples(st.just(t[0]), st.integers(2, min(5, t[0])), st.just(t[1])))


@settings(max_examples=100, deadline=None)
@given(problems)
def test_exact_dominates_greedy_and_matches_brute_force(p):
    m, n, seed = p
    rng = np.random.default_rng(seed)
    tm = random_tm(rng, m)
    labels = [f"k{i}" for i in range(m)]
    e = best_lexicon_exact(tm, labels, n)
    g = best_lexicon_greedy(tm, labels, n)
    assert e.score >= g.score
    assert e.score == pytest.approx(brute_best_subset(tm, labels, n)[0][0], abs=1e-12)
    e.check(tm, labels)
    g.check(tm, labels)
    # constant shift leaves the argmax alone
    shifted = tm + 0.25 * (1 - np.eye(m))
    assert best_lexicon_exact(shifted, labels, n).members == e.members


@settings(max_examples=60, deadline=None)
@given(st.integers(3, 9), st.integers(0, 2**32 - 1))
def test_subjective_only_is_top_ratings_and_nested(m, seed):
    rng = np.random.default_rng(seed)
    labels = [f"k{i}" for i in range(m)]
    ratings = dict(zip(labels, rng.uniform(0, 1, m)))
    tm = total_measure_matrix(np.zeros((m, m)), sm_matrix(ratings, labels), 1.0)
    prev = set()
    for n in range(2, min(m, 5) + 1):
        r = best_lexicon_exact(tm, labels, n)
        top = sorted(labels, key=lambda c: -ratings[c])[:n]
        assert set(r.members) == set(top)
        assert prev <= set(r.members)
        assert best_lexicon_greedy(tm, labels, n).members == r.members
        assert r.score == pytest.approx((n - 1) / 2 * sum(ratings[c] for c in top), rel=1e-12)
        prev = set(r.members)


def test_result_self_check_detects_tampering(rated_sm):
    r = best_lexicon_exact(rated_sm, LABELS, 2)
    from dataclasses import replace
    with pytest.raises(AssertionError):
        replace(r, score=0.7).check(rated_sm, LABELS)


def test_lexicon_score_order_independent():
    rng = np.random.default_rng(3)
    tm = random_tm(rng, 6)
    for perm in itertools.permutations(range(4)):
        assert lexicon_score(tm, perm) == lexicon_score(tm, range(4))
