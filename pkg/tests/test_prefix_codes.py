import math
import random

import pytest

from aeds.errors import AlphabetMismatch, InvalidWeight
from aeds.model import validate_distribution
from aeds.prefix_codes import (
    SIGMA,
    build_huffman,
    build_phased_in,
    code_tree_from_words,
    phased_in_redundancy,
    phased_in_stats,
    phased_in_words,
    tree_metrics,
    uniform_split_tree,
)

from conftest import huffman_oracle_mean, random_source

SIX = validate_distribution(
    [("a", 0.35), ("b", 0.15), ("c", 0.15), ("d", 0.15),
     ("e", 0.1), ("f", 0.1)])


def test_huffman_six_symbol_source():
    tree = build_huffman(SIX)
    mets = tree_metrics(tree, SIX)
    assert mets.right_weight == pytest.approx(0.65, abs=1e-12)
    # independent oracle: exhaustive minimum over all full binary trees
    oracle = huffman_oracle_mean(SIX.probs)
    assert oracle == pytest.approx(2.5, abs=1e-12)
    assert mets.mean_length == pytest.approx(oracle, abs=1e-12)


def test_huffman_binary():
    p = validate_distribution([("a", 1), ("b", 1)])
    tree = build_huffman(p)
    assert sorted(w.length for w in tree.codewords().values()) == [1, 1]
    assert tree_metrics(tree, p).mean_length == pytest.approx(1.0)


def test_huffman_matches_exhaustive_minimum():
    rng = random.Random(31)
    for _ in range(30):
        p = random_source(rng, n_symbols=rng.randint(2, 8))
        tree = build_huffman(p)
        got = tree_metrics(tree, p).mean_length
        want = huffman_oracle_mean(p.probs)
        assert got == pytest.approx(want, abs=1e-9)


def test_huffman_deterministic():
    a = build_huffman(SIX).codewords()
    b = build_huffman(SIX).codewords()
    assert a == b


def test_huffman_orientation_normalized():
    rng = random.Random(5)
    for _ in range(40):
        p = random_source(rng)
        mets = tree_metrics(build_huffman(p), p)
        assert mets.right_weight >= 0.5 - 1e-12


def test_tree_kraft_equality():
    rng = random.Random(9)
    for _ in range(25):
        p = random_source(rng, n_symbols=rng.randint(2, 9))
        assert build_huffman(p).kraft_sum() == pytest.approx(1.0, abs=1e-12)


def test_tree_metrics_identity_and_balanced_case():
    uniform4 = validate_distribution([(i, 1) for i in range(4)])
    tree = build_huffman(uniform4)
    mets = tree_metrics(tree, uniform4)
    assert mets.right_weight == pytest.approx(0.5)
    assert mets.mean_length == pytest.approx(2.0)
    rng = random.Random(11)
    for _ in range(40):
        p = random_source(rng)
        m = tree_metrics(build_huffman(p), p)
        assert m.right_weight + m.left_weight == pytest.approx(1.0, abs=1e-12)
        total = (m.right_mean_length + m.right_weight
                 + m.left_mean_length + m.left_weight)
        assert m.mean_length == pytest.approx(total, abs=1e-12)


def test_tree_metrics_uniform_split_80():
    tree = uniform_split_tree(80, 64)
    p = validate_distribution([(i, 1) for i in range(80)])
    mets = tree_metrics(tree, p)
    assert mets.mean_length == pytest.approx(6.6, abs=1e-12)
    assert mets.right_weight == pytest.approx(0.8, abs=1e-12)


def test_tree_metrics_alphabet_mismatch():
    tree = build_huffman(SIX)
    other = validate_distribution([("x", 1), ("y", 1)])
    with pytest.raises(AlphabetMismatch):
        tree_metrics(tree, other)


def test_phased_in_word_sets():
    assert [w.bits for w in phased_in_words(5)] == \
        ["00", "01", "10", "110", "111"]
    assert [w.bits for w in phased_in_words(8)] == \
        [format(i, "03b") for i in range(8)]
    assert [w.bits for w in phased_in_words(3)] == ["0", "10", "11"]


def test_phased_in_kraft_and_counts():
    for m in range(1, 200):
        code = build_phased_in(m)
        assert code.kraft_sum() == pytest.approx(1.0, abs=1e-12)
        k = code.bit_budget
        lengths = [w.length for w in code.codewords]
        assert lengths.count(k - 1) == (1 << k) - m if m > 1 else True
        assert len(lengths) == m


def test_phased_in_weighted_assignment():
    code = build_phased_in(5, rank_weights=[0.1, 0.3, 0.05, 0.35, 0.2])
    # heaviest items (3, 1, 4) take the three short codewords
    assert code.word_for(3).bits == "00"
    assert code.word_for(1).bits == "01"
    assert code.word_for(4).bits == "10"
    assert {code.word_for(0).bits, code.word_for(2).bits} == {"110", "111"}


def test_phased_in_stats_uniform():
    stats = phased_in_stats(5)
    assert stats.mean_length == pytest.approx(2.4, abs=1e-12)
    assert stats.deviation == 0.0
    for k in range(1, 13):
        assert phased_in_stats(1 << k).redundancy == pytest.approx(0, abs=1e-12)


def test_phased_in_redundancy_bounds():
    values = [phased_in_redundancy(m) for m in range(2, 4097)]
    assert all(-1e-12 <= v <= SIGMA + 1e-12 for v in values)
    for m in range(2, 4097):
        if m & (m - 1):
            assert phased_in_redundancy(m) > 1e-9
        else:
            assert phased_in_redundancy(m) == pytest.approx(0.0, abs=1e-12)
    # the peak approaches the closed-form cap
    assert max(values) > SIGMA - 1e-4
    assert SIGMA == pytest.approx(0.08607, abs=1e-5)


def test_phased_in_stats_general_weights():
    rng = random.Random(13)
    for _ in range(50):
        m = rng.randint(2, 40)
        raw = [rng.uniform(0.01, 1.0) for _ in range(m)]
        total = sum(raw)
        weights = [w / total for w in raw]
        stats = phased_in_stats(m, weights)
        # direct evaluation: short words on the heaviest items
        code = build_phased_in(m, rank_weights=weights)
        direct = sum(w * code.word_for(i).length
                     for i, w in enumerate(weights))
        assert stats.mean_length == pytest.approx(direct, abs=1e-9)
        assert stats.mean_length <= math.log2(m) + SIGMA - stats.deviation + 1e-9
        assert 0.0 - 1e-12 <= stats.deviation < (2 * m - 2 ** math.ceil(
            math.log2(m))) / m + 1e-12


def test_phased_in_stats_rejects_bad_weights():
    with pytest.raises(InvalidWeight):
        phased_in_stats(4, [0.5, 0.5, 0.5, 0.5])


def test_code_tree_from_words_rejects_incomplete():
    from aeds.model import Codeword
    with pytest.raises(InvalidWeight):
        code_tree_from_words({"a": Codeword.from_bits("0"),
                              "b": Codeword.from_bits("10")})
