import random
from fractions import Fraction as F

import pytest

from oracles import FIXTURES, PT, MP, BOOL, random_pair_automaton, run_word_weight, words
from weightsim.automata import (AutomatonError, build_automaton, check_compatible, format_automaton,
                                format_word, load_automaton, parse_automaton, parse_word,
                                prefix_weights, random_automaton, remove_trap_states,
                                save_automaton, transpose_automaton, word_weight)
from weightsim.semiring import SemiringError


@pytest.fixture
def ex41():
    return load_automaton(FIXTURES / "ex41_A.wa"), load_automaton(FIXTURES / "ex41_B.wa")


def test_word_weight_ex41(ex41):
    A, _ = ex41
    assert word_weight(A, ("a", "a")) == F(1, 4)
    assert word_weight(A, ("b",)) == 0
    assert word_weight(A, ()) == 0
    assert word_weight(A, ("b", "a", "a", "a")) == F(1, 8)


def test_epsilon_is_alpha_beta():
    A = load_automaton(FIXTURES / "ex52_A.wa")
    assert word_weight(A, ()) == F(1, 4)


def test_word_weight_matches_paths():
    rng = random.Random(3)
    for kind in (PT, MP, BOOL):
        for _ in range(10):
            A = random_pair_automaton(rng, kind, rng.randint(1, 3), 2)
            for w in words(A.alphabet, 3):
                assert word_weight(A, w) == run_word_weight(A, w)


def test_prefix_weights_agree_with_word_weight(ex41):
    A, _ = ex41
    seen = list(prefix_weights(A, 4))
    assert len(seen) == 31
    assert [len(w) for w, _ in seen] == sorted(len(w) for w, _ in seen)
    for w, v in seen:
        assert v == word_weight(A, w)


def test_unknown_symbol(ex41):
    with pytest.raises(AutomatonError):
        word_weight(ex41[0], ("c",))


def test_transpose_reverses_words():
    rng = random.Random(5)
    for _ in range(10):
        A = random_pair_automaton(rng, PT, 3, 2)
        T = transpose_automaton(A)
        assert transpose_automaton(T) == A
        for w in words(A.alphabet, 5):
            assert word_weight(T, w) == word_weight(A, w[::-1])


def test_transpose_fixes_single_state_loop():
    A = load_automaton(FIXTURES / "ex46_A.wa")
    A2 = build_automaton(PT, 1, ["a"], {0: F(1, 2)}, {0: 1}, [("a", 0, 0, F(1, 2))])
    assert transpose_automaton(A2) == A


def test_remove_trap_states():
    A = build_automaton(PT, 3, ["a"], {0: 1}, {1: 1},
                        [("a", 0, 1, F(1, 2)), ("a", 0, 2, F(1, 2)), ("a", 2, 2, 1)])
    R = remove_trap_states(A)
    assert R.n == 2
    for w in words(A.alphabet, 5):
        assert word_weight(R, w) == word_weight(A, w)
    assert remove_trap_states(R) == R
    dead = build_automaton(PT, 2, ["a"], {0: 1}, {}, [("a", 0, 1, 1)])
    E = remove_trap_states(dead)
    assert E.n == 1 and E.transition_count() == 0 and E.beta.nnz() == 0


def test_random_automaton():
    pool = [F(1, 2), F(1)]
    a1 = random_automaton(PT, 4, 2, F(1, 2), pool, seed=7)
    a2 = random_automaton(PT, 4, 2, F(1, 2), pool, seed=7)
    assert a1 == a2
    assert random_automaton(PT, 4, 2, 0, pool, seed=1).transition_count() == 0
    assert random_automaton(PT, 2, 1, 1, pool, seed=1).transition_count() == 4


def test_file_roundtrip(tmp_path):
    A = load_automaton(FIXTURES / "ex52_A.wa")
    p = tmp_path / "a.wa"
    save_automaton(A, p)
    assert load_automaton(p) == A
    mp = random_automaton(MP, 3, 2, F(1, 2), [F(-1), F(5, 2)], seed=2)
    assert parse_automaton(format_automaton(mp)) == mp


@pytest.mark.parametrize("text", [
    "states 1\nalphabet a\n",
    "semiring plus-times\nstates 2\nalphabet a\ntrans a 0 2 1\n",
    "semiring plus-times\nstates 2\nalphabet a\ntrans b 0 1 1\n",
    "semiring plus-times\nstates 1\nalphabet a\ninitial 0:-1\n",
    "semiring tropical\nstates 1\n",
])
def test_bad_files(text):
    with pytest.raises(AutomatonError):
        parse_automaton(text)


def test_compatibility(ex41):
    A, B = ex41
    check_compatible(A, B)
    other = build_automaton(PT, 1, ["a"], {}, {}, [])
    with pytest.raises(AutomatonError):
        check_compatible(A, other)
    with pytest.raises(SemiringError):
        check_compatible(A, build_automaton(MP, 1, ["a", "b"], {}, {}, []))


def test_word_syntax():
    assert parse_word("<eps>") == ()
    assert parse_word("aab") == ("a", "a", "b")
    assert parse_word("a0 a1") == ("a0", "a1")
    assert format_word(()) == "<eps>"
