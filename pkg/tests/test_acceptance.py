"""Acceptance criteria 1-9.  The conftest prints one PASS/FAIL line per criterion."""
import random
import time
from fractions import Fraction as F

import pytest

from oracles import (FIXTURES, MP, PT, BOOL, dominating, random_pair_automaton, random_tree,
                     run_tree_weight, words)
from weightsim.automata import (prefix_weights, random_automaton, remove_trap_states,
                                transpose_automaton, word_weight)
from weightsim.cli import main
from weightsim.linalg import Matrix, transpose
from weightsim.maxplus import Winner, build_sim_game, mpg_winner
from weightsim.partial_execution import bpe, fpe, lemma43_witness
from weightsim.simulation import Direction, Status, find_simulation, verify_sim_matrix
from weightsim.tree import (RankedAlphabet, enumerate_trees, find_tree_sim, spine, tree_fpe,
                            tree_fpe_witness, tree_weight, verify_tree_sim, word_to_tree_automaton)

FWD, BWD = Direction.FWD, Direction.BWD


def fx(name):
    return str(FIXTURES / name)


def sampled_inclusion(A, B, max_len):
    sr = A.semiring
    wa = dict(prefix_weights(A, max_len))
    wb = dict(prefix_weights(B, max_len))
    return all(sr.leq(wa[w], wb[w]) for w in wa)


def random_subset(rng, n):
    return {x for x in range(n) if rng.random() < 0.5}


@pytest.mark.criterion(1, "ex52 pair witnesses (1 1) and (1;2) in under 1 s")
def test_criterion_1(capsys):
    t0 = time.perf_counter()
    assert main(["simsearch", fx("ex52_A.wa"), fx("ex52_B.wa"), "--dir", "fwd"]) == 0
    fwd = capsys.readouterr().out
    assert main(["simsearch", fx("ex52_A.wa"), fx("ex52_B.wa"), "--dir", "bwd"]) == 0
    bwd = capsys.readouterr().out
    elapsed = time.perf_counter() - t0
    assert fwd == "Found\n1 2\n1 1\n"
    assert bwd == "Found\n2 1\n1\n2\n"
    assert elapsed < 1.0


def ex41_formula(w):
    k = len(w)
    if k >= 2 and k % 2 == 0 and w[0] in "ab" and all(c == "a" for c in w[1:]):
        return F(1, 4) * F(1, 2) ** ((k - 2) // 2)
    return F(0)


@pytest.mark.criterion(2, "ex41 pair equal languages up to length 8, no simulation, under 5 s")
def test_criterion_2(capsys):
    t0 = time.perf_counter()
    assert main(["oracle", fx("ex41_A.wa"), fx("ex41_B.wa"), "--max-len", "8"]) == 0
    rows = capsys.readouterr().out.splitlines()[1:]
    assert len(rows) == 2 ** 9 - 1
    for row in rows:
        *letters, la, lb, ok = row.split()
        w = "" if letters == ["<eps>"] else "".join(letters)
        assert la == lb and ok == "yes"
        assert F(la) == ex41_formula(w)
    for d in ("fwd", "bwd"):
        assert main(["simsearch", fx("ex41_A.wa"), fx("ex41_B.wa"), "--dir", d]) == 1
        assert capsys.readouterr().out == "NoSimulation\n"
    assert time.perf_counter() - t0 < 5.0


@pytest.mark.criterion(3, "ex46 pair no counterexample, forward PE loop Unknown, under 30 s")
def test_criterion_3(capsys):
    t0 = time.perf_counter()
    assert main(["counterexample", fx("ex46_A.wa"), fx("ex46_B.wa"), "--max-len", "10"]) == 0
    assert capsys.readouterr().out.startswith("None")
    assert main(["langincl", fx("ex46_A.wa"), fx("ex46_B.wa"), "--dir", "fwd", "--max-depth", "3"]) == 2
    out = capsys.readouterr().out
    assert out.startswith("Unknown")
    assert [line.split(": ")[1] for line in out.splitlines()[1:]] == ["NoSimulation"] * 4
    assert time.perf_counter() - t0 < 30.0


@pytest.mark.criterion(4, "soundness on 500 plus-times and 500 max-plus pairs, under 5 min")
def test_criterion_4():
    t0 = time.perf_counter()
    rng = random.Random(2024)
    found = {PT: 0, MP: 0}
    for kind in (PT, MP):
        for i in range(500):
            k = rng.randint(1, 2)
            A = random_pair_automaton(rng, kind, rng.randint(1, 4), k)
            B = dominating(rng, A) if i % 3 == 0 else random_pair_automaton(rng, kind, rng.randint(1, 4), k)
            for d in (FWD, BWD):
                out = find_simulation(A, B, d)
                assert out.status is not Status.UNKNOWN
                if out.found:
                    found[kind] += 1
                    assert verify_sim_matrix(A, B, d, out.matrix)
                    assert sampled_inclusion(A, B, 6)
    assert min(found.values()) > 100
    assert time.perf_counter() - t0 < 300


@pytest.mark.criterion(5, "max-plus search agrees with the mean-payoff game on 200 trap-free pairs")
def test_criterion_5():
    t0 = time.perf_counter()
    rng = random.Random(77)
    pool = [F(w) for w in range(-3, 4)]
    agree, max_wins = 0, 0
    for i in range(200):
        A = remove_trap_states(random_pair_automaton(rng, MP, rng.randint(1, 3), 2, pool=pool))
        if i % 2:
            B = remove_trap_states(dominating(rng, A))
        else:
            B = remove_trap_states(random_pair_automaton(rng, MP, rng.randint(1, 3), 2, pool=pool))
        sim = find_simulation(A, B, FWD).status is not Status.NO_SIMULATION
        game = mpg_winner(build_sim_game(A, B)) is Winner.MAX_WINS
        agree += sim == game
        max_wins += game
    assert agree == 200
    assert 20 < max_wins < 180
    assert time.perf_counter() - t0 < 300


@pytest.mark.criterion(6, "partial execution preserves languages, witnesses verify, adequacy holds")
def test_criterion_6():
    rng = random.Random(606)
    kinds = [PT] * 120 + [MP] * 40 + [BOOL] * 40
    for kind in kinds:
        A = random_pair_automaton(rng, kind, rng.randint(1, 4), rng.randint(1, 2))
        P, P2 = random_subset(rng, A.n), random_subset(rng, A.n)
        FA, BA = fpe(A, P), bpe(A, P2)
        base = dict(prefix_weights(A, 6))
        assert dict(prefix_weights(FA, 6)) == base
        assert dict(prefix_weights(BA, 6)) == base
        assert verify_sim_matrix(A, FA, BWD, lemma43_witness(A, P))
        assert find_simulation(A, A, FWD).found
        assert find_simulation(FA, BA, FWD).found


@pytest.mark.criterion(7, "forward check on (A,B,X) equals backward check on the transposes")
def test_criterion_7():
    rng = random.Random(707)
    outcomes = set()
    for i in range(200):
        kind = (PT, MP, BOOL)[i % 3]
        k = rng.randint(1, 2)
        A = random_pair_automaton(rng, kind, rng.randint(1, 3), k)
        B = dominating(rng, A) if i % 2 else random_pair_automaton(rng, kind, rng.randint(1, 3), k)
        out = find_simulation(A, B, FWD)
        if out.found and rng.random() < 0.7:
            X = out.matrix
        else:
            pool = list(A.weight_support() | B.weight_support())
            X = Matrix(kind, B.n, A.n, {(q, p): rng.choice(pool) for q in range(B.n)
                                        for p in range(A.n) if rng.random() < 0.6})
        fwd = bool(verify_sim_matrix(A, B, FWD, X))
        bwd = bool(verify_sim_matrix(transpose_automaton(A), transpose_automaton(B), BWD, transpose(X)))
        assert fwd == bwd
        outcomes.add(fwd)
    assert outcomes == {True, False}


TREE_SIG = RankedAlphabet([("c", 0), ("d", 0), ("g", 1), ("f", 2)])


@pytest.mark.criterion(8, "tree evaluation, tree witnesses, tree FPE and word embedding, under 10 min")
def test_criterion_8():
    t0 = time.perf_counter()
    rng = random.Random(808)
    trees = enumerate_trees(TREE_SIG, 3)
    found = 0
    for i in range(100):
        kind = (PT, MP, BOOL)[i % 3]
        A = random_tree(rng, kind, rng.randint(1, 3), TREE_SIG)
        for t in trees:
            assert tree_weight(A, t) == run_tree_weight(A, t)
        P = random_subset(rng, A.n)
        A2 = tree_fpe(A, P)
        assert all(tree_weight(A2, t) == tree_weight(A, t) for t in trees)
        assert verify_tree_sim(A, A2, BWD, tree_fpe_witness(A, P))
        B = (A2, random_tree(rng, kind, rng.randint(1, 3), TREE_SIG), A)[i % 3]
        sr = A.semiring
        for d in (FWD, BWD):
            out = find_tree_sim(A, B, d, seed=i, restarts=2, max_steps=200)
            if kind is not BOOL:
                assert out.status is not Status.NO_SIMULATION or assemble_degree(A, B, d) <= 1
            if out.found:
                found += 1
                assert verify_tree_sim(A, B, d, out.matrix)
                assert all(sr.leq(tree_weight(A, t), tree_weight(B, t)) for t in trees)
        W = random_pair_automaton(rng, kind, rng.randint(1, 3), 2)
        TW = word_to_tree_automaton(W)
        assert all(tree_weight(TW, spine(w)) == word_weight(W, w) for w in words(W.alphabet, 4))
    assert found > 0
    assert time.perf_counter() - t0 < 600


def assemble_degree(A, B, d):
    from weightsim.tree import assemble_tree_constraints
    return assemble_tree_constraints(A, B, d).degree()


@pytest.mark.criterion(9, "scaling: plus-times 50x50 and max-plus 16x16 searches within 10 min")
def test_criterion_9():
    pt_pool = [F(1, 4), F(1, 2), F(1)]
    mp_pool = [F(w) for w in range(-3, 4)]
    t0 = time.perf_counter()
    A = random_automaton(PT, 50, 2, F(1, 10), pt_pool, seed=1)
    B = random_automaton(PT, 50, 2, F(1, 10), pt_pool, seed=2)
    for X, Y in ((A, B), (A, A)):
        for d in (FWD, BWD):
            out = find_simulation(X, Y, d)
            assert out.status is not Status.UNKNOWN
    assert find_simulation(A, A, FWD).found
    assert time.perf_counter() - t0 < 600
    t0 = time.perf_counter()
    A = random_automaton(MP, 16, 2, F(1, 2), mp_pool, seed=3)
    B = random_automaton(MP, 16, 2, F(1, 2), mp_pool, seed=4)
    for X, Y in ((A, B), (A, A), (B, A)):
        for d in (FWD, BWD):
            assert find_simulation(X, Y, d).status is not Status.UNKNOWN
    assert time.perf_counter() - t0 < 600
