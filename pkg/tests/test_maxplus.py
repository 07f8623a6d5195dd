import random
from fractions import Fraction as F

import pytest

from oracles import MP, random_pair_automaton
from weightsim.automata import remove_trap_states
from weightsim.linalg import Matrix
from weightsim.maxplus import (MeanPayoffGame, Owner, TwoSidedSystem, Winner, build_sim_game,
                               homogenize, maxplus_apply, mpg_winner, recover_matrix, residuate,
                               solve_two_sided)
from weightsim.semiring import NEG_INF
from weightsim.simulation import Direction, Status, assemble_constraints, find_simulation


def test_residuate():
    assert residuate(Matrix.from_dense(MP, [[0]]), [F(5)]) == [5]
    A = Matrix.from_dense(MP, [[2], [3]])
    x = residuate(A, [F(5), F(5)])
    assert x == [2]
    assert maxplus_apply(A, x) == [4, 5]
    assert maxplus_apply(A, [F(3)]) != [4, 5]
    # a column with no finite entry is unconstrained
    assert residuate(Matrix.from_dense(MP, [[NEG_INF, 1]]), [F(0)]) == [None, -1]
    assert residuate(Matrix.from_dense(MP, [[NEG_INF, 1]]), [F(0)], cap=F(7)) == [7, -1]


def test_residuation_is_greatest():
    rng = random.Random(1)
    for _ in range(50):
        rows = [[rng.choice([NEG_INF, F(rng.randint(-3, 3))]) for _ in range(3)] for _ in range(3)]
        A = Matrix.from_dense(MP, rows)
        y = [F(rng.randint(-3, 3)) for _ in range(3)]
        x = residuate(A, y, cap=F(100))
        assert all(a <= b for a, b in zip(maxplus_apply(A, x), y))
        for j in range(3):
            if x[j] < 100:
                bumped = list(x)
                bumped[j] += 1
                assert not all(a <= b for a, b in zip(maxplus_apply(A, bumped), y))


def test_two_sided_examples():
    L = Matrix.from_dense(MP, [[0, 1], [2, NEG_INF]])
    sol = solve_two_sided(TwoSidedSystem(L, L, 1))
    assert sol is not None and sol[1] is not NEG_INF
    one = TwoSidedSystem(Matrix.from_dense(MP, [[1]]), Matrix.from_dense(MP, [[0]]), 0)
    assert solve_two_sided(one) is None


def test_homogenize_shape_and_recovery():
    rng = random.Random(5)
    for _ in range(20):
        A = random_pair_automaton(rng, MP, rng.randint(1, 3), 2)
        B = random_pair_automaton(rng, MP, rng.randint(1, 3), 2)
        cs = assemble_constraints(A, B, Direction.FWD)
        sys = homogenize(cs)
        assert sys.var_count == A.n * B.n + 1
        sol = solve_two_sided(sys)
        if sol is not None:
            assert sys.satisfied_by(sol)
            X = recover_matrix(cs, sys, sol)
            assert cs.first_failure(cs.values_of(X)) is None


def two_cycle(w):
    g = MeanPayoffGame([], [], 0)
    a = g.add_vertex("a", Owner.MIN)
    b = g.add_vertex("b", Owner.MAX)
    g.add_edge(a, b, w)
    g.add_edge(b, a, 0)
    return g


def test_two_cycles():
    assert mpg_winner(two_cycle(1)) is Winner.MAX_WINS
    assert mpg_winner(two_cycle(0)) is Winner.MAX_WINS
    assert mpg_winner(two_cycle(-1)) is Winner.MIN_WINS


def test_bipartite_edges_enforced():
    g = MeanPayoffGame([], [], 0)
    a = g.add_vertex("a", Owner.MIN)
    b = g.add_vertex("b", Owner.MIN)
    with pytest.raises(ValueError):
        g.add_edge(a, b, 0)


def test_dead_ends():
    g = MeanPayoffGame([], [], 0)
    a = g.add_vertex("a", Owner.MIN)
    b = g.add_vertex("b", Owner.MAX)
    g.add_edge(a, b, 5)
    assert mpg_winner(g) is Winner.MIN_WINS
    g2 = MeanPayoffGame([], [], 0)
    g2.add_vertex("a", Owner.MIN)
    assert mpg_winner(g2) is Winner.MAX_WINS


def test_game_sizes_and_self_play():
    rng = random.Random(8)
    for _ in range(20):
        n, m = rng.randint(1, 3), rng.randint(1, 3)
        A = random_pair_automaton(rng, MP, n, 2)
        B = random_pair_automaton(rng, MP, m, 2)
        g = build_sim_game(A, B)
        assert len(g.min_vertices) == 1 + m * n
        assert len(g.max_vertices) == n + 2 * m * n + m
        star_edges = {g.names[d] for s, d, _ in g.edges if g.names[s] == "**"}
        assert star_edges == {f"A{p}" for (_, p), _ in A.alpha.items()}
        T = remove_trap_states(A)
        assert mpg_winner(build_sim_game(T, T)) is Winner.MAX_WINS


def test_fractional_weights():
    rng = random.Random(12)
    pool = [F(-3, 2), F(-1, 3), F(0), F(1, 2), F(2)]
    for _ in range(30):
        A = remove_trap_states(random_pair_automaton(rng, MP, 2, 2, pool=pool))
        B = remove_trap_states(random_pair_automaton(rng, MP, 2, 2, pool=pool))
        found = find_simulation(A, B, Direction.FWD).status is not Status.NO_SIMULATION
        assert found == (mpg_winner(build_sim_game(A, B)) is Winner.MAX_WINS)


def test_residuation_adjunction():
    rng = random.Random(21)
    for _ in range(50):
        rows = [[rng.choice([NEG_INF, F(rng.randint(-3, 3))]) for _ in range(3)] for _ in range(4)]
        A = Matrix.from_dense(MP, rows)
        x = [F(rng.randint(-4, 4)) for _ in range(3)]
        back = residuate(A, maxplus_apply(A, x))
        assert all(b is None or xi <= b for xi, b in zip(x, back))


def test_descent_is_monotone():
    from weightsim.maxplus import _to_int_array, descend, divergence_bound
    rng = random.Random(22)
    for _ in range(20):
        A = random_pair_automaton(rng, MP, 2, 2)
        B = random_pair_automaton(rng, MP, 2, 2)
        sys = homogenize(assemble_constraints(A, B, Direction.FWD))
        scale, D = divergence_bound(sys)
        trace = []
        descend(_to_int_array(sys.L, scale), _to_int_array(sys.R, scale), D, trace=trace)
        for a, b in zip(trace, trace[1:]):
            assert (b <= a).all()
