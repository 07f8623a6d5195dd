"""Simulation-based inclusion checking for weighted word and tree automata."""
from .semiring import NEG_INF, SemiringError, SemiringKind, semiring
from .linalg import Matrix, MatrixError, format_matrix, parse_matrix
from .automata import (AutomatonError, WeightedAutomaton, build_automaton, load_automaton,
                       parse_automaton, random_automaton, word_weight)
from .simulation import (Direction, SearchOutcome, Status, assemble_constraints, find_simulation,
                         verify_sim_matrix)
from .partial_execution import bpe, bpe_param, fpe, fpe_param, lemma43_witness
from .maxplus import build_sim_game, mpg_winner, solve_two_sided
from .tree import (RankedAlphabet, Tree, WeightedTreeAutomaton, find_tree_sim, parse_tree,
                   tree_fpe, tree_weight, verify_tree_sim)

__version__ = "0.1.0"
