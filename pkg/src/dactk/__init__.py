"""Distributed arithmetic coding toolkit.

An arithmetic coder whose two symbol intervals overlap, trading decoder
ambiguity for rate, plus the machinery to study that ambiguity: exact
decoding-tree enumeration, a side-information list decoder, grid
numerics for the code-point densities and path-population growth, and a
Monte-Carlo harness comparing the two.
"""

from .codec import (AMBIGUOUS, Codeword, CodecParams, DecoderBranchState,
                    advance, classify, decode_unambiguous, encode,
                    initial_state, interval_split, q_to_fixed, read_codeword,
                    write_codeword)
from .errors import (AllPathsEliminated, AmbiguousCodeword, BudgetExceeded,
                     DactkError, FormatError, NonConvergence)
from .harness import (ComparisonTable, ExperimentConfig, generate_si,
                      generate_source, run_expansion_experiment)
from .search import (PathSet, SearchConfig, SideInfo, empirical_expansion,
                     enumerate_tree, m_algorithm_decode, path_counts)
from .spectrum import (ExpansionSeries, SpectrumGrid, constraint_residuals,
                       evolve_time_spectrum, expansion_series,
                       mutual_information, residual_entropy,
                       solve_path_spectrum)

__version__ = "0.1.0"
