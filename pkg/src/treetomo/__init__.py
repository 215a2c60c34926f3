"""Three-basis analytical pure-state estimation on a binary-tree decomposition."""

from .bases import (
    OrthonormalBasis,
    TreeBasisParams,
    canonical_basis,
    load_basis,
    random_subspace_basis,
    save_basis,
    tree_basis,
)
from .bench import CellResult, ExperimentConfig, run_cell, run_experiment, run_trial
from .measurement import (
    EXACT,
    OutcomeCounts,
    ProbabilityVector,
    born_probabilities,
    exact_counts,
    frequencies,
    load_counts,
    measure,
    sample_counts,
    save_counts,
)
from .noise import (
    LambdaEstimate,
    NodeLambdaEstimate,
    correct_amplitudes,
    correct_frequencies,
    estimate_lambda,
    estimate_lambda_node,
    reconstruct_noise_corrected,
    solve_unnormalized_node,
)
from .reconstruction import (
    NodeEstimate,
    PhaseSolution,
    ReconstructionReport,
    amplitudes_from_canonical,
    gamma_ptilde,
    make_degenerate_state,
    reconstruct,
    save_report,
    solve_phase,
    two_projector_phase,
)
from .states import (
    NoisyState,
    PureState,
    haar_random_state,
    infidelity,
    load_state,
    save_state,
)
from .tree import TreeLayout, build_tree, node_support

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
