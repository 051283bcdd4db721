"""Batch entanglement detection for two-qubit states.

A classical simulator and algorithm library: parameterized state families,
witness-basis measurement sampling, fixed-confidence thresholding-bandit
policies with anytime confidence widths, a non-adaptive tomography baseline
and reproducible experiment sweeps.
"""

__version__ = "0.1.0"

from .linalg import (
    TOL,
    Tolerances,
    hermitian_eigensystem,
    partial_trace,
    partial_transpose,
    tensor,
    validate_density_matrix,
)
from .witness import (
    WBM,
    all_wbms,
    build_wbm,
    criterion_from_probs,
    criterion_table,
    cyclic_pauli_unitary,
    exact_criterion,
    outcome_probs,
    witness_operator,
)
from .states import (
    ProblemInstance,
    StateSpec,
    amplitude_damp,
    bds_from_canonical_angles,
    bell_diagonal,
    bell_state,
    depolarized_bell,
    ginibre_promise_instance,
    instance_from_density_matrices,
    make_instance,
    min_ppt_eigenvalue,
    ppt_entangled,
    random_bds_instance,
    random_ginibre,
    random_separable,
    reference_bds_instance,
)
from .sampler import (
    ArmSampler,
    CountStore,
    MitigationError,
    NoiseModel,
    apply_readout_noise,
    mitigate_counts,
    pull,
    sample_outcome,
    substream,
)
from .bandit import (
    BudgetExceededError,
    EstimatorState,
    LilParams,
    RunRecord,
    lil_hdoc,
    lil_width,
    pair_estimate,
    successive_elimination,
    theoretical_budget_se,
    warm_start_T,
)
from .workflow import (
    WorkflowResult,
    delta_correctness_harness,
    sweep_fig6,
    sweep_fig7_fig8,
    sweep_fig9,
    wilson_interval,
    workflow_arbitrary,
    workflow_bds,
)
from .tomography import (
    TomographyResult,
    classify_batch,
    measure_correlator,
    reconstruct_bds,
    required_shots,
    sweep_tomography,
)
