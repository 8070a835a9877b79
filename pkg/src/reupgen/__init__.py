"""Single-step generation of quantum states from reuploaded classical noise.

A data-reuploading circuit maps samples of a 1-D classical noise variable
directly to pure states; training minimizes an entropic-regularized
transport distance between the generated ensemble and a target ensemble.
"""

from .datasets import (
    NoiseSpec,
    TfimConfig,
    load_ensemble,
    load_theta,
    ring_y_ensemble,
    ring_z_ensemble,
    sample_noise,
    save_ensemble,
    save_theta,
    tfim_ground_states,
)
from .generator import GeneratorConfig, generate_ensemble, generate_state, parameter_count, random_theta
from .gradients import (
    ensemble_loss_gradient,
    entropy_loss_gradient,
    finite_difference_check,
    overlap_gradient,
)
from .metrics import (
    MetricReport,
    distribution_distance_1d,
    entropy_series_report,
    evaluate_generation,
    magnetization,
    mean_squared_pauli,
)
from .statevec import (
    apply_entangler,
    apply_single_qubit,
    entanglement_entropy,
    euler_gate,
    overlap,
    pauli_expectation,
    reduced_density_qubit0,
    swap_test_estimate,
    zero_state,
)
from .training import (
    AdamState,
    EpochRecord,
    TrainConfig,
    TrainingDiverged,
    adam_step,
    train_conditional,
    train_ensemble,
    train_entropy_series,
)
from .transport import (
    SinkhornConfig,
    TransportPlan,
    cost_matrix,
    exact_assignment,
    sinkhorn,
    transport_value,
    wasserstein_distance,
)

__version__ = "0.1.0"
