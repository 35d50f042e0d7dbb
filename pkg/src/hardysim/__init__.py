"""Two-qubit Hardy nonlocality test: exact simulation, noisy emulation, metrics."""

from .statevector import (
    Circuit,
    DensityMatrix,
    StateVector,
    UnitaryMatrix,
    apply_channel,
    apply_gate,
    circuit_unitary,
    outcome_distribution,
    run_circuit,
    tensor,
    to_density,
)
from .hardy import (
    HardyParams,
    HardyProbabilities,
    MeasurementSetting,
    StateClass,
    StateKind,
    analytic_q,
    chi_of,
    classify_state,
    concurrence,
    hardy_vector,
    joint_probability,
    measurement_setting,
    optimal_angles,
    outcome_probabilities,
    prepare_state,
    q_max,
)
from .noise import (
    EpsilonEstimates,
    NoiseModel,
    ShotConfig,
    depolarizing_kraus,
    estimate_epsilons,
    experiment_circuit,
    load_noise_profile,
    measure_epsilons,
    sample_shots,
    simulate_noisy,
    statistical_error,
)
from .sweep import (
    PerformanceReport,
    ReducedComparison,
    SweepRow,
    baseline_eps4,
    delta_interval,
    diagonal_points,
    diagonal_sweep,
    metric_fluctuation,
    metric_min_q,
    metric_shift,
    performance_report,
    q_ladder,
    q_surface,
    read_csv,
    reduced_circuit_compare,
    surface_sweep,
    write_csv,
)

__version__ = "0.1.0"
