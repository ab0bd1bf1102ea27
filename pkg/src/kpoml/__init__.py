"""Variational quantum regression on Kerr-nonlinear parametric oscillators.

A desk-scale simulator and training harness: truncated Fock-space linear
algebra, KPO and KPO-network dynamics, the layered variational circuit, a
conventional qubit baseline, Nelder-Mead training, and the Fourier
expressibility analysis, with a CLI that writes records, CSV curves, and
figures.
"""

from .dynamics import (
    AdiabaticResult,
    EncodingParams,
    KpoNetworkComponents,
    NetworkParams,
    SingleKpoParams,
    ThetaLayout,
    adiabatic_prepare,
    build_network_hamiltonian,
    build_single_hamiltonian,
    encode_input_network,
    encode_input_single,
    evolve_unitary,
    layered_circuit,
)
from .experiments import (
    AnalysisConfig,
    Dataset,
    ExperimentConfig,
    Spectrum,
    ThetaInit,
    TrainingRecord,
    best_record,
    fourier_transform_numeric,
    generate_dataset,
    sweep_alpha,
    sweep_sample_size,
    spectral_support,
    target_function,
    train,
    train_best_of,
)
from .fock import (
    CompositeSpace,
    ModeSpace,
    OperatorMatrix,
    StateVector,
    TruncationError,
    annihilation_op,
    coherent_state,
    creation_op,
    embed,
    expectation,
    fock_state,
    identity_op,
    number_op,
    overlap,
    real_expectation,
    tensor,
)
from .model import (
    FourierCoefficients,
    ModelFunction,
    ModelSpec,
    encode_two_inputs_single_kpo,
    evaluate,
    fourier_series_coefficients,
    kpo_network_spec,
    mse_cost,
    overlap_closed_form,
    photon_number_profile,
    qubit_baseline_spec,
    single_kpo_spec,
    two_input_kpo_spec,
)
from .neldermead import CostEvaluationError, NmConfig, OptimTrace, minimize
from .qubits import (
    BaselineConfig,
    IsingCoefficients,
    baseline_circuit,
    baseline_model,
    encode_input_qubits,
    ising_evolution,
    parameterized_layer,
    rotation_gate,
)

__version__ = "0.1.0"
