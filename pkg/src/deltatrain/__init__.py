"""Exact delta-train solutions of integro-differential equations with memory."""

__version__ = "0.1.0"

from .errors import (
    AccuracyError,
    ConfigurationError,
    DegeneracyError,
    DeltaTrainError,
    KernelEvaluationError,
    NumericalError,
    PhysicalityError,
    PoleError,
)
from .kernel_core import (
    DeltaSolver,
    DeltaTrain,
    FreePropagator,
    KernelSpec,
    MemoryMatrix,
    NoiseSequence,
    build_K,
    k_row,
    solve_at,
    solve_nodes,
    xi_at,
)
from .diagrams import Diagram, Memory, classify, enumerate_diagrams, sum_check, weight
from .jaynes_cummings import (
    JCParams,
    TransferFunction,
    choi_matrix,
    choi_spectrum,
    decay_rates,
    decay_rates_fd,
    exact_amplitude,
    jc_kernel,
    kraus_channel,
    kraus_operators,
    rhp_measure,
    transfer,
    transfer_interval,
)
from .spectral import (
    DiscreteOscillators,
    LorentzDrude,
    NoiseCovariance,
    PeriodicSpectralDensity,
    dtft_s,
    gamma_ld,
    noise_continuous,
    noise_nu,
    poisson_check,
    sigma_continuous,
    sigma_ld,
)
from .qle import (
    OscillatorParams,
    QLESolver,
    TransferPair,
    G_functional,
    G_functional_dot,
    markov_check,
    markov_restrict_noise,
    markov_restricted_transfer,
    qle_kernel,
    script_G,
    transfer_matrices,
    two_time_QQ,
)
from .reference import RationalGreen, green_constant, jc_exact, reference_Q2
