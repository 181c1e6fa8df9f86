"""Compressive-sensing reconstruction of multi-channel signals.

Observed samples are fitted by complex Fourier coefficients trained with an
l1 penalty and Adam, one block of basis rows at a time.
"""

from .basis import BasisRowBlock, BasisSpec, basis_block, basis_rows, synthesize
from .estimator import CSReconstructor
from .exceptions import (
    ConfigError,
    DivergenceError,
    IngestionError,
    NumericError,
    ParameterError,
    RangeError,
    ShapeError,
    UndefinedMetricError,
)
from .numerics import AdamConfig, AdamState, adam_step, l1_norm, matmul, sign_subgradient
from .oracle import OracleResult, ista_solve
from .reconstructor import (
    CoefficientState,
    LossRecord,
    ReconstructionProblem,
    ScheduleSegment,
    TrainingSchedule,
    batch_gradients,
    batch_loss,
    forward_batch,
    objective,
    reconstruct,
    train,
)
from .sampling import MaskMatrix, apply_mask, effective_ratio, generate_mask
from .signals import (
    BENCHMARK_SINUSOIDS,
    SignalMatrix,
    SinusoidSpec,
    amplitude_spectrum,
    generate_sinusoids,
    reconstruction_error,
    slice_signal,
    symmetry_mismatch,
)

__version__ = "0.1.0"
