"""Training loop that fits complex basis coefficients to masked samples.

The model is a single linear layer whose weights are the real and imaginary
parts of the coefficient matrix ``X``. Each basis row is one training sample;
a batch of rows is pushed through

    yhat = P_B * (psi_B @ X)

and compared with the observed rows ``y_B``. The real branch is fitted to the
observations, the imaginary branch to zero, and an l1 penalty pulls both
coefficient parts toward sparsity::

    L = w_real/K * sum (y - Re yhat)^2 + w_imag/K * sum (Im yhat)^2
        + mu/2 * (|X_real|_1 + |X_imag|_1)

The l1 term is prorated by ``batch_rows / N`` so that the per-batch losses of
one epoch add up to ``L`` exactly. Updates use :func:`numerics.adam_step`.
"""

import logging
from dataclasses import dataclass, replace

import numpy as np

from .basis import BasisSpec, basis_rows, synthesize
from .exceptions import DivergenceError, ParameterError, ShapeError
from .numerics import AdamConfig, AdamState, adam_step, l1_norm, sign_subgradient
from .sampling import MaskMatrix

__all__ = [
    "CoefficientState",
    "LossRecord",
    "ReconstructionProblem",
    "ScheduleSegment",
    "TrainingSchedule",
    "batch_gradients",
    "batch_loss",
    "forward_batch",
    "objective",
    "reconstruct",
    "train",
]

LOG = logging.getLogger(__name__)

DEFAULT_MU = 1e-3
DEFAULT_INIT_SCALE = 1e-3


@dataclass(frozen=True)
class ScheduleSegment:
    """A run of epochs sharing learning rate, loss weights and batch size."""

    epochs: int
    learning_rate: float
    w_real: float = 1.0
    w_imag: float = 1.0
    batch_size: int = 128

    def __post_init__(self):
        if self.epochs < 1:
            raise ParameterError(f"segment needs >= 1 epoch, got {self.epochs}")
        if self.learning_rate <= 0:
            raise ParameterError("learning_rate must be positive")
        if self.w_real <= 0 or self.w_imag <= 0:
            raise ParameterError("loss weights must be positive")
        if self.batch_size < 1:
            raise ParameterError("batch_size must be >= 1")


@dataclass(frozen=True)
class TrainingSchedule:
    """Ordered, non-empty sequence of :class:`ScheduleSegment`."""

    segments: tuple

    def __post_init__(self):
        segs = tuple(self.segments)
        if not segs:
            raise ParameterError("schedule must contain at least one segment")
        object.__setattr__(self, "segments", segs)

    @property
    def total_epochs(self):
        return sum(s.epochs for s in self.segments)

    def segment_at(self, epoch):
        """Segment in force at zero-based ``epoch``."""
        if epoch < 0:
            raise ParameterError("epoch must be non-negative")
        end = 0
        for seg in self.segments:
            end += seg.epochs
            if epoch < end:
                return seg
        raise ParameterError(f"epoch {epoch} beyond schedule of {end} epochs")

    def position(self, epoch):
        """Index of the segment in force at ``epoch``."""
        return self.segments.index(self.segment_at(epoch))

    @classmethod
    def default(cls):
        """Six 100-epoch segments, batch 128: lr 1e-4 then 1e-5, rising weights."""
        rows = [
            (1e-4, 1, 1),
            (1e-4, 128, 1),
            (1e-4, 256, 1),
            (1e-5, 1024, 1),
            (1e-5, 4096, 512),
            (1e-5, 8192, 512),
        ]
        return cls(tuple(ScheduleSegment(100, lr, wr, wi, 128) for lr, wr, wi in rows))

    @classmethod
    def constant(cls, epochs, learning_rate, batch_size=128, w_real=1.0, w_imag=1.0):
        return cls((ScheduleSegment(epochs, learning_rate, w_real, w_imag, batch_size),))

    def to_list(self):
        return [
            {
                "epochs": s.epochs,
                "learning_rate": s.learning_rate,
                "w_real": s.w_real,
                "w_imag": s.w_imag,
                "batch_size": s.batch_size,
            }
            for s in self.segments
        ]

    @classmethod
    def from_list(cls, items):
        return cls(tuple(ScheduleSegment(**dict(it)) for it in items))


@dataclass(frozen=True)
class ReconstructionProblem:
    """Masked observations ``y`` (zero where unsampled), mask, basis and mu."""

    y: np.ndarray
    mask: MaskMatrix
    basis: BasisSpec
    mu: float = DEFAULT_MU

    def __post_init__(self):
        y = np.asarray(self.y, dtype=np.float64)
        if y.ndim != 2:
            raise ShapeError(f"observations must be 2-D, got ndim={y.ndim}")
        if y.shape != self.mask.shape:
            raise ShapeError(f"mask {self.mask.shape} does not match y {y.shape}")
        if self.basis.n != y.shape[0]:
            raise ShapeError(f"basis size {self.basis.n} != signal length {y.shape[0]}")
        if self.mu < 0:
            raise ParameterError(f"mu must be >= 0, got {self.mu}")
        if np.any(y[self.mask.bits == 0.0] != 0.0):
            raise ParameterError("observations must be zero wherever the mask is zero")
        if not np.all(np.isfinite(y)):
            raise ParameterError("observations must be finite")
        object.__setattr__(self, "y", y)

    @classmethod
    def from_signal(cls, u, mask, basis=None, mu=DEFAULT_MU):
        """Mask a full signal ``u`` to build a problem."""
        u = np.asarray(u, dtype=np.float64)
        basis = BasisSpec(u.shape[0]) if basis is None else basis
        return cls(np.where(mask.bits == 1.0, u, 0.0), mask, basis, mu)

    @property
    def n(self):
        return self.y.shape[0]

    @property
    def k(self):
        return self.y.shape[1]

    def columns(self, cols):
        """Sub-problem restricted to a subset of channels."""
        return ReconstructionProblem(self.y[:, cols], self.mask.columns(cols), self.basis, self.mu)


@dataclass(frozen=True)
class CoefficientState:
    """Trainable coefficient parts and their Adam moments."""

    x_real: np.ndarray
    x_imag: np.ndarray
    adam_real: AdamState = None
    adam_imag: AdamState = None

    def __post_init__(self):
        if self.x_real.shape != self.x_imag.shape:
            raise ShapeError("x_real and x_imag must share a shape")
        if self.adam_real is None:
            object.__setattr__(self, "adam_real", AdamState.zeros(self.x_real.shape))
        if self.adam_imag is None:
            object.__setattr__(self, "adam_imag", AdamState.zeros(self.x_real.shape))
        for st in (self.adam_real, self.adam_imag):
            if st.shape != self.x_real.shape:
                raise ShapeError("optimizer moments must match the coefficient shape")

    @classmethod
    def initial(cls, n, k, rng, scale=DEFAULT_INIT_SCALE):
        """Small zero-mean Gaussian start."""
        return cls(rng.normal(0.0, scale, (n, k)), rng.normal(0.0, scale, (n, k)))

    @classmethod
    def zeros(cls, n, k):
        return cls(np.zeros((n, k)), np.zeros((n, k)))

    @property
    def shape(self):
        return self.x_real.shape

    def columns(self, cols):
        def sub(st):
            return AdamState(st.m[:, cols], st.v[:, cols], st.step)

        return CoefficientState(
            self.x_real[:, cols],
            self.x_imag[:, cols],
            sub(self.adam_real),
            sub(self.adam_imag),
        )


@dataclass(frozen=True)
class LossRecord:
    epoch: int
    data_loss_real: float
    data_loss_imag: float
    l1_penalty: float
    total: float

    FIELDS = ("epoch", "data_loss_real", "data_loss_imag", "l1_penalty", "total")

    def as_row(self):
        return [getattr(self, f) for f in self.FIELDS]


def _check_batch(state, block, y_rows=None):
    n = block.real.shape[1]
    if state.x_real.shape[0] != n:
        raise ShapeError(f"basis rows have {n} columns but coefficients have {state.shape[0]} rows")
    if y_rows is not None and y_rows.shape != (block.block_rows, state.shape[1]):
        raise ShapeError(
            f"observed rows {y_rows.shape} != ({block.block_rows}, {state.shape[1]})"
        )


def _masked_outputs(state, block, p_rows):
    out_r = block.real @ state.x_real - block.imag @ state.x_imag
    out_i = block.real @ state.x_imag + block.imag @ state.x_real
    return p_rows * out_r, p_rows * out_i


def forward_batch(state, block, mask):
    """Masked real and imaginary outputs for the rows of ``block``."""
    _check_batch(state, block)
    if mask.shape != state.shape:
        raise ShapeError(f"mask {mask.shape} does not match coefficients {state.shape}")
    return _masked_outputs(state, block, mask.bits[block.rows])


def _l1_scale(mu, batch_rows, n_total):
    return 0.5 * mu * batch_rows / n_total


def batch_loss(yhat_real, yhat_imag, y_rows, state, seg, mu, batch_rows, n_total, epoch=0):
    """Weighted loss of one batch as a :class:`LossRecord`."""
    yhat_real = np.asarray(yhat_real, dtype=np.float64)
    yhat_imag = np.asarray(yhat_imag, dtype=np.float64)
    y_rows = np.asarray(y_rows, dtype=np.float64)
    if not (yhat_real.shape == yhat_imag.shape == y_rows.shape):
        raise ShapeError("prediction and target rows must share a shape")
    k = y_rows.shape[1]
    d_real = float(np.sum((y_rows - yhat_real) ** 2) / k)
    d_imag = float(np.sum(yhat_imag**2) / k)
    pen = _l1_scale(mu, batch_rows, n_total) * (l1_norm(state.x_real) + l1_norm(state.x_imag))
    total = seg.w_real * d_real + seg.w_imag * d_imag + pen
    return LossRecord(epoch, d_real, d_imag, pen, total)


def _gradients(state, block, err_r, err_i, seg, mu, batch_rows, n_total):
    k = state.shape[1]
    wr = seg.w_real * err_r
    wi = seg.w_imag * err_i
    lam = _l1_scale(mu, batch_rows, n_total)
    g_real = (2.0 / k) * (block.real.T @ wr + block.imag.T @ wi)
    g_imag = (2.0 / k) * (block.real.T @ wi - block.imag.T @ wr)
    if lam:
        g_real += lam * sign_subgradient(state.x_real)
        g_imag += lam * sign_subgradient(state.x_imag)
    return g_real, g_imag


def batch_gradients(state, block, mask, y_rows, seg, mu, batch_rows, n_total):
    """Analytic gradient of :func:`batch_loss` w.r.t. ``(x_real, x_imag)``.

    At exact zeros the l1 part contributes the zero subgradient. Entries of
    ``y_rows`` at unsampled positions are ignored.
    """
    y_rows = np.asarray(y_rows, dtype=np.float64)
    _check_batch(state, block, y_rows)
    p_rows = mask.bits[block.rows]
    yr, yi = forward_batch(state, block, mask)
    return _gradients(state, block, yr - p_rows * y_rows, yi, seg, mu, batch_rows, n_total)


def objective(problem, state, w_real=1.0, w_imag=1.0, block_rows=None):
    """Full-data loss at ``state`` with the given branch weights."""
    u_r, u_i = synthesize(problem.basis, state.x_real, state.x_imag, block_rows)
    p = problem.mask.bits
    k = problem.k
    d_real = np.sum((problem.y - p * u_r) ** 2) / k
    d_imag = np.sum((p * u_i) ** 2) / k
    pen = 0.5 * problem.mu * (l1_norm(state.x_real) + l1_norm(state.x_imag))
    return float(w_real * d_real + w_imag * d_imag + pen)


def train(
    problem,
    schedule=None,
    seed=0,
    adam=None,
    init=None,
    init_scale=DEFAULT_INIT_SCALE,
    start_epoch=0,
    callback=None,
):
    """Fit coefficients to ``problem`` following ``schedule``.

    Parameters
    ----------
    problem : ReconstructionProblem
    schedule : TrainingSchedule, optional
        Defaults to :meth:`TrainingSchedule.default`. Batch sizes larger than
        ``N`` are clamped to ``N``.
    seed : int
        Seeds both the initial coefficients and the per-epoch row shuffles.
    adam : AdamConfig, optional
        Moment decay rates and epsilon; the learning rate comes from the
        schedule.
    init : CoefficientState, optional
        Starting point (e.g. a checkpoint). The generator still draws the
        initial values so the shuffle sequence is the same either way.
    start_epoch : int
        First epoch to run; earlier epochs' shuffles are replayed and skipped.
    callback : callable, optional
        ``callback(epoch, state, record)`` after every epoch.

    Returns
    -------
    state : CoefficientState
    history : list of LossRecord
        One record per epoch run, each the sum of that epoch's batch losses.

    Raises
    ------
    DivergenceError
        On the first non-finite batch loss.
    """
    schedule = TrainingSchedule.default() if schedule is None else schedule
    adam = AdamConfig() if adam is None else adam
    n, k = problem.n, problem.k
    rng = np.random.Generator(np.random.Philox(seed))
    drawn = CoefficientState.initial(n, k, rng, init_scale)
    state = drawn if init is None else init
    if state.shape != (n, k):
        raise ShapeError(f"initial state {state.shape} does not match problem ({n}, {k})")

    x_real, x_imag = state.x_real, state.x_imag
    st_real, st_imag = state.adam_real, state.adam_imag
    bits, y, mu = problem.mask.bits, problem.y, problem.mu
    history = []

    for epoch in range(schedule.total_epochs):
        perm = rng.permutation(n)
        if epoch < start_epoch:
            continue
        seg = schedule.segment_at(epoch)
        cfg = replace(adam, learning_rate=seg.learning_rate)
        bs = min(seg.batch_size, n)
        acc = np.zeros(3)
        for b, start in enumerate(range(0, n, bs)):
            rows = perm[start : start + bs]
            block = basis_rows(problem.basis, rows)
            cur = CoefficientState(x_real, x_imag, st_real, st_imag)
            p_rows, y_rows = bits[rows], y[rows]
            # overflow surfaces as a non-finite loss below
            with np.errstate(over="ignore", invalid="ignore"):
                out_r, out_i = _masked_outputs(cur, block, p_rows)
                err_r = out_r - y_rows
                rec = batch_loss(out_r, out_i, y_rows, cur, seg, mu, len(rows), n, epoch)
            if not np.isfinite(rec.total):
                raise DivergenceError(
                    f"non-finite loss at epoch {epoch}, batch {b}", epoch=epoch, batch=b
                )
            acc += (rec.data_loss_real, rec.data_loss_imag, rec.l1_penalty)
            g_real, g_imag = _gradients(cur, block, err_r, out_i, seg, mu, len(rows), n)
            x_real, st_real = adam_step(x_real, g_real, st_real, cfg)
            x_imag, st_imag = adam_step(x_imag, g_imag, st_imag, cfg)
        total = seg.w_real * acc[0] + seg.w_imag * acc[1] + acc[2]
        rec = LossRecord(epoch, float(acc[0]), float(acc[1]), float(acc[2]), float(total))
        history.append(rec)
        state = CoefficientState(x_real, x_imag, st_real, st_imag)
        if callback is not None:
            callback(epoch, state, rec)
        if LOG.isEnabledFor(logging.DEBUG) and (epoch + 1) % 50 == 0:
            LOG.debug("epoch %d total %.6g", epoch + 1, total)

    return CoefficientState(x_real, x_imag, st_real, st_imag), history


def reconstruct(state, basis, block_rows=None):
    """Synthesize ``psi @ X``; the real part is the recovered signal.

    The imaginary part should be near zero and is returned as a diagnostic.
    """
    return synthesize(basis, state.x_real, state.x_imag, block_rows)
