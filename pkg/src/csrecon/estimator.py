"""scikit-learn style front end to the reconstructor."""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .basis import BasisSpec
from .numerics import AdamConfig
from .reconstructor import (
    DEFAULT_INIT_SCALE,
    DEFAULT_MU,
    ReconstructionProblem,
    objective,
    reconstruct,
    train,
)
from .signals import amplitude_spectrum, reconstruction_error
from .validation import check_observations, check_schedule


class CSReconstructor(TransformerMixin, BaseEstimator):
    """Recover multi-channel signals from randomly kept samples.

    Each column of ``X`` is one channel of ``N`` samples; entries that were not
    sampled are NaN (or are flagged by an explicit ``mask``). Fitting learns
    complex Fourier coefficients whose synthesis matches the kept samples under
    an l1 penalty; ``transform`` returns the synthesized full-length signal.

    Parameters
    ----------
    mu : float, default=1e-3
        Weight of the l1 penalty (applied as ``mu/2``).
    schedule : None, "default", list of dict or TrainingSchedule
        Epoch segments of learning rate, loss weights and batch size.
        ``None`` means the six-segment 600-epoch default.
    basis : {"fourier", "identity"}, default="fourier"
    random_state : int, default=0
        Seeds initial coefficients and per-epoch row shuffles.
    init_scale : float, default=1e-3
        Standard deviation of the Gaussian initial coefficients.
    beta1, beta2, epsilon : float
        Adam moment decay rates and denominator offset.

    Attributes
    ----------
    coef_real_, coef_imag_ : ndarray of shape (N, K)
    state_ : CoefficientState
        Coefficients together with optimizer moments, for resuming.
    loss_history_ : list of LossRecord
    reconstruction_ : ndarray of shape (N, K)
        Real part of the synthesized signal.
    imag_residual_ : ndarray of shape (N, K)
        Imaginary part of the synthesis; small when the fit is consistent.
    mask_ : MaskMatrix
    n_features_in_ : int
    """

    def __init__(
        self,
        mu=DEFAULT_MU,
        schedule=None,
        basis="fourier",
        random_state=0,
        init_scale=DEFAULT_INIT_SCALE,
        beta1=0.9,
        beta2=0.999,
        epsilon=1e-8,
    ):
        self.mu = mu
        self.schedule = schedule
        self.basis = basis
        self.random_state = random_state
        self.init_scale = init_scale
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon

    def _problem(self, X, mask):
        y, mask = check_observations(X, mask)
        return ReconstructionProblem(y, mask, BasisSpec(y.shape[0], self.basis), float(self.mu))

    def fit(self, X, y=None, mask=None, init=None, callback=None):
        """Learn coefficients from observed samples ``X``.

        Parameters
        ----------
        X : array-like of shape (N, K)
            Observations; NaN marks unsampled entries when ``mask`` is None.
        y : ignored
        mask : MaskMatrix or array-like of 0/1, optional
        init : CoefficientState, optional
            Warm start.
        callback : callable, optional
            Forwarded to :func:`reconstructor.train`.
        """
        problem = self._problem(X, mask)
        adam = AdamConfig(beta1=self.beta1, beta2=self.beta2, epsilon=self.epsilon)
        state, history = train(
            problem,
            check_schedule(self.schedule),
            seed=self.random_state,
            adam=adam,
            init=init,
            init_scale=self.init_scale,
            callback=callback,
        )
        self.problem_ = problem
        self.state_ = state
        self.coef_real_ = state.x_real
        self.coef_imag_ = state.x_imag
        self.loss_history_ = history
        self.mask_ = problem.mask
        self.n_features_in_ = problem.k
        self.n_samples_fit_ = problem.n
        self.reconstruction_, self.imag_residual_ = reconstruct(state, problem.basis)
        return self

    def transform(self, X):
        """Reconstructed signal for the data passed to :meth:`fit`.

        Coefficients are specific to the fitted observations, so ``X`` must
        have the fitted shape; it is only used for that check.
        """
        check_is_fitted(self, "state_")
        X = np.asarray(X)
        if X.shape != (self.n_samples_fit_, self.n_features_in_):
            raise ValueError(
                f"X has shape {X.shape}; this reconstructor was fitted on "
                f"{(self.n_samples_fit_, self.n_features_in_)}"
            )
        return self.reconstruction_.copy()

    def fit_transform(self, X, y=None, mask=None, **fit_params):
        return self.fit(X, y, mask=mask, **fit_params).reconstruction_.copy()

    @property
    def coef_(self):
        check_is_fitted(self, "state_")
        return self.coef_real_ + 1j * self.coef_imag_

    def objective(self, w_real=1.0, w_imag=1.0):
        """Full-data loss of the fitted coefficients."""
        check_is_fitted(self, "state_")
        return objective(self.problem_, self.state_, w_real, w_imag)

    def spectrum(self):
        """One-sided amplitude spectrum of the fitted coefficients."""
        check_is_fitted(self, "state_")
        return amplitude_spectrum(self.coef_real_, self.coef_imag_)

    def reconstruction_error(self, U):
        """Per-channel relative l2 error against the complete signal ``U``."""
        check_is_fitted(self, "state_")
        return reconstruction_error(np.asarray(U, dtype=np.float64), self.reconstruction_)

    def score(self, U, y=None):
        """Negative mean per-channel reconstruction error (higher is better)."""
        return -float(np.nanmean(self.reconstruction_error(U)))
