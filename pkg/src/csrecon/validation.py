"""Input checks shared by the estimator and the command line."""

import numpy as np
from sklearn.utils.validation import check_array

from .exceptions import ParameterError, ShapeError
from .reconstructor import TrainingSchedule
from .sampling import MaskMatrix


def check_observations(X, mask=None):
    """Normalize observed samples and the sampling mask.

    ``X`` is ``(N, K)``. Unsampled entries may be NaN; when ``mask`` is None
    it is inferred as ``~isnan(X)``. Returns ``(y, mask)`` with ``y`` zero
    off the mask.
    """
    X = check_array(X, dtype=np.float64, ensure_all_finite="allow-nan", ensure_min_samples=2)
    if mask is None:
        mask = MaskMatrix(~np.isnan(X))
    elif not isinstance(mask, MaskMatrix):
        mask = MaskMatrix(check_array(mask, dtype=np.float64))
    if mask.shape != X.shape:
        raise ShapeError(f"mask {mask.shape} does not match observations {X.shape}")
    keep = mask.bits == 1.0
    if np.any(np.isnan(X[keep])) or np.any(np.isinf(X)):
        raise ParameterError("sampled entries must be finite")
    return np.where(keep, X, 0.0), mask


def check_schedule(schedule):
    """Accept None / ``"default"`` / list of segment dicts / TrainingSchedule."""
    if schedule is None or (isinstance(schedule, str) and schedule == "default"):
        return TrainingSchedule.default()
    if isinstance(schedule, TrainingSchedule):
        return schedule
    if isinstance(schedule, str):
        raise ParameterError(f"unknown schedule name {schedule!r}")
    try:
        return TrainingSchedule.from_list(schedule)
    except TypeError as exc:
        raise ParameterError(f"bad schedule: {exc}") from None
