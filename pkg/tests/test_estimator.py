import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from csrecon import CSReconstructor
from csrecon.exceptions import ParameterError, ShapeError
from csrecon.reconstructor import TrainingSchedule
from csrecon.sampling import generate_mask

FAST = [{"epochs": 300, "learning_rate": 1e-2, "batch_size": 32}]


def tone(n=32, k=2):
    t = np.arange(n) / n
    return np.column_stack([np.cos(2 * np.pi * (3 + j) * t + 0.2 * j) for j in range(k)])


def test_params_round_trip():
    est = CSReconstructor(mu=0.5, schedule=FAST, random_state=3)
    params = est.get_params()
    assert params["mu"] == 0.5 and params["random_state"] == 3 and params["schedule"] == FAST
    twin = clone(est)
    assert twin.get_params() == params
    assert twin.set_params(mu=0.1).mu == 0.1


def test_not_fitted():
    with pytest.raises(NotFittedError):
        CSReconstructor().transform(np.zeros((4, 1)))


def test_fit_with_nan_marks_unsampled():
    u = tone()
    mask = generate_mask(32, 2, 0.7, 1)
    X = np.where(mask.bits == 1, u, np.nan)
    est = CSReconstructor(mu=1e-3, schedule=FAST).fit(X)
    np.testing.assert_array_equal(est.mask_.bits, mask.bits)
    assert est.coef_.shape == (32, 2) and np.iscomplexobj(est.coef_)
    assert est.n_features_in_ == 2
    assert len(est.loss_history_) == 300
    assert est.transform(X).shape == (32, 2)


def test_explicit_mask_matches_nan_encoding():
    u = tone()
    mask = generate_mask(32, 2, 0.6, 2)
    a = CSReconstructor(schedule=FAST).fit(np.where(mask.bits == 1, u, np.nan))
    b = CSReconstructor(schedule=FAST).fit(u, mask=mask.bits)
    np.testing.assert_array_equal(a.coef_real_, b.coef_real_)


def test_full_sampling_reconstructs():
    u = tone()
    est = CSReconstructor(mu=1e-4, schedule=[{"epochs": 1000, "learning_rate": 1e-2, "batch_size": 32}])
    rec = est.fit_transform(u)
    assert np.all(est.reconstruction_error(u) < 0.01)
    assert est.score(u) > -0.01
    np.testing.assert_array_equal(rec, est.reconstruction_)
    assert np.abs(est.imag_residual_).max() < 0.01


def test_objective_and_spectrum():
    u = tone()
    est = CSReconstructor(schedule=FAST).fit(u)
    assert est.objective() == pytest.approx(est.objective(1.0, 1.0))
    assert est.spectrum().shape == (17, 2)


def test_transform_shape_check():
    est = CSReconstructor(schedule=FAST).fit(tone())
    with pytest.raises(ValueError):
        est.transform(np.zeros((10, 2)))


def test_input_validation():
    with pytest.raises(ValueError, match="infinity"):
        CSReconstructor(schedule=FAST).fit(np.array([[1.0, np.inf], [0.0, 1.0]]))
    with pytest.raises(ShapeError):
        CSReconstructor(schedule=FAST).fit(np.zeros((4, 2)), mask=np.ones((4, 1)))
    with pytest.raises(ParameterError):
        CSReconstructor(schedule="nonsense").fit(np.zeros((4, 1)))


def test_schedule_forms_are_equivalent():
    u = tone(16, 1)
    sched = TrainingSchedule.constant(20, 1e-2, 8)
    a = CSReconstructor(schedule=sched).fit(u)
    b = CSReconstructor(schedule=sched.to_list()).fit(u)
    np.testing.assert_array_equal(a.coef_real_, b.coef_real_)


def test_warm_start():
    u = tone()
    first = CSReconstructor(schedule=FAST).fit(u)
    again = CSReconstructor(schedule=[{"epochs": 1, "learning_rate": 1e-6, "batch_size": 32}]).fit(u, init=first.state_)
    assert np.abs(again.coef_real_ - first.coef_real_).max() < 1e-5
