import math

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.model_selection import cross_val_score

from geoflow import GrowthRateEstimator, SlopeRegressor


def test_growth_rate_estimator_fit_predict():
    est = GrowthRateEstimator(quantity="hcrit", horizons=range(1, 9))
    assert est.fit("tree(2)") is est
    assert est.n_horizons_ == 8
    assert est.slope_ == pytest.approx(est.report_.slope)
    lo, hi = est.bracket_
    assert lo <= est.slope_ <= hi
    pred = est.predict([8, 9])
    assert pred[0] == pytest.approx(math.log(13121))
    assert pred[1] - pred[0] == pytest.approx(est.slope_)


def test_growth_rate_estimator_params_round_trip():
    est = GrowthRateEstimator(quantity="md", a=1, options={"C": ["a1"]})
    again = clone(est)
    assert again.get_params() == est.get_params()
    again.set_params(quantity="sft", horizons=[1])
    assert again.fit("wedge(2)").slope_ == pytest.approx(math.log(3))


def test_growth_rate_estimator_errors():
    with pytest.raises(NotFittedError):
        GrowthRateEstimator().predict([1])
    with pytest.raises(ValueError):
        GrowthRateEstimator(quantity="volume").fit("tree(2)")
    with pytest.raises(ValueError):
        GrowthRateEstimator(a=-1).fit("tree(2)")


def test_slope_regressor_linear():
    T = np.arange(1, 10).reshape(-1, 1)
    y = 2.0 * 3.0 ** T[:, 0]
    m = SlopeRegressor().fit(T, y)
    assert m.slope_ == pytest.approx(math.log(3)) and m.intercept_ == pytest.approx(math.log(2))
    assert m.predict([[10]])[0] == pytest.approx(2 * 3.0 ** 10)
    assert m.score(T, y) == pytest.approx(1.0)


def test_slope_regressor_loglinear_and_cv():
    T = np.arange(2, 16).reshape(-1, 1)
    y = T[:, 0] ** 2 * 2.0 ** T[:, 0]
    m = SlopeRegressor(model="loglinear").fit(T, y)
    assert m.slope_ == pytest.approx(math.log(2), abs=1e-9) and m.beta_ == pytest.approx(2, abs=1e-9)
    scores = cross_val_score(SlopeRegressor(model="loglinear"), T, y, cv=2)
    assert np.all(scores > 0.99)


def test_slope_regressor_validation():
    with pytest.raises(ValueError):
        SlopeRegressor(model="cubic").fit([[1], [2]], [1, 2])
    with pytest.raises(ValueError):
        SlopeRegressor().fit([[1], [2]], [1, 0])
    with pytest.raises(ValueError):
        SlopeRegressor().fit([[1, 2], [2, 3]], [1, 2])
    with pytest.raises(NotFittedError):
        SlopeRegressor().predict([[1]])
