"""scikit-learn style wrappers around the experiment runner and the slope fits."""
from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted, check_X_y, check_array

from .report import fit_loglinear, fit_slope
from .runner import QUANTITIES, ExperimentConfig, run_experiment
from .space import DEFAULT_MAX_VERTICES


class GrowthRateEstimator(BaseEstimator):
    """Estimate a growth rate of a space; ``fit`` takes an example name or a description file.

    After fitting, ``report_`` holds the full :class:`EntropyReport` and
    ``slope_``/``bracket_`` the fitted rate and its lower/upper fits.
    """

    def __init__(self, quantity="hcrit", horizons=None, r=None, a=2, R=None, seed=0,
                 budget=DEFAULT_MAX_VERTICES, options=None):
        self.quantity = quantity
        self.horizons = horizons
        self.r = r
        self.a = a
        self.R = R
        self.seed = seed
        self.budget = budget
        self.options = options

    def _config(self, space: str) -> ExperimentConfig:
        if self.quantity not in QUANTITIES:
            raise ValueError(f"unknown quantity {self.quantity!r}")
        cfg = ExperimentConfig(str(space), self.quantity, None if self.horizons is None else list(self.horizons),
                               self.r, self.a, self.R, self.seed, self.budget,
                               options=dict(self.options or {}))
        cfg.validate()
        return cfg

    def fit(self, X, y=None):
        self.report_ = run_experiment(self._config(X))
        self.slope_ = self.report_.slope
        self.bracket_ = (self.report_.slope_lo, self.report_.slope_hi)
        self.n_horizons_ = len(self.report_.horizons)
        return self

    def predict(self, horizons):
        """Log-count predicted by the fitted slope through the last observed count."""
        check_is_fitted(self, "report_")
        T = np.asarray(check_array(np.asarray(horizons, dtype=float).reshape(-1, 1))).ravel()
        rep = self.report_
        last = rep.log_counts("lo")[-1]
        return last + self.slope_ * (T - float(rep.horizons[-1]))


class SlopeRegressor(RegressorMixin, BaseEstimator):
    """Fit ``log N(T) = h T (+ beta log T) + c`` to horizons ``X`` and counts ``y``."""

    def __init__(self, model="linear"):
        self.model = model

    def fit(self, X, y):
        if self.model not in ("linear", "loglinear"):
            raise ValueError("model must be 'linear' or 'loglinear'")
        X, y = check_X_y(X, y, ensure_2d=True)
        if X.shape[1] != 1:
            raise ValueError("expected a single column of horizons")
        if np.any(y <= 0):
            raise ValueError("counts must be positive")
        T, logs = X[:, 0], np.log(y)
        if self.model == "loglinear" and len(T) >= 3 and np.all(T > 0):
            self.slope_, self.beta_, self.residual_ = fit_loglinear(T, logs)
        else:
            self.slope_, self.residual_ = fit_slope(T, logs)
            self.beta_ = 0.0
        self.intercept_ = float(np.mean(logs - self.slope_ * T - self.beta_ * self._logT(T)))
        return self

    @staticmethod
    def _logT(T):
        return np.log(np.where(T > 0, T, 1.0))

    def predict(self, X):
        check_is_fitted(self, "slope_")
        X = check_array(X)
        T = X[:, 0]
        return np.exp(self.slope_ * T + self.beta_ * self._logT(T) + self.intercept_)

    def score(self, X, y, sample_weight=None):
        """``R^2`` on log counts."""
        check_is_fitted(self, "slope_")
        pred = np.log(self.predict(X))
        logs = np.log(np.asarray(y, dtype=float))
        ss_res = float(np.sum((logs - pred) ** 2))
        ss_tot = float(np.sum((logs - logs.mean()) ** 2))
        return 1.0 - ss_res / ss_tot if ss_tot > 0 else (1.0 if ss_res == 0 else -math.inf)
