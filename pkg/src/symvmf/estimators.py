"""scikit-learn compatible estimators.

Each estimator takes samples as an (n, 4) array of unit quaternions and
follows the usual conventions: constructor arguments are stored
unchanged, ``fit`` returns ``self``, and fitted attributes end in ``_``.
"""

import numpy as np
from sklearn.base import BaseEstimator, DensityMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import ginv, vmf
from ._validation import check_quaternions
from .symgrp import canonical_representative, map_to_fz, resolve_group


class VonMisesFisher(DensityMixin, BaseEstimator):
    """Single VMF fitted in closed form, ignoring any symmetry."""

    def fit(self, X, y=None):
        X = check_quaternions(X, min_samples=2)
        params = vmf.ml_estimate(X)
        self.params_ = params
        self.mean_ = params.mu
        self.kappa_ = params.kappa
        self.saturated_ = params.saturated
        self.n_features_in_ = 4
        return self

    def score_samples(self, X):
        check_is_fitted(self)
        return vmf.log_density(check_quaternions(X), self.params_)

    def score(self, X, y=None):
        return float(np.mean(self.score_samples(X)))

    def sample(self, n_samples=1, random_state=None):
        check_is_fitted(self)
        return vmf.sample(self.params_, n_samples, random_state)


class FundamentalZoneVMF(VonMisesFisher):
    """Closed-form VMF fitted after folding samples into the fundamental zone.

    Parameters
    ----------
    group : str, path or SymmetryGroup, default='cubic_m3m'
    """

    def __init__(self, group="cubic_m3m"):
        self.group = group

    def fit(self, X, y=None):
        X = check_quaternions(X, min_samples=2)
        self.group_ = resolve_group(self.group)
        params = ginv.modified_ml_fit(X, self.group_)
        self.params_ = params
        self.mean_ = params.mu
        self.kappa_ = params.kappa
        self.saturated_ = params.saturated
        self.n_features_in_ = 4
        return self

    def score_samples(self, X):
        check_is_fitted(self)
        fz, _ = map_to_fz(check_quaternions(X), self.group_)
        return vmf.log_density(fz, self.params_)


class GInvariantVMF(DensityMixin, BaseEstimator):
    """Group-invariant VMF mixture fitted by EM.

    Parameters
    ----------
    group : str, path or SymmetryGroup, default='cubic_m3m'
        Built-in name, CSV path, or group object.
    tol : float, default=1e-8
        Relative log-likelihood change that stops the iteration.
    max_iter : int, default=200
    init : {'fz_ml', 'random'}, default='fz_ml'
    n_init : int, default=1
        Restarts when ``init='random'``.
    init_kappa : float, default=10.0
        Starting concentration of random restarts.
    random_state : int, Generator or None

    Attributes
    ----------
    mean_ : ndarray of shape (4,)
        Estimated mean, canonicalized into the fundamental zone.
    mean_raw_ : ndarray of shape (4,)
        The orbit member EM converged to.
    kappa_ : float
    n_iter_ : int
    converged_ : bool
    log_likelihood_trace_ : list of float
    """

    def __init__(self, group="cubic_m3m", tol=1e-8, max_iter=200, init="fz_ml", n_init=1, init_kappa=10.0,
                 random_state=None):
        self.group = group
        self.tol = tol
        self.max_iter = max_iter
        self.init = init
        self.n_init = n_init
        self.init_kappa = init_kappa
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_quaternions(X, min_samples=2)
        self.group_ = resolve_group(self.group)
        config = ginv.EmConfig(self.tol, self.max_iter, self.init, self.n_init, self.random_state, self.init_kappa)
        result = ginv.em_fit(X, self.group_, config)
        self.result_ = result
        self.params_ = result.params
        self.mean_ = result.mean
        self.mean_raw_ = result.params.mu
        self.kappa_ = result.params.kappa
        self.saturated_ = result.params.saturated
        self.n_iter_ = result.iterations
        self.converged_ = result.converged
        self.log_likelihood_trace_ = result.log_likelihood_trace
        self.n_features_in_ = 4
        return self

    @property
    def model_(self):
        check_is_fitted(self)
        return ginv.GInvariantVmf(self.group_, self.params_)

    def score_samples(self, X):
        return ginv.log_density_ginv(check_quaternions(X), self.model_)

    def score(self, X, y=None):
        return float(np.mean(self.score_samples(X)))

    def predict_proba(self, X):
        """Posterior probability of each mixture component."""
        log_resp, _ = ginv.e_step(check_quaternions(X), self.model_.operators, self.params_)
        return np.exp(log_resp)

    def predict(self, X):
        return np.argmax(self.predict_proba(X), axis=1)

    def sample(self, n_samples=1, random_state=None):
        """Draw samples; returns ``(X, component_index)``."""
        return ginv.sample_ginv(self.model_, n_samples, random_state, return_components=True)


class GInvariantKDE(DensityMixin, BaseEstimator):
    """Kernel density estimate averaged over the group orbit of each sample."""

    def __init__(self, group="cubic_m3m", smoothing_kappa=20.0):
        self.group = group
        self.smoothing_kappa = smoothing_kappa

    def fit(self, X, y=None):
        self.samples_ = check_quaternions(X)
        self.group_ = resolve_group(self.group)
        self.n_features_in_ = 4
        return self

    def score_samples(self, X):
        check_is_fitted(self)
        dens = ginv.kde_ginv(self.samples_, self.group_, self.smoothing_kappa, check_quaternions(X))
        with np.errstate(divide="ignore"):
            return np.log(dens)


class FundamentalZoneMapper(TransformerMixin, BaseEstimator):
    """Stateless transformer folding orientations into the fundamental zone."""

    def __init__(self, group="cubic_m3m"):
        self.group = group

    def fit(self, X=None, y=None):
        self.group_ = resolve_group(self.group)
        self.n_features_in_ = 4
        return self

    def transform(self, X):
        check_is_fitted(self)
        fz, _ = map_to_fz(check_quaternions(X), self.group_)
        return fz

    def canonical_mean(self, mu):
        check_is_fitted(self)
        return canonical_representative(mu, self.group_)
