"""Group-invariant VMF mixture and its EM maximum-likelihood estimator.

A density on S^3 is invariant under a finite group exactly when it is
the equal-weight average of its translates. Applied to the VMF this
gives a mixture whose components share one concentration and whose
means form the orbit of a single mean direction. All arithmetic here
uses the lifted group (see :meth:`SymmetryGroup.lift`), the exact
closure of the table under quaternion multiplication, because a table
closed only up to sign would not make the mixture invariant.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from . import orient, vmf
from ._validation import check_quaternions
from .exceptions import NonFiniteLikelihood
from .symgrp import SymmetryGroup, canonical_representative, map_to_fz, resolve_group
from .vmf import VmfParams

INIT_STRATEGIES = ("fz_ml", "random")


@dataclass(frozen=True)
class GInvariantVmf:
    """Equal-weight VMF mixture over the orbit of ``params.mu``.

    ``group`` may also be a built-in name or a CSV path.
    """

    group: SymmetryGroup
    params: VmfParams

    def __post_init__(self):
        object.__setattr__(self, "group", resolve_group(self.group))

    @property
    def operators(self):
        return self.group.lift()

    @property
    def component_means(self):
        return self.operators.apply(self.params.mu)


@dataclass(frozen=True)
class EmConfig:
    """Stopping rule and initialization for :func:`em_fit`.

    ``tol`` bounds the relative change of the total log-likelihood
    between iterations. ``init='random'`` runs ``n_init`` restarts from
    uniform means at ``kappa = init_kappa`` and keeps the best.

    Near ``kappa = 0`` the group-averaged scatter of any sample is
    ``n/4`` times the identity, so EM moves the concentration only at
    third order there and the stopping rule fires at once. Random starts
    therefore begin at a moderate concentration.
    """

    tol: float = 1e-8
    max_iter: int = 200
    init: str = "fz_ml"
    n_init: int = 1
    seed: object = None
    init_kappa: float = 10.0

    def __post_init__(self):
        if self.init not in INIT_STRATEGIES:
            raise ValueError(f"init must be one of {INIT_STRATEGIES}, got {self.init!r}")
        if self.tol < 0 or self.max_iter < 1 or self.n_init < 1:
            raise ValueError("tol must be >= 0, max_iter and n_init >= 1")
        if not self.init_kappa > 0:
            raise ValueError(f"init_kappa must be positive, got {self.init_kappa!r}")


@dataclass
class EmResult:
    params: VmfParams
    mean: np.ndarray
    log_likelihood_trace: list
    iterations: int
    converged: bool
    responsibilities: np.ndarray = field(repr=False)

    @property
    def log_likelihood(self):
        return self.log_likelihood_trace[-1]


def _as_batch(x):
    x = np.asarray(x, dtype=float)
    return x[None, :] if x.ndim == 1 else x, x.ndim == 1


def log_density_ginv(x, model):
    """Log density of the invariant mixture, summing over translated means."""
    X, single = _as_batch(x)
    kappa = model.params.kappa
    means = model.component_means
    logits = kappa * (X @ means.T)
    out = vmf.log_norm_const(kappa) - np.log(len(means)) + logsumexp(logits, axis=1)
    return out[0] if single else out


def log_density_ginv_translated(x, model):
    """Same density, averaging the base VMF over translates of ``x`` instead."""
    X, single = _as_batch(x)
    kappa = model.params.kappa
    ops = model.operators
    moved = ops.apply(X)  # (M, n, 4)
    logits = kappa * (moved @ model.params.mu)  # (M, n)
    out = vmf.log_norm_const(kappa) - np.log(len(ops)) + logsumexp(logits, axis=0)
    return out[0] if single else out


def sample_ginv(model, n, seed=None, return_components=False):
    """Draw from the mixture: a base VMF draw moved by a uniform group element."""
    rng = np.random.default_rng(seed)
    base = vmf.sample(model.params, n, rng)
    ops = model.operators
    which = rng.integers(len(ops), size=n)
    out = orient.quat_compose(ops.elements[which], base)
    return (out, which) if return_components else out


def e_step(X, ops, params):
    """Log responsibilities (n, M) and the total log-likelihood."""
    means = ops.apply(params.mu)
    logits = params.kappa * (X @ means.T)
    lse = logsumexp(logits, axis=1)
    loglik = len(X) * (vmf.log_norm_const(params.kappa) - np.log(len(ops))) + float(np.sum(lse))
    if not np.isfinite(loglik):
        raise NonFiniteLikelihood("log-likelihood is not finite; check the input samples")
    return logits - lse[:, None], loglik


def m_step(X, ops, resp):
    """Closed-form update from the responsibility-weighted resultant.

    The resultant is ``sum_i sum_m r_im Q_m^T x_i``; ``Q_m^T`` is left
    multiplication by the conjugate of ``g_m``.
    """
    weighted = resp.T @ X  # (M, 4)
    gamma = np.einsum("mji,mj->i", ops.matrices, weighted)
    return vmf.params_from_resultant(gamma, len(X))


def _run_em(X, ops, start, tol, max_iter):
    params = start
    log_resp, ll = e_step(X, ops, params)
    trace = [ll]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        params = m_step(X, ops, np.exp(log_resp))
        log_resp, ll = e_step(X, ops, params)
        prev = trace[-1]
        trace.append(ll)
        if abs(ll - prev) <= tol * max(abs(prev), 1e-300):
            converged = True
            break
    return params, trace, it, converged, np.exp(log_resp)


def em_fit(samples, group, config=None, start=None):
    """Fit the invariant mixture by expectation-maximization.

    Parameters
    ----------
    samples : array_like, shape (n, 4)
    group : SymmetryGroup or str
    config : EmConfig, optional
    start : VmfParams, optional
        Explicit starting point; overrides ``config.init``.

    Returns
    -------
    EmResult
        ``params`` holds the raw estimate; ``mean`` its orbit
        representative in the fundamental zone.

    Raises
    ------
    DegenerateResultant
        If an M-step resultant vanishes.
    NonFiniteLikelihood
        If the log-likelihood is not finite.
    """
    config = config or EmConfig()
    group = resolve_group(group)
    X = check_quaternions(samples, min_samples=2)
    ops = group.lift()
    if start is not None:
        starts = [start]
    elif config.init == "fz_ml":
        starts = [modified_ml_fit(X, group)]
    else:
        starts = _random_starts(config.n_init, config.seed, config.init_kappa)
    best = None
    for s in starts:
        run = _run_em(X, ops, s, config.tol, config.max_iter)
        if best is None or run[1][-1] > best[1][-1]:
            best = run
    params, trace, iterations, converged, resp = best
    return EmResult(
        params=params,
        mean=canonical_representative(params.mu, group),
        log_likelihood_trace=trace,
        iterations=iterations,
        converged=converged,
        responsibilities=resp,
    )


def _random_starts(n_init, seed, kappa):
    mus = orient.random_quaternions(n_init, seed)
    return [VmfParams(mu, kappa) for mu in mus]


def em_init(samples, group, strategy="fz_ml", n_init=1, seed=None, tol=1e-8, max_iter=200, init_kappa=10.0):
    """Starting point for EM.

    ``'fz_ml'`` returns the fundamental-zone ML fit. ``'random'`` runs EM
    from ``n_init`` uniform means at ``init_kappa`` and returns the
    parameters with the best final log-likelihood.
    """
    if strategy == "fz_ml":
        return modified_ml_fit(samples, group)
    if strategy == "random":
        cfg = EmConfig(tol=tol, max_iter=max_iter, init="random", n_init=n_init, seed=seed, init_kappa=init_kappa)
        return em_fit(samples, group, cfg).params
    raise ValueError(f"strategy must be one of {INIT_STRATEGIES}, got {strategy!r}")


def modified_ml_fit(samples, group):
    """Closed-form VMF fit after folding every sample into the fundamental zone."""
    X = check_quaternions(samples, min_samples=2)
    fz, _ = map_to_fz(X, resolve_group(group))
    return vmf.ml_estimate(fz)


def kde_ginv(samples, group, smoothing_kappa, x):
    """Group-invariant kernel density estimate with a VMF kernel.

    Each sample contributes the average of VMF kernels centred on its
    orbit, so the estimate integrates to one and is invariant under the
    group by construction.
    """
    if not smoothing_kappa > 0:
        raise ValueError(f"smoothing_kappa must be positive, got {smoothing_kappa!r}")
    S = check_quaternions(samples)
    ops = resolve_group(group).lift()
    centres = ops.apply(S).reshape(-1, 4)
    X, single = _as_batch(x)
    const = vmf.log_norm_const(smoothing_kappa) - np.log(len(centres))
    out = np.empty(len(X))
    chunk = max(1, 2_000_000 // len(centres))
    for lo in range(0, len(X), chunk):
        logits = smoothing_kappa * (X[lo : lo + chunk] @ centres.T)
        out[lo : lo + chunk] = const + logsumexp(logits, axis=1)
    out = np.exp(out)
    return out[0] if single else out
