"""Von Mises-Fisher distribution on S^3.

The normalizer and Bessel ratio are written for a general ambient
dimension ``p`` but the public functions fix ``p = 4``, the dimension of
the quaternion sphere.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln, ive

from . import orient
from ._validation import as_quaternion, check_kappa, check_quaternions
from .exceptions import DegenerateResultant, ResultantOutOfRange

P = 4
KAPPA_MAX = 1e5
RESULTANT_EPS = 1e-12
NEWTON_TOL = 1e-10
NEWTON_MAXITER = 100

LOG_UNIFORM = -np.log(2.0 * np.pi**2)  # log(1 / area(S^3))


@dataclass(frozen=True)
class VmfParams:
    """Mean direction and concentration of a VMF distribution.

    ``saturated`` is set when the concentration hit ``KAPPA_MAX``
    because the data were more concentrated than it can represent.
    """

    mu: np.ndarray
    kappa: float
    saturated: bool = False

    def __post_init__(self):
        object.__setattr__(self, "mu", as_quaternion(self.mu))
        object.__setattr__(self, "kappa", check_kappa(self.kappa, KAPPA_MAX))


def _log_bessel_i(nu, x):
    return np.log(ive(nu, x)) + x


def _log_norm_const(kappa, p):
    kappa = np.asarray(kappa, dtype=float)
    nu = p / 2.0 - 1.0
    small = kappa < 1e-6
    k = np.where(small, 1.0, kappa)
    out = nu * np.log(k) - (p / 2.0) * np.log(2 * np.pi) - _log_bessel_i(nu, k)
    # I_nu(k) ~ (k/2)^nu / Gamma(nu + 1) * (1 + k^2 / (4 (nu + 1)))
    limit = nu * np.log(2.0) + gammaln(nu + 1.0) - (p / 2.0) * np.log(2 * np.pi)
    series = limit - np.log1p(kappa**2 / (4.0 * (nu + 1.0)))
    return np.where(small, series, out)


def log_norm_const(kappa):
    """Log of the VMF normalizer ``c_4(kappa) = kappa / (4 pi^2 I_1(kappa))``.

    Evaluated with exponentially scaled Bessel functions so it stays
    finite up to ``KAPPA_MAX``; at ``kappa = 0`` it is the log density of
    the uniform distribution, ``-log(2 pi^2)``.
    """
    out = _log_norm_const(kappa, P)
    return float(out) if np.ndim(out) == 0 else out


def _bessel_ratio(u, p):
    u = np.asarray(u, dtype=float)
    nu = p / 2.0 - 1.0
    small = u < 1e-4
    big = np.where(small, 1.0, u)
    ratio = ive(nu + 1.0, big) / ive(nu, big)
    series = u / p * (1.0 - u**2 / (p * (p + 2.0)))
    return np.where(small, series, ratio)


def bessel_ratio_A(u):
    """``A_4(u) = I_2(u) / I_1(u)``, increasing from 0 towards 1."""
    out = _bessel_ratio(u, P)
    return float(out) if np.ndim(out) == 0 else out


def _bessel_ratio_deriv(u, a, p):
    # A'(u) = 1 - A^2 - (p - 1) A / u
    return 1.0 - a * a - (p - 1.0) * a / u


def bessel_ratio_A_inv(r, full_output=False):
    """Invert ``A_4`` by Newton iteration with a bisection safeguard.

    Parameters
    ----------
    r : float
        Target ratio in [0, 1).
    full_output : bool
        Also return whether the result saturated at ``KAPPA_MAX``.

    Returns
    -------
    kappa : float
    saturated : bool, only when ``full_output`` is true.

    Raises
    ------
    ResultantOutOfRange
        If ``r < 0`` or ``r >= 1``.
    """
    r = float(r)
    if not (0.0 <= r < 1.0):
        raise ResultantOutOfRange(f"mean resultant length {r!r} outside [0, 1)")
    kappa, saturated = _invert(r)
    return (kappa, saturated) if full_output else kappa


@lru_cache(maxsize=None)
def _a_at_max():
    return float(_bessel_ratio(KAPPA_MAX, P))


def _invert(r, p=P):
    if r == 0.0:
        return 0.0, False
    if r >= _a_at_max():
        return KAPPA_MAX, True
    lo, hi = 0.0, KAPPA_MAX
    u = min(r * (p - r * r) / (1.0 - r * r), KAPPA_MAX)
    for _ in range(NEWTON_MAXITER):
        a = float(_bessel_ratio(u, p))
        err = a - r
        if abs(err) <= NEWTON_TOL:
            return u, False
        if err > 0:
            hi = u
        else:
            lo = u
        step = err / _bessel_ratio_deriv(u, a, p)
        nxt = u - step
        if not (lo < nxt < hi):
            nxt = 0.5 * (lo + hi)
        u = nxt
    # bisection fallback; A is monotone so this always terminates
    for _ in range(400):
        u = 0.5 * (lo + hi)
        a = float(_bessel_ratio(u, p))
        if abs(a - r) <= NEWTON_TOL or hi - lo < 1e-14 * max(1.0, u):
            break
        if a > r:
            hi = u
        else:
            lo = u
    return u, False


def kappa_from_resultant(r):
    """Concentration for a mean resultant length, saturating at ``KAPPA_MAX``.

    Unlike :func:`bessel_ratio_A_inv`, lengths that round to 1 (or just
    above) are treated as perfectly concentrated instead of an error.
    """
    if r < 0:
        raise ResultantOutOfRange(f"mean resultant length {r!r} is negative")
    if r >= 1.0:
        return KAPPA_MAX, True
    return _invert(r)


def log_density(x, params):
    """``log c_4(kappa) + kappa <mu, x>`` for each row of ``x``."""
    x = np.asarray(x, dtype=float)
    return log_norm_const(params.kappa) + params.kappa * (x @ params.mu)


def ml_estimate(samples):
    """Closed-form maximum-likelihood fit of a single VMF.

    Raises
    ------
    DegenerateResultant
        If the resultant vector has length at most 1e-12.
    """
    X = check_quaternions(samples, min_samples=2)
    gamma = X.sum(axis=0)
    return params_from_resultant(gamma, len(X))


def params_from_resultant(gamma, n):
    """M-step shared by the closed-form and EM estimators."""
    norm = float(np.linalg.norm(gamma))
    if norm <= RESULTANT_EPS:
        raise DegenerateResultant(f"resultant length {norm:.3g} too small to define a mean")
    kappa, saturated = kappa_from_resultant(norm / n)
    return VmfParams(gamma / norm, kappa, saturated)


def _sample_cosines(kappa, n, rng, p=P):
    """Wood's rejection sampler for the component ``t = <mu, x>``."""
    dim = p - 1.0
    b = dim / (np.sqrt(4.0 * kappa**2 + dim**2) + 2.0 * kappa)
    x0 = (1.0 - b) / (1.0 + b)
    c = kappa * x0 + dim * np.log(1.0 - x0 * x0)
    out = np.empty(n)
    filled = 0
    while filled < n:
        m = max(2 * (n - filled), 16)
        z = rng.beta(dim / 2.0, dim / 2.0, size=m)
        w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z)
        u = rng.uniform(size=m)
        ok = kappa * w + dim * np.log(1.0 - x0 * w) - c >= np.log(u)
        w = w[ok][: n - filled]
        out[filled : filled + len(w)] = w
        filled += len(w)
    return out


def sample(params, n, seed=None):
    """Draw ``n`` samples from the VMF on S^3.

    The component along the mean comes from Wood's rejection sampler;
    the orthogonal part is uniform on the 2-sphere. Samples are rotated
    onto ``mu`` by left multiplication, which maps the identity to ``mu``.
    ``seed`` may be an int, None or a ``numpy.random.Generator``.
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    rng = np.random.default_rng(seed)
    t = _sample_cosines(params.kappa, n, rng)
    v = rng.standard_normal((n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    x = np.concatenate([t[:, None], np.sqrt(np.clip(1.0 - t * t, 0.0, None))[:, None] * v], axis=1)
    return orient.quat_compose(params.mu, x)
