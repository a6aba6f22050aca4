"""Input validation helpers shared by the functional and estimator APIs."""

import numbers

import numpy as np
from sklearn.utils.validation import check_array

# Unit-norm slack accepted on input before renormalization (CSV round-off).
NORM_TOL = 1e-6


def as_quaternion(q, *, normalize=True):
    """Return a single quaternion as a float array of shape (4,)."""
    q = np.asarray(q, dtype=float)
    if q.shape != (4,):
        raise ValueError(f"expected a quaternion of shape (4,), got {q.shape}")
    if not np.all(np.isfinite(q)):
        raise ValueError("quaternion has non-finite components")
    if normalize:
        norm = np.linalg.norm(q)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"quaternion is not unit length (norm={norm:.8g})")
        q = q / norm
    return q


def check_quaternions(X, *, min_samples=1, normalize=True):
    """Validate an (n, 4) array of unit quaternions.

    Rows are renormalized so that the unit-norm invariant holds to
    machine precision. Rows further than ``NORM_TOL`` from unit length
    are rejected rather than silently projected.
    """
    X = check_array(X, dtype=np.float64, ensure_min_samples=min_samples)
    if X.shape[1] != 4:
        raise ValueError(f"expected quaternions with 4 columns, got {X.shape[1]}")
    if normalize:
        norms = np.linalg.norm(X, axis=1)
        bad = np.flatnonzero(np.abs(norms - 1.0) > NORM_TOL)
        if bad.size:
            raise ValueError(
                f"row {bad[0]} is not a unit quaternion (norm={norms[bad[0]]:.8g})"
            )
        X = X / norms[:, None]
    return X


def check_kappa(kappa, kappa_max, *, name="kappa"):
    if not isinstance(kappa, numbers.Real) or not np.isfinite(kappa):
        raise ValueError(f"{name} must be a finite real number, got {kappa!r}")
    if kappa < 0 or kappa > kappa_max:
        raise ValueError(f"{name} must lie in [0, {kappa_max:g}], got {kappa!r}")
    return float(kappa)
