"""Orientation representations and quaternion algebra.

Quaternions are stored as float arrays whose last axis has length 4,
ordered ``(q1, q2, q3, q4) = (w, x, y, z)``. Every function broadcasts
over leading axes, so a single quaternion has shape ``(4,)`` and a
batch has shape ``(n, 4)``.

Euler angles follow the Bunge ZXZ convention: a rotation by ``alpha``
about z, then ``beta`` about the new x, then ``gamma`` about the new z.
Conversions return the sign representative with ``q1 >= 0``; nothing in
this module flips signs of quaternions passed to the algebraic helpers.
"""

import numpy as np

from .exceptions import AngleOutOfRange, NearPiRotation

TWO_PI = 2.0 * np.pi

# Rodrigues vectors diverge as q1 -> 0.
RODRIGUES_EPS = 1e-9
# sin(beta/2) or cos(beta/2) below this is treated as gimbal lock.
_GIMBAL_EPS = 1e-12

IDENTITY = np.array([1.0, 0.0, 0.0, 0.0])

__all__ = [
    "IDENTITY",
    "normalize",
    "positive",
    "quat_inverse",
    "quat_compose",
    "left_matrix",
    "euler_to_quat",
    "quat_to_euler",
    "rodrigues_to_quat",
    "quat_to_rodrigues",
    "axis_angle",
    "rotation_angle_between",
    "random_quaternions",
    "quaternions_from_unit_cube",
]


def normalize(q):
    q = np.asarray(q, dtype=float)
    return q / np.linalg.norm(q, axis=-1, keepdims=True)


def positive(q):
    """Return the sign representative of each quaternion with ``q1 >= 0``.

    Quaternions with ``q1 == 0`` are made positive on their first nonzero
    component, so a 180 degree rotation also has a unique representative.
    """
    q = np.array(q, dtype=float, copy=True)
    flat = q.reshape(-1, 4)
    nonzero = np.abs(flat) > 1e-12
    first = np.argmax(nonzero, axis=1)
    lead = flat[np.arange(flat.shape[0]), first]
    flat[lead < 0] *= -1.0
    return flat.reshape(q.shape)


def quat_inverse(q):
    """Conjugate, which is the inverse for unit quaternions."""
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def quat_compose(a, b):
    """Hamilton product ``a * b``: apply ``b`` first, then ``a``.

    The product of unit quaternions is renormalized so that rounding
    does not accumulate when compositions are chained.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    a1, a2, a3, a4 = np.moveaxis(a, -1, 0)
    b1, b2, b3, b4 = np.moveaxis(b, -1, 0)
    out = np.stack(
        [
            a1 * b1 - a2 * b2 - a3 * b3 - a4 * b4,
            a1 * b2 + a2 * b1 + a3 * b4 - a4 * b3,
            a1 * b3 - a2 * b4 + a3 * b1 + a4 * b2,
            a1 * b4 + a2 * b3 - a3 * b2 + a4 * b1,
        ],
        axis=-1,
    )
    return normalize(out)


def left_matrix(g):
    """4x4 orthogonal matrix ``L`` with ``L @ x == quat_compose(g, x)``."""
    w, x, y, z = np.moveaxis(np.asarray(g, dtype=float), -1, 0)
    rows = [
        [w, -x, -y, -z],
        [x, w, -z, y],
        [y, z, w, -x],
        [z, -y, x, w],
    ]
    return np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)


def euler_to_quat(euler):
    """Convert Bunge ZXZ Euler angles (radians) to unit quaternions.

    Parameters
    ----------
    euler : array_like, shape (..., 3)
        ``(alpha, beta, gamma)`` with alpha, gamma in [0, 2pi] and beta
        in [0, pi].

    Returns
    -------
    ndarray, shape (..., 4)
        Unit quaternions with ``q1 >= 0``.

    Raises
    ------
    AngleOutOfRange
        If any angle falls outside its interval. Angles are never
        clamped or wrapped.
    """
    e = np.asarray(euler, dtype=float)
    if e.shape[-1] != 3:
        raise ValueError(f"expected Euler triples, got shape {e.shape}")
    alpha, beta, gamma = np.moveaxis(e, -1, 0)
    if not np.all(np.isfinite(e)):
        raise AngleOutOfRange("Euler angles must be finite")
    for name, val, hi in (("alpha", alpha, TWO_PI), ("beta", beta, np.pi), ("gamma", gamma, TWO_PI)):
        if np.any((val < 0) | (val > hi)):
            raise AngleOutOfRange(f"{name} outside [0, {hi:.6f}]")
    cb, sb = np.cos(beta / 2), np.sin(beta / 2)
    s, d = (alpha + gamma) / 2, (alpha - gamma) / 2
    q = np.stack([cb * np.cos(s), sb * np.cos(d), sb * np.sin(d), cb * np.sin(s)], axis=-1)
    return positive(normalize(q))


def quat_to_euler(q):
    """Convert unit quaternions to Bunge ZXZ Euler angles.

    At ``beta`` in {0, pi} only ``alpha +/- gamma`` is defined; the
    returned triple puts the whole rotation in ``alpha`` with
    ``gamma = 0``.
    """
    q = normalize(q)
    q1, q2, q3, q4 = np.moveaxis(q, -1, 0)
    c = np.hypot(q1, q4)  # cos(beta/2)
    s = np.hypot(q2, q3)  # sin(beta/2)
    beta = 2.0 * np.arctan2(s, c)
    half_sum = np.arctan2(q4, q1)
    half_diff = np.arctan2(q3, q2)
    alpha = half_sum + half_diff
    gamma = half_sum - half_diff
    at_zero = s < _GIMBAL_EPS
    at_pi = c < _GIMBAL_EPS
    alpha = np.where(at_zero, 2.0 * half_sum, np.where(at_pi, 2.0 * half_diff, alpha))
    gamma = np.where(at_zero | at_pi, 0.0, gamma)
    beta = np.where(at_zero, 0.0, np.where(at_pi, np.pi, beta))
    alpha = np.mod(alpha, TWO_PI)
    gamma = np.mod(gamma, TWO_PI)
    # np.mod can return exactly 2pi for tiny negative inputs
    alpha = np.where(alpha >= TWO_PI, 0.0, alpha)
    gamma = np.where(gamma >= TWO_PI, 0.0, gamma)
    return np.stack([alpha, beta, gamma], axis=-1)


def rodrigues_to_quat(d):
    """Rodrigues vector ``v tan(w/2)`` to quaternion, always with q1 > 0."""
    d = np.asarray(d, dtype=float)
    if d.shape[-1] != 3:
        raise ValueError(f"expected Rodrigues 3-vectors, got shape {d.shape}")
    if not np.all(np.isfinite(d)):
        raise ValueError("Rodrigues vector must be finite")
    scale = 1.0 / np.sqrt(1.0 + np.sum(d * d, axis=-1, keepdims=True))
    return np.concatenate([scale, d * scale], axis=-1)


def quat_to_rodrigues(q):
    """Quaternion to Rodrigues vector ``q[1:] / q1``.

    Raises
    ------
    NearPiRotation
        If ``|q1| <= 1e-9`` for any input.
    """
    q = np.asarray(q, dtype=float)
    q1 = q[..., :1]
    if np.any(np.abs(q1) <= RODRIGUES_EPS):
        raise NearPiRotation("rotation angle too close to pi for a Rodrigues vector")
    return q[..., 1:] / q1


def axis_angle(q):
    """Rotation angle in [0, pi] and unit axis of each quaternion.

    The axis of an identity rotation is returned as zeros.
    """
    q = positive(q)
    angle = 2.0 * np.arccos(np.clip(q[..., 0], -1.0, 1.0))
    v = q[..., 1:]
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    axis = np.divide(v, n, out=np.zeros_like(v), where=n > 1e-15)
    return angle, axis


def rotation_angle_between(a, b):
    """Rotation angle 2 arccos |<a, b>| separating two orientations."""
    dot = np.abs(np.sum(np.asarray(a, float) * np.asarray(b, float), axis=-1))
    return 2.0 * np.arccos(np.clip(dot, 0.0, 1.0))


def quaternions_from_unit_cube(u):
    """Map points of [0, 1)^3 onto S^3, preserving the uniform measure.

    Shoemake's subgroup algorithm. Feeding uniform or low-discrepancy
    points gives uniformly distributed quaternions.
    """
    u = np.asarray(u, dtype=float)
    u1, u2, u3 = np.moveaxis(u, -1, 0)
    r1, r2 = np.sqrt(1.0 - u1), np.sqrt(u1)
    t2, t3 = TWO_PI * u2, TWO_PI * u3
    return np.stack([r2 * np.cos(t3), r1 * np.sin(t2), r1 * np.cos(t2), r2 * np.sin(t3)], axis=-1)


def random_quaternions(n, random_state=None):
    """Draw ``n`` uniformly distributed unit quaternions (no sign folding)."""
    rng = np.random.default_rng(random_state)
    return normalize(rng.standard_normal((n, 4)))
