"""Finite rotation groups acting on S^3 and their fundamental zones.

A group is a table of unit quaternions acting on orientations by left
multiplication. Because ``q`` and ``-q`` are the same rotation, the
table is only required to be closed up to sign. :meth:`SymmetryGroup.lift`
returns the exact multiplicative closure, which is what a density on
S^3 must be averaged over to be invariant.
"""

import csv
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import orient
from .exceptions import GroupAxiomViolation, NearPiRotation, NoZoneFound, ParseError, UnknownGroup

AXIOM_TOL = 1e-9
FZ_TOL = 1e-12

_R2 = np.sqrt(0.5)

# Proper rotations of the cube (point group 432, the rotation part of m-3m).
_CUBIC = np.array(
    [
        [1, 0, 0, 0],
        # face axes, +/-90 degrees
        [_R2, _R2, 0, 0],
        [_R2, -_R2, 0, 0],
        [_R2, 0, _R2, 0],
        [_R2, 0, -_R2, 0],
        [_R2, 0, 0, _R2],
        [_R2, 0, 0, -_R2],
        # face axes, 180 degrees
        [0, 1, 0, 0],
        [0, 0, 1, 0],
        [0, 0, 0, 1],
        # body diagonals, +/-120 degrees
        [0.5, 0.5, 0.5, 0.5],
        [0.5, -0.5, -0.5, -0.5],
        [0.5, 0.5, 0.5, -0.5],
        [0.5, -0.5, -0.5, 0.5],
        [0.5, 0.5, -0.5, 0.5],
        [0.5, -0.5, 0.5, -0.5],
        [0.5, -0.5, 0.5, 0.5],
        [0.5, 0.5, -0.5, -0.5],
        # edge axes, 180 degrees
        [0, _R2, _R2, 0],
        [0, _R2, -_R2, 0],
        [0, _R2, 0, _R2],
        [0, _R2, 0, -_R2],
        [0, 0, _R2, _R2],
        [0, 0, _R2, -_R2],
    ],
    dtype=float,
)

BUILTIN_GROUPS = ("trivial", "cubic_m3m")


@dataclass(frozen=True, eq=False)
class SymmetryGroup:
    """Immutable table of quaternion operators.

    Parameters
    ----------
    name : str
    elements : ndarray, shape (M, 4)
        Element 0 is the identity.
    antipodal_extended : bool
        True when the table holds both ``g`` and ``-g`` for every rotation.
    """

    name: str
    elements: np.ndarray
    antipodal_extended: bool = False
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        elements = np.array(self.elements, dtype=float)
        elements.setflags(write=False)
        object.__setattr__(self, "elements", elements)

    def __len__(self):
        return len(self.elements)

    @property
    def order(self):
        return len(self.elements)

    @cached_property
    def matrices(self):
        """Left-multiplication matrices, shape (M, 4, 4)."""
        return orient.left_matrix(self.elements)

    def check(self):
        """Verify identity, closure, inverses and distinctness exhaustively.

        Raises
        ------
        GroupAxiomViolation
            With ``pair`` set to the offending index pair (or index).
        """
        g = self.elements
        if len(g) == 0:
            raise GroupAxiomViolation("group has no elements")
        if np.max(np.abs(g[0] - orient.IDENTITY)) > AXIOM_TOL:
            raise GroupAxiomViolation("element 0 is not the identity", pair=(0,))
        products = orient.quat_compose(g[:, None, :], g[None, :, :])
        # |<g_i g_j, g_k>| == 1 iff the product equals +/- g_k
        match = np.abs(np.einsum("ijd,kd->ijk", products, g)) >= 1.0 - AXIOM_TOL
        closed = match.any(axis=2)
        if not closed.all():
            i, j = np.argwhere(~closed)[0]
            raise GroupAxiomViolation(
                f"{self.name}: product of elements {i} and {j} is not in the group", pair=(int(i), int(j))
            )
        has_inverse = (np.abs(products[..., 0]) >= 1.0 - AXIOM_TOL).any(axis=1)
        if not has_inverse.all():
            i = int(np.flatnonzero(~has_inverse)[0])
            raise GroupAxiomViolation(f"{self.name}: element {i} has no inverse", pair=(i,))
        if not self.antipodal_extended:
            same = np.abs(g @ g.T) >= np.cos(0.5e-6)
            np.fill_diagonal(same, False)
            if same.any():
                i, j = np.argwhere(same)[0]
                raise GroupAxiomViolation(
                    f"{self.name}: elements {i} and {j} are the same rotation", pair=(int(i), int(j))
                )
        return self

    def lift(self):
        """Exact closure of the table under quaternion multiplication.

        For a table that is closed only up to sign (the 24 cubic
        rotations, say) this is the antipodal extension; a table that is
        already closed (the trivial group) is returned unchanged.
        """
        if "lift" in self._cache:
            return self._cache["lift"]
        g = self.elements
        products = orient.quat_compose(g[:, None, :], g[None, :, :]).reshape(-1, 4)
        exact = (products @ g.T >= 1.0 - AXIOM_TOL).any(axis=1)
        if exact.all():
            lifted = self
        else:
            lifted = SymmetryGroup(self.name, np.concatenate([g, -g]), antipodal_extended=True)
        self._cache["lift"] = lifted
        return lifted

    @cached_property
    def contains_negation(self):
        return bool((self.elements @ -orient.IDENTITY >= 1.0 - AXIOM_TOL).any())

    @cached_property
    def _fz_planes(self):
        # inside means |r . l_i| <= tan(w_i / 4) for every non-identity rotation.
        angle, axis = orient.axis_angle(self.elements)
        keep = angle > 1e-9
        return axis[keep], np.tan(angle[keep] / 4.0)

    def apply(self, x, index=None):
        """Left-multiply ``x`` by one element, or by all of them.

        With ``index=None`` the result has shape ``(M,) + x.shape``.
        """
        x = np.asarray(x, dtype=float)
        if index is not None:
            return apply(self.elements[index], x)
        return orient.quat_compose(self.elements.reshape((-1,) + (1,) * (x.ndim - 1) + (4,)), x)


def builtin_group(name, antipodal=False):
    """Construct a built-in group by name.

    Parameters
    ----------
    name : {'trivial', 'cubic_m3m'}
    antipodal : bool
        Return ``{+g, -g}`` for every element (48 elements for the cube).
    """
    if name == "trivial":
        elements = orient.IDENTITY[None, :]
    elif name == "cubic_m3m":
        elements = _CUBIC
    else:
        raise UnknownGroup(f"unknown group {name!r}; expected one of {BUILTIN_GROUPS}")
    if antipodal:
        elements = np.concatenate([elements, -elements])
    return SymmetryGroup(name, elements, antipodal_extended=antipodal).check()


def load_group(path):
    """Read a group table from CSV rows ``q1,q2,q3,q4`` (header optional).

    Rows are normalized; the identity row, wherever it appears, is moved
    to the front. The table is verified with :meth:`SymmetryGroup.check`.
    """
    rows = []
    with open(path, newline="") as fh:
        for lineno, rec in enumerate(csv.reader(fh), start=1):
            if not rec or all(not c.strip() for c in rec):
                continue
            try:
                vals = [float(c) for c in rec]
            except ValueError:
                if lineno == 1 and not rows:
                    continue  # header
                raise ParseError(f"non-numeric field in {rec!r}", line=lineno, path=path) from None
            if len(vals) != 4:
                raise ParseError(f"expected 4 fields, got {len(vals)}", line=lineno, path=path)
            try:
                rows.append(_as_unit(vals))
            except ValueError as exc:
                raise ParseError(str(exc), line=lineno, path=path) from None
    if not rows:
        raise ParseError("no quaternion rows", path=path)
    elements = np.array(rows)
    ident = np.flatnonzero(np.abs(elements @ orient.IDENTITY) >= 1.0 - AXIOM_TOL)
    if ident.size == 0:
        raise GroupAxiomViolation(f"{path}: table has no identity element")
    k = ident[0]
    elements[k] = orient.IDENTITY
    order = [k] + [i for i in range(len(elements)) if i != k]
    elements = elements[order]
    # a table holding both g and -g for some rotation is treated as extended
    dots = np.abs(elements @ elements.T)
    np.fill_diagonal(dots, 0.0)
    extended = bool((dots >= np.cos(0.5e-6)).any())
    name = str(path)
    return SymmetryGroup(name, elements, antipodal_extended=extended).check()


def _as_unit(vals):
    q = np.asarray(vals, dtype=float)
    if not np.all(np.isfinite(q)):
        raise ValueError("non-finite component")
    n = np.linalg.norm(q)
    if abs(n - 1.0) > 1e-6:
        raise ValueError(f"row is not a unit quaternion (norm={n:.8g})")
    return q / n


def resolve_group(spec, antipodal=False):
    """Accept a group, a built-in name or a CSV path."""
    if isinstance(spec, SymmetryGroup):
        return spec
    if spec in BUILTIN_GROUPS:
        return builtin_group(spec, antipodal=antipodal)
    return load_group(spec)


def apply(g, x):
    """Left action ``g * x`` of a single operator on quaternion(s) ``x``."""
    return orient.quat_compose(np.asarray(g, dtype=float), np.asarray(x, dtype=float))


def _fz_ratios(q):
    q = np.asarray(q, dtype=float)
    q1 = q[..., 0]
    if np.any(np.abs(q1) <= orient.RODRIGUES_EPS):
        raise NearPiRotation("rotation angle too close to pi for fundamental-zone test")
    return q[..., 1:] / q1[..., None]


def _cubic_slack(r):
    """Smallest margin over the 13 cubic inequalities (>= 0 means inside)."""
    r2, r3, r4 = np.moveaxis(np.abs(r), -1, 0)
    a, b, c = np.moveaxis(r, -1, 0)
    t = np.sqrt(2.0) - 1.0
    s = np.sqrt(2.0)
    margins = [
        t - r2,
        t - r3,
        t - r4,
        s - np.abs(a - b),
        s - np.abs(a + b),
        s - np.abs(a - c),
        s - np.abs(a + c),
        s - np.abs(b - c),
        s - np.abs(b + c),
        1.0 - np.abs(a + b + c),
        1.0 - np.abs(a - b + c),
        1.0 - np.abs(a + b - c),
        1.0 - np.abs(a - b - c),
    ]
    return np.min(np.stack(margins, axis=-1), axis=-1)


def in_fundamental_zone_cubic(q):
    """Closed-form cubic fundamental-zone test on Rodrigues ratios.

    Points on the boundary, within 1e-12, count as inside.
    """
    return _cubic_slack(_fz_ratios(q)) >= -FZ_TOL


def _general_slack(r, group):
    axes, bounds = group._fz_planes
    if len(bounds) == 0:
        return np.full(r.shape[:-1], np.inf)
    proj = np.abs(r @ axes.T)
    return np.min(bounds - proj, axis=-1)


def in_fundamental_zone_general(q, group):
    """Fundamental-zone test from the group's rotation axes and angles.

    Inside means ``tan(w_i/4) +/- r . l_i >= 0`` for every non-identity
    element, where ``r`` is the Rodrigues vector of ``q``.
    """
    return _general_slack(_fz_ratios(q), group) >= -FZ_TOL


def fz_translates_inside(q, group):
    """Boolean mask (n, M): which sign-normalized translates lie in the FZ.

    Translates with a rotation angle at pi are never inside.
    """
    q = np.atleast_2d(np.asarray(q, dtype=float))
    translates = orient.positive(group.apply(q))  # (M, n, 4)
    q1 = translates[..., 0]
    ok = q1 > orient.RODRIGUES_EPS
    safe = np.where(ok[..., None], translates, orient.IDENTITY)
    inside = ok & (_general_slack(safe[..., 1:] / safe[..., :1], group) >= -FZ_TOL)
    return inside.T, np.swapaxes(translates, 0, 1)


def map_to_fz(q, group):
    """Map orientations into the fundamental zone.

    Parameters
    ----------
    q : array_like, shape (4,) or (n, 4)
    group : SymmetryGroup

    Returns
    -------
    fz : ndarray
        ``positive(g_m * q)`` for the lowest index ``m`` whose image lies
        in the zone; same shape as ``q``.
    index : int or ndarray of int

    Raises
    ------
    NoZoneFound
        If no translate passes, which points to a corrupted group table.
    """
    q = np.asarray(q, dtype=float)
    single = q.ndim == 1
    inside, translates = fz_translates_inside(q, group)
    found = inside.any(axis=1)
    if not found.all():
        raise NoZoneFound(f"no translate of sample {int(np.flatnonzero(~found)[0])} is in the zone")
    idx = np.argmax(inside, axis=1)
    fz = translates[np.arange(len(idx)), idx]
    if single:
        return fz[0], int(idx[0])
    return fz, idx


def disorientation(a, b, group):
    """Smallest rotation angle between ``a`` and any translate of ``b``.

    Computed as ``min_m angle(g_m a, b)`` with broadcasting over leading
    axes of ``a`` and ``b``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    ga = group.apply(a)  # (M, ..., 4)
    dots = np.abs(np.sum(ga * b, axis=-1))
    return 2.0 * np.arccos(np.clip(dots.max(axis=0), 0.0, 1.0))


def symmetric_inner_product(a, b, group):
    """``max_m |<g_m a, b>|``, the orbit-aware cosine of the half angle."""
    ga = group.apply(np.asarray(a, dtype=float))
    return np.abs(np.sum(ga * np.asarray(b, dtype=float), axis=-1)).max(axis=0)


def canonical_representative(mu, group):
    """Representative of ``mu``'s orbit under ``group.lift()`` inside the FZ.

    When the lifted group contains ``-1`` this equals :func:`map_to_fz`.
    Otherwise the sign of ``mu`` is significant and only the rotation
    part is canonicalized, keeping the result inside the orbit.
    """
    fz, m = map_to_fz(mu, group)
    if group.lift().contains_negation:
        return fz
    return apply(group.elements[m], mu)
