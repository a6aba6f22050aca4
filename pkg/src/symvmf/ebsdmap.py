"""Grain segmentation and per-grain indexing of orientation maps.

Map files are CSV with header ``x,y,phi1,Phi,phi2`` (Bunge Euler angles
in radians), one row per pixel in row-major order, optionally followed
by a ``grain`` column holding nonnegative integer labels.
"""

import csv
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from . import ginv, orient, vmf
from .exceptions import DimensionMismatch, ParseError, SymVmfError
from .symgrp import disorientation, map_to_fz, resolve_group

log = logging.getLogger(__name__)

MAP_COLUMNS = ("x", "y", "phi1", "Phi", "phi2")
DEFAULT_THRESHOLD = np.deg2rad(5.0)
DEFAULT_MIN_SIZE = 5


@dataclass
class OrientationMap:
    """Pixel grid of orientations; arrays are indexed ``[y, x]``."""

    width: int
    height: int
    euler: np.ndarray
    quats: np.ndarray
    labels: np.ndarray = None

    @classmethod
    def from_quaternions(cls, quats, labels=None):
        quats = orient.positive(orient.normalize(quats))
        h, w = quats.shape[:2]
        return cls(w, h, orient.quat_to_euler(quats), quats, labels)

    @classmethod
    def from_euler(cls, euler, labels=None):
        euler = np.asarray(euler, dtype=float)
        h, w = euler.shape[:2]
        return cls(w, h, euler, orient.euler_to_quat(euler), labels)

    @property
    def shape(self):
        return (self.height, self.width)


@dataclass(frozen=True)
class GrainRecord:
    grain_id: int
    pixel_count: int
    mean: np.ndarray
    kappa: float
    saturated: bool
    iterations: int
    converged: bool
    mean_disorientation: float


def load_map(path):
    """Parse and validate a map CSV.

    Raises
    ------
    ParseError
        Bad header, non-numeric field, wrong field count or an Euler
        angle out of range; carries the 1-based line number.
    DimensionMismatch
        Pixel coordinates that do not tile a full rectangle exactly once.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ParseError("empty file", line=1, path=path) from None
        if tuple(header[:5]) != MAP_COLUMNS or header[5:] not in ([], ["grain"]):
            raise ParseError(f"expected header {','.join(MAP_COLUMNS)}[,grain], got {','.join(header)}",
                             line=1, path=path)
        ncol = len(header)
        rows = []
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != ncol:
                raise ParseError(f"expected {ncol} fields, got {len(rec)}", line=lineno, path=path)
            try:
                vals = [float(v) for v in rec]
            except ValueError:
                raise ParseError(f"non-numeric field in {rec!r}", line=lineno, path=path) from None
            _check_row(vals, lineno, path)
            rows.append(vals)
    if not rows:
        raise ParseError("map has no pixels", path=path)
    data = np.array(rows)
    xy = data[:, :2].astype(np.int64)
    width, height = int(xy[:, 0].max()) + 1, int(xy[:, 1].max()) + 1
    if len(data) != width * height:
        raise DimensionMismatch(f"{path}: {len(data)} pixels cannot tile a {width}x{height} grid")
    flat = xy[:, 1] * width + xy[:, 0]
    seen = np.zeros(width * height, dtype=bool)
    seen[flat] = True
    if not seen.all():
        missing = int(np.flatnonzero(~seen)[0])
        raise DimensionMismatch(f"{path}: pixel ({missing % width}, {missing // width}) missing or duplicated")
    euler = np.empty((width * height, 3))
    euler[flat] = data[:, 2:5]
    labels = None
    if ncol == 6:
        labels = np.empty(width * height, dtype=np.int64)
        labels[flat] = data[:, 5].astype(np.int64)
        labels = labels.reshape(height, width)
    return OrientationMap.from_euler(euler.reshape(height, width, 3), labels)


def _check_row(vals, lineno, path):
    x, y, phi1, Phi, phi2 = vals[:5]
    if x < 0 or y < 0 or x != int(x) or y != int(y):
        raise ParseError(f"pixel coordinates must be nonnegative integers, got ({x}, {y})", line=lineno, path=path)
    if not (0 <= phi1 <= orient.TWO_PI and 0 <= Phi <= np.pi and 0 <= phi2 <= orient.TWO_PI):
        raise ParseError(f"Euler angles ({phi1}, {Phi}, {phi2}) out of range", line=lineno, path=path)
    if len(vals) == 6 and (vals[5] < 0 or vals[5] != int(vals[5])):
        raise ParseError(f"grain label must be a nonnegative integer, got {vals[5]}", line=lineno, path=path)


def write_map(path, omap):
    """Write a map in the format read by :func:`load_map`."""
    h, w = omap.shape
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(MAP_COLUMNS + (("grain",) if omap.labels is not None else ()))
        for y in range(h):
            for x in range(w):
                row = [x, y] + [repr(float(v)) for v in omap.euler[y, x]]
                if omap.labels is not None:
                    row.append(int(omap.labels[y, x]))
                out.writerow(row)


def segment_grains(omap, group, threshold=DEFAULT_THRESHOLD, min_size=DEFAULT_MIN_SIZE):
    """Label 4-connected regions whose neighbouring pixels are within ``threshold``.

    Two adjacent pixels are joined when their disorientation is at most
    ``threshold`` (radians); regions are the connected components of
    that neighbour graph. Regions smaller than ``min_size`` get label 0;
    the rest are numbered from 1 in row-major order of first pixel.
    """
    if not threshold > 0:
        raise ValueError(f"threshold must be positive, got {threshold!r}")
    group = resolve_group(group)
    h, w = omap.shape
    q = omap.quats
    idx = np.arange(h * w).reshape(h, w)
    src, dst = [], []
    if w > 1:
        near = disorientation(q[:, :-1], q[:, 1:], group) <= threshold
        src.append(idx[:, :-1][near])
        dst.append(idx[:, 1:][near])
    if h > 1:
        near = disorientation(q[:-1, :], q[1:, :], group) <= threshold
        src.append(idx[:-1, :][near])
        dst.append(idx[1:, :][near])
    src = np.concatenate(src) if src else np.empty(0, dtype=np.int64)
    dst = np.concatenate(dst) if dst else np.empty(0, dtype=np.int64)
    graph = coo_matrix((np.ones(len(src)), (src, dst)), shape=(h * w, h * w))
    _, comp = connected_components(graph, directed=False)
    sizes = np.bincount(comp)
    # renumber by first appearance so labels do not depend on scipy internals
    _, first = np.unique(comp, return_index=True)
    order = np.argsort(first)
    labels_of = np.zeros(len(sizes), dtype=np.int64)
    next_label = 1
    for c in order:
        if sizes[c] >= min_size:
            labels_of[c] = next_label
            next_label += 1
    return labels_of[comp].reshape(h, w)


def _index_one(gid, pixels, group, em_config):
    res = ginv.em_fit(pixels, group, em_config)
    mis = disorientation(pixels, res.mean, group)
    return GrainRecord(
        grain_id=int(gid),
        pixel_count=len(pixels),
        mean=res.mean,
        kappa=res.params.kappa,
        saturated=res.params.saturated,
        iterations=res.iterations,
        converged=res.converged,
        mean_disorientation=float(np.mean(mis)),
    )


def index_grains(omap, group, em_config=None, labels=None, threads=1):
    """Fit the invariant VMF to every labelled grain.

    Parameters
    ----------
    labels : ndarray, optional
        Grain labels; defaults to ``omap.labels``. Label 0 is skipped.

    Returns
    -------
    records : list of GrainRecord, sorted by grain id
    failures : dict mapping grain id to the error message
    """
    group = resolve_group(group)
    labels = omap.labels if labels is None else labels
    if labels is None:
        raise ValueError("map has no grain labels; run segment_grains first")
    flat_labels = np.asarray(labels).ravel()
    flat_q = omap.quats.reshape(-1, 4)
    ids = [int(g) for g in np.unique(flat_labels) if g > 0]
    em_config = em_config or ginv.EmConfig()

    def work(gid):
        try:
            return _index_one(gid, flat_q[flat_labels == gid], group, em_config)
        except (SymVmfError, ValueError) as exc:
            return exc

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, ids))
    else:
        results = [work(g) for g in ids]
    records, failures = [], {}
    for gid, r in zip(ids, results):
        if isinstance(r, GrainRecord):
            records.append(r)
        else:
            log.warning("grain %d not indexed: %s", gid, r)
            failures[gid] = str(r)
    return records, failures


GRAIN_COLUMNS = ("grain_id", "pixel_count", "q1", "q2", "q3", "q4", "phi1", "Phi", "phi2",
                 "kappa", "saturated", "iterations", "converged", "mean_disorientation_deg")


def emit_outputs(records, omap, out_dir, labels=None):
    """Write ``grains.csv`` and ``pixels.csv`` under ``out_dir``."""
    if not records:
        raise ValueError("no indexed grains to write")
    labels = omap.labels if labels is None else labels
    by_id = {r.grain_id: r for r in sorted(records, key=lambda r: r.grain_id)}
    eul = {gid: orient.quat_to_euler(r.mean) for gid, r in by_id.items()}
    fmt = "{:.12g}".format
    try:
        os.makedirs(out_dir, exist_ok=True)
        gpath = os.path.join(out_dir, "grains.csv")
        ppath = os.path.join(out_dir, "pixels.csv")
        with open(gpath, "w", newline="") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(GRAIN_COLUMNS)
            for gid, r in by_id.items():
                out.writerow([gid, r.pixel_count, *map(fmt, r.mean), *map(fmt, eul[gid]), fmt(r.kappa),
                              int(r.saturated), r.iterations, int(r.converged),
                              fmt(np.rad2deg(r.mean_disorientation))])
        with open(ppath, "w", newline="") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(("x", "y", "grain_id", "phi1", "Phi", "phi2"))
            h, w = omap.shape
            for y in range(h):
                for x in range(w):
                    gid = int(labels[y, x])
                    if gid in by_id:
                        out.writerow([x, y, gid, *map(fmt, eul[gid])])
                    else:
                        out.writerow([x, y, 0, "", "", ""])
    except OSError as exc:
        raise OSError(f"cannot write outputs to {out_dir}: {exc}") from exc
    return [gpath, ppath]


def synth_map(grains, width, height, kappa, seed=None, group="cubic_m3m"):
    """Synthetic polycrystal with known grain means.

    Grains are the Voronoi cells of ``grains`` random pixel sites; each
    has a uniformly random mean and pixels drawn from the invariant VMF
    at concentration ``kappa``.

    Returns
    -------
    omap : OrientationMap
        With ground-truth ``labels`` (1..grains).
    truth : dict
        grain id -> true mean quaternion.
    """
    group = resolve_group(group)
    rng = np.random.default_rng(seed)
    sites = np.column_stack([rng.uniform(0, width, grains), rng.uniform(0, height, grains)])
    yy, xx = np.mgrid[0:height, 0:width]
    d2 = (xx[..., None] + 0.5 - sites[:, 0]) ** 2 + (yy[..., None] + 0.5 - sites[:, 1]) ** 2
    labels = np.argmin(d2, axis=-1) + 1
    means = orient.random_quaternions(grains, rng)
    quats = np.empty((height, width, 4))
    truth = {}
    for g in range(1, grains + 1):
        mask = labels == g
        truth[g] = means[g - 1]
        n = int(mask.sum())
        if n:
            model = ginv.GInvariantVmf(group, vmf.VmfParams(means[g - 1], kappa))
            quats[mask] = ginv.sample_ginv(model, n, rng)
    return OrientationMap.from_quaternions(quats, labels), truth


def boundary_grain(n, kappa, seed=None, group="cubic_m3m"):
    """Pixels of one grain whose mean sits on a fundamental-zone face.

    The samples are folded into the zone, as vendor software reports
    them, so they split into two clusters on opposite faces and the raw
    Euler angles are bimodal.
    """
    group = resolve_group(group)
    half = np.pi / 8  # 45 degrees about z: |q4/q1| = sqrt(2) - 1
    mu = np.array([np.cos(half), 0.0, 0.0, np.sin(half)])
    pix = vmf.sample(vmf.VmfParams(mu, kappa), n, seed)
    return map_to_fz(pix, group)[0], mu


__all__ = [
    "OrientationMap",
    "GrainRecord",
    "load_map",
    "write_map",
    "segment_grains",
    "index_grains",
    "emit_outputs",
    "synth_map",
    "boundary_grain",
]
