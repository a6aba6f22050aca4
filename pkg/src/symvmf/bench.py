"""Simulation sweep comparing mean/concentration estimators over kappa.

For every grid value of the true concentration and every trial, a true
mean is drawn uniformly on S^3, samples are drawn from the invariant
mixture, and each estimator is fitted to the same samples.
"""

import csv
import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import ginv, orient, vmf
from .exceptions import SymVmfError
from .symgrp import map_to_fz, resolve_group, symmetric_inner_product

log = logging.getLogger(__name__)

ESTIMATORS = ("naive", "fz", "em")
CSV_COLUMNS = (
    "kappa_o",
    "estimator",
    "inner_raw",
    "inner_sym",
    "kappa_hat_mean",
    "kappa_bias",
    "se_inner",
    "se_kappa",
)


@dataclass(frozen=True)
class SweepConfig:
    """Simulation grid. ``kappas`` overrides the log-spaced grid when given."""

    kappa_min: float = 1.0
    kappa_max: float = 100.0
    steps: int = 25
    n: int = 1000
    trials: int = 100
    group: str = "cubic_m3m"
    seed: int = 0
    estimators: tuple = ESTIMATORS
    kappas: tuple = None
    em_config: ginv.EmConfig = field(default_factory=ginv.EmConfig)

    def __post_init__(self):
        if not 0 < self.kappa_min <= self.kappa_max:
            raise ValueError("need 0 < kappa_min <= kappa_max")
        if self.steps < 1 or self.trials < 1 or self.n < 2:
            raise ValueError("need steps >= 1, trials >= 1 and n >= 2")
        if not self.estimators:
            raise ValueError("estimator set is empty")
        unknown = set(self.estimators) - set(ESTIMATORS)
        if unknown:
            raise ValueError(f"unknown estimators {sorted(unknown)}; expected {ESTIMATORS}")
        if self.kappas is not None and any(k <= 0 for k in self.kappas):
            raise ValueError("explicit kappas must be positive")

    def grid(self):
        if self.kappas is not None:
            return [float(k) for k in self.kappas]
        if self.steps == 1:
            return [float(self.kappa_min)]
        return [float(k) for k in np.geomspace(self.kappa_min, self.kappa_max, self.steps)]


@dataclass(frozen=True)
class SweepRow:
    kappa_o: float
    estimator: str
    inner_raw: float
    inner_sym: float
    kappa_hat_mean: float
    kappa_bias: float
    se_inner: float
    se_kappa: float
    n_failed: int = 0

    def as_csv(self):
        vals = [self.kappa_o, self.estimator, self.inner_raw, self.inner_sym, self.kappa_hat_mean,
                self.kappa_bias, self.se_inner, self.se_kappa]
        return [v if isinstance(v, str) else f"{v:.12g}" for v in vals]


def trial_seed(seed, grid_index, trial):
    """Independent, reproducible stream for one (grid point, trial) pair."""
    return np.random.SeedSequence([int(seed), int(grid_index), int(trial)])


def _fit(name, X, group, em_config):
    if name == "naive":
        return vmf.ml_estimate(X)
    if name == "fz":
        return ginv.modified_ml_fit(X, group)
    return ginv.em_fit(X, group, em_config).params


def run_trial(config, group, kappa_o, grid_index, trial):
    """One simulated data set; returns {estimator: (raw, sym, kappa_hat) or None}."""
    rng = np.random.default_rng(trial_seed(config.seed, grid_index, trial))
    mu_o = orient.random_quaternions(1, rng)[0]
    model = ginv.GInvariantVmf(group, vmf.VmfParams(mu_o, kappa_o))
    X = ginv.sample_ginv(model, config.n, rng)
    mu_o_fz, _ = map_to_fz(mu_o, group)
    out = {}
    for name in config.estimators:
        try:
            p = _fit(name, X, group, config.em_config)
        except SymVmfError as exc:
            log.warning("kappa_o=%g trial %d %s failed: %s", kappa_o, trial, name, exc)
            out[name] = None
            continue
        raw = float(map_to_fz(p.mu, group)[0] @ mu_o_fz)
        sym = float(symmetric_inner_product(p.mu, mu_o, group))
        out[name] = (raw, sym, p.kappa)
    return out


def _se(values):
    if len(values) < 2:
        return 0.0
    return float(np.std(values, ddof=1) / math.sqrt(len(values)))


def run_sweep(config, threads=1):
    """Run the full grid and aggregate per (kappa_o, estimator).

    Output is identical for any ``threads``: trials are seeded by index
    and folded in index order.
    """
    group = resolve_group(config.group)
    rows = []
    start = time.perf_counter()
    for gi, kappa_o in enumerate(config.grid()):
        jobs = [(config, group, kappa_o, gi, t) for t in range(config.trials)]
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(lambda a: run_trial(*a), jobs))
        else:
            results = [run_trial(*a) for a in jobs]
        for name in config.estimators:
            ok = [r[name] for r in results if r[name] is not None]
            failed = len(results) - len(ok)
            if ok:
                raw, sym, kap = (np.array(v) for v in zip(*ok))
                rows.append(SweepRow(kappa_o, name, float(raw.mean()), float(sym.mean()), float(kap.mean()),
                                     float(kap.mean() - kappa_o), _se(sym), _se(kap), failed))
            else:
                nan = float("nan")
                rows.append(SweepRow(kappa_o, name, nan, nan, nan, nan, nan, nan, failed))
        log.info("kappa_o=%.4g done (%.1fs elapsed)", kappa_o, time.perf_counter() - start)
    return rows


def write_csv(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in rows:
            w.writerow(r.as_csv())


def emit_report(rows, out_dir):
    """Write ``sweep.csv`` and the two SVG line charts into ``out_dir``.

    Returns the list of written paths.
    """
    rows = list(rows)
    if not rows:
        raise ValueError("no sweep rows to report")
    try:
        os.makedirs(out_dir, exist_ok=True)
        paths = [os.path.join(out_dir, f) for f in ("sweep.csv", "inner_product.svg", "kappa_bias.svg")]
        write_csv(rows, paths[0])
        inner = _series(rows, "inner_sym")
        bias = _series(rows, "kappa_bias")
        with open(paths[1], "w") as fh:
            fh.write(line_chart(inner, "Mean orientation recovery", "true kappa", "mean inner product"))
        with open(paths[2], "w") as fh:
            fh.write(line_chart(bias, "Concentration estimator bias", "true kappa", "mean kappa_hat - kappa"))
    except OSError as exc:
        raise OSError(f"cannot write report to {out_dir}: {exc}") from exc
    return paths


def _series(rows, attr):
    series = {}
    for r in rows:
        series.setdefault(r.estimator, []).append((r.kappa_o, getattr(r, attr)))
    return series


_COLORS = {"naive": "#1f77b4", "fz": "#2ca02c", "em": "#000000"}
_LABELS = {"naive": "ML for VMF", "fz": "FZ-modified ML", "em": "EM-ML, invariant mixture"}
_DASH = {"naive": "", "fz": "6,4", "em": "2,3"}


def line_chart(series, title, xlabel, ylabel, width=640, height=420):
    """Standalone SVG line chart with a logarithmic x axis."""
    left, right, top, bottom = 70, 170, 40, 50
    pts = [(x, y) for s in series.values() for x, y in s if np.isfinite(y)]
    xs = [math.log10(x) for x, _ in pts] or [0.0, 1.0]
    ys = [y for _, y in pts] or [0.0, 1.0]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad
    pw, ph = width - left - right, height - top - bottom

    def px(x):
        return left + (math.log10(x) - x0) / (x1 - x0) * pw

    def py(y):
        return top + (y1 - y) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{left + pw / 2:.1f}" y="22" text-anchor="middle" font-size="15">{title}</text>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>',
        f'<text x="{left + pw / 2:.1f}" y="{height - 10}" text-anchor="middle">{xlabel}</text>',
        f'<text transform="translate(16,{top + ph / 2:.1f}) rotate(-90)" text-anchor="middle">{ylabel}</text>',
    ]
    for e in range(math.floor(x0), math.ceil(x1) + 1):
        for m in (1, 2, 5):
            v = m * 10.0**e
            if x0 - 1e-9 <= math.log10(v) <= x1 + 1e-9:
                X = px(v)
                out.append(f'<line x1="{X:.1f}" y1="{top + ph}" x2="{X:.1f}" y2="{top + ph + 5}" stroke="#444"/>')
                out.append(f'<text x="{X:.1f}" y="{top + ph + 18}" text-anchor="middle">{v:g}</text>')
    for i in range(6):
        v = y0 + (y1 - y0) * i / 5
        Y = py(v)
        out.append(f'<line x1="{left - 5}" y1="{Y:.1f}" x2="{left}" y2="{Y:.1f}" stroke="#444"/>')
        out.append(f'<text x="{left - 8}" y="{Y + 4:.1f}" text-anchor="end">{v:.3g}</text>')
    for k, (name, s) in enumerate(series.items()):
        color = _COLORS.get(name, "#d62728")
        dash = _DASH.get(name, "")
        coords = " ".join(f"{px(x):.1f},{py(y):.1f}" for x, y in s if np.isfinite(y))
        style = f' stroke-dasharray="{dash}"' if dash else ""
        out.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="2"{style}/>')
        ly = top + 15 + 20 * k
        out.append(f'<line x1="{left + pw + 10}" y1="{ly}" x2="{left + pw + 35}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"{style}/>')
        out.append(f'<text x="{left + pw + 40}" y="{ly + 4}">{_LABELS.get(name, name)}</text>')
    out.append("</svg>\n")
    return "\n".join(out)
