"""Uniform discretization of the potential-profit axis.

Everything downstream (densities, payment rules, strategies) lives on one
shared grid: ``bins`` equal-width bins on ``[lower, upper]`` with values
tabulated at bin midpoints, and ``subsamples`` quadrature sub-intervals per
bin.  Integration is a deterministic midpoint rule over the fixed
``bins * subsamples`` sample points, so repeated runs are bit-identical.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Callable, Literal

import numpy as np

Kind = Literal["density", "rule", "strategy"]

_KINDS = ("density", "rule", "strategy")


@dataclass(frozen=True)
class Grid:
    """Equal-width binning of ``[lower, upper]``.

    Derived geometry: ``edges`` (bins+1 bin boundaries), ``mids`` (bin
    midpoints, the tabulation nodes) and ``samples`` (midpoints of the
    quadrature sub-intervals).
    """

    lower: float
    upper: float
    bins: int
    subsamples: int

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lower) and math.isfinite(self.upper)):
            raise ValueError("grid bounds must be finite")
        if not self.lower < self.upper:
            raise ValueError(f"grid bounds inverted or empty: [{self.lower}, {self.upper}]")
        if self.bins < 2:
            raise ValueError("grid needs at least 2 bins")
        if self.subsamples < 1:
            raise ValueError("grid needs at least 1 subsample per bin")

    @cached_property
    def width(self) -> float:
        return (self.upper - self.lower) / self.bins

    @cached_property
    def edges(self) -> np.ndarray:
        return np.linspace(self.lower, self.upper, self.bins + 1)

    @cached_property
    def mids(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @cached_property
    def sample_width(self) -> float:
        return (self.upper - self.lower) / (self.bins * self.subsamples)

    @cached_property
    def sample_edges(self) -> np.ndarray:
        return np.linspace(self.lower, self.upper, self.bins * self.subsamples + 1)

    @cached_property
    def samples(self) -> np.ndarray:
        return 0.5 * (self.sample_edges[:-1] + self.sample_edges[1:])


def make_grid(lower: float, upper: float, bins: int, subsamples: int) -> Grid:
    """Build a grid; rejects non-finite or inverted bounds."""
    return Grid(float(lower), float(upper), int(bins), int(subsamples))


def _eval_on(fn: Callable, x: np.ndarray) -> np.ndarray:
    """Evaluate ``fn`` on an array, tolerating scalar-only callables."""
    try:
        out = np.asarray(fn(x), dtype=float)
        if out.shape == x.shape:
            return out
    except (TypeError, ValueError):
        pass
    return np.array([float(fn(v)) for v in x])


def integrate(fn: Callable, grid: Grid, lo: float | None = None, hi: float | None = None) -> float:
    """Midpoint-rule quadrature of ``fn`` over ``[lo, hi]``.

    Uses the grid's fixed sample points; sub-intervals that straddle ``lo``
    or ``hi`` contribute in proportion to their overlap.  ``[lo, hi]`` must
    lie inside the grid.
    """
    lo = grid.lower if lo is None else float(lo)
    hi = grid.upper if hi is None else float(hi)
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValueError("integration bounds must be finite")
    if lo > hi:
        raise ValueError(f"integration bounds inverted: [{lo}, {hi}]")
    slack = 1e-12 * (grid.upper - grid.lower)
    if lo < grid.lower - slack or hi > grid.upper + slack:
        raise ValueError(f"[{lo}, {hi}] is not contained in the grid range")
    x = grid.samples
    cuts = grid.sample_edges
    overlap = np.clip(np.minimum(cuts[1:], hi) - np.maximum(cuts[:-1], lo), 0.0, None)
    live = overlap > 0.0
    if not live.any():
        return 0.0
    return float(np.dot(_eval_on(fn, x[live]), overlap[live]))


@dataclass(frozen=True)
class Tabulated:
    """A function tabulated at the grid's bin midpoints.

    Evaluation interpolates linearly between nodes.  Outside the grid range
    rules and strategies clamp to the nearest node value while densities
    evaluate to zero; between the range boundary and the extreme node the
    nearest node value is used for every kind.
    """

    grid: Grid
    values: np.ndarray
    kind: Kind

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        if vals.shape != (self.grid.bins,):
            raise ValueError(f"expected {self.grid.bins} node values, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("tabulated values must be finite")
        if self.kind not in _KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.kind == "density" and np.any(vals < 0.0):
            raise ValueError("densities must be nonnegative")

    def __call__(self, x):
        arr = np.asarray(x, dtype=float)
        y = np.interp(arr, self.grid.mids, self.values)
        if self.kind == "density":
            y = np.where((arr < self.grid.lower) | (arr > self.grid.upper), 0.0, y)
        if np.isscalar(x) or arr.ndim == 0:
            return float(y)
        return y

    def bin_masses(self) -> np.ndarray:
        """Per-bin integrals of the interpolated curve (length ``bins``)."""
        vals = self(self.grid.samples)
        return vals.reshape(self.grid.bins, self.grid.subsamples).sum(axis=1) * self.grid.sample_width

    def mass(self) -> float:
        return float(self.bin_masses().sum())

    def normalized(self) -> "Tabulated":
        """Rescale so the interpolated curve integrates to one."""
        total = self.mass()
        if total <= 0.0:
            raise ValueError("cannot normalize a zero-mass tabulation")
        return Tabulated(self.grid, self.values / total, self.kind)


def interp(tab: Tabulated, x):
    """Linear interpolation with the kind's boundary policy."""
    return tab(x)


def write_tabulated_csv(tab: Tabulated, path: str | Path, value_column: str = "value") -> None:
    """CSV serialization: header ``psi,<value_column>``, one row per node."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["psi", value_column])
        for psi, val in zip(tab.grid.mids, tab.values):
            writer.writerow([repr(float(psi)), repr(float(val))])


def read_tabulated_csv(path: str | Path, kind: Kind, subsamples: int = 200) -> Tabulated:
    """Read a node table written by :func:`write_tabulated_csv`.

    The uniform grid is reconstructed from the psi column (node spacing must
    be uniform).
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) < 2 or header[0] != "psi":
            raise ValueError(f"{path}: expected header 'psi,<value>'")
        rows = [(float(r[0]), float(r[1])) for r in reader if r]
    if len(rows) < 2:
        raise ValueError(f"{path}: need at least two nodes")
    psi = np.array([r[0] for r in rows])
    vals = np.array([r[1] for r in rows])
    steps = np.diff(psi)
    width = steps[0]
    if width <= 0 or not np.allclose(steps, width, rtol=1e-9, atol=1e-12):
        raise ValueError(f"{path}: psi nodes are not uniformly spaced")
    grid = Grid(float(psi[0] - width / 2), float(psi[-1] + width / 2), len(psi), subsamples)
    return Tabulated(grid, vals, kind)
