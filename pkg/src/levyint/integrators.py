"""Stochastic integrals on refined grids, layer by layer.

All integrals are left-point Riemann-Stieltjes sums over grid cells.  The
integrand value attached to the cell (t_k, t_{k+1}] is the value of the
(left-continuous) integrand process just after t_k, so predictability is
built into the sampling rule.  ``sample_side="right"`` flips that rule;
it exists only as an injectable fault for the verification harness and
must never be used for real computations.

Layers:

* H-valued integrand against one real driver component.
* Sequence-of-H integrand against the whole driver family, summed over
  components in fixed ascending order (a permuted order is available to
  test that the sum is insensitive to rearrangement).
* The same, addressed through a spectrally assembled path: the path's
  standard components are its driver, so this layer is a reindexing of
  the previous one.
* Hilbert-Schmidt integrand against an assembled path: unrolled into the
  sequence picture and summed, or returned term by term.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import (
    DimensionMismatch,
    GridMismatch,
    IndexOutOfRange,
    SpecMismatch,
)
from .processes import LevyPath, SamplePath, TimeGrid


@dataclass(frozen=True)
class SimpleIntegrand:
    """Piecewise-constant integrand with declared breakpoints.

    ``values[i]`` is the value on the half-open interval
    (breakpoints[i], breakpoints[i+1]]; ``initial`` is the value at time
    zero, which never enters an integral.  Values may be H vectors,
    sequences of H vectors, or Hilbert-Schmidt operators; randomized
    values must be built from path data available at the left breakpoint,
    which is the caller's adaptedness obligation.
    """

    breakpoints: np.ndarray          # (n+1,), 0 = b_0 < ... < b_n = horizon
    values: np.ndarray               # (n, ...) value per interval
    initial: Optional[np.ndarray] = None

    def __post_init__(self):
        b = np.asarray(self.breakpoints, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if b.ndim != 1 or b.size < 2:
            raise DimensionMismatch("need at least two breakpoints")
        if b[0] != 0.0 or np.any(np.diff(b) <= 0):
            raise DimensionMismatch(
                "breakpoints must start at 0 and strictly increase")
        if v.shape[0] != b.size - 1:
            raise DimensionMismatch(
                f"{b.size - 1} intervals but {v.shape[0]} values")
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class GridIntegrand:
    """Integrand evaluated at every grid node of a given path.

    ``evaluator(path)`` returns an array of per-node values with leading
    dimension ``n_nodes``.  Row k may depend only on path data up to node
    k; the registry evaluators in :mod:`levyint.scenarios` respect that
    contract by construction.
    """

    evaluator: Callable[[SamplePath], np.ndarray]


def cell_values(integrand, path: SamplePath, sample_side: str = "left"
                ) -> np.ndarray:
    """Integrand value per grid cell under the given sampling rule."""
    grid = path.grid
    if isinstance(integrand, SimpleIntegrand):
        b = integrand.breakpoints
        if b[-1] != grid.times[-1]:
            raise GridMismatch("breakpoints do not end at the horizon")
        pos = np.searchsorted(grid.times, b)
        if np.any(pos >= grid.n_nodes) or np.any(grid.times[pos] != b):
            raise GridMismatch(
                "every breakpoint must be a grid node; pass breakpoints as "
                "extra_times when sampling")
        lookup = grid.times[:-1] if sample_side == "left" else grid.times[1:]
        idx = np.searchsorted(b, lookup, side="right") - 1
        np.clip(idx, 0, integrand.values.shape[0] - 1, out=idx)
        return integrand.values[idx]
    if isinstance(integrand, GridIntegrand):
        per_node = np.asarray(integrand.evaluator(path), dtype=float)
        if per_node.shape[0] != grid.n_nodes:
            raise GridMismatch(
                f"evaluator returned {per_node.shape[0]} rows for "
                f"{grid.n_nodes} nodes")
        return per_node[:-1] if sample_side == "left" else per_node[1:]
    raise DimensionMismatch(f"unsupported integrand type {type(integrand)!r}")


@dataclass
class IntegralPath:
    """Running value of a stochastic integral at every grid node."""

    grid: TimeGrid
    values: np.ndarray               # (n_nodes, dim_h)

    @property
    def terminal(self) -> np.ndarray:
        return self.values[-1]

    def value_at(self, t: float) -> np.ndarray:
        return self.values[self.grid.node_at(t)]


@dataclass
class BracketPath:
    """Running value of a predictable bracket at every grid node."""

    grid: TimeGrid
    values: np.ndarray               # (n_nodes,)

    @property
    def terminal(self) -> float:
        return float(self.values[-1])


def _accumulate(grid: TimeGrid, cell_increments: np.ndarray) -> IntegralPath:
    values = np.zeros((grid.n_nodes, cell_increments.shape[1]))
    np.cumsum(cell_increments, axis=0, out=values[1:])
    return IntegralPath(grid, values)


def ito_h(integrand, path: SamplePath, component: int, *,
          sample_side: str = "left",
          projection_basis: Optional[np.ndarray] = None) -> IntegralPath:
    """Integrate an H-valued integrand against one driver component.

    The default route multiplies cell values by the component increments
    coordinatewise.  ``projection_basis`` (an orthogonal dim_h x dim_h
    matrix) switches to the explicit route that first integrates each
    basis coefficient as a scalar and then recombines; the two routes
    agree up to rounding for any orthonormal basis, which is exactly the
    basis-independence of the construction.
    """
    if not 0 <= component < path.n_components:
        raise IndexOutOfRange(
            f"component {component} outside range(0, {path.n_components})")
    vals = cell_values(integrand, path, sample_side)
    if vals.ndim != 2:
        raise DimensionMismatch("H-valued integrand must have vector values")
    dm = path.increments[component]
    if projection_basis is None:
        return _accumulate(path.grid, vals * dm[:, None])
    basis = np.asarray(projection_basis, dtype=float)
    coeff = vals @ basis                 # per-cell coefficients against the basis
    scalar_increments = coeff * dm[:, None]
    return _accumulate(path.grid, scalar_increments @ basis.T)


def ito_seq(integrand, path: SamplePath, *, sample_side: str = "left",
            order=None) -> IntegralPath:
    """Integrate a sequence-of-H integrand against the driver family.

    Components are accumulated one at a time in ascending index order;
    ``order`` overrides that order (used to confirm the result does not
    depend on it).
    """
    vals = cell_values(integrand, path, sample_side)
    if vals.ndim != 3 or vals.shape[1] != path.n_components:
        raise DimensionMismatch(
            f"sequence integrand has shape {vals.shape}, need "
            f"(cells, {path.n_components}, dim_h)")
    indices = range(path.n_components) if order is None else list(order)
    acc = np.zeros((path.grid.n_cells, vals.shape[2]))
    for j in indices:
        acc += vals[:, j, :] * path.increments[j][:, None]
    return _accumulate(path.grid, acc)


def ito_l2lambda(integrand, path: LevyPath, *, sample_side: str = "left",
                 order=None) -> IntegralPath:
    """Integrate a sequence-of-H integrand against an assembled path.

    The standard components of the assembled path are its stored driver,
    so this is the previous layer addressed through the spectral
    representation; with the identity eigenbasis the two are the same
    computation bit for bit.
    """
    return ito_seq(integrand, path.driver, sample_side=sample_side, order=order)


def _unroll_operator_cells(vals: np.ndarray, n_modes: int) -> np.ndarray:
    if vals.ndim != 3 or vals.shape[2] != n_modes:
        raise SpecMismatch(
            f"operator integrand has shape {vals.shape}, need "
            f"(cells, dim_h, {n_modes})")
    return np.swapaxes(vals, 1, 2)


def ito_general(integrand, path: LevyPath, *, sample_side: str = "left",
                order=None) -> IntegralPath:
    """Integrate a Hilbert-Schmidt integrand against an assembled path.

    Cell values are (dim_h, n_modes) operators in the weighted-column
    convention of :mod:`levyint.spaces`; unrolling their columns gives the
    sequence picture, which is then integrated component by component.
    """
    vals = cell_values(integrand, path.driver, sample_side)
    seq_vals = _unroll_operator_cells(vals, path.spec.n_modes)
    indices = range(path.spec.n_modes) if order is None else list(order)
    acc = np.zeros((path.grid.n_cells, seq_vals.shape[2]))
    for j in indices:
        acc += seq_vals[:, j, :] * path.driver.increments[j][:, None]
    return _accumulate(path.grid, acc)


def series_terms(integrand, path: LevyPath, *, sample_side: str = "left"
                 ) -> list:
    """Per-mode integrals whose fixed-order sum is the full integral.

    Term j integrates the j-th operator column against standard component
    j; the terms are pairwise orthogonal in mean square, which the
    harness verifies.
    """
    vals = cell_values(integrand, path.driver, sample_side)
    seq_vals = _unroll_operator_cells(vals, path.spec.n_modes)
    out = []
    for j in range(path.spec.n_modes):
        inc = seq_vals[:, j, :] * path.driver.increments[j][:, None]
        out.append(_accumulate(path.grid, inc))
    return out


def angle_bracket(grid: TimeGrid, j: int, k: int) -> BracketPath:
    """Predictable bracket of standard components j and k: t when j == k, else 0."""
    if j < 0 or k < 0:
        raise IndexOutOfRange("component indices must be nonnegative")
    if j == k:
        return BracketPath(grid, grid.times.copy())
    return BracketPath(grid, np.zeros(grid.n_nodes))


def covariation_integral(x_integrand, y_integrand, path: SamplePath,
                         j: int, k: int, *, sample_side: str = "left"
                         ) -> BracketPath:
    """Pathwise integral of <X, Y> against the bracket of components j, k.

    The bracket of standard components is delta_{jk} t, so the result is
    the left-point quadrature of the H inner product of the two
    integrands when j == k and identically zero otherwise.
    """
    if j != k:
        return BracketPath(path.grid, np.zeros(path.grid.n_nodes))
    vx = cell_values(x_integrand, path, sample_side)
    vy = cell_values(y_integrand, path, sample_side)
    if vx.shape != vy.shape:
        raise DimensionMismatch(
            f"integrand shapes {vx.shape} and {vy.shape} differ")
    prod = np.einsum("kd,kd->k", vx, vy)
    values = np.zeros(path.grid.n_nodes)
    np.cumsum(prod * path.grid.dt, out=values[1:])
    return BracketPath(path.grid, values)


def quadrature_sq_norm(integrand, path: SamplePath, *,
                       axis_shape: str = "vector") -> float:
    """Left-point quadrature of the squared integrand norm against time.

    ``axis_shape`` names the value layout: "vector" for H values,
    "seq" for sequences of H vectors, "operator" for Hilbert-Schmidt
    values; all reduce to a sum of squares per cell.
    """
    vals = cell_values(integrand, path, "left")
    flat = vals.reshape(vals.shape[0], -1)
    per_cell = np.einsum("kq,kq->k", flat, flat)
    return float(per_cell @ path.grid.dt)
