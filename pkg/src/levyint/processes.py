"""Simulation of the driving noise.

A driver is a finite family of independent square-integrable martingales,
each normalized so its predictable bracket is t.  Every component is a
Brownian motion plus independent compensated Poisson terms; the
normalization ``sigma**2 + sum(a**2 * nu) == 1`` makes the family
standard, so brackets between distinct components vanish and every
isometry below holds without driver-dependent constants.

Sampling is event-driven: jump times are drawn first and inserted into
the scheduled grid as exact nodes, Brownian increments are then generated
per refined cell, and each cell subtracts the compensator ``a * nu * dt``.
Pathwise identities for piecewise-constant integrands are therefore exact
up to float rounding, not discretization error.

Parameters
----------
Grids store node times and a per-node kind flag (scheduled or jump).
Paths store per-component increments over grid cells; cumulative values
carry a leading zero column so index k is the value at node k.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import rng as _rng
from .errors import (
    DimensionMismatch,
    GridMismatch,
    IndexOutOfRange,
    NonNormalizable,
    SpecMismatch,
    ZeroJumpSize,
)
from .spaces import CovarianceSpec

SCHEDULED = 0
JUMP = 1
KIND_NAMES = ("scheduled", "jump")

# construction-time tolerance on the variance-rate normalization
NORMALIZATION_TOL = 1e-12


@dataclass(frozen=True)
class StandardLevySpec:
    """One driver component: Brownian weight plus compensated jump terms.

    ``jumps`` is a tuple of (size, intensity) pairs.  The variance rate
    ``sigma**2 + sum(size**2 * intensity)`` must equal one; use
    :func:`make_standard_specs` to build normalized specs from presets.
    """

    sigma: float
    jumps: tuple = ()

    def __post_init__(self):
        for size, intensity in self.jumps:
            if size == 0.0:
                raise ZeroJumpSize("jump sizes must be nonzero")
            if intensity <= 0.0:
                raise NonNormalizable("jump intensities must be positive")
        rate = self.sigma ** 2 + sum(a * a * nu for a, nu in self.jumps)
        if abs(rate - 1.0) > NORMALIZATION_TOL:
            raise NonNormalizable(
                f"variance rate {rate!r} differs from 1 by more than "
                f"{NORMALIZATION_TOL:.0e}")


def _normalize_spec(sigma: float, jumps) -> StandardLevySpec:
    """Rescale jump intensities so the variance rate is exactly one."""
    jumps = [(float(a), float(nu)) for a, nu in jumps]
    for a, _ in jumps:
        if a == 0.0:
            raise ZeroJumpSize("jump sizes must be nonzero")
    if sigma < 0:
        raise NonNormalizable("sigma must be nonnegative")
    budget = 1.0 - sigma * sigma
    if not jumps:
        if abs(budget) > NORMALIZATION_TOL:
            raise NonNormalizable(
                "a driver without jumps must have sigma == 1")
        return StandardLevySpec(sigma=float(sigma))
    if budget <= 0:
        raise NonNormalizable(
            "sigma leaves no variance budget for the requested jumps")
    mass = sum(a * a * nu for a, nu in jumps)
    if mass <= 0:
        raise NonNormalizable("jump terms carry no variance")
    scale = budget / mass
    return StandardLevySpec(
        sigma=float(sigma),
        jumps=tuple((a, nu * scale) for a, nu in jumps))


def spec_from_preset(entry) -> StandardLevySpec:
    """Build one normalized component spec from a preset description.

    Accepted forms: the string ``"brownian"``; mappings
    ``{"preset": "brownian"}``, ``{"preset": "poisson", "a": size}``,
    ``{"preset": "mixed", "sigma": s, "a": size}``; or an explicit
    ``{"sigma": s, "jumps": [[size, intensity], ...]}`` whose intensities
    are rescaled to meet the normalization.
    """
    if entry == "brownian":
        return StandardLevySpec(sigma=1.0)
    if not isinstance(entry, dict):
        raise NonNormalizable(f"unrecognized driver entry {entry!r}")
    if "preset" in entry:
        preset = entry["preset"]
        if preset == "brownian":
            return StandardLevySpec(sigma=1.0)
        if preset == "poisson":
            a = float(entry["a"])
            if a == 0.0:
                raise ZeroJumpSize("jump sizes must be nonzero")
            return StandardLevySpec(sigma=0.0, jumps=((a, 1.0 / (a * a)),))
        if preset == "mixed":
            sigma = float(entry["sigma"])
            a = float(entry["a"])
            if not 0 <= sigma < 1:
                raise NonNormalizable("mixed preset needs 0 <= sigma < 1")
            if a == 0.0:
                raise ZeroJumpSize("jump sizes must be nonzero")
            return StandardLevySpec(
                sigma=sigma, jumps=((a, (1.0 - sigma * sigma) / (a * a)),))
        raise NonNormalizable(f"unknown driver preset {preset!r}")
    return _normalize_spec(float(entry.get("sigma", 0.0)), entry.get("jumps", ()))


def make_standard_specs(n: int, recipe) -> tuple:
    """Normalized specs for n components.

    ``recipe`` is a single preset applied to every index or a list of
    per-index presets (cycled when shorter than n).
    """
    if n < 1:
        raise DimensionMismatch("component count must be at least 1")
    if isinstance(recipe, (list, tuple)):
        if not recipe:
            raise NonNormalizable("driver recipe list is empty")
        return tuple(spec_from_preset(recipe[i % len(recipe)]) for i in range(n))
    return tuple(spec_from_preset(recipe) for _ in range(n))


@dataclass
class TimeGrid:
    """Strictly increasing node times from 0 to the horizon with kind flags."""

    times: np.ndarray                # (n_nodes,)
    kind: np.ndarray                 # (n_nodes,) uint8, SCHEDULED or JUMP

    @property
    def n_nodes(self) -> int:
        return self.times.size

    @property
    def n_cells(self) -> int:
        return self.times.size - 1

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    @cached_property
    def dt(self) -> np.ndarray:
        return np.diff(self.times)

    def node_at(self, t: float) -> int:
        """Index of the last node not after t (step-function semantics)."""
        if t < self.times[0] or t > self.times[-1]:
            raise IndexOutOfRange(f"time {t} outside [0, {self.horizon}]")
        return int(np.searchsorted(self.times, t, side="right") - 1)


@dataclass
class SamplePath:
    """Realized driver components on a shared refined grid.

    ``increments[c, k]`` is the increment of component c over the cell
    ending at node k+1; a jump at a node belongs to the cell that ends
    there.  ``jump_log[c]`` lists (time, size) of the individual jumps of
    component c; the times all appear as grid nodes.
    """

    grid: TimeGrid
    increments: np.ndarray           # (n_components, n_cells)
    jump_log: tuple = ()             # per component: tuple of (time, size)

    @property
    def n_components(self) -> int:
        return self.increments.shape[0]

    @cached_property
    def cumulative(self) -> np.ndarray:
        out = np.zeros((self.increments.shape[0], self.grid.n_nodes))
        np.cumsum(self.increments, axis=1, out=out[:, 1:])
        return out

    def terminal(self) -> np.ndarray:
        return self.cumulative[:, -1].copy()


@dataclass(frozen=True)
class PathSampler:
    """Reusable sampler: fixed driver specs, horizon and scheduled grid.

    ``extra_times`` are deterministic refinement nodes (integrand
    breakpoints for example); they join the scheduled grid so pathwise
    identities at those times are exact.
    """

    specs: tuple
    horizon: float
    n_scheduled: int
    extra_times: tuple = ()
    _base_times: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n_scheduled < 1:
            raise DimensionMismatch("n_scheduled must be at least 1")
        if not self.horizon > 0:
            raise DimensionMismatch("horizon must be positive")
        base = np.linspace(0.0, self.horizon, self.n_scheduled + 1)
        if self.extra_times:
            extra = np.asarray(self.extra_times, dtype=float)
            if np.any(extra < 0) or np.any(extra > self.horizon):
                raise DimensionMismatch("extra_times must lie in [0, horizon]")
            base = np.unique(np.concatenate([base, extra]))
        base.setflags(write=False)
        object.__setattr__(self, "_base_times", base)
        object.__setattr__(self, "specs", tuple(self.specs))

    @property
    def n_components(self) -> int:
        return len(self.specs)

    def sample(self, seed: int, path_index: int) -> SamplePath:
        horizon = self.horizon
        events = []                  # (component, size, sorted times array)
        jump_arrays = []
        for c, spec in enumerate(self.specs):
            if not spec.jumps:
                continue
            gen = _rng.stream(seed, path_index, c, _rng.JUMPS)
            for size, intensity in spec.jumps:
                count = int(gen.poisson(intensity * horizon))
                if count == 0:
                    continue
                times = gen.uniform(0.0, horizon, count)
                times = np.sort(times[times > 0.0])
                if times.size:
                    events.append((c, size, times))
                    jump_arrays.append(times)

        if jump_arrays:
            times = np.unique(np.concatenate([self._base_times, *jump_arrays]))
            kind = np.zeros(times.size, dtype=np.uint8)
            for arr in jump_arrays:
                kind[np.searchsorted(times, arr)] = JUMP
        else:
            times = self._base_times
            kind = np.zeros(times.size, dtype=np.uint8)
        grid = TimeGrid(times, kind)
        dt = grid.dt

        inc = np.zeros((len(self.specs), dt.size))
        for c, spec in enumerate(self.specs):
            if spec.sigma != 0.0:
                gen = _rng.stream(seed, path_index, c, _rng.BROWNIAN)
                inc[c] = spec.sigma * np.sqrt(dt) * gen.standard_normal(dt.size)
            for size, intensity in spec.jumps:
                inc[c] -= size * intensity * dt
        log = [[] for _ in self.specs]
        for c, size, jtimes in events:
            cells = np.searchsorted(times, jtimes) - 1
            np.add.at(inc[c], cells, size)
            log[c].extend((float(t), size) for t in jtimes)
        return SamplePath(grid, inc, tuple(tuple(sorted(e)) for e in log))


def simulate_paths(specs, horizon: float, n_scheduled: int, seed: int,
                   path_index: int, extra_times=()) -> SamplePath:
    """One driver path addressed by (seed, path_index); see PathSampler."""
    sampler = PathSampler(tuple(specs), float(horizon), int(n_scheduled),
                          tuple(extra_times))
    return sampler.sample(seed, path_index)


def replay_path(times, increments, kinds=None) -> SamplePath:
    """Rebuild a driver path from recorded node times and increments.

    Accepts kind flags as ints or the names in KIND_NAMES; without them
    every node counts as scheduled.  Replayed paths carry no jump log.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 2:
        raise GridMismatch("replay needs at least two node times")
    if times[0] != 0.0 or np.any(np.diff(times) <= 0):
        raise GridMismatch("replay times must increase strictly from 0")
    increments = np.atleast_2d(np.asarray(increments, dtype=float))
    if increments.shape[1] != times.size - 1:
        raise GridMismatch(
            f"replay increments have {increments.shape[1]} cells for "
            f"{times.size - 1} grid cells")
    if kinds is None:
        kind = np.zeros(times.size, dtype=np.uint8)
    else:
        named = {name: code for code, name in enumerate(KIND_NAMES)}
        kind = np.array([named[k] if isinstance(k, str) else int(k)
                         for k in kinds], dtype=np.uint8)
        if kind.size != times.size:
            raise GridMismatch("replay kinds must match node count")
    return SamplePath(TimeGrid(times, kind), increments)


@dataclass
class LevyPath:
    """A spectrally assembled path with values in U.

    The path is stored implicitly: driver component j scaled by
    ``sqrt(eigenvalues[j])`` rides the j-th unit eigenvector.  The driver
    therefore IS the family of standard components of the path, which the
    integral layers consume directly; :func:`project_standard` recovers
    them from the assembled values as a consistency check.
    """

    spec: CovarianceSpec
    driver: SamplePath

    def __post_init__(self):
        if self.driver.n_components != self.spec.n_modes:
            raise DimensionMismatch(
                f"driver has {self.driver.n_components} components, "
                f"spec has {self.spec.n_modes} modes")

    @property
    def grid(self) -> TimeGrid:
        return self.driver.grid

    @cached_property
    def coords(self) -> np.ndarray:
        """Reference coordinates in U at every node, shape (dim_u, n_nodes)."""
        weighted = self.spec.sqrt_eigenvalues[:, None] * self.driver.cumulative
        if self.spec.identity_basis:
            return weighted
        return self.spec.eigenbasis @ weighted

    def value_at(self, t: float) -> np.ndarray:
        return self.coords[:, self.grid.node_at(t)].copy()


def assemble_levy(spec: CovarianceSpec, driver: SamplePath) -> LevyPath:
    """Assemble the U-valued path carried by a driver under a covariance spec."""
    return LevyPath(spec, driver)


def project_standard(path: LevyPath, j: int) -> np.ndarray:
    """Recover standard component j from the assembled values.

    Projects the path onto the j-th unit eigenvector and divides by
    ``sqrt(eigenvalues[j])``.  With the identity basis no transport is
    needed and the stored driver values are returned as-is, bit for bit.
    """
    if not 0 <= j < path.spec.n_modes:
        raise IndexOutOfRange(
            f"component {j} outside range(0, {path.spec.n_modes})")
    if path.spec.identity_basis:
        return path.driver.cumulative[j].copy()
    proj = path.spec.eigenbasis[:, j] @ path.coords
    return proj / path.spec.sqrt_eigenvalues[j]


def coordinate_view(path: LevyPath) -> SamplePath:
    """Reference-coordinate increments of the assembled path.

    Packages the U coordinates as a plain component path so adapted
    integrand evaluators can consume the observable path itself rather
    than a specific spectral decomposition of it.
    """
    weighted = path.spec.sqrt_eigenvalues[:, None] * path.driver.increments
    if path.spec.identity_basis:
        inc = weighted
    else:
        inc = path.spec.eigenbasis @ weighted
    return SamplePath(path.grid, inc, ())


@dataclass(frozen=True)
class EstimateSE:
    estimate: float
    se: float


def empirical_covariance(spec: CovarianceSpec, sampler: PathSampler,
                         u1, u2, t: float, s: float,
                         n_paths: int, seed: int) -> EstimateSE:
    """Monte Carlo estimate of E[<L_t, u1> <L_s, u2>].

    For a path assembled under ``spec`` the analytic value is
    ``min(t, s) * <Q u1, u2>``; the estimate and its standard error let
    callers verify that identity at chosen times and directions.
    """
    if n_paths < 2:
        raise DimensionMismatch("need at least 2 paths for a standard error")
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    if u1.shape != (spec.dim_u,) or u2.shape != (spec.dim_u,):
        raise DimensionMismatch(f"probe vectors must have length {spec.dim_u}")
    if sampler.n_components != spec.n_modes:
        raise SpecMismatch("sampler component count differs from spec modes")
    # ride the projections through the spectral representation once
    w1 = (spec.eigenbasis.T @ u1) * spec.sqrt_eigenvalues
    w2 = (spec.eigenbasis.T @ u2) * spec.sqrt_eigenvalues
    total = 0.0
    totsq = 0.0
    for p in range(n_paths):
        path = sampler.sample(seed, p)
        cum = path.cumulative
        it = path.grid.node_at(t)
        js = path.grid.node_at(s)
        z = float((w1 @ cum[:, it]) * (w2 @ cum[:, js]))
        total += z
        totsq += z * z
    mean = total / n_paths
    var = max(totsq / n_paths - mean * mean, 0.0) * n_paths / (n_paths - 1)
    return EstimateSE(mean, float(np.sqrt(var / n_paths)))


def covariance_of_transport(iso_coord_map: np.ndarray,
                            source: CovarianceSpec) -> np.ndarray:
    """Covariance matrix of a transported path in target coordinates."""
    lam = np.diag(source.eigenvalues)
    return iso_coord_map @ lam @ iso_coord_map.T


def transport_levy(path: LevyPath, iso) -> LevyPath:
    """Carry a path through a weighted-sequence isometry.

    The transported path lives in the target weighted picture (identity
    eigenbasis, target eigenvalue order).  Because the isometry is
    supported on equal-eigenvalue blocks, the standard components of the
    image are plain orthogonal mixes of the source components.
    """
    if not np.array_equal(iso.source_eigenvalues, path.spec.eigenvalues):
        raise SpecMismatch("isometry source does not match the path spec")
    cmap = iso.coord_map
    inc = cmap @ path.driver.increments
    log = []
    for k in range(cmap.shape[0]):
        merged = []
        for j in np.flatnonzero(cmap[k] != 0.0):
            merged.extend((t, cmap[k, j] * a) for t, a in path.driver.jump_log[j])
        log.append(tuple(sorted(merged)))
    target = CovarianceSpec(iso.target_eigenvalues,
                            np.eye(iso.target_eigenvalues.size),
                            path.spec.tail_mass)
    return LevyPath(target, SamplePath(path.grid, inc, tuple(log)))
