"""Identity checks, the suite runner and report serialization.

Every check compares the two sides of an identity the integral layers
must satisfy and reduces the outcome to one report row.  Two regimes:

* Statistical checks estimate E[lhs - rhs] over Monte Carlo paths and
  pass when the estimate lies within ``sigmas`` standard errors of zero.
  ``margin`` is |mean difference| / (sigmas * se), so 1.0 is the edge of
  acceptance; with the default 4 sigmas a correct implementation fails a
  single statistic with probability about 6.3e-5.
* Exact checks compare two computations of the same pathwise quantity
  and pass when the worst relative deviation stays below ``rel_tol``
  (margin is deviation / rel_tol, again 1.0 at the edge).  Relative
  means against max(1, magnitude of the reference path).

Reports from multi-statistic checks carry the worst case.  Checks are
deterministic functions of (scenario, seed, n_paths): path indices map
to fixed counter-based streams and reductions use a fixed chunked tree,
so serialized outputs are byte-identical across runs and worker counts.
"""
from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import rng as _rng
from .errors import ConfigInvalid, UnknownCheck
from .integrators import (SimpleIntegrand, angle_bracket, cell_values,
                          covariation_integral, ito_general, ito_h,
                          ito_l2lambda, ito_seq, quadrature_sq_norm,
                          series_terms)
from .processes import SamplePath, assemble_levy, coordinate_view, transport_levy
from .scenarios import (ScenarioConfig, build_integrand, make_sampler,
                        resolve_covariance, restrict_integrand)
from .spaces import (alternate_decomposition, build_eigen_isometry,
                     random_orthogonal)
from .stats import accumulate_paths

BASE_SEED = 20260816

def _default_pairs(n_modes: int) -> tuple:
    """Adjacent component pairs plus the extreme pair; touches every component."""
    pairs = tuple((i, i + 1) for i in range(n_modes - 1))
    if n_modes > 2:
        pairs += ((0, n_modes - 1),)
    return pairs


@dataclass(frozen=True)
class CheckSpec:
    """One check invocation: which identity, on what scenario, how hard."""

    name: str
    scenario: ScenarioConfig
    n_paths: int
    seed: int
    rel_tol: float = 1e-12
    sigmas: float = 4.0
    options: dict = field(default_factory=dict)


@dataclass
class Report:
    name: str
    lhs: float
    rhs: float
    se: float
    margin: float
    passed: bool
    n_paths: int
    seed: int
    wall_time: float = 0.0
    truncation_bound: Optional[float] = None


def _need_paths(spec: CheckSpec, minimum: int) -> None:
    if spec.n_paths < minimum:
        raise ConfigInvalid(
            f"check {spec.name} needs at least {minimum} paths, "
            f"got {spec.n_paths}")


def _finish_statistical(spec: CheckSpec, acc, n_cases: int) -> Report:
    """Reduce an accumulator laid out as [lhs..., rhs..., diff...]."""
    mean = acc.mean
    se = acc.se
    margins = np.empty(n_cases)
    for i in range(n_cases):
        d = abs(float(mean[2 * n_cases + i]))
        s = float(se[2 * n_cases + i])
        if s == 0.0:
            margins[i] = 0.0 if d == 0.0 else float("inf")
        else:
            margins[i] = d / (spec.sigmas * s)
    w = int(np.argmax(margins))
    margin = float(margins[w])
    return Report(spec.name, float(mean[w]), float(mean[n_cases + w]),
                  float(se[2 * n_cases + w]), margin, margin <= 1.0,
                  spec.n_paths, spec.seed)


def _exact_loop(spec: CheckSpec, per_path) -> Report:
    """Reduce per_path(index) -> (abs deviation, rel deviation) to a report."""
    _need_paths(spec, 1)
    worst_abs = 0.0
    worst_rel = 0.0
    for p in range(spec.n_paths):
        a, r = per_path(p)
        worst_abs = max(worst_abs, a)
        worst_rel = max(worst_rel, r)
    margin = worst_rel / spec.rel_tol
    return Report(spec.name, worst_abs, 0.0, 0.0, margin, margin <= 1.0,
                  spec.n_paths, spec.seed)


def _rel(dev: float, ref: float) -> float:
    return dev / max(1.0, ref)


def _block_rotations_for(eigenvalues: np.ndarray,
                         gen: np.random.Generator) -> dict:
    """Haar rotation per repeated eigenvalue, keyed per the isometry builder."""
    out = {}
    for v in np.unique(eigenvalues):
        n = int(np.count_nonzero(eigenvalues == v))
        if n > 1:
            out[float(v)] = random_orthogonal(n, gen)
    return out


# ---------------------------------------------------------------------------
# statistical checks


def _check_isometry1(spec: CheckSpec) -> Report:
    """E ||(X . M)_T||^2 equals E of the squared-norm quadrature (one driver)."""
    _need_paths(spec, 2)
    sc = spec.scenario
    side = sc.sample_side
    sampler = make_sampler(sc)
    integrand = build_integrand(sc, n_inputs=sampler.n_components)

    def stat(p):
        path = sampler.sample(spec.seed, p)
        z = ito_h(integrand, path, 0, sample_side=side).terminal
        lhs = float(z @ z)
        rhs = quadrature_sq_norm(integrand, path)
        return np.array([lhs, rhs, lhs - rhs])

    return _finish_statistical(spec, accumulate_paths(spec.n_paths, stat, 3), 1)


def _check_isometry2(spec: CheckSpec) -> Report:
    """Isometry for a sequence integrand against the whole driver family.

    ``options["route"]`` picks the computation: "seq" integrates the
    sampled family directly, "l2lambda" goes through an assembled path
    and addresses the family as its standard components.
    """
    _need_paths(spec, 2)
    sc = spec.scenario
    side = sc.sample_side
    route = spec.options.get("route", "seq")
    if route not in ("seq", "l2lambda"):
        raise ConfigInvalid(f"isometry2 route {route!r} not one of seq, l2lambda")
    sampler = make_sampler(sc)
    integrand = build_integrand(sc)
    cov = resolve_covariance(sc) if route == "l2lambda" else None

    def stat(p):
        path = sampler.sample(spec.seed, p)
        if cov is None:
            z = ito_seq(integrand, path, sample_side=side).terminal
        else:
            z = ito_l2lambda(integrand, assemble_levy(cov, path),
                             sample_side=side).terminal
        lhs = float(z @ z)
        rhs = quadrature_sq_norm(integrand, path)
        return np.array([lhs, rhs, lhs - rhs])

    return _finish_statistical(spec, accumulate_paths(spec.n_paths, stat, 3), 1)


def _check_isometry4(spec: CheckSpec) -> Report:
    """Isometry for an operator integrand against an assembled path."""
    _need_paths(spec, 2)
    sc = spec.scenario
    side = sc.sample_side
    cov = resolve_covariance(sc)
    sampler = make_sampler(sc)
    raw = build_integrand(sc, n_inputs=sc.n_modes)
    restricted = restrict_integrand(raw, cov)

    def stat(p):
        driver = sampler.sample(spec.seed, p)
        levy = assemble_levy(cov, driver)
        z = ito_general(restricted, levy, sample_side=side).terminal
        lhs = float(z @ z)
        rhs = quadrature_sq_norm(restricted, driver)
        return np.array([lhs, rhs, lhs - rhs])

    return _finish_statistical(spec, accumulate_paths(spec.n_paths, stat, 3), 1)


def _check_orthogonality(spec: CheckSpec) -> Report:
    """Integrals against distinct components are orthogonal in mean square."""
    _need_paths(spec, 2)
    sc = spec.scenario
    side = sc.sample_side
    pairs = tuple(tuple(p) for p in
                  spec.options.get("pairs", _default_pairs(sc.n_modes)))
    for a, b in pairs:
        if not (0 <= a < sc.n_modes and 0 <= b < sc.n_modes and a != b):
            raise ConfigInvalid(f"orthogonality pair {(a, b)} invalid for "
                                f"{sc.n_modes} components")
    m = len(pairs)
    sampler = make_sampler(sc)
    integrand = build_integrand(sc)
    zeros = np.zeros(m)

    def stat(p):
        path = sampler.sample(spec.seed, p)
        vals = cell_values(integrand, path, side)
        terms = np.einsum("kjd,jk->jd", vals, path.increments)
        dots = np.array([float(terms[a] @ terms[b]) for a, b in pairs])
        return np.concatenate([dots, zeros, dots])

    return _finish_statistical(spec, accumulate_paths(spec.n_paths, stat, 3 * m), m)


def _check_covariance_recovery(spec: CheckSpec) -> Report:
    """Sampled second moments match min(t, s) <Q u1, u2>.

    Probes pair reference directions with the leading intended
    eigendirections; the analytic side always uses the intended
    covariance, so a corrupted sampling basis shows up here.
    """
    _need_paths(spec, 2)
    sc = spec.scenario
    clean = resolve_covariance(sc.with_fault(None))
    sim = resolve_covariance(sc)
    sampler = make_sampler(sc)
    e = np.eye(clean.dim_u)
    b0 = clean.eigenbasis[:, 0]
    b1 = clean.eigenbasis[:, 1]
    cases = ((e[0], e[0], 1.0, 1.0),
             (e[0], e[1], 0.5, 1.0),
             (e[1], e[1], 0.25, 0.5),
             (e[0], e[1], 1.0, 0.25),
             (b0, b0, 0.5, 0.5),
             (b0, b1, 1.0, 1.0),
             (b1, b1, 1.0, 0.5),
             (b0, b1, 0.5, 0.5))
    q = clean.eigenbasis @ np.diag(clean.eigenvalues) @ clean.eigenbasis.T
    targets = np.array([min(t, s) * float(u1 @ q @ u2)
                        for u1, u2, t, s in cases])
    # per-probe driver weights under the covariance actually sampled
    w1s = [(sim.eigenbasis.T @ u1) * sim.sqrt_eigenvalues for u1, _, _, _ in cases]
    w2s = [(sim.eigenbasis.T @ u2) * sim.sqrt_eigenvalues for _, u2, _, _ in cases]
    times = sorted({t for _, _, t, s in cases} | {s for _, _, t, s in cases})
    m = len(cases)

    def stat(p):
        path = sampler.sample(spec.seed, p)
        cum = path.cumulative
        at = {t: cum[:, path.grid.node_at(t)] for t in times}
        lhs = np.array([float(w1s[i] @ at[cases[i][2]]) *
                        float(w2s[i] @ at[cases[i][3]]) for i in range(m)])
        return np.concatenate([lhs, targets, lhs - targets])

    return _finish_statistical(spec, accumulate_paths(spec.n_paths, stat, 3 * m), m)


def _check_bracket(spec: CheckSpec) -> Report:
    """Bracket identities on two components and on their integrals.

    Realized quadratic variation against the predictable bracket,
    realized cross variation against zero, and the covariation of two
    integral processes against the time quadrature of the integrand
    inner product.
    """
    _need_paths(spec, 2)
    sc = spec.scenario
    if sc.n_modes < 2:
        raise ConfigInvalid("bracket check needs at least 2 components")
    side = sc.sample_side
    sampler = make_sampler(sc)
    x = build_integrand(sc, n_inputs=sc.n_modes)
    y = build_integrand(sc, n_inputs=sc.n_modes, seed_offset=1000)
    m = 5

    def stat(p):
        path = sampler.sample(spec.seed, p)
        dm = path.increments
        vx = cell_values(x, path, side)
        vy = cell_values(y, path, side)
        ip = np.einsum("kd,kd->k", vx, vy)
        bracket_t = angle_bracket(path.grid, 0, 0).terminal
        ci = covariation_integral(x, y, path, 0, 0, sample_side=side).terminal
        lhs = np.array([float(dm[0] @ dm[0]), float(dm[1] @ dm[1]),
                        float(dm[0] @ dm[1]), float(ip @ (dm[0] * dm[0])),
                        float(ip @ (dm[0] * dm[1]))])
        rhs = np.array([bracket_t, bracket_t, 0.0, ci, 0.0])
        return np.concatenate([lhs, rhs, lhs - rhs])

    return _finish_statistical(spec, accumulate_paths(spec.n_paths, stat, 3 * m), m)


def _check_martingale(spec: CheckSpec) -> Report:
    """Zero mean of the integral at the horizon and at an interior time."""
    _need_paths(spec, 2)
    sc = spec.scenario
    side = sc.sample_side
    probe = float(spec.options.get("probe_time", sc.horizon / 2))
    sampler = make_sampler(sc)
    integrand = build_integrand(sc)
    m = 2 * sc.dim_h + sc.n_modes
    zeros = np.zeros(m)

    def stat(p):
        path = sampler.sample(spec.seed, p)
        z = ito_seq(integrand, path, sample_side=side)
        lhs = np.concatenate([z.terminal, z.value_at(probe), path.terminal()])
        return np.concatenate([lhs, zeros, lhs])

    return _finish_statistical(spec, accumulate_paths(spec.n_paths, stat, 3 * m), m)


def _check_series_orthogonality(spec: CheckSpec) -> Report:
    """Per-mode terms of the operator integral are pairwise orthogonal.

    Includes the resulting additivity of squared norms across the series.
    """
    _need_paths(spec, 2)
    sc = spec.scenario
    side = sc.sample_side
    cov = resolve_covariance(sc)
    sampler = make_sampler(sc)
    raw = build_integrand(sc, n_inputs=sc.n_modes)
    restricted = restrict_integrand(raw, cov)
    pairs = tuple(tuple(p) for p in
                  spec.options.get("pairs", _default_pairs(sc.n_modes)))
    m = len(pairs) + 1

    def stat(p):
        driver = sampler.sample(spec.seed, p)
        levy = assemble_levy(cov, driver)
        terms = series_terms(restricted, levy, sample_side=side)
        tv = np.stack([t.terminal for t in terms])
        dots = np.array([float(tv[a] @ tv[b]) for a, b in pairs])
        total = tv.sum(axis=0)
        sum_sq = float(np.einsum("jd,jd->", tv, tv))
        lhs = np.concatenate([dots, [float(total @ total)]])
        rhs = np.concatenate([np.zeros(len(pairs)), [sum_sq]])
        return np.concatenate([lhs, rhs, lhs - rhs])

    return _finish_statistical(spec, accumulate_paths(spec.n_paths, stat, 3 * m), m)


def _check_truncation_tail(spec: CheckSpec) -> Report:
    """Dropping trailing modes loses exactly the dropped quadrature mass.

    Also reports the a priori tail bound (horizon times dropped column
    mass plus operator norm squared times unresolved tail mass) and
    fails if the sampled mean exceeds it.  Needs a constant integrand so
    the bound is a single number.
    """
    _need_paths(spec, 2)
    sc = spec.scenario
    if sc.integrand.evaluator != "constant":
        raise ConfigInvalid("truncation_tail needs a constant integrand")
    n_sub = int(spec.options.get("n_sub", 3))
    if not 0 < n_sub < sc.n_modes:
        raise ConfigInvalid(f"n_sub {n_sub} must lie strictly between 0 and "
                            f"{sc.n_modes}")
    side = sc.sample_side
    cov = resolve_covariance(sc)
    sampler = make_sampler(sc)
    raw = build_integrand(sc, n_inputs=sc.n_modes)
    restricted = restrict_integrand(raw, cov)

    probe = sampler.sample(spec.seed, 0)
    s0 = cell_values(restricted, probe, "left")[0]
    raw0 = cell_values(raw, probe, "left")[0]
    dropped = float(np.sum(s0[:, n_sub:] ** 2))
    op_sq = float(np.linalg.norm(raw0, 2)) ** 2
    bound = sc.horizon * (dropped + op_sq * cov.tail_mass)

    def stat(p):
        driver = sampler.sample(spec.seed, p)
        vals = cell_values(restricted, driver, side)[:, :, n_sub:]
        diff = np.einsum("kdj,jk->d", vals, driver.increments[n_sub:])
        lhs = float(diff @ diff)
        rhs = float(np.einsum("kdj,kdj,k->", vals, vals, driver.grid.dt))
        return np.array([lhs, rhs, lhs - rhs])

    acc = accumulate_paths(spec.n_paths, stat, 3)
    rep = _finish_statistical(spec, acc, 1)
    mean_lhs = float(acc.mean[0])
    se_lhs = float(acc.se[0])
    if se_lhs > 0.0:
        over = max(0.0, mean_lhs - bound) / (spec.sigmas * se_lhs)
        rep.margin = max(rep.margin, over)
    elif mean_lhs > bound:
        rep.margin = float("inf")
    rep.passed = rep.margin <= 1.0
    rep.truncation_bound = bound
    return rep


# ---------------------------------------------------------------------------
# exact checks


def _check_basis_invariance(spec: CheckSpec) -> Report:
    """The integral does not depend on the orthonormal basis used to expand it."""
    sc = spec.scenario
    side = sc.sample_side
    sampler = make_sampler(sc)
    integrand = build_integrand(sc, n_inputs=sampler.n_components)
    gen = _rng.stream(spec.seed, 0, 0, _rng.BASIS)
    q1 = random_orthogonal(sc.dim_h, gen)
    q2 = random_orthogonal(sc.dim_h, gen)

    def per_path(p):
        path = sampler.sample(spec.seed, p)
        z0 = ito_h(integrand, path, 0, sample_side=side).values
        z1 = ito_h(integrand, path, 0, sample_side=side,
                   projection_basis=q1).values
        z2 = ito_h(integrand, path, 0, sample_side=side,
                   projection_basis=q2).values
        dev = max(float(np.max(np.abs(z1 - z0))),
                  float(np.max(np.abs(z2 - z0))),
                  float(np.max(np.abs(z2 - z1))))
        return dev, _rel(dev, float(np.max(np.abs(z0))))

    return _exact_loop(spec, per_path)


def _check_isometry_invariance(spec: CheckSpec) -> Report:
    """Transport by a component isometry preserves integrals and norms.

    Mixing equal-variance components by an orthogonal map, and the
    integrand coordinates by the same map, changes neither the integral
    path nor the squared-norm quadrature beyond rounding.
    """
    sc = spec.scenario
    side = sc.sample_side
    cov = resolve_covariance(sc)
    gen = _rng.stream(spec.seed, 0, 0, _rng.BASIS)
    rotations = _block_rotations_for(cov.eigenvalues, gen)
    iso = build_eigen_isometry(cov, cov.eigenvalues, rotations)
    cmap = iso.coord_map
    sampler = make_sampler(sc)
    integrand = build_integrand(sc)

    def per_path(p):
        driver = sampler.sample(spec.seed, p)
        z1 = ito_seq(integrand, driver, sample_side=side).values
        levy2 = transport_levy(assemble_levy(cov, driver), iso)
        vals = cell_values(integrand, driver, side)
        vals2 = np.einsum("ab,kbd->kad", cmap, vals)
        inc2 = np.einsum("kjd,jk->kd", vals2, levy2.driver.increments)
        z2 = np.zeros_like(z1)
        np.cumsum(inc2, axis=0, out=z2[1:])
        dz = float(np.max(np.abs(z1 - z2)))
        q1 = quadrature_sq_norm(integrand, driver)
        q2 = float(np.einsum("kjd,kjd,k->", vals2, vals2, driver.grid.dt))
        dev = max(dz, abs(q1 - q2))
        return dev, _rel(dev, max(float(np.max(np.abs(z1))), q1))

    return _exact_loop(spec, per_path)


def _check_well_defined(spec: CheckSpec) -> Report:
    """Two eigendecompositions of one covariance give one integral.

    The integrand is a function of the observable path (its reference
    coordinates), restricted per decomposition; integral paths and
    reconstructed path coordinates must agree to rounding.
    """
    sc = spec.scenario
    side = sc.sample_side
    cov1 = resolve_covariance(sc)
    gen = _rng.stream(spec.seed, 0, 0, _rng.BASIS)
    rotations = _block_rotations_for(cov1.eigenvalues, gen)
    iso = build_eigen_isometry(cov1, cov1.eigenvalues, rotations)
    cov2 = alternate_decomposition(cov1, iso)
    cmap = iso.coord_map
    sampler = make_sampler(sc)
    raw = build_integrand(sc, n_inputs=cov1.dim_u)
    r1 = restrict_integrand(raw, cov1)
    r2 = restrict_integrand(raw, cov2)

    def per_path(p):
        d1 = sampler.sample(spec.seed, p)
        levy1 = assemble_levy(cov1, d1)
        view = coordinate_view(levy1)
        s1 = cell_values(r1, view, side)
        s2 = cell_values(r2, view, side)
        inc2 = cmap @ d1.increments
        levy2 = assemble_levy(cov2, SamplePath(d1.grid, inc2, ()))
        a1 = np.einsum("kdj,jk->kd", s1, d1.increments)
        a2 = np.einsum("kdj,jk->kd", s2, inc2)
        z1 = np.zeros((d1.grid.n_nodes, sc.dim_h))
        z2 = np.zeros_like(z1)
        np.cumsum(a1, axis=0, out=z1[1:])
        np.cumsum(a2, axis=0, out=z2[1:])
        dz = float(np.max(np.abs(z1 - z2)))
        dc = float(np.max(np.abs(levy1.coords - levy2.coords)))
        dev = max(dz, dc)
        ref = max(float(np.max(np.abs(z1))), float(np.max(np.abs(levy1.coords))))
        return dev, _rel(dev, ref)

    return _exact_loop(spec, per_path)


def _check_simple_exact(spec: CheckSpec) -> Report:
    """Integrating a piecewise constant integrand telescopes exactly."""
    sc = spec.scenario
    side = sc.sample_side
    cfg = sc.integrand
    if cfg.family != "simple":
        raise ConfigInvalid("simple_exact needs a simple-family integrand")
    if cfg.breakpoints is None:
        raise ConfigInvalid("simple_exact needs explicit breakpoints")
    b = np.asarray(cfg.breakpoints, dtype=float)
    if cfg.value is not None:
        values = np.asarray(cfg.value, dtype=float)
    else:
        gen = _rng.stream(cfg.seed, 0, 0, _rng.INTEGRAND)
        values = cfg.scale * gen.standard_normal((b.size - 1, sc.dim_h))
    integrand = SimpleIntegrand(b, values)
    sampler = make_sampler(sc, extra_times=tuple(b[1:-1]))

    def per_path(p):
        path = sampler.sample(spec.seed, p)
        z = ito_h(integrand, path, 0, sample_side=side)
        cum = path.cumulative[0]
        nodes = [path.grid.node_at(t) for t in b]
        partial = np.zeros(sc.dim_h)
        dev = 0.0
        ref = 0.0
        for i in range(values.shape[0]):
            partial = partial + values[i] * (cum[nodes[i + 1]] - cum[nodes[i]])
            dev = max(dev, float(np.max(np.abs(z.values[nodes[i + 1]] - partial))))
            ref = max(ref, float(np.max(np.abs(partial))))
        return dev, _rel(dev, ref)

    return _exact_loop(spec, per_path)


# ---------------------------------------------------------------------------
# registry, suite and serialization


CHECKS = {
    "isometry1": _check_isometry1,
    "isometry2": _check_isometry2,
    "isometry4": _check_isometry4,
    "orthogonality": _check_orthogonality,
    "basis_invariance": _check_basis_invariance,
    "isometry_invariance": _check_isometry_invariance,
    "well_defined": _check_well_defined,
    "covariance_recovery": _check_covariance_recovery,
    "bracket": _check_bracket,
    "martingale": _check_martingale,
    "simple_exact": _check_simple_exact,
    "series_orthogonality": _check_series_orthogonality,
    "truncation_tail": _check_truncation_tail,
}

# checks that must catch each injected fault: the sampling-side fault
# biases adapted integrands and breaks the telescoping identity; the
# basis fault changes what covariance is actually sampled
FAULT_CHECKS = {
    "right_point": ("simple_exact", "martingale", "isometry2"),
    "nonorthogonal_basis": ("covariance_recovery",),
}


def run_check(spec: CheckSpec) -> Report:
    fn = CHECKS.get(spec.name)
    if fn is None:
        raise UnknownCheck(f"unknown check {spec.name!r}; valid names: "
                           f"{', '.join(CHECKS)}")
    t0 = time.perf_counter()
    report = fn(spec)
    report.wall_time = time.perf_counter() - t0
    return report


def run_suite(specs, parallelism: int = 1) -> list:
    """Run checks in order; results do not depend on ``parallelism``."""
    specs = list(specs)
    if parallelism <= 1:
        return [run_check(s) for s in specs]
    with ProcessPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(run_check, specs))


_MIXED_SIGMA = 0.7071067811865476

_SINGLE_MIXED = ({"preset": "mixed", "sigma": _MIXED_SIGMA, "a": 1.0},)


def _block_spectrum(n_modes: int) -> tuple:
    """Dyadic eigenvalues with exact repeats, one pair per level."""
    return tuple(0.5 ** (2 + (j + 1) // 2) for j in range(n_modes))


def default_suite(n_paths: int = 100_000, n_exact: int = 64,
                  base_seed: int = BASE_SEED,
                  desk: Optional[ScenarioConfig] = None) -> list:
    """The standing battery: every check once, isometry2 on both routes.

    ``desk`` supplies the shared scale (dimensions, horizon, grid,
    covariance law, driver recipe, integrand scale); each entry swaps in
    the structure its identity needs.
    """
    from .scenarios import CovarianceConfig, IntegrandConfig

    desk = ScenarioConfig() if desk is None else desk
    evaluator = desk.integrand.evaluator
    if evaluator not in ("driver_linear", "driver_tanh"):
        evaluator = "driver_linear"
    scale = desk.integrand.scale
    one = replace(desk, n_modes=1, drivers=_SINGLE_MIXED,
                  covariance=CovarianceConfig(eigenvalues=(1.0,)))
    hvec = IntegrandConfig(carrier="hvector", evaluator=evaluator, scale=scale)
    seqh = IntegrandConfig(carrier="seqh", evaluator=evaluator, scale=scale)
    oper = IntegrandConfig(carrier="operator", evaluator=evaluator, scale=scale)
    rand_basis = CovarianceConfig(desk.covariance.eigenvalues, {"seed": 7},
                                  desk.covariance.tail_mass)
    blocks_id = CovarianceConfig(eigenvalues=_block_spectrum(desk.n_modes))
    blocks_rand = CovarianceConfig(eigenvalues=_block_spectrum(desk.n_modes),
                                   basis={"seed": 11})

    entries = [
        ("isometry1", replace(one, integrand=replace(hvec, seed=101)),
         n_paths, {}),
        ("isometry2", replace(desk, integrand=replace(seqh, seed=102)),
         n_paths, {"route": "seq"}),
        ("isometry2", replace(desk, integrand=replace(seqh, seed=103)),
         n_paths, {"route": "l2lambda"}),
        ("isometry4", replace(desk, covariance=rand_basis,
                              integrand=replace(oper, seed=104)),
         n_paths, {}),
        ("orthogonality", replace(desk, integrand=replace(seqh, seed=105)),
         n_paths, {}),
        ("basis_invariance", replace(one, integrand=replace(hvec, seed=106)),
         n_exact, {}),
        ("isometry_invariance", replace(desk, covariance=blocks_id,
                                        integrand=replace(seqh, seed=107)),
         n_exact, {}),
        ("well_defined", replace(desk, covariance=blocks_rand,
                                 integrand=replace(oper, seed=108)),
         n_exact, {}),
        ("covariance_recovery", replace(desk, covariance=rand_basis),
         n_paths, {}),
        ("bracket", replace(desk, n_modes=2,
                            integrand=replace(hvec, seed=110)),
         n_paths, {}),
        ("martingale", replace(desk, integrand=replace(seqh, seed=111)),
         n_paths, {}),
        ("simple_exact",
         replace(one, integrand=IntegrandConfig(
             family="simple", carrier="hvector", evaluator="constant",
             seed=112, scale=scale,
             breakpoints=(0.0, 0.3 * desk.horizon, 0.7 * desk.horizon,
                          desk.horizon))),
         n_exact, {}),
        ("series_orthogonality", replace(desk, covariance=rand_basis,
                                         integrand=replace(oper, seed=113)),
         n_paths, {}),
        ("truncation_tail",
         replace(desk, covariance=rand_basis,
                 integrand=replace(oper, evaluator="constant", seed=114)),
         n_paths, {"n_sub": 3}),
    ]
    return [CheckSpec(name, scenario, paths, base_seed + i, options=options)
            for i, (name, scenario, paths, options) in enumerate(entries, 1)]


def negative_control_suite(fault: str, n_paths: int = 100_000,
                           n_exact: int = 64,
                           base_seed: int = BASE_SEED,
                           desk: Optional[ScenarioConfig] = None) -> list:
    """The detection battery for one injected fault."""
    if fault not in FAULT_CHECKS:
        raise ConfigInvalid(f"fault {fault!r} not one of "
                            f"{', '.join(FAULT_CHECKS)}")
    names = FAULT_CHECKS[fault]
    return [replace(s, scenario=s.scenario.with_fault(fault))
            for s in default_suite(n_paths, n_exact, base_seed, desk)
            if s.name in names]


def fault_detected(reports) -> bool:
    return any(not r.passed for r in reports)


def suite_passed(reports) -> bool:
    return all(r.passed for r in reports)


def report_to_dict(report: Report, include_timings: bool = False) -> dict:
    out = {
        "name": report.name,
        "lhs": report.lhs,
        "rhs": report.rhs,
        "se": report.se,
        "margin": report.margin,
        "pass": report.passed,
        "nPaths": report.n_paths,
        "seed": report.seed,
        "wallTime": report.wall_time if include_timings else 0.0,
    }
    if report.truncation_bound is not None:
        out["truncationBound"] = report.truncation_bound
    return out


def reports_to_json(reports, include_timings: bool = False) -> str:
    rows = [report_to_dict(r, include_timings) for r in reports]
    return json.dumps(rows, indent=2) + "\n"

_CSV_COLUMNS = ("name", "lhs", "rhs", "se", "margin", "pass", "nPaths",
                "seed", "wallTime", "truncationBound")


def reports_to_csv(reports, include_timings: bool = False) -> str:
    lines = [",".join(_CSV_COLUMNS)]
    for r in reports:
        d = report_to_dict(r, include_timings)
        row = [d["name"], repr(d["lhs"]), repr(d["rhs"]), repr(d["se"]),
               repr(d["margin"]), "true" if d["pass"] else "false",
               str(d["nPaths"]), str(d["seed"]), repr(d["wallTime"]),
               "" if r.truncation_bound is None else repr(r.truncation_bound)]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"
