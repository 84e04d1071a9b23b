"""Scenario descriptions and the integrand evaluator registry.

A scenario bundles everything a check or CLI run needs to generate paths
and integrands: space dimensions, covariance spectrum, driver recipe and
an integrand description.  Scenarios are plain data so they serialize to
the config format and pickle cleanly across worker processes.

Integrand evaluators are registered by name.  Each evaluator receives the
sampled path and returns one value per grid node, where the value at node
k is computed from path data up to node k only.  That convention is what
makes left-point sampling predictable; the injectable right-point fault
deliberately breaks it.

Evaluators:

* ``constant``: a fixed value, given explicitly or drawn once per scenario.
* ``driver_linear``: value at node k is affine in the cumulative driver
  values at node k.  Unbounded but square-integrable.
* ``driver_tanh``: tanh of the same affine expression, hence bounded.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import partial
from typing import Optional

import numpy as np
from scipy.special import zeta as _hurwitz_zeta

from . import rng as _rng
from .errors import ConfigInvalid
from .integrators import GridIntegrand, SimpleIntegrand
from .processes import PathSampler, make_standard_specs
from .spaces import CovarianceSpec, make_covariance

CARRIERS = ("hvector", "seqh", "operator")
FAULTS = ("right_point", "nonorthogonal_basis")

# perturbation size for the deliberately broken eigenbasis; far above the
# construction tolerance and far above 4-sigma noise at default path counts
BASIS_FAULT_EPS = 0.05


@dataclass(frozen=True)
class CovarianceConfig:
    """Spectrum given either explicitly or by a decay law.

    ``eigenvalues`` is a tuple of floats, or a mapping with ``kind`` in
    {"power", "geometric"}: power means c * j**(-p) with p > 1, geometric
    means c * r**j with 0 < r < 1, both for j = 1..n_modes.  ``tail_mass``
    defaults to the analytic remainder of the law (0 for explicit lists).
    """

    eigenvalues: object
    basis: object = "identity"       # "identity" | {"seed": int} | nested list
    tail_mass: Optional[float] = None

    def resolve(self, n_modes: int):
        """Return (eigenvalue array, tail mass)."""
        ev = self.eigenvalues
        if isinstance(ev, dict):
            kind = ev.get("kind")
            count = int(ev.get("n_modes", n_modes))
            c = float(ev.get("c", 1.0))
            js = np.arange(1, count + 1, dtype=float)
            if kind == "power":
                p = float(ev["p"])
                if p <= 1:
                    raise ConfigInvalid("covariance.eigenvalues.p must exceed 1")
                lam = c * js ** (-p)
                tail = c * float(_hurwitz_zeta(p, count + 1))
            elif kind == "geometric":
                r = float(ev["r"])
                if not 0 < r < 1:
                    raise ConfigInvalid("covariance.eigenvalues.r must lie in (0, 1)")
                lam = c * r ** js
                tail = c * r ** (count + 1) / (1.0 - r)
            else:
                raise ConfigInvalid(
                    f"covariance.eigenvalues.kind {kind!r} not one of power, geometric")
        else:
            lam = np.asarray(ev, dtype=float)
            tail = 0.0
        if self.tail_mass is not None:
            tail = float(self.tail_mass)
        return lam, tail


@dataclass(frozen=True)
class IntegrandConfig:
    """What to integrate: family, value carrier, evaluator and its draw."""

    family: str = "grid"             # "grid" | "simple"
    carrier: str = "operator"        # "hvector" | "seqh" | "operator"
    evaluator: str = "driver_linear"
    seed: int = 0
    scale: float = 1.0
    value: object = None             # explicit constant value (nested list ok)
    breakpoints: Optional[tuple] = None   # simple family only

    def __post_init__(self):
        if self.carrier not in CARRIERS:
            raise ConfigInvalid(
                f"integrand.carrier {self.carrier!r} not one of {CARRIERS}")
        if self.family not in ("grid", "simple"):
            raise ConfigInvalid(
                f"integrand.family {self.family!r} not one of grid, simple")


@dataclass(frozen=True)
class ScenarioConfig:
    """Complete description of one simulation setup."""

    dim_h: int = 4
    n_modes: int = 6
    horizon: float = 1.0
    n_scheduled: int = 64
    covariance: CovarianceConfig = field(
        default_factory=lambda: CovarianceConfig(
            eigenvalues={"kind": "geometric", "c": 0.5, "r": 0.5}))
    drivers: object = ("brownian",
                       {"preset": "poisson", "a": 0.5},
                       {"preset": "mixed", "sigma": 0.7071067811865476, "a": 1.0})
    integrand: IntegrandConfig = field(default_factory=IntegrandConfig)
    fault: Optional[str] = None

    def __post_init__(self):
        if self.fault is not None and self.fault not in FAULTS:
            raise ConfigInvalid(f"fault {self.fault!r} not one of {FAULTS}")

    @property
    def sample_side(self) -> str:
        return "right" if self.fault == "right_point" else "left"

    def with_fault(self, fault: Optional[str]) -> "ScenarioConfig":
        return replace(self, fault=fault)


def resolve_covariance(scenario: ScenarioConfig) -> CovarianceSpec:
    """Materialize the covariance spec, applying the basis fault if injected."""
    lam, tail = scenario.covariance.resolve(scenario.n_modes)
    spec = make_covariance(lam, scenario.covariance.basis, tail)
    if scenario.fault != "nonorthogonal_basis":
        return spec
    basis = np.array(spec.eigenbasis)
    if basis.shape[1] >= 2:
        basis[:, 0] += BASIS_FAULT_EPS * basis[:, 1]
    else:
        basis[:, 0] *= 1.0 + BASIS_FAULT_EPS
    # deliberate bypass of make_covariance: the point is a broken basis
    return CovarianceSpec(spec.eigenvalues, basis, spec.tail_mass)


def resolve_drivers(scenario: ScenarioConfig) -> tuple:
    return make_standard_specs(scenario.n_modes, scenario.drivers)


def make_sampler(scenario: ScenarioConfig, extra_times=(),
                 n_components: Optional[int] = None) -> PathSampler:
    n = scenario.n_modes if n_components is None else n_components
    specs = make_standard_specs(n, scenario.drivers)
    return PathSampler(specs, scenario.horizon, scenario.n_scheduled,
                       tuple(extra_times))


# ---------------------------------------------------------------------------
# evaluator registry


def _value_shape(carrier: str, dim_h: int, n_modes: int) -> tuple:
    if carrier == "hvector":
        return (dim_h,)
    if carrier == "seqh":
        return (n_modes, dim_h)
    return (dim_h, n_modes)


def _eval_constant(path, value: np.ndarray) -> np.ndarray:
    n = path.grid.n_nodes
    return np.broadcast_to(value, (n,) + value.shape)


def _eval_driver_linear(path, c0: np.ndarray, c1: np.ndarray) -> np.ndarray:
    cum = path.cumulative
    return np.einsum("mk,m...->k...", cum, c1) + c0


def _eval_driver_tanh(path, c0: np.ndarray, c1: np.ndarray) -> np.ndarray:
    cum = path.cumulative
    return np.tanh(np.einsum("mk,m...->k...", cum, c1) + c0)


_GRID_EVALUATORS = ("constant", "driver_linear", "driver_tanh")


def build_grid_integrand(cfg: IntegrandConfig, carrier_shape: tuple,
                         n_inputs: int) -> GridIntegrand:
    """Materialize a grid integrand; coefficient draws are scenario-level.

    ``n_inputs`` is the number of path components the evaluator sees
    (driver components, or reference coordinates for observable-path
    integrands).
    """
    if cfg.evaluator not in _GRID_EVALUATORS:
        raise ConfigInvalid(
            f"integrand.evaluator {cfg.evaluator!r} not one of {_GRID_EVALUATORS}")
    gen = _rng.stream(cfg.seed, 0, 0, _rng.INTEGRAND)
    if cfg.evaluator == "constant":
        if cfg.value is not None:
            value = np.asarray(cfg.value, dtype=float)
            if value.shape != carrier_shape:
                raise ConfigInvalid(
                    f"integrand.value shape {value.shape} does not match "
                    f"carrier shape {carrier_shape}")
        else:
            value = cfg.scale * gen.standard_normal(carrier_shape)
        return GridIntegrand(partial(_eval_constant, value=value))
    c0 = cfg.scale * gen.standard_normal(carrier_shape)
    c1 = (cfg.scale / np.sqrt(n_inputs)) * gen.standard_normal(
        (n_inputs,) + carrier_shape)
    fn = _eval_driver_linear if cfg.evaluator == "driver_linear" else _eval_driver_tanh
    return GridIntegrand(partial(fn, c0=c0, c1=c1))


def _eval_restricted(path, raw_eval, basis, sqrt_lam) -> np.ndarray:
    raw = raw_eval(path)
    if basis is not None:
        raw = np.einsum("kdu,uj->kdj", raw, basis)
    return raw * sqrt_lam


def restrict_integrand(raw: GridIntegrand, spec: CovarianceSpec) -> GridIntegrand:
    """Turn a reference-coordinate operator integrand into Hilbert-Schmidt form.

    The raw evaluator emits (dim_h, dim_u) matrices acting on reference
    coordinates of U.  Composing with the eigenbasis and scaling column j
    by sqrt(eigenvalues[j]) yields the weighted-column form the integral
    layers consume.  Faithful to how a bounded operator is restricted to
    the variance-carrying subspace.
    """
    basis = None if spec.identity_basis else spec.eigenbasis
    return GridIntegrand(partial(_eval_restricted, raw_eval=raw.evaluator,
                                 basis=basis, sqrt_lam=spec.sqrt_eigenvalues))


def build_integrand(scenario: ScenarioConfig, *, n_inputs: Optional[int] = None,
                    seed_offset: int = 0):
    """Materialize the scenario integrand (grid family).

    Returns the integrand in the value convention of its carrier; operator
    carriers emit reference-coordinate matrices and callers restrict them
    per covariance spec via :func:`restrict_integrand`.
    """
    cfg = scenario.integrand
    if cfg.family != "grid":
        raise ConfigInvalid("build_integrand handles the grid family only")
    if seed_offset:
        cfg = replace(cfg, seed=cfg.seed + seed_offset)
    shape = _value_shape(cfg.carrier, scenario.dim_h, scenario.n_modes)
    inputs = scenario.n_modes if n_inputs is None else n_inputs
    return build_grid_integrand(cfg, shape, inputs)


def build_simple_integrand(scenario: ScenarioConfig) -> SimpleIntegrand:
    """Materialize an explicit simple integrand from the scenario config."""
    cfg = scenario.integrand
    if cfg.family != "simple":
        raise ConfigInvalid("scenario integrand family is not simple")
    if cfg.breakpoints is None or cfg.value is None:
        raise ConfigInvalid(
            "simple integrands need explicit breakpoints and value")
    values = np.asarray(cfg.value, dtype=float)
    return SimpleIntegrand(np.asarray(cfg.breakpoints, dtype=float), values)
