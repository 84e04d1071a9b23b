"""Driver sampling, grids, replay and spectral assembly."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levyint import rng
from levyint.errors import (
    DimensionMismatch,
    GridMismatch,
    IndexOutOfRange,
    NonNormalizable,
    SpecMismatch,
    ZeroJumpSize,
)
from levyint.processes import (
    JUMP,
    KIND_NAMES,
    SCHEDULED,
    PathSampler,
    SamplePath,
    StandardLevySpec,
    TimeGrid,
    assemble_levy,
    coordinate_view,
    covariance_of_transport,
    empirical_covariance,
    make_standard_specs,
    project_standard,
    replay_path,
    simulate_paths,
    spec_from_preset,
    transport_levy,
)
from levyint.spaces import build_eigen_isometry, make_covariance

MIXED = {"preset": "mixed", "sigma": 0.7071067811865476, "a": 1.0}


# ---------------------------------------------------------------------------
# addressed random streams


def test_stream_addressing_is_reproducible_and_disjoint():
    a = rng.stream(5, 0, 0, rng.BROWNIAN).standard_normal(4)
    assert np.array_equal(a, rng.stream(5, 0, 0, rng.BROWNIAN).standard_normal(4))
    for other in (rng.stream(5, 1, 0, rng.BROWNIAN),
                  rng.stream(5, 0, 1, rng.BROWNIAN),
                  rng.stream(5, 0, 0, rng.JUMPS),
                  rng.stream(6, 0, 0, rng.BROWNIAN)):
        assert not np.array_equal(a, other.standard_normal(4))
    with pytest.raises(ValueError):
        rng.stream(5, -1)


# ---------------------------------------------------------------------------
# driver presets and normalization


def test_presets_frozen_values():
    b = spec_from_preset("brownian")
    assert b.sigma == 1.0 and b.jumps == ()
    p = spec_from_preset({"preset": "poisson", "a": 0.5})
    assert p.sigma == 0.0 and p.jumps == ((0.5, 4.0),)
    m = spec_from_preset(MIXED)
    assert m.sigma == MIXED["sigma"]
    (size, intensity), = m.jumps
    assert size == 1.0
    assert abs(intensity - 0.5) <= 1e-15


def test_explicit_driver_rescales_intensities():
    spec = spec_from_preset({"sigma": 0.6, "jumps": [[0.5, 1.0], [-0.25, 2.0]]})
    (a1, n1), (a2, n2) = spec.jumps
    assert (a1, a2) == (0.5, -0.25)
    # relative intensities survive the rescale
    assert abs(n2 / n1 - 2.0) <= 1e-12
    rate = spec.sigma ** 2 + a1 * a1 * n1 + a2 * a2 * n2
    assert abs(rate - 1.0) <= 1e-12


def test_driver_validation_errors():
    with pytest.raises(NonNormalizable):
        StandardLevySpec(sigma=0.5)
    with pytest.raises(ZeroJumpSize):
        StandardLevySpec(sigma=0.0, jumps=((0.0, 1.0),))
    with pytest.raises(ZeroJumpSize):
        spec_from_preset({"preset": "poisson", "a": 0.0})
    with pytest.raises(ZeroJumpSize):
        spec_from_preset({"sigma": 0.0, "jumps": [[0.0, 1.0]]})
    with pytest.raises(NonNormalizable):
        spec_from_preset({"preset": "mixed", "sigma": 1.0, "a": 1.0})
    with pytest.raises(NonNormalizable):
        spec_from_preset({"preset": "unknown"})
    with pytest.raises(NonNormalizable):
        spec_from_preset("poisson")
    with pytest.raises(NonNormalizable):
        spec_from_preset({"sigma": 1.0, "jumps": [[1.0, 1.0]]})
    with pytest.raises(NonNormalizable):
        spec_from_preset({"sigma": 0.5})
    with pytest.raises(NonNormalizable):
        spec_from_preset({"sigma": -0.1, "jumps": [[1.0, 1.0]]})


def test_make_standard_specs_cycles_recipes():
    specs = make_standard_specs(5, ("brownian", {"preset": "poisson", "a": 0.5}))
    assert [s.sigma for s in specs] == [1.0, 0.0, 1.0, 0.0, 1.0]
    same = make_standard_specs(3, "brownian")
    assert all(s == same[0] for s in same)
    with pytest.raises(DimensionMismatch):
        make_standard_specs(0, "brownian")
    with pytest.raises(NonNormalizable):
        make_standard_specs(2, ())


@given(sigma=st.floats(0.0, 0.95),
       jumps=st.lists(st.tuples(st.floats(0.05, 2.0), st.floats(0.1, 5.0)),
                      min_size=1, max_size=3))
@settings(max_examples=60, deadline=None)
def test_normalization_always_hits_unit_rate(sigma, jumps):
    spec = spec_from_preset({"sigma": sigma, "jumps": jumps})
    rate = math.fsum([spec.sigma ** 2]
                     + [a * a * nu for a, nu in spec.jumps])
    assert abs(rate - 1.0) <= 1e-12


# ---------------------------------------------------------------------------
# grids and sampled paths


def test_brownian_only_grid_is_the_scheduled_grid():
    sampler = PathSampler(make_standard_specs(1, "brownian"), 1.0, 8)
    path = sampler.sample(1, 0)
    assert np.array_equal(path.grid.times, np.linspace(0.0, 1.0, 9))
    assert np.all(path.grid.kind == SCHEDULED)
    assert path.jump_log == ((),)
    assert path.increments.shape == (1, 8)
    assert path.cumulative[0, 0] == 0.0
    assert abs(path.terminal()[0] - path.increments[0].sum()) <= 1e-12


def test_sampling_is_deterministic_per_address():
    specs = make_standard_specs(2, ("brownian", {"preset": "poisson", "a": 0.5}))
    sampler = PathSampler(specs, 1.0, 8)
    p1 = sampler.sample(7, 3)
    p2 = sampler.sample(7, 3)
    assert np.array_equal(p1.grid.times, p2.grid.times)
    assert np.array_equal(p1.increments, p2.increments)
    assert p1.jump_log == p2.jump_log
    p3 = sampler.sample(7, 4)
    assert not (p1.grid.times.size == p3.grid.times.size
                and np.array_equal(p1.increments, p3.increments))
    q = simulate_paths(specs, 1.0, 8, 7, 3)
    assert np.array_equal(q.increments, p1.increments)


def test_jump_grid_structure_and_compensation():
    sampler = PathSampler(make_standard_specs(1, {"preset": "poisson", "a": 0.5}),
                          1.0, 8)
    path = sampler.sample(11, 2)
    times = path.grid.times
    assert times[0] == 0.0 and times[-1] == 1.0
    assert np.all(np.diff(times) > 0)
    log = path.jump_log[0]
    assert len(log) > 0
    for t, size in log:
        node = path.grid.node_at(t)
        assert times[node] == t
        assert path.grid.kind[node] == JUMP
        assert size == 0.5
    # compensated sum: a * N_T - a * nu * T
    n_jumps = len(log)
    assert abs(path.terminal()[0] - (0.5 * n_jumps - 0.5 * 4.0 * 1.0)) <= 1e-10
    # the increments are exactly compensator plus logged jumps
    oracle = -0.5 * 4.0 * path.grid.dt
    for t, size in log:
        oracle[path.grid.node_at(t) - 1] += size
    assert np.max(np.abs(path.increments[0] - oracle)) <= 1e-12


def test_extra_times_join_the_grid():
    sampler = PathSampler(make_standard_specs(1, "brownian"), 1.0, 4,
                          extra_times=(0.3,))
    path = sampler.sample(1, 0)
    assert 0.3 in path.grid.times
    with pytest.raises(DimensionMismatch):
        PathSampler(make_standard_specs(1, "brownian"), 1.0, 4,
                    extra_times=(1.5,))
    with pytest.raises(DimensionMismatch):
        PathSampler(make_standard_specs(1, "brownian"), 1.0, 0)


def test_node_lookup_semantics():
    grid = TimeGrid(np.array([0.0, 0.25, 0.5, 1.0]),
                    np.zeros(4, dtype=np.uint8))
    assert grid.n_nodes == 4 and grid.n_cells == 3 and grid.horizon == 1.0
    assert np.array_equal(grid.dt, np.array([0.25, 0.25, 0.5]))
    for k, t in enumerate(grid.times):
        assert grid.node_at(float(t)) == k
    assert grid.node_at(0.3) == 1
    with pytest.raises(IndexOutOfRange):
        grid.node_at(-0.1)
    with pytest.raises(IndexOutOfRange):
        grid.node_at(1.1)


def test_replay_round_trip_is_exact():
    sampler = PathSampler(make_standard_specs(2, ("brownian", MIXED)), 1.0, 8)
    path = sampler.sample(3, 5)
    names = [KIND_NAMES[k] for k in path.grid.kind]
    back = replay_path(path.grid.times, path.increments, names)
    assert np.array_equal(back.grid.times, path.grid.times)
    assert np.array_equal(back.grid.kind, path.grid.kind)
    assert np.array_equal(back.increments, path.increments)
    assert np.array_equal(back.cumulative, path.cumulative)
    assert back.jump_log == ()


def test_replay_validation():
    with pytest.raises(GridMismatch):
        replay_path([0.5, 1.0], [[1.0]])
    with pytest.raises(GridMismatch):
        replay_path([0.0], [[]])
    with pytest.raises(GridMismatch):
        replay_path([0.0, 0.5, 0.5], [[1.0, 2.0]])
    with pytest.raises(GridMismatch):
        replay_path([0.0, 0.5, 1.0], [[1.0]])
    with pytest.raises(GridMismatch):
        replay_path([0.0, 1.0], [[1.0]], kinds=["scheduled"])


# ---------------------------------------------------------------------------
# spectral assembly


def test_assembled_path_coordinates_frozen_case():
    spec = make_covariance((0.5, 0.25))
    driver = replay_path([0.0, 0.5, 1.0], [[0.6, 0.4], [1.5, 0.5]])
    levy = assemble_levy(spec, driver)
    half = levy.value_at(0.5)
    assert half[0] == math.sqrt(0.5) * 0.6
    assert half[1] == 0.75
    end = levy.value_at(1.0)
    assert end[0] == math.sqrt(0.5)
    assert end[1] == 1.0
    with pytest.raises(DimensionMismatch):
        assemble_levy(make_covariance((0.5, 0.25, 0.125)), driver)


def test_project_standard_identity_basis_is_bit_exact():
    spec = make_covariance((0.5, 0.25))
    driver = replay_path([0.0, 0.5, 1.0], [[0.6, 0.4], [1.5, 0.5]])
    levy = assemble_levy(spec, driver)
    recovered = project_standard(levy, 1)
    assert np.array_equal(recovered, driver.cumulative[1])
    recovered[0] = 99.0              # the projection is a private copy
    assert driver.cumulative[1][0] == 0.0
    with pytest.raises(IndexOutOfRange):
        project_standard(levy, 2)


def test_project_standard_recovers_components_under_rotation():
    spec = make_covariance((0.5, 0.25), {"seed": 3})
    sampler = PathSampler(make_standard_specs(2, ("brownian", MIXED)), 1.0, 8)
    driver = sampler.sample(2, 0)
    levy = assemble_levy(spec, driver)
    for j in range(2):
        dev = np.max(np.abs(project_standard(levy, j) - driver.cumulative[j]))
        assert dev <= 1e-12
    view = coordinate_view(levy)
    dev = np.max(np.abs(np.cumsum(view.increments, axis=1)
                        - levy.coords[:, 1:]))
    assert dev <= 1e-12
    assert view.jump_log == ()


def test_coordinate_view_identity_basis_is_exact():
    spec = make_covariance((0.25, 0.0625))
    driver = replay_path([0.0, 0.5, 1.0], [[0.6, 0.4], [1.5, 0.5]])
    view = coordinate_view(assemble_levy(spec, driver))
    assert np.array_equal(view.increments,
                          spec.sqrt_eigenvalues[:, None] * driver.increments)


# ---------------------------------------------------------------------------
# second moments


def test_empirical_covariance_validation():
    spec = make_covariance((0.5, 0.25))
    sampler = PathSampler(make_standard_specs(2, "brownian"), 1.0, 4)
    with pytest.raises(DimensionMismatch):
        empirical_covariance(spec, sampler, np.ones(2), np.ones(2), 1.0, 1.0, 1, 0)
    with pytest.raises(DimensionMismatch):
        empirical_covariance(spec, sampler, np.ones(3), np.ones(2), 1.0, 1.0, 4, 0)
    other = PathSampler(make_standard_specs(3, "brownian"), 1.0, 4)
    with pytest.raises(SpecMismatch):
        empirical_covariance(spec, other, np.ones(2), np.ones(2), 1.0, 1.0, 4, 0)


def test_empirical_covariance_unexcited_direction_is_exactly_zero():
    basis = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    spec = make_covariance((0.5, 0.25), basis)
    sampler = PathSampler(make_standard_specs(2, "brownian"), 1.0, 4)
    est = empirical_covariance(spec, sampler, np.array([0.0, 0.0, 1.0]),
                               np.array([1.0, 0.0, 0.0]), 1.0, 0.5, 16, 0)
    assert est.estimate == 0.0 and est.se == 0.0


def test_empirical_covariance_matches_analytic_value():
    spec = make_covariance((1.0,))
    sampler = PathSampler(make_standard_specs(1, "brownian"), 1.0, 4)
    e0 = np.array([1.0])
    est = empirical_covariance(spec, sampler, e0, e0, 1.0, 1.0, 4000, 21)
    assert est.se > 0.0
    assert abs(est.estimate - 1.0) <= 4.0 * est.se
    at_zero = empirical_covariance(spec, sampler, e0, e0, 0.0, 1.0, 16, 21)
    assert at_zero.estimate == 0.0 and at_zero.se == 0.0


# ---------------------------------------------------------------------------
# transport along component isometries


def test_transport_swaps_components_exactly():
    lam = (0.25, 0.25)
    spec = make_covariance(lam)
    swap = np.array([[0.0, 1.0], [1.0, 0.0]])
    iso = build_eigen_isometry(spec, lam, {0.25: swap})
    drivers = make_standard_specs(2, ({"preset": "poisson", "a": 0.5},
                                      {"preset": "poisson", "a": 1.0}))
    driver = PathSampler(drivers, 1.0, 8).sample(13, 1)
    moved = transport_levy(assemble_levy(spec, driver), iso)
    assert np.array_equal(moved.driver.increments, driver.increments[::-1])
    assert moved.driver.jump_log == (driver.jump_log[1], driver.jump_log[0])
    assert moved.spec.identity_basis
    assert np.array_equal(covariance_of_transport(iso.coord_map, spec),
                          np.diag([0.25, 0.25]))


def test_transport_rejects_wrong_source():
    spec = make_covariance((0.5, 0.25))
    iso = build_eigen_isometry(spec, (0.5, 0.25))
    other = make_covariance((0.25, 0.25))
    driver = replay_path([0.0, 1.0], [[1.0], [2.0]])
    with pytest.raises(SpecMismatch):
        transport_levy(assemble_levy(other, driver), iso)
