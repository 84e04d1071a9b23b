"""Check harness: accumulators, registry, suites, fault detection, reports."""

import json

import numpy as np
import pytest

from levyint import rng
from levyint.checks import (
    BASE_SEED,
    CHECKS,
    FAULT_CHECKS,
    CheckSpec,
    Report,
    _block_spectrum,
    _default_pairs,
    default_suite,
    fault_detected,
    negative_control_suite,
    report_to_dict,
    reports_to_csv,
    reports_to_json,
    run_check,
    run_suite,
    suite_passed,
)
from levyint.errors import ConfigInvalid, UnknownCheck
from levyint.scenarios import CovarianceConfig, IntegrandConfig, ScenarioConfig
from levyint.stats import MomentAccumulator, accumulate_paths, pairwise_merge

ONE_MODE = ScenarioConfig(
    n_modes=1, drivers=("brownian",), covariance=CovarianceConfig((1.0,)),
    integrand=IntegrandConfig(carrier="hvector", evaluator="driver_linear"))


def _samples(seed: int, n: int, k: int) -> np.ndarray:
    return rng.stream(seed, 0).standard_normal((n, k))


# ---------------------------------------------------------------------------
# moment accumulation


def test_accumulator_matches_numpy_moments():
    x = _samples(1, 400, 3)
    acc = MomentAccumulator.from_samples(x)
    assert acc.count == 400
    assert np.max(np.abs(acc.mean - x.mean(axis=0))) <= 1e-12
    assert np.max(np.abs(acc.variance - x.var(axis=0, ddof=1))) <= 1e-12
    assert np.max(np.abs(acc.se - np.sqrt(x.var(axis=0, ddof=1) / 400))) <= 1e-12


def test_accumulator_rejects_flat_samples_and_degenerate_counts():
    with pytest.raises(ValueError):
        MomentAccumulator.from_samples(np.zeros(5))
    single = MomentAccumulator.from_samples(np.array([[1.0, 2.0]]))
    assert single.variance.tolist() == [0.0, 0.0]
    assert single.se.tolist() == [0.0, 0.0]


def test_merge_agrees_with_whole_sample():
    x = _samples(2, 513, 4)
    whole = MomentAccumulator.from_samples(x)
    merged = MomentAccumulator.from_samples(x[:200]).merge(
        MomentAccumulator.from_samples(x[200:]))
    assert merged.count == whole.count
    assert np.max(np.abs(merged.mean - whole.mean)) <= 1e-12
    assert np.max(np.abs(merged.variance - whole.variance)) <= 1e-12


def test_pairwise_merge_tree():
    x = _samples(3, 300, 2)
    parts = [MomentAccumulator.from_samples(x[i:i + 60]) for i in range(0, 300, 60)]
    tree = pairwise_merge(parts)
    whole = MomentAccumulator.from_samples(x)
    assert tree.count == 300
    assert np.max(np.abs(tree.mean - whole.mean)) <= 1e-12
    assert np.max(np.abs(tree.variance - whole.variance)) <= 1e-12
    with pytest.raises(ValueError):
        pairwise_merge([])


def test_accumulate_paths_chunking_and_determinism():
    def stat(p):
        return rng.stream(9, p).standard_normal(3)

    small = accumulate_paths(23, stat, 3, chunk_size=7)
    big = accumulate_paths(23, stat, 3, chunk_size=1000)
    again = accumulate_paths(23, stat, 3, chunk_size=7)
    assert small.count == big.count == 23
    assert np.max(np.abs(small.mean - big.mean)) <= 1e-12
    assert np.array_equal(small.mean, again.mean)
    assert np.array_equal(small.m2, again.m2)
    with pytest.raises(ValueError):
        accumulate_paths(0, stat, 3)


# ---------------------------------------------------------------------------
# single checks


def test_zero_integrand_isometry_is_exactly_tight():
    scenario = ScenarioConfig(
        n_modes=1, drivers=("brownian",), covariance=CovarianceConfig((1.0,)),
        integrand=IntegrandConfig(carrier="hvector", evaluator="constant",
                                  value=(0.0, 0.0, 0.0, 0.0)))
    report = run_check(CheckSpec("isometry1", scenario, 4, 77))
    assert report.passed and report.margin == 0.0
    assert report.lhs == 0.0 and report.rhs == 0.0 and report.se == 0.0
    assert report.n_paths == 4 and report.seed == 77
    assert report.wall_time > 0.0


def test_unknown_check_name_rejected():
    with pytest.raises(UnknownCheck):
        run_check(CheckSpec("isometry9", ONE_MODE, 4, 1))


def test_check_preconditions_rejected():
    with pytest.raises(ConfigInvalid):
        run_check(CheckSpec("isometry1", ONE_MODE, 1, 1))
    with pytest.raises(ConfigInvalid):
        run_check(CheckSpec("bracket", ScenarioConfig(
            n_modes=1, drivers=("brownian",),
            covariance=CovarianceConfig((1.0,))), 4, 1))
    with pytest.raises(ConfigInvalid):
        run_check(CheckSpec("orthogonality", ScenarioConfig(
            integrand=IntegrandConfig(carrier="seqh")), 4, 1,
            options={"pairs": ((0, 0),)}))
    with pytest.raises(ConfigInvalid):
        run_check(CheckSpec("isometry2", ScenarioConfig(
            integrand=IntegrandConfig(carrier="seqh")), 4, 1,
            options={"route": "spectral"}))
    tail_scenario = ScenarioConfig(
        integrand=IntegrandConfig(carrier="operator", evaluator="constant"))
    with pytest.raises(ConfigInvalid):
        run_check(CheckSpec("truncation_tail", ScenarioConfig(
            integrand=IntegrandConfig(carrier="operator")), 4, 1))
    with pytest.raises(ConfigInvalid):
        run_check(CheckSpec("truncation_tail", tail_scenario, 4, 1,
                            options={"n_sub": 0}))
    with pytest.raises(ConfigInvalid):
        run_check(CheckSpec("truncation_tail", tail_scenario, 4, 1,
                            options={"n_sub": 6}))


def test_isometry2_routes_are_the_same_computation():
    scenario = ScenarioConfig(
        integrand=IntegrandConfig(carrier="seqh", evaluator="driver_linear",
                                  seed=42))
    seq = run_check(CheckSpec("isometry2", scenario, 400, 555,
                              options={"route": "seq"}))
    spectral = run_check(CheckSpec("isometry2", scenario, 400, 555,
                                   options={"route": "l2lambda"}))
    # identity eigenbasis: the assembled path stores the same driver
    assert report_to_dict(seq) == report_to_dict(spectral)


# ---------------------------------------------------------------------------
# suites


def test_default_suite_layout():
    suite = default_suite(300, 8)
    names = [s.name for s in suite]
    assert names == [
        "isometry1", "isometry2", "isometry2", "isometry4", "orthogonality",
        "basis_invariance", "isometry_invariance", "well_defined",
        "covariance_recovery", "bracket", "martingale", "simple_exact",
        "series_orthogonality", "truncation_tail"]
    assert [s.seed for s in suite] == [BASE_SEED + i for i in range(1, 15)]
    exact = {"basis_invariance", "isometry_invariance", "well_defined",
             "simple_exact"}
    for s in suite:
        assert s.n_paths == (8 if s.name in exact else 300)
        assert s.name in CHECKS
    routes = [s.options.get("route") for s in suite if s.name == "isometry2"]
    assert routes == ["seq", "l2lambda"]


def test_suite_results_do_not_depend_on_parallelism():
    suite = default_suite(300, 8)
    serial = run_suite(suite)
    parallel = run_suite(suite, parallelism=2)
    assert reports_to_json(serial) == reports_to_json(parallel)
    assert reports_to_csv(serial) == reports_to_csv(parallel)


def test_negative_control_filtering():
    controls = negative_control_suite("right_point", 50, 4)
    assert [s.name for s in controls] == [
        "isometry2", "isometry2", "martingale", "simple_exact"]
    assert all(s.scenario.fault == "right_point" for s in controls)
    assert [s.n_paths for s in controls] == [50, 50, 50, 4]
    basis = negative_control_suite("nonorthogonal_basis", 50, 4)
    assert [s.name for s in basis] == ["covariance_recovery"]
    assert basis[0].scenario.fault == "nonorthogonal_basis"
    with pytest.raises(ConfigInvalid):
        negative_control_suite("late_clock")


def test_right_point_fault_is_detected():
    reports = run_suite(negative_control_suite("right_point", 2000, 16))
    assert fault_detected(reports)
    by_name = {r.name: r for r in reports}
    # sampling at the right endpoint breaks the telescoping sum outright
    assert not by_name["simple_exact"].passed
    assert by_name["simple_exact"].margin > 1e6


def test_nonorthogonal_basis_fault_is_detected():
    reports = run_suite(negative_control_suite("nonorthogonal_basis", 30_000, 8))
    assert fault_detected(reports)
    assert not suite_passed(reports)


# ---------------------------------------------------------------------------
# helpers and serialization


def test_block_spectrum_has_exact_repeats():
    assert _block_spectrum(6) == (0.25, 0.125, 0.125, 0.0625, 0.0625, 0.03125)


def test_default_pairs():
    assert _default_pairs(2) == ((0, 1),)
    assert _default_pairs(4) == ((0, 1), (1, 2), (2, 3), (0, 3))


def test_suite_verdict_helpers():
    good = Report("a", 0.0, 0.0, 0.0, 0.0, True, 4, 1)
    bad = Report("b", 1.0, 0.0, 0.1, 2.5, False, 4, 1)
    assert suite_passed([good]) and not suite_passed([good, bad])
    assert fault_detected([good, bad]) and not fault_detected([good])


def test_report_dict_layout_and_timing_gate():
    r = Report("alpha", 1.5, 1.25, 0.1, 0.625, True, 100, 7, wall_time=3.25)
    d = report_to_dict(r)
    assert list(d) == ["name", "lhs", "rhs", "se", "margin", "pass",
                       "nPaths", "seed", "wallTime"]
    assert d["wallTime"] == 0.0
    assert report_to_dict(r, include_timings=True)["wallTime"] == 3.25
    bounded = Report("beta", 0.5, 0.25, 0.0, 2.5, False, 10, 8,
                     truncation_bound=0.125)
    db = report_to_dict(bounded)
    assert list(db)[-1] == "truncationBound" and db["truncationBound"] == 0.125


def test_json_report_round_trip():
    r = Report("alpha", 1.0 / 3.0, 1.25, 0.1, 0.625, True, 100, 7)
    text = reports_to_json([r])
    assert text.endswith("\n")
    rows = json.loads(text)
    assert rows[0]["lhs"] == 1.0 / 3.0
    assert rows[0]["pass"] is True


def test_csv_report_shape():
    rows = [
        Report("alpha", 1.0 / 3.0, 1.25, 0.1, 0.625, True, 100, 7),
        Report("beta", 0.5, 0.25, 0.0, 2.5, False, 10, 8,
               truncation_bound=0.125),
    ]
    text = reports_to_csv(rows)
    lines = text.strip().split("\n")
    assert lines[0] == ("name,lhs,rhs,se,margin,pass,nPaths,seed,"
                        "wallTime,truncationBound")
    first = lines[1].split(",")
    assert first[0] == "alpha"
    assert float(first[1]) == 1.0 / 3.0
    assert first[5] == "true"
    assert first[9] == ""
    second = lines[2].split(",")
    assert second[5] == "false"
    assert float(second[9]) == 0.125
