import numpy as np
import pytest
from scipy import stats

from copula_glrt.copulas import frank_kendall_tau
from copula_glrt.simulation import (REFERENCE_GRID, Model, ScenarioSpec,
                                    WilksSummary, bandwidth_grid_for,
                                    generate_dataset, replicate_rng,
                                    run_scenario, wilks_check)


def test_model_formulas():
    x = np.array([2.0, 3.5, 5.0])
    np.testing.assert_array_equal(Model.M0.eta(x), 8.0)
    np.testing.assert_allclose(Model.M1.eta(x), 25 - 4.2 * x)
    np.testing.assert_allclose(Model.M2.eta(x), 12 + 8 * np.sin(0.4 * x ** 2))
    theta = Model.M2.eta(np.linspace(2, 5, 10_001))
    assert theta.min() >= 4.0 and theta.max() <= 20.0


def test_generate_dataset_is_reproducible():
    a = generate_dataset("m1", 120, 99)
    b = generate_dataset("m1", 120, 99)
    for f in ("x", "u1", "u2"):
        np.testing.assert_array_equal(getattr(a, f), getattr(b, f))
    assert np.all((a.x >= 2) & (a.x <= 5))
    with pytest.raises(ValueError):
        generate_dataset("m0", 5, 0)


def test_m0_pooled_kendall_tau(oracles):
    pooled = [generate_dataset("m0", 200, replicate_rng(1, i)) for i in range(10)]
    u1 = np.concatenate([d.u1 for d in pooled])
    u2 = np.concatenate([d.u2 for d in pooled])
    assert abs(stats.kendalltau(u1, u2)[0] - frank_kendall_tau(8.0)) < 0.03
    assert frank_kendall_tau(8.0) == pytest.approx(oracles["frank_tau_8"], abs=1e-10)


def test_replicate_streams_independent_of_count():
    first = [replicate_rng(5, i).random(3) for i in range(4)]
    again = [replicate_rng(5, i).random(3) for i in range(8)][:4]
    np.testing.assert_array_equal(first, again)
    assert not np.array_equal(first[0], first[1])


def test_reference_grid():
    assert REFERENCE_GRID.size == 12
    assert REFERENCE_GRID[0] == pytest.approx(0.33) and REFERENCE_GRID[-1] == pytest.approx(2.96)
    np.testing.assert_allclose(np.diff(np.log(REFERENCE_GRID)), np.log(2.96 / 0.33) / 11)
    np.testing.assert_allclose(bandwidth_grid_for(6.0), 2 * REFERENCE_GRID)


def test_scenario_spec_validation():
    with pytest.raises(ValueError):
        ScenarioSpec("m0", 100, alpha_levels=(0.0, 0.05))
    with pytest.raises(ValueError):
        ScenarioSpec("m0", 100, replicates=0)
    spec = ScenarioSpec("M1", 100)
    assert spec.model is Model.M1
    assert spec.bandwidth_grid == tuple(REFERENCE_GRID)


@pytest.fixture(scope="module")
def small_scenario():
    spec = ScenarioSpec("m1", 80, replicates=6, null_degrees=(0, 1), seed=3,
                        bandwidth_grid=(0.6, 1.2, 2.4))
    return spec, run_scenario(spec, threads=1)


def test_scenario_result_shape_and_monotone(small_scenario):
    spec, res = small_scenario
    assert res.rejection_rates.shape == (2, 3)
    assert np.all((res.rejection_rates >= 0) & (res.rejection_rates <= 1))
    # alpha levels are listed largest first
    assert np.all(np.diff(res.rejection_rates, axis=1) <= 0)
    assert len(res.records) == 12 and res.failures == 0
    rows = list(res.rows())
    assert rows[0] == ("m1", 80, 0, 0.10, res.rate(0, 0.10))


def test_scenario_deterministic_across_threads(small_scenario):
    spec, res = small_scenario
    again = run_scenario(spec, threads=2)
    assert [r.to_dict() for r in again.records] == [r.to_dict() for r in res.records]
    np.testing.assert_array_equal(again.rejection_rates, res.rejection_rates)


def test_scenario_prefix_stability(small_scenario):
    spec, res = small_scenario
    shorter = ScenarioSpec("m1", 80, replicates=3, null_degrees=(0, 1), seed=3,
                           bandwidth_grid=(0.6, 1.2, 2.4))
    head = run_scenario(shorter, threads=1).records
    assert [r.to_dict() for r in head] == [r.to_dict() for r in res.records[:6]]


def test_wilks_needs_500_replicates():
    with pytest.raises(ValueError):
        wilks_check(n=100, replicates=100)


def test_wilks_summary_ks_on_exact_chi2():
    rng = np.random.default_rng(0)
    dof = rng.uniform(2, 4, 800)
    scaled = rng.chisquare(dof)
    s = WilksSummary(100, 800, np.ones(800), scaled / 2.0, scaled, dof,
                     dof / 2.0, np.nan, np.nan)
    stat, pvalue = s.ks_against(dof)
    assert pvalue > 0.01
    assert abs(s.mean_z()) < 3
    _, bad = s.ks_against(dof + 3)
    assert bad < 0.01
