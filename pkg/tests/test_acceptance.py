"""Acceptance checks, one test per criterion.

Every test prints a single ``PASS``/``FAIL`` line with the measured values
and the tolerance it was held to, then asserts.  The Monte Carlo criteria
share session-scoped scenario runs; the whole module takes about half an
hour on a single core.
"""

import time

import numpy as np
import pytest

from copula_glrt.copulas import (CLAYTON, FRANK, conditional_cdf,
                                 conditional_quantile, copula_cdf, density,
                                 ell, ell1, ell2, sample_pair)
from copula_glrt.glrt import chisq_upper_tail, run_test
from copula_glrt.kernels import EPANECHNIKOV, constants_for
from copula_glrt.simulation import (ScenarioSpec, generate_dataset,
                                    run_scenario, wilks_check)

pytestmark = pytest.mark.slow

SEED = 20240101
REPS = 200
ALPHAS = (0.10, 0.05, 0.01)
# three binomial standard errors at N = 200
SIZE_BANDS = {0.10: 0.064, 0.05: 0.046, 0.01: 0.021}


def report(capsys, criterion, ok, detail):
    with capsys.disabled():
        print(f"\n[criterion {criterion}] {'PASS' if ok else 'FAIL'}: {detail}")


_scenarios = {}


def scenario(model, n, null_degrees):
    key = (model, n, null_degrees)
    if key not in _scenarios:
        spec = ScenarioSpec(model, n, replicates=REPS, alpha_levels=ALPHAS,
                            null_degrees=null_degrees, seed=SEED)
        _scenarios[key] = run_scenario(spec)
    return _scenarios[key]


def size_check(res, p):
    """Rates, per-alpha band verdicts and a formatted summary."""
    rates = [res.rate(p, a) for a in ALPHAS]
    ok = [abs(r - a) <= SIZE_BANDS[a] for r, a in zip(rates, ALPHAS)]
    text = " ".join(f"a={a}:{r:.3f}" for a, r in zip(ALPHAS, rates))
    return all(ok), text


def test_kernel_constants(capsys):
    start = time.perf_counter()
    # tolerances not used elsewhere bypass the constants cache
    consts = [constants_for(EPANECHNIKOV, p, tol=1e-11 + p * 1e-12) for p in (0, 1)]
    elapsed = time.perf_counter() - start
    ok = elapsed < 1.0 and all(abs(c.c_K - 0.45) <= 1e-3 and abs(c.r_K - 2.115) <= 5e-3
                               for c in consts)
    report(capsys, 1, ok, ", ".join(f"p={p}: c_K={c.c_K:.6f} r_K={c.r_K:.6f}"
                                    for p, c in enumerate(consts))
           + f" in {elapsed:.3f}s (tol 1e-3 / 5e-3, < 1 s)")
    assert ok


def test_pvalue_arithmetic(capsys):
    first = chisq_upper_tail(2.115 * 0.91, 2.66)
    second = chisq_upper_tail(constants_for(EPANECHNIKOV).r_K * 13.58, 3.92)
    ok_first = 0.509 <= first <= 0.519
    ok_second = second < 1e-4
    report(capsys, 2, ok_first and ok_second,
           f"chisq_upper_tail(2.115*0.91, 2.66)={first:.6f} (band [0.509, 0.519]) "
           f"{'ok' if ok_first else 'OUT'}; injected case p={second:.3e} (< 1e-4) "
           f"{'ok' if ok_second else 'OUT'}")
    assert ok_second
    assert ok_first


@pytest.mark.parametrize("n", [200, 500])
def test_size_constant_null(capsys, n):
    res = scenario("m0", n, (0,))
    ok, text = size_check(res, 0)
    ok = ok and res.failures == 0
    report(capsys, 3, ok, f"M0 n={n} p=0 {text} failures={res.failures} "
           f"(bands +-0.064/+-0.046/+-0.021)")
    assert ok


def test_power(capsys):
    lines, ok = [], True
    m1 = scenario("m1", 200, (0, 1))
    rates = [m1.rate(0, a) for a in ALPHAS]
    ok &= min(rates) >= 0.93 and m1.failures == 0
    lines.append("M1 n=200 p=0 " + "/".join(f"{r:.3f}" for r in rates) + " (>= 0.93)")
    for n in (200, 500):
        m2 = scenario("m2", n, (0, 1))
        rates = m2.rejection_rates
        ok &= rates.min() >= 0.99 and m2.failures == 0
        lines.append(f"M2 n={n} min rate {rates.min():.3f} (>= 0.99)")
    report(capsys, 4, ok, "; ".join(lines))
    assert ok


@pytest.mark.parametrize("n", [200, 500])
def test_size_linear_null(capsys, n):
    res = scenario("m1", n, (0, 1) if n == 200 else (1,))
    ok, text = size_check(res, 1)
    ok = ok and res.failures == 0
    report(capsys, 5, ok, f"M1 n={n} p=1 {text} failures={res.failures} "
           f"(bands +-0.064/+-0.046/+-0.021)")
    assert ok


def smoother_mean(n, h, rng):
    """Finite-sample mean of lambda for a local constant fit.

    Treats the fit as a linear smoother ``S`` of the scores; the alternative
    gains ``tr(S) - tr(S'S)/2`` and the constant null takes back 1/2.
    """
    x = np.sort(rng.uniform(2, 5, n))
    d = (x[:, None] - x[None, :]) / h
    K = np.where(np.abs(d) <= 1, 0.75 * (1 - d * d), 0.0)
    S = K / K.sum(axis=1, keepdims=True)
    return np.trace(S) - 0.5 * np.sum(S * S) - 0.5


def test_wilks_fixed_bandwidth(capsys):
    h = 1.5
    summary = wilks_check(n=500, replicates=500, fixed_h=h, seed=SEED)
    finite = smoother_mean(500, h, np.random.default_rng(SEED))
    rng_x = summary.mu_n * h / constants_for(EPANECHNIKOV).c_K
    stated = 0.968 * rng_x / h
    _, ks_p = summary.ks_against(stated)
    r_K = constants_for(EPANECHNIKOV).r_K
    mu = float(np.mean(stated)) / r_K
    se = np.std(summary.lam, ddof=1) / np.sqrt(summary.lam.size)
    z = (summary.mean_lambda - mu) / se
    ok = ks_p >= 0.01 and abs(z) <= 3
    report(capsys, 6, ok,
           f"KS p={ks_p:.4f} vs chi2(0.968*range/1.5, mean dof {np.mean(stated):.4f}) "
           f"(>= 0.01); mean lambda={summary.mean_lambda:.4f} vs mu_n={mu:.4f}, "
           f"z={z:.2f} (|z| <= 3); computed-dof KS p={summary.ks_pvalue:.4f} "
           f"mean-z={summary.mean_z():.2f}; finite-sample smoother mean {finite:.4f}")
    assert ok


def test_derivative_density_and_sampler_oracles(capsys):
    rng = np.random.default_rng(SEED)
    worst1 = worst2 = 0.0
    for _ in range(100):
        fam = rng.choice(["frank", "clayton"])
        u, v = rng.uniform(0.02, 0.98, 2)
        t = rng.uniform(-30, 30) if fam == "frank" else rng.uniform(-2, 3)
        if abs(t) < 0.1:
            t += 0.2
        f = lambda s: ell(fam, s, u, v)
        d1, d2 = 1e-5, 1e-3
        fd1 = (f(t + d1) - f(t - d1)) / (2 * d1)
        fd2 = (f(t + d2) - 2 * f(t) + f(t - d2)) / d2 ** 2
        a1, a2 = ell1(fam, t, u, v), ell2(fam, t, u, v)
        worst1 = max(worst1, abs(a1 - fd1) / max(abs(a1), 1e-4))
        worst2 = max(worst2, abs(a2 - fd2) / abs(a2))

    x0, w0 = np.polynomial.legendre.leggauss(64)
    edges = [0.0, 1e-4, 1e-3, 1e-2, 0.1, 0.5, 1.0]
    x = np.concatenate([a + (b - a) * (x0 + 1) / 2 for a, b in zip(edges, edges[1:])])
    w = np.concatenate([(b - a) * w0 / 2 for a, b in zip(edges, edges[1:])])
    U, V = np.meshgrid(x, x)
    masses = [np.sum(np.outer(w, w) * density(s, U, V, th))
              for s, th in ((FRANK, 8.0), (FRANK, -12.0), (CLAYTON, 3.0))]

    g = np.linspace(0.02, 0.98, 31)
    U, W = np.meshgrid(g, g)
    roundtrip = 0.0
    for spec, thetas in ((FRANK, (-20.0, -1.0, 0.3, 8.0, 35.0)),
                         (CLAYTON, (0.1, 0.8, 2.0, 6.0, 15.0))):
        for th in thetas:
            v = conditional_quantile(spec, U, W, th)
            roundtrip = max(roundtrip, np.max(np.abs(conditional_cdf(spec, U, v, th) - W)))

    sup = 0.0
    gs = np.linspace(0.05, 0.95, 19)
    A, B = np.meshgrid(gs, gs, indexing="ij")
    for spec, th in ((FRANK, 8.0), (CLAYTON, 3.0)):
        u1, u2 = sample_pair(spec, th, np.random.default_rng(7), 50_000)
        emp = np.array([[np.mean((u1 <= a) & (u2 <= b)) for b in gs] for a in gs])
        sup = max(sup, np.max(np.abs(emp - copula_cdf(spec, A, B, th))))

    ok = (worst1 <= 1e-5 and worst2 <= 1e-4 and all(0.999 <= m <= 1.001 for m in masses)
          and roundtrip <= 1e-8 and sup <= 0.01)
    report(capsys, 7, ok,
           f"l1 rel err {worst1:.2e} (<= 1e-5), l2 rel err {worst2:.2e} (<= 1e-4), "
           f"masses {', '.join(f'{m:.6f}' for m in masses)} (in [0.999, 1.001]), "
           f"round-trip {roundtrip:.2e} (<= 1e-8), sampler sup-norm {sup:.4f} (<= 0.01)")
    assert ok


def test_uniform_kernel_wide_bandwidth_identity(capsys):
    worst = 0.0
    for seed in range(5):
        data = generate_dataset("m1", 200, seed)
        for factor in (1.0, 1.7, 10.0):
            res = run_test(data, FRANK, 0, "uniform", h=factor * data.covariate_range)
            worst = max(worst, abs(res.lambda_))
    ok = worst <= 1e-8
    report(capsys, 8, ok, f"max |lambda| = {worst:.2e} over 15 fits (<= 1e-8)")
    assert ok


def test_scenario_determinism_across_threads(capsys):
    spec = ScenarioSpec("m1", 200, replicates=12, alpha_levels=ALPHAS,
                        null_degrees=(0, 1), seed=SEED)
    one = run_scenario(spec, threads=1)
    two = run_scenario(spec, threads=2)
    same_records = [r.to_dict() for r in one.records] == [r.to_dict() for r in two.records]
    same_rates = np.array_equal(one.rejection_rates, two.rejection_rates)
    ok = same_records and same_rates
    report(capsys, 9, ok, f"records identical={same_records}, rates identical={same_rates} "
           "(threads 1 vs 2)")
    assert ok
