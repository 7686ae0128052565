"""Acceptance criteria 1-12, one test each, each recording a PASS/FAIL line.

The lines are printed as each test runs and again in the pytest terminal
summary ("acceptance criteria" section).
"""
import math
import time

import numpy as np
import pytest

from quenchqsl import fermi, lmg, numerics, qsl
from quenchqsl.errors import UndefinedBoundError
from quenchqsl.harness import verify
from quenchqsl.series import uniform_grid


def _cold_caches():
    # runtime criteria are timed without results memoized by earlier tests
    for cached in (fermi._trap_basis, fermi._delta_basis_cached, lmg._spectral_quench, fermi.gauss_hermite):
        cached.cache_clear()


def test_criterion_01_determinant_vs_closed_form(criterion):
    _cold_caches()
    start = time.perf_counter()
    worst = 0.0
    for eta in (1.2, 1.5, 2.0):
        times = uniform_grid(math.pi / eta, 513)
        for N in range(1, 9):
            series = fermi.survival_series_det(fermi.TrapQuench(eta, N, times))
            worst = max(worst, float(np.max(np.abs(series.fidelity - fermi.fidelity_dynamic_analytic(eta, N, times)))))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-6 and elapsed < 10
    criterion(1, ok, f"max |F_det - closed form| = {worst:.2e} (tol 1e-6), {elapsed:.2f} s (< 10 s)")
    assert ok


def test_criterion_02_static_fidelity(criterion):
    basis = fermi.TrapQuench(1.5, 10, [0.0, 1.0]).basis()
    log_det = 2 * fermi.static_log_overlap(basis, 10)
    log_expected = 100 * math.log(2 * math.sqrt(1.5) / 2.5)
    rel = abs(log_det - log_expected) / abs(log_expected)
    rel_an = abs(fermi.fidelity_static_analytic(1.5, 10, log=True) - log_expected) / abs(log_expected)
    ok = rel <= 1e-6 and rel_an <= 1e-12
    criterion(2, ok, f"log-space relative deviation {rel:.2e} (tol 1e-6)")
    assert ok


def test_criterion_03_energy_spread_large_n(criterion):
    dh = fermi.delta_h_per_particle(1.5, 1000)
    ratio_dev = abs(dh.exact / dh.large_n - 1)
    exact_identity = dh.large_n / 1000 == (1.5 ** 2 - 1) / (4 * math.sqrt(2))
    ok = ratio_dev < 0.01 and exact_identity
    criterion(3, ok, f"|exact/approx - 1| = {ratio_dev:.2e} (< 1%), approx/N identity exact: {exact_identity}")
    assert ok


def test_criterion_04_t_min_scaling(criterion):
    eta, theta = 1.5, 1e-2
    rows = {N: fermi.t_min(eta, N, theta) for N in (50, 100, 200)}
    dev17 = max(abs(tm.numeric / tm.large_n - 1) for tm in rows.values())
    products = np.array([tm.numeric * N for N, tm in rows.items()])
    spread = (products.max() - products.min()) / products.mean()
    ok = dev17 < 0.05 and spread < 0.02
    criterion(4, ok, f"max |t_num / t_large_n - 1| = {dev17:.2%} (< 5%), t_min*N spread {spread:.2%} (< 2%)")
    assert ok


def _fermion_trajectories():
    for eta in (1.2, 1.5, 2.0, 4.0):
        for N in (1, 10, 50, 100):
            yield f"trap eta={eta} N={N}", fermi.TrapQuench(eta, N, uniform_grid(math.pi / eta, 400))
    for kappa in (0.5, 2.0):
        for N in (10, 50, 100):
            yield f"impurity kappa={kappa} N={N}", fermi.ImpurityQuench(kappa, N, uniform_grid(2 * math.pi, 400))


def _lmg_trajectories():
    for lam in (0.5, 0.9, 1.1, 1.6, 2.0):
        for N in (10, 200, 1000):
            spec = lmg.LMGSpec(lam, N)
            yield f"lmg lambda={lam} N={N}", lmg.LMGSpec(lam, N, time_grid=lmg.default_time_grid(spec, 1024))


def test_criterion_05a_mt_bound_everywhere_and_work_bound_for_fermions(criterion):
    slack = 1e-9
    mt_bad, w_bad, n = [], [], 0
    for label, spec in _fermion_trajectories():
        series = fermi.survival_series_det(spec)
        en = qsl.energetics(spec)
        n += 1
        if en.delta_h > 0 and qsl.mt_violations(series, en.delta_h, slack).size:
            mt_bad.append(label)
        if abs(en.mean_work) > 0 and qsl.work_violations(series, en.mean_work, slack, scale=en.delta_h).size:
            w_bad.append(label)
    for label, spec in _lmg_trajectories():
        series = lmg.quench_chi(spec)
        n += 1
        if qsl.mt_violations(series, qsl.energetics(spec).delta_h, slack).size:
            mt_bad.append(label)
    ok = not mt_bad and not w_bad
    criterion("5a", ok, f"MT bound on {n} trajectories, work bound on fermion trajectories: "
                        f"{len(mt_bad)} + {len(w_bad)} violating (slack 1e-9)")
    assert ok, (mt_bad, w_bad)


@pytest.mark.xfail(strict=True, raises=(AssertionError, UndefinedBoundError),
                   reason="the LMG quench has <W> = 0 exactly (purely off-diagonal coupling), so the work "
                          "time is undefined and t >= tau_W cannot hold")
def test_criterion_05b_work_bound_on_lmg(criterion):
    slack = 1e-9
    n_bad, worst_w = 0, 0.0
    for label, spec in _lmg_trajectories():
        series = lmg.quench_chi(spec)
        w = qsl.energetics(spec).mean_work
        worst_w = max(worst_w, abs(w))
        with np.errstate(divide="ignore", invalid="ignore"):
            tau_w = (1 - np.abs(series.chi)) / abs(w)
        n_bad += int(np.any(series.times < tau_w - slack))
    ok = n_bad == 0
    criterion("5b", ok, f"work bound on LMG: {n_bad}/15 trajectories violate; max |<W>| = {worst_w:.1e} "
                        "(work time undefined, expected failure)")
    assert ok


def test_criterion_06_lmg_closed_form_spread(criterion):
    worst = 0.0
    for N in (10, 50, 200):
        for lam in (0.5, 0.9, 1.2, 1.6, 2.0):
            v = lmg.variance_eq23(lam, N)
            worst = max(worst, abs(v.closed_form - v.bruteforce))
    conv = lmg.frozen_convention()
    ok = worst <= 1e-8
    criterion(6, ok, f"max |closed form - brute force| = {worst:.2e} (tol 1e-8), frozen signs {tuple(conv)}")
    assert ok


def _f_min(lam, N):
    spec = lmg.LMGSpec(lam, N)
    return lmg.fmin_scan(lmg.LMGSpec(lam, N, time_grid=lmg.default_time_grid(spec))).f_min


def test_criterion_07_fig2_behaviour(criterion):
    _cold_caches()
    start = time.perf_counter()
    a200, a1000 = _f_min(0.9, 200), _f_min(0.9, 1000)
    c200, c1000 = _f_min(1.1, 200), _f_min(1.1, 1000)
    elapsed = time.perf_counter() - start
    rel = abs(a1000 - a200) / a1000
    ok = rel < 0.01 and c1000 < c200 and c1000 < 0.1 and elapsed < 120
    criterion(7, ok, f"lambda=0.9 rel diff {rel:.2%} (< 1%); lambda=1.1 f_min {c200:.4f} -> {c1000:.4f} "
                     f"(decreasing, < 0.1); {elapsed:.1f} s (< 2 min)")
    assert ok


def test_criterion_08_fig3a_linear_in_inverse_n(criterion):
    Ns = np.arange(200, 1001, 200)
    worst_r2, worst_b = 1.0, 0.0
    for lam in (1.2, 1.4, 1.6, 1.8, 2.0):
        fit = numerics.linear_fit(1.0 / Ns, [_f_min(lam, int(N)) for N in Ns])
        worst_r2 = min(worst_r2, fit.r_squared)
        worst_b = max(worst_b, abs(fit.intercept))
    ok = worst_r2 > 0.99 and worst_b < 0.02
    criterion(8, ok, f"min r^2 = {worst_r2:.5f} (> 0.99), max |intercept| = {worst_b:.2e} (< 0.02)")
    assert ok


def test_criterion_09_crossing_cascade(criterion):
    n100 = len(lmg.spectrum_sweep(100, [1.0, 2.0]).crossings)
    n10 = len(lmg.spectrum_sweep(10, [1.0, 2.0]).crossings)
    flat = all(len({lmg.ground_info(lam, N).m_ground for lam in np.linspace(0.0, 0.999, 400)}) == 1
               for N in (10, 100, 1000))
    ok = n100 > n10 and flat
    criterion(9, ok, f"crossings in (1, 2]: N=100 -> {n100}, N=10 -> {n10}; ground level flat below 1: {flat}")
    assert ok


def test_criterion_10_anderson_exponent(criterion):
    Ns = list(range(10, 61, 10))
    base = fermi.anderson_alpha(0.5, Ns)
    doubled = fermi.anderson_alpha(0.5, Ns, cutoff_factor=2)
    change = abs(doubled.slope / base.slope - 1)
    ok = base.slope < 0 and doubled.slope < 0 and change <= 0.05
    criterion(10, ok, f"slope {base.slope:.4f} -> {doubled.slope:.4f} under cutoff doubling, "
                      f"change {change:.2%} (<= 5%)")
    assert ok


def _fisher_points(rng):
    for _ in range(5):
        yield fermi.TrapQuench(float(rng.uniform(1.1, 3.0)), int(rng.integers(1, 41)), [0.0, 1.0])
    for _ in range(5):
        yield fermi.ImpurityQuench(float(rng.uniform(0.2, 2.0)), int(rng.integers(5, 41)), [0.0, 1.0])
    for _ in range(5):
        yield lmg.LMGSpec(float(rng.uniform(0.1, 2.0)), int(rng.integers(10, 401)))


def test_criterion_11_fisher_velocity(criterion):
    worst = 0.0
    for spec in _fisher_points(np.random.default_rng(11)):
        dh = qsl.energetics(spec).delta_h
        if isinstance(spec, lmg.LMGSpec):
            chi_fn = lmg.spectral_quench(spec).chi
        else:
            basis = spec.basis()
            chi_fn = lambda t, b=basis, n=spec.n_particles: fermi.chi_det(b, n, t)[0]  # noqa: E731
        worst = max(worst, abs(qsl.fisher_velocity(chi_fn, 1 / dh) / dh - 1))
    ok = worst <= 1e-3
    criterion(11, ok, f"15 random points (5 per model): max relative deviation {worst:.2e} (tol 1e-3)")
    assert ok


def test_criterion_12_verify_runtime(criterion):
    _cold_caches()
    report = verify(quick=False)
    ok = report.ok and report.seconds < 300
    criterion(12, ok, f"verify full suite: {len(report.failures)} failures, {report.seconds:.1f} s (< 5 min)")
    assert ok
