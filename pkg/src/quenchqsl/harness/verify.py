"""Small-scale oracle suite: analytic-vs-numeric, bound validity, conservation.

Each check yields rows of (name, detail, measured, threshold, passed).
Informational rows carry passed=None and never fail the suite.
"""
import math
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .. import fermi, lmg, numerics, qsl, spectral
from ..config import DEFAULT_TOLERANCES
from ..series import uniform_grid


@dataclass(frozen=True)
class CheckResult:
    name: str
    detail: str
    measured: Optional[float]
    threshold: Optional[float]
    passed: Optional[bool]
    error: Optional[str] = None

    def line(self):
        status = {True: "PASS", False: "FAIL", None: "INFO"}[self.passed]
        meas = "-" if self.measured is None else f"{self.measured:.3e}"
        thr = "-" if self.threshold is None else f"{self.threshold:.1e}"
        msg = f"{status}  {self.name:<22} {self.detail:<34} measured={meas:<10} threshold={thr}"
        return msg + (f"  error: {self.error}" if self.error else "")


@dataclass
class VerifyReport:
    results: list
    seconds: float

    @property
    def failures(self):
        return [r for r in self.results if r.passed is False]

    @property
    def ok(self):
        return not self.failures

    def lines(self):
        out = [r.line() for r in self.results]
        n_pass = sum(r.passed is True for r in self.results)
        out.append(f"{n_pass} passed, {len(self.failures)} failed, "
                   f"{sum(r.passed is None for r in self.results)} informational in {self.seconds:.1f} s")
        return out


def _row(name, detail, measured, threshold):
    return CheckResult(name, detail, float(measured), float(threshold), bool(measured <= threshold))


# -- individual checks ------------------------------------------------------------------------

def check_eq14(tol, quick):
    rows = []
    for eta in (1.2, 1.5, 2.0):
        for N in range(1, 5 if quick else 9):
            times = uniform_grid(math.pi / eta, 257)
            series = fermi.survival_series_det(fermi.TrapQuench(eta, N, times), tol)
            dev = np.max(np.abs(series.fidelity - fermi.fidelity_dynamic_analytic(eta, N, times, tol=tol)))
            rows.append(_row("eq14_vs_det", f"eta={eta} N={N}", dev, tol.analytic_vs_det))
    return rows


def check_time_calibration(tol, quick):
    c, dev = fermi.calibrate_time_scale(1.5)
    return [_row("time_calibration", f"c={c:g} (eta=1.5)", dev, tol.analytic_vs_det)]


def check_static(tol, quick):
    eta, N = 1.5, 10
    basis = fermi.TrapQuench(eta, N, [0.0, 1.0]).basis(tol)
    log_det = fermi.static_log_overlap(basis, N)
    log_an = 0.5 * fermi.fidelity_static_analytic(eta, N, log=True)
    return [_row("static_fidelity", f"eta={eta} N={N} (log rel)", abs(log_det - log_an) / abs(log_an),
                 tol.analytic_vs_det)]


def check_completeness(tol, quick):
    rows = []
    for eta, N in ((1.5, 20), (4.0, 20)):
        basis = fermi.TrapQuench(eta, N, [0.0, 1.0]).basis(tol)
        rows.append(_row("completeness", f"trap eta={eta} N={N}", np.max(basis.completeness_defect(N)), tol.completeness))
    return rows


def check_eigh(tol, quick):
    rng = np.random.default_rng(7)
    a = rng.normal(size=(60, 60)) + 1j * rng.normal(size=(60, 60))
    h = a + a.conj().T
    dec = numerics.eigh(h, tol)
    vecs, vals = dec.eigenvectors, dec.eigenvalues
    ortho = np.max(np.abs(vecs.conj().T @ vecs - np.eye(60)))
    resid = np.linalg.norm(h @ vecs - vecs * vals, axis=0).max() / np.linalg.norm(h, 2)
    trace = abs(vals.sum() - np.trace(h).real) / np.linalg.norm(h, 2)
    return [
        _row("eigh_orthonormal", "random 60x60", ortho, tol.orthonormal),
        _row("eigh_residual", "random 60x60", resid, tol.eig_residual),
        _row("eigh_trace", "random 60x60", trace, tol.trace),
    ]


def _trajectories(tol, quick):
    n_f = 20 if quick else 100
    n_l = 100 if quick else 1000
    trap = fermi.TrapQuench(1.5, n_f, uniform_grid(math.pi / 1.5, 257))
    imp = fermi.ImpurityQuench(0.5, n_f, uniform_grid(2 * math.pi, 257))
    spec = lmg.LMGSpec(1.2, n_l)
    spec = lmg.LMGSpec(1.2, n_l, time_grid=lmg.default_time_grid(spec, 1024))
    return [("trap", trap), ("impurity", imp), ("lmg", spec)]


def check_bounds(tol, quick):
    rows = []
    for label, spec in _trajectories(tol, quick):
        series = lmg.quench_chi(spec, tol) if label == "lmg" else fermi.survival_series_det(spec, tol)
        en = qsl.energetics(spec, tol)
        mt = qsl.bures_angle(series.chi, tol) / en.delta_h - series.times
        rows.append(_row("mt_bound", f"{label} N={_size(spec)} (max excess)", max(mt.max(), 0.0), tol.bound_slack))
        try:
            tw = qsl.tau_work(series.chi, en.mean_work, tol, scale=en.delta_h) - series.times
            rows.append(_row("work_bound", f"{label} N={_size(spec)} (max excess)", max(tw.max(), 0.0),
                             tol.bound_slack))
        except qsl.UndefinedBoundError:
            rows.append(CheckResult("work_bound", f"{label}: <W> = {en.mean_work:.1e}, undefined", None, None, None))
    return rows


def _size(spec):
    return getattr(spec, "n_particles", None) or spec.n_spins


def check_lmg(tol, quick):
    rows = []
    worst = 0.0
    for N in ((10, 50) if quick else (10, 50, 200)):
        for lam in (0.5, 0.9, 1.2, 1.6, 2.0):
            v = lmg.variance_eq23(lam, N)
            worst = max(worst, abs(v.closed_form - v.bruteforce))
    rows.append(_row("eq23", "N<=200, 5 couplings", worst, tol.eq23))
    spec = lmg.LMGSpec(1.6, 60)
    h = lmg.build_hamiltonian(spec)
    q = lmg.conserved_charge(spec)
    comm = np.max(np.abs(h @ q - q @ h))
    rows.append(_row("conservation", "[H_f, S_z + s_z] (N=60)", comm, tol.conservation))
    sq = lmg.spectral_quench(spec, tol)
    rows.append(_row("weight_sum", "sum p_j (N=60)", abs(sq.weights.sum() - 1.0), tol.weight_sum))
    dec = numerics.eigh(h, tol)
    psi0 = lmg.initial_state(spec)
    coef = dec.eigenvectors.T @ psi0
    worst_norm = 0.0
    for t in np.linspace(0.0, 3.0, 7):
        psi_t = dec.eigenvectors @ (np.exp(-1j * dec.eigenvalues * t) * coef)
        worst_norm = max(worst_norm, abs(np.linalg.norm(psi_t) - 1.0))
    rows.append(_row("norm", "|psi(t)| (N=60)", worst_norm, tol.norm))
    return rows


def check_parseval(tol, quick):
    times = uniform_grid(2 * math.pi, 512)
    series = fermi.survival_series_det(fermi.ImpurityQuench(0.5, 20, times), tol)
    sf = spectral.spectral_function(series, "none")
    return [_row("parseval", "impurity N=20", spectral.parseval_defect(series, sf), tol.parseval)]


def check_fisher(tol, quick):
    rows = []
    for label, spec in _trajectories(tol, True):
        dh = qsl.energetics(spec, tol).delta_h
        if label == "lmg":
            chi_fn = lmg.spectral_quench(spec, tol).chi
        else:
            basis = spec.basis(tol)
            chi_fn = lambda t, b=basis, n=spec.n_particles: fermi.chi_det(b, n, t, tol)[0]  # noqa: E731
        v = qsl.fisher_velocity(chi_fn, 1.0 / dh)
        rows.append(_row("fisher_velocity", f"{label} (rel)", abs(v - dh) / dh, tol.fisher_velocity))
    return rows


def check_delta_drift(tol, quick):
    N = 10
    drift = fermi.delta_cutoff_drift(0.5, N, 4 * N if quick else 8 * N, tol=tol)
    return [CheckResult("delta_cutoff_drift", f"kappa=0.5 N={N}, M->2M", drift, tol.delta_cutoff_drift, None)]


CHECKS: tuple = (
    check_eq14, check_time_calibration, check_static, check_completeness, check_eigh,
    check_bounds, check_lmg, check_parseval, check_fisher, check_delta_drift,
)


def verify(tol=DEFAULT_TOLERANCES, quick=False, checks=CHECKS, emit: Callable = None):
    """Run the oracle suite; exceptions inside a check become a failed row."""
    start = time.perf_counter()
    results = []
    for check in checks:
        name = check.__name__.removeprefix("check_")
        try:
            rows = check(tol, quick)
        except Exception as exc:
            rows = [CheckResult(name, "raised", None, None, False, f"{type(exc).__name__}: {exc}")]
        for r in rows:
            results.append(r)
            if emit:
                emit(r.line())
    return VerifyReport(results, time.perf_counter() - start)

