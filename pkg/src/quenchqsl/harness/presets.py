"""Parameter-point tasks: one per figure preset plus a generic task per model.

A task maps a parameter point to rows for one or more output families.
Column order per family is fixed here and is the CSV schema.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .. import fermi, lmg, qsl
from ..errors import UnreachableThresholdError
from ..series import uniform_grid


@dataclass(frozen=True)
class Task:
    name: str
    columns: dict
    defaults: dict = field(default_factory=dict)
    description: str = ""

    def points(self, cfg):
        return POINTS[self.name](cfg)

    def compute(self, point, cfg):
        return COMPUTE[self.name](point, cfg)


def _grid(cfg, default_t_max):
    return uniform_grid(cfg.t_max or default_t_max, cfg.n_points)


def _product(cfg):
    return [(float(c), int(n)) for c in cfg.couplings for n in cfg.n_values]


def _by_n(cfg):
    return [(int(n),) for n in cfg.n_values]


def _nan_to_none(x):
    return None if x is None or (isinstance(x, float) and math.isnan(x)) else x


# -- generic per-model tasks -------------------------------------------------------------

def _model_spec(model, coupling, N, cfg):
    if model == "fermi-trap":
        return fermi.TrapQuench(coupling, N, _grid(cfg, math.pi / coupling))
    if model == "fermi-impurity":
        return fermi.ImpurityQuench(coupling, N, _grid(cfg, 2 * math.pi))
    spec = lmg.LMGSpec(coupling, N)
    times = _grid(cfg, None) if cfg.t_max else lmg.default_time_grid(spec, cfg.n_points)
    return lmg.LMGSpec(coupling, N, time_grid=times)


def _series(spec, tol):
    if isinstance(spec, lmg.LMGSpec):
        return lmg.quench_chi(spec, tol)
    return fermi.survival_series_det(spec, tol)


def _chi_fn(spec, tol):
    if isinstance(spec, lmg.LMGSpec):
        return lmg.spectral_quench(spec, tol).chi
    basis = spec.basis(tol)
    return lambda t: fermi.chi_det(basis, spec.n_particles, t, tol)[0]


def compute_model(point, cfg):
    coupling, N = point
    tol = cfg.tol
    spec = _model_spec(cfg.model, coupling, N, cfg)
    series = _series(spec, tol)
    f = series.fidelity
    i = int(np.argmin(f))
    report = qsl.qsl_report(spec, series.times[i], series.chi[i], tol)
    en = qsl.energetics(spec, tol)
    scalars = [(
        coupling, N, en.delta_h, en.delta_h_printed, en.mean_work, en.mean_work_printed,
        float(f[i]), float(series.times[i]), report.tau_qsl, report.tau_w, report.tau_ml,
    )]
    chi_fn = _chi_fn(spec, tol)
    thresholds = []
    for theta in cfg.thresholds:
        t_hit = fermi.first_crossing_time(chi_fn, theta, series.times)
        tau = qsl.tau_qsl(math.sqrt(theta), en.delta_h, tol) if (t_hit is not None and en.delta_h > 0) else None
        thresholds.append((coupling, N, theta, t_hit, tau))
    rows = [(coupling, N, float(t), float(c.real), float(c.imag), float(abs(c) ** 2))
            for t, c in zip(series.times, series.chi)]
    return {"scalars": scalars, "thresholds": thresholds, "series": rows, "_reports": [report.as_dict()]}


MODEL_COLUMNS = {
    "scalars": ("coupling", "N", "delta_h_bruteforce", "delta_h_per_particle", "mean_work", "mean_work_printed",
                "f_min", "t_f_min", "tau_qsl", "tau_w", "tau_ml"),
    "thresholds": ("coupling", "N", "theta", "t_reach", "tau_qsl"),
    "series": ("coupling", "N", "t", "chi_re", "chi_im", "fidelity"),
}


# -- figure presets -------------------------------------------------------------------------

def compute_fig1a(point, cfg):
    (N,) = point
    tol = cfg.tol
    p = cfg.params
    eta, kappa = p["eta"], p["kappa"]
    th_trap, th_imp = p["theta_trap"], p["theta_impurity"]
    # trap: reference time where F first reaches theta_trap, so |chi| = sqrt(theta)
    dh_printed = fermi.delta_h_per_particle(eta, N).exact
    try:
        fermi.t_min(eta, N, th_trap)
        tau_trap = qsl.tau_qsl(math.sqrt(th_trap), dh_printed, tol)
    except UnreachableThresholdError:
        tau_trap = None
    imp = fermi.ImpurityQuench(kappa, N, _grid(cfg, 2 * math.pi))
    basis = imp.basis(tol)
    t_hit = fermi.first_crossing_time(lambda t: fermi.chi_det(basis, N, t, tol)[0], th_imp, imp.time_grid)
    dh_imp = fermi.many_body_variance(basis, N, tol)
    tau_imp = qsl.tau_qsl(math.sqrt(th_imp), dh_imp, tol) if t_hit is not None else None
    out = {"fig1a": [(N, tau_trap, tau_imp)]}
    trap = fermi.TrapQuench(eta, N, [0.0, 1.0])
    out["_reports"] = [
        dict(qsl.qsl_report(trap, fermi.t_min(eta, N, th_trap).numeric, math.sqrt(th_trap), tol).as_dict(),
             model="fermi-trap", N=N) if tau_trap is not None else {"model": "fermi-trap", "N": N},
        dict(qsl.qsl_report(imp, t_hit, math.sqrt(th_imp), tol).as_dict(), model="fermi-impurity", N=N)
        if t_hit is not None else {"model": "fermi-impurity", "N": N},
    ]
    if N in p.get("inset_n", ()):
        times = _grid(cfg, 2 * math.pi)
        series_trap = fermi.survival_series_det(fermi.TrapQuench(eta, N, times), tol)
        series_imp = fermi.survival_series_det(fermi.ImpurityQuench(kappa, N, times), tol)
        out["fig1a_inset"] = [("trap", N, float(t), float(f)) for t, f in zip(times, series_trap.fidelity)]
        out["fig1a_inset"] += [("impurity", N, float(t), float(f)) for t, f in zip(times, series_imp.fidelity)]
    return out


def compute_fig1b(point, cfg):
    (N,) = point
    tol = cfg.tol
    p = cfg.params
    eta, kappa = p["eta"], p["kappa"]
    try:
        tm = fermi.t_min(eta, N, p["theta_trap"])
        trap = (tm.numeric, tm.large_n, tm.exact)
    except UnreachableThresholdError:
        trap = (None, None, None)
    imp = fermi.ImpurityQuench(kappa, N, _grid(cfg, 2 * math.pi))
    t_imp = fermi.t_min_numeric(imp, p["theta_impurity"], tol)
    return {"fig1b": [(N, trap[0], trap[1], trap[2], t_imp)]}


def compute_fig2(point, cfg):
    lam, N = point
    spec = lmg.LMGSpec(lam, N, time_grid=_grid(cfg, cfg.params.get("t_max", 2.0)))
    series = lmg.quench_chi(spec, cfg.tol)
    return {"fig2": [(lam, N, float(t), float(f)) for t, f in zip(series.times, series.fidelity)]}


def compute_fig3(point, cfg):
    lam, N = point
    spec = lmg.LMGSpec(lam, N)
    spec = lmg.LMGSpec(lam, N, time_grid=lmg.default_time_grid(spec, cfg.n_points))
    res = lmg.fmin_scan(spec, cfg.tol)
    return {"fig3a": [(lam, N, res.f_min, res.t_min)]}


def compute_fig3b(point, cfg):
    (lam, N, f_min, t_min), = compute_fig3(point, cfg)["fig3a"]
    return {"fig3b": [(lam, N, t_min, f_min)]}


def compute_supp_a(point, cfg):
    lam, N = point
    spec = lmg.LMGSpec(lam, N, time_grid=_grid(cfg, cfg.params.get("t_max", 2.0)))
    series = lmg.quench_chi(spec, cfg.tol)
    return {"supp_a": [(lam, N, float(t), float(f)) for t, f in zip(series.times, series.fidelity)]}


def compute_supp_b(point, cfg):
    (N,) = point
    p = cfg.params
    lams = np.round(np.arange(p["lambda_min"], p["lambda_max"] + 1e-9, p["lambda_step"]), 10)
    out = {}
    full = N in p.get("spectrum_n", ())
    # crossings come from exact level intersections; the dense sweep is only needed for plotting
    sweep = lmg.spectrum_sweep(N, lams if full else [lams[0], lams[-1]])
    if full:
        out["supp_b_spectrum"] = [(N, float(lam), lvl, float(e))
                                  for lam, row in zip(lams, sweep.energies) for lvl, e in enumerate(row)]
    out["supp_b_crossings"] = [(N, k, float(lc)) for k, lc in enumerate(sweep.crossings)]
    rows = []
    for lam in lams:
        info = lmg.ground_info(float(lam), N)
        gamma = lam * math.sqrt(N)
        rows.append((N, float(lam), info.j_crossings, lmg.eq23_closed_form(info.j_crossings, N, gamma)))
    out["supp_b_variance"] = rows
    return out


def compute_supp_c(point, cfg):
    (N,) = point
    tol = cfg.tol
    p = cfg.params
    eta, theta = p["eta"], p["theta"]
    spec = fermi.TrapQuench(eta, N, [0.0, 1.0])
    try:
        t_ref = fermi.t_min(eta, N, theta).numeric
    except UnreachableThresholdError:
        return {"supp_c": [(N, None, None, None, None, None)]}
    rep = qsl.qsl_report(spec, t_ref, math.sqrt(theta), tol)
    tau_w_printed = qsl.tau_work(math.sqrt(theta), rep.mean_work_printed, tol)
    return {
        "supp_c": [(N, rep.tau_qsl, rep.tau_ml, rep.tau_w, rep.tau_qsl_per_particle, tau_w_printed)],
        "_reports": [dict(rep.as_dict(), model="fermi-trap", N=N)],
    }


TASKS = {
    "fermi-trap": Task("fermi-trap", MODEL_COLUMNS, description="generic trap-frequency quench sweep"),
    "fermi-impurity": Task("fermi-impurity", MODEL_COLUMNS, description="generic delta-impurity quench sweep"),
    "lmg": Task("lmg", MODEL_COLUMNS, description="generic LMG impurity quench sweep"),
    "fig1a": Task(
        "fig1a",
        {"fig1a": ("N", "tau_qsl_trap", "tau_qsl_impurity"),
         "fig1a_inset": ("model", "N", "t", "fidelity")},
        defaults=dict(model="fermi-trap", n_values=tuple(range(10, 101, 10)), n_points=1024,
                      params={"eta": 1.5, "kappa": 0.5, "theta_trap": 1e-2, "theta_impurity": 0.25,
                              "inset_n": [10, 100]}),
        description="QSL time vs N, trap (eta=1.5) and impurity (kappa=0.5) quenches",
    ),
    "fig1b": Task(
        "fig1b",
        {"fig1b": ("N", "t_min_trap", "t_min_trap_large_n", "t_min_trap_exact", "t_min_impurity")},
        defaults=dict(model="fermi-trap", n_values=tuple(range(10, 101, 10)), n_points=1024,
                      params={"eta": 1.5, "kappa": 0.5, "theta_trap": 1e-2, "theta_impurity": 0.25}),
        description="time to reach F=1e-2 (trap) and F=0.25 (impurity) vs N",
    ),
    "fig2": Task(
        "fig2", {"fig2": ("lambda", "N", "t", "fidelity")},
        defaults=dict(model="lmg", couplings=(0.9, 1.1), n_values=(200, 1000), n_points=2048,
                      params={"t_max": 2.0}),
        description="LMG survival probability, aligned vs critical bath",
    ),
    "fig3a": Task(
        "fig3a", {"fig3a": ("lambda", "N", "f_min", "t_min")},
        defaults=dict(model="lmg", couplings=(1.2, 1.4, 1.6, 1.8, 2.0),
                      n_values=(200, 400, 600, 800, 1000), n_points=2048),
        description="minimum LMG survival probability vs N",
    ),
    "fig3b": Task(
        "fig3b", {"fig3b": ("lambda", "N", "t_min", "f_min")},
        defaults=dict(model="lmg", couplings=(1.2, 1.4, 1.6, 1.8, 2.0),
                      n_values=(200, 400, 600, 800, 1000), n_points=2048),
        description="minimum LMG survival probability vs the time it is reached",
    ),
    "supp-a": Task(
        "supp-a", {"supp_a": ("lambda", "N", "t", "fidelity")},
        defaults=dict(model="lmg", couplings=tuple(np.round(np.arange(0.1, 2.01, 0.1), 10)),
                      n_values=(1000,), n_points=256, params={"t_max": 2.0}),
        description="F(t, lambda) for N=1000",
    ),
    "supp-b": Task(
        "supp-b",
        {"supp_b_spectrum": ("N", "lambda", "level", "energy"),
         "supp_b_crossings": ("N", "index", "lambda"),
         "supp_b_variance": ("N", "lambda", "j", "delta_h")},
        defaults=dict(model="lmg", n_values=(10, 100, 1000),
                      params={"lambda_min": 0.0, "lambda_max": 2.0, "lambda_step": 0.02, "spectrum_n": [10, 100]}),
        description="LMG bath spectrum, level crossings and closed-form Delta H",
    ),
    "supp-c": Task(
        "supp-c", {"supp_c": ("N", "tau_mt", "tau_ml", "tau_w", "tau_mt_per_particle", "tau_w_printed")},
        defaults=dict(model="fermi-trap", n_values=tuple(range(5, 51, 5)),
                      params={"eta": 4.0, "theta": 1e-2}),
        description="Mandelstam-Tamm, Margolus-Levitin and work bounds, trap quench to omega_2=4",
    ),
}

POINTS = {
    "fermi-trap": _product, "fermi-impurity": _product, "lmg": _product,
    "fig1a": _by_n, "fig1b": _by_n, "fig2": _product, "fig3a": _product, "fig3b": _product,
    "supp-a": _product, "supp-b": _by_n, "supp-c": _by_n,
}

COMPUTE = {
    "fermi-trap": compute_model, "fermi-impurity": compute_model, "lmg": compute_model,
    "fig1a": compute_fig1a, "fig1b": compute_fig1b, "fig2": compute_fig2, "fig3a": compute_fig3,
    "fig3b": compute_fig3b, "supp-a": compute_supp_a, "supp-b": compute_supp_b, "supp-c": compute_supp_c,
}

PRESETS = tuple(name for name in TASKS if name not in ("fermi-trap", "fermi-impurity", "lmg"))


def task_for(cfg):
    return TASKS[cfg.preset or cfg.model]
