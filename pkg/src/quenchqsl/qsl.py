"""Quantum speed limits for sudden quenches.

All times in units with hbar = 1.  chi is the dynamical overlap; its
magnitude alone enters every bound.
"""
import functools
import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from . import fermi, lmg
from .config import DEFAULT_TOLERANCES
from .errors import InvalidOverlapError, UndefinedBoundError


def _magnitude(chi, tol):
    # arccos has infinite slope at 1, so |chi| within roundoff of 1 is snapped
    # there; otherwise a 1e-15 defect at t=0 reads as a finite Bures angle
    a = np.abs(np.asarray(chi))
    if np.any(a > 1.0 + tol.overlap_clamp):
        raise InvalidOverlapError(f"|chi| = {float(np.max(a))!r} exceeds one")
    return np.where(a >= 1.0 - tol.overlap_roundoff, 1.0, a)


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def bures_angle(chi, tol=DEFAULT_TOLERANCES):
    """arccos |chi|, in [0, pi/2]."""
    return _scalar(np.arccos(_magnitude(chi, tol)))


def tau_qsl(chi_at_tau, delta_h, tol=DEFAULT_TOLERANCES):
    """Mandelstam-Tamm time arccos|chi(tau)| / Delta H."""
    if not delta_h > 0:
        raise UndefinedBoundError("Delta H must be positive")
    return _scalar(np.arccos(_magnitude(chi_at_tau, tol)) / delta_h)


def tau_work(chi_at_tau, mean_work, tol=DEFAULT_TOLERANCES, scale=1.0):
    """Work-based time (1 - |chi(tau)|) / |<W>|.

    `scale` sets the energy scale below which <W> counts as zero.
    """
    if abs(mean_work) <= 1e-12 * max(scale, 1.0):
        raise UndefinedBoundError(f"mean work {mean_work!r} vanishes; the work bound is undefined")
    return _scalar((1.0 - _magnitude(chi_at_tau, tol)) / abs(mean_work))


def tau_ml(chi_at_tau, mean_energy_above_ground, tol=DEFAULT_TOLERANCES):
    """Margolus-Levitin-type comparator: pi / (2 <H_f - E_0^f>) rescaled by
    (2/pi) arccos|chi| for partial rotations.  Not asserted as a bound."""
    if not mean_energy_above_ground > 0:
        raise UndefinedBoundError("mean excitation energy must be positive")
    return _scalar(np.arccos(_magnitude(chi_at_tau, tol)) / mean_energy_above_ground)


# -- work and energy statistics per model ---------------------------------------------

@dataclass(frozen=True)
class QuenchEnergetics:
    """Energy statistics of the initial state under the post-quench Hamiltonian."""

    delta_h: float
    mean_work: float
    excitation: float  # <H_f> - E_0^f
    mean_work_printed: Optional[float] = None
    delta_h_printed: Optional[float] = None
    delta_h_printed_large_n: Optional[float] = None


@functools.singledispatch
def energetics(spec, tol=DEFAULT_TOLERANCES):
    raise TypeError(f"no energetics for {type(spec).__name__}")


def _fermi_energetics(spec, tol):
    basis = spec.basis(tol)
    N = spec.n_particles
    mean, var = fermi.final_energy_moments(basis, N, tol)
    e0_i = N * N / 2.0
    e0_f = float(np.sum(np.sort(basis.energies)[:N]))
    return mean, var, e0_i, e0_f


@energetics.register
def _(spec: fermi.TrapQuench, tol=DEFAULT_TOLERANCES):
    mean, var, e0_i, e0_f = _fermi_energetics(spec, tol)
    printed = fermi.delta_h_per_particle(spec.eta, spec.n_particles)
    return QuenchEnergetics(
        delta_h=math.sqrt(var),
        mean_work=mean - e0_i,
        excitation=mean - e0_f,
        mean_work_printed=spec.n_particles * (spec.eta ** 2 - 1) / 4,
        delta_h_printed=printed.exact,
        delta_h_printed_large_n=printed.large_n,
    )


@energetics.register
def _(spec: fermi.ImpurityQuench, tol=DEFAULT_TOLERANCES):
    mean, var, e0_i, e0_f = _fermi_energetics(spec, tol)
    return QuenchEnergetics(delta_h=math.sqrt(var), mean_work=mean - e0_i, excitation=mean - e0_f)


@energetics.register
def _(spec: lmg.LMGSpec, tol=DEFAULT_TOLERANCES):
    sq = lmg.spectral_quench(spec, tol)
    eq23 = lmg.variance_eq23(spec.lam, spec.n_spins, spec.gamma)
    return QuenchEnergetics(
        delta_h=math.sqrt(sq.variance),
        mean_work=sq.mean_work,
        excitation=float(sq.weights @ sq.energies - sq.e_ground_final),
        delta_h_printed=eq23.closed_form,
    )


def mean_work(spec, tol=DEFAULT_TOLERANCES):
    """First moment of the work distribution, sum_j p_j (E_j^f - E_0^i)."""
    return energetics(spec, tol).mean_work


# -- reports -----------------------------------------------------------------------------

@dataclass(frozen=True)
class QSLReport:
    t_reference: float
    chi_abs: float
    bures_angle: float
    delta_h_per_particle: Optional[float]
    delta_h_bruteforce: float
    mean_work: float
    mean_work_printed: Optional[float]
    tau_qsl: float
    tau_qsl_per_particle: Optional[float]
    tau_w: Optional[float]
    tau_ml: Optional[float]
    tau_qsl_uses: str = "bruteforce"
    tau_w_uses: str = "spectral"

    def as_dict(self):
        return asdict(self)


def qsl_report(spec, t_reference, chi_at_tau, tol=DEFAULT_TOLERANCES):
    """All bounds for one run at one reference time."""
    en = energetics(spec, tol)
    mag = float(_magnitude(chi_at_tau, tol))
    printed_dh = en.delta_h_printed
    try:
        t_w = tau_work(mag, en.mean_work, tol, scale=en.delta_h)
    except UndefinedBoundError:
        t_w = None
    try:
        t_ml = tau_ml(mag, en.excitation, tol)
    except UndefinedBoundError:
        t_ml = None
    return QSLReport(
        t_reference=float(t_reference),
        chi_abs=mag,
        bures_angle=bures_angle(mag, tol),
        delta_h_per_particle=printed_dh,
        delta_h_bruteforce=en.delta_h,
        mean_work=en.mean_work,
        mean_work_printed=en.mean_work_printed,
        tau_qsl=tau_qsl(mag, en.delta_h, tol) if en.delta_h > 0 else 0.0,
        tau_qsl_per_particle=tau_qsl(mag, printed_dh, tol) if printed_dh else None,
        tau_w=t_w,
        tau_ml=t_ml,
    )


# -- bound checks and the Fisher velocity -----------------------------------------------------

def mt_violations(series, delta_h, slack=DEFAULT_TOLERANCES.bound_slack, tol=DEFAULT_TOLERANCES):
    """Grid times where t < arccos|chi(t)| / Delta H - slack."""
    bound = np.arccos(_magnitude(series.chi, tol)) / delta_h
    return series.times[series.times < bound - slack]


def work_violations(series, mean_work_value, slack=DEFAULT_TOLERANCES.bound_slack, tol=DEFAULT_TOLERANCES, scale=1.0):
    bound = tau_work(series.chi, mean_work_value, tol, scale=scale)
    return series.times[series.times < np.asarray(bound) - slack]


def fisher_velocity(chi_fn, time_scale, n_points=8):
    """sqrt(I)/2 estimated from the short-time curvature of |chi(t)|.

    Fits 1 - |chi| = a t^2 + b t^4 on t in (0, 0.02 * time_scale]; since
    |chi| = 1 - (Delta H t)^2 / 2 + O(t^4), the velocity is sqrt(2 a).
    """
    t = np.linspace(0.0, 0.02 * time_scale, n_points + 1)[1:]
    y = 1.0 - np.abs(chi_fn(t))
    design = np.column_stack([t ** 2, t ** 4])
    (a, _), *_ = np.linalg.lstsq(design, y, rcond=None)
    return math.sqrt(max(2 * a, 0.0))
