"""Trapped free fermions after a sudden quench.

Units: unit mass, hbar = 1 and the pre-quench trap frequency omega_1 = 1, so
reference orbitals psi_k have energies k + 1/2.  Many-body overlaps reduce to
determinants of N x N single-particle overlap matrices.

Two quenches are supported: a trap-frequency change omega_1 -> eta * omega_1
and switching on a delta barrier of height N * kappa at the trap centre.
"""
import functools
import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammaln, roots_hermite

from . import numerics
from .config import DEFAULT_TOLERANCES
from .errors import ConvergenceError, TruncationError, UnreachableThresholdError
from .series import SurvivalSeries, validate_time_grid

MAX_HERMITE_ORDER = 20000
_RESCALE = 1e150
_LOG_RESCALE = math.log(_RESCALE)
# auto-cutoff target for the trap quench; tighter than the completeness
# tolerance so that F(0) = 1 holds to 1e-12
_TRAP_AUTO_TARGET = 1e-13
_MAX_AUTO_CUTOFF = 4096


# -- Hermite functions and quadrature ---------------------------------------

def hermite_functions(nmax, x):
    """Normalized oscillator eigenfunctions psi_0..psi_nmax evaluated at x.

    Upward three-term recurrence on the normalized functions, with the
    Gaussian factor carried as a per-point log scale so that large orders and
    large |x| neither underflow nor overflow.  Returns shape (nmax + 1, *x.shape).
    """
    nmax = int(nmax)
    if nmax < 0:
        raise ValueError("order must be non-negative")
    if nmax > MAX_HERMITE_ORDER:
        raise OverflowError(f"order {nmax} beyond the supported bound {MAX_HERMITE_ORDER}")
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("x must be finite")
    shape = x.shape
    x = np.atleast_1d(x).ravel()
    out = np.empty((nmax + 1, x.size))
    logscale = -0.5 * x * x
    prev = np.zeros_like(x)
    cur = np.full_like(x, np.pi ** -0.25)
    out[0] = cur * np.exp(logscale)
    for n in range(nmax):
        nxt = math.sqrt(2.0 / (n + 1)) * x * cur - math.sqrt(n / (n + 1)) * prev
        prev, cur = cur, nxt
        big = np.abs(cur) > _RESCALE
        if big.any():
            cur[big] /= _RESCALE
            prev[big] /= _RESCALE
            logscale[big] += _LOG_RESCALE
        out[n + 1] = cur * np.exp(logscale)
    return out.reshape((nmax + 1,) + shape)


def hermite_function(n, x):
    return hermite_functions(n, x)[n]


@functools.lru_cache(maxsize=16)
def gauss_hermite(n_nodes):
    """Nodes and weights such that integral f dx ~= sum W_i f(y_i).

    Exact when f = exp(-x^2) * polynomial of degree < 2 * n_nodes.  The weights
    already include the exp(+y^2) factor; they come from the Christoffel
    function 1 / sum_j psi_j(y)^2, which never overflows.
    """
    y, _ = roots_hermite(n_nodes)
    w = 1.0 / np.sum(hermite_functions(n_nodes - 1, y) ** 2, axis=0)
    y.setflags(write=False)
    w.setflags(write=False)
    return y, w


# -- single-particle bases -----------------------------------------------------

@dataclass(frozen=True)
class SingleParticleBasis:
    """Post-quench orbitals phi_m expanded in reference orbitals psi_k.

    coeffs[k, m] = <psi_k|phi_m>; both bases are real so no conjugation is
    needed.  Reference energies are k + 1/2.
    """

    energies: np.ndarray
    coeffs: np.ndarray
    label: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def size(self):
        return self.coeffs.shape[1]

    @property
    def ref_energies(self):
        return np.arange(self.coeffs.shape[0]) + 0.5

    def completeness_defect(self, n_rows):
        rows = np.sum(np.abs(self.coeffs[:n_rows]) ** 2, axis=1)
        return np.abs(1.0 - rows)

    def require_complete(self, n_rows, tol=DEFAULT_TOLERANCES.completeness):
        if n_rows > self.coeffs.shape[0]:
            raise TruncationError(self.coeffs.shape[0], 1.0, tol)
        defect = self.completeness_defect(n_rows)
        bad = np.flatnonzero(defect > tol)
        if bad.size:
            raise TruncationError(int(bad[0]), float(defect[bad[0]]), tol)
        return self


def _parity_mask(n):
    k = np.arange(n)
    return (k[:, None] + k[None, :]) % 2 == 0


def trap_overlap_coeffs(eta, M, n_check=1, tol=DEFAULT_TOLERANCES):
    """Overlaps <psi_k|phi_m> between unit-frequency and eta-frequency orbitals.

    Computed by Gauss-Hermite quadrature after rescaling x so that the product
    of the two Gaussians becomes exp(-y^2).  Opposite-parity entries are set
    to exactly zero.  The first `n_check` reference rows must be complete.
    """
    if not eta > 0:
        raise ValueError("eta must be positive")
    M = int(M)
    if M < 1:
        raise ValueError("cutoff must be at least 1")
    if eta == 1.0:
        coeffs = np.eye(M)
    else:
        y, w = gauss_hermite(M + 16)
        s = math.sqrt(2.0 / (1.0 + eta))
        ref = hermite_functions(M - 1, s * y)
        fin = eta ** 0.25 * hermite_functions(M - 1, math.sqrt(eta) * s * y)
        coeffs = s * (ref * w) @ fin.T
        coeffs[~_parity_mask(M)] = 0.0
    basis = SingleParticleBasis(
        energies=eta * (np.arange(M) + 0.5),
        coeffs=coeffs,
        label="trap",
        meta={"eta": float(eta), "cutoff": M},
    )
    return basis.require_complete(min(n_check, M), tol.completeness)


def default_trap_cutoff(eta, n_particles, tol=DEFAULT_TOLERANCES):
    """Smallest cutoff max(2N, 32) * 2^k whose first N rows are complete."""
    M = max(2 * n_particles, 32)
    target = min(tol.completeness, _TRAP_AUTO_TARGET)
    while True:
        basis = trap_overlap_coeffs(eta, M, n_check=0, tol=tol)
        if basis.completeness_defect(n_particles).max() <= target:
            return M, basis
        if 2 * M > _MAX_AUTO_CUTOFF:
            basis.require_complete(n_particles, tol.completeness)
            return M, basis
        M *= 2


def _even_origin_values(M):
    """psi_k(0) for even k < M (odd ones vanish)."""
    j = np.arange((M + 1) // 2)
    mag = np.exp(0.5 * (gammaln(j + 0.5) - gammaln(j + 1.0) - math.log(math.pi)))
    return np.where(j % 2 == 0, 1.0, -1.0) * mag


@functools.lru_cache(maxsize=256)
def delta_tail(M, n_explicit=1 << 16):
    """sum_{even k >= M} psi_k(0)^2 / (k + 1/2), the part of the secular sum a
    cutoff at M discards (evaluated at zero energy)."""
    j0 = (M + 1) // 2
    j = np.arange(j0, j0 + n_explicit, dtype=float)
    v2 = np.exp(gammaln(j + 0.5) - gammaln(j + 1.0)) / math.pi
    head = np.sum(v2 / (2.0 * j + 0.5))
    J = j0 + n_explicit
    fJ = math.exp(gammaln(J + 0.5) - gammaln(J + 1.0)) / math.pi / (2.0 * J + 0.5)
    return float(head + 1.0 / (math.pi * math.sqrt(J)) + 0.5 * fJ)


def effective_delta_strength(g, M):
    """Barrier strength for an M-state basis reproducing the full-basis
    low-energy spectrum of g * delta(x) to O(E M^-3/2)."""
    if g == 0.0:
        return 0.0
    return 1.0 / (1.0 / g + delta_tail(M))


def _delta_levels(g, M, tol):
    v = _even_origin_values(M)
    ke = 2 * np.arange(v.size)
    dec = numerics.eigh(np.diag(ke + 0.5) + g * np.outer(v, v), tol)
    return ke, dec


def delta_basis(kappa, N, M, renormalize=True, check_convergence=False, tol=DEFAULT_TOLERANCES):
    """Eigenpairs of -1/2 d^2/dx^2 + x^2/2 + N kappa delta(x) in an M-state basis.

    Odd orbitals vanish at the origin and are carried over unchanged; the even
    sector is diagonalized densely.  With `renormalize` the bare strength
    N * kappa is replaced by the cutoff-corrected strength from
    `effective_delta_strength`.
    """
    if kappa < 0:
        raise ValueError("kappa must be non-negative")
    M = int(M)
    if M < max(N, 2):
        raise ValueError("cutoff must be at least N and 2")
    if M < 4 * N:
        warnings.warn(f"cutoff M={M} below the recommended 4N={4 * N}", stacklevel=2)
    g = N * float(kappa)
    g_used = effective_delta_strength(g, M) if renormalize else g
    ke, dec = _delta_levels(g_used, M, tol)

    coeffs = np.zeros((M, M))
    energies = np.arange(M) + 0.5
    vecs = dec.eigenvectors.copy()
    # deterministic sign: dominant component positive
    lead = np.argmax(np.abs(vecs), axis=0)
    vecs *= np.sign(vecs[lead, np.arange(vecs.shape[1])])
    for col, k in enumerate(ke):
        coeffs[ke, k] = vecs[:, col]
        energies[k] = dec.eigenvalues[col]
    odd = np.arange(1, M, 2)
    coeffs[odd, odd] = 1.0
    order = np.argsort(energies, kind="stable")
    basis = SingleParticleBasis(
        energies=energies[order],
        coeffs=coeffs[:, order],
        label="impurity",
        meta={"kappa": float(kappa), "n_particles": int(N), "cutoff": M,
              "strength": g, "strength_used": g_used},
    )
    if check_convergence:
        drift = delta_cutoff_drift(kappa, N, M, renormalize, tol)
        if drift > tol.delta_cutoff_drift:
            raise ConvergenceError(
                f"lowest {N} levels drift by {drift:.3e} when the cutoff doubles from {M}")
    return basis


def delta_cutoff_drift(kappa, N, M, renormalize=True, tol=DEFAULT_TOLERANCES):
    """Largest shift of the lowest N single-particle energies when M -> 2M."""
    lo = []
    for cutoff in (M, 2 * M):
        g = N * float(kappa)
        g_used = effective_delta_strength(g, cutoff) if renormalize else g
        _, dec = _delta_levels(g_used, cutoff, tol)
        odd = np.arange(1, cutoff, 2) + 0.5
        lo.append(np.sort(np.concatenate([dec.eigenvalues, odd]))[:N])
    return float(np.max(np.abs(lo[0] - lo[1])))


# -- quench specifications ---------------------------------------------------------

@dataclass(frozen=True)
class TrapQuench:
    eta: float
    n_particles: int
    time_grid: np.ndarray
    basis_cutoff: Optional[int] = None

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError("eta must be positive")
        if self.n_particles < 1:
            raise ValueError("need at least one particle")
        if self.basis_cutoff is not None and self.basis_cutoff < self.n_particles:
            raise ValueError("basis cutoff must be >= N")
        object.__setattr__(self, "time_grid", validate_time_grid(self.time_grid))

    def basis(self, tol=DEFAULT_TOLERANCES):
        return _trap_basis(self.eta, self.n_particles, self.basis_cutoff, tol)


@dataclass(frozen=True)
class ImpurityQuench:
    kappa: float
    n_particles: int
    time_grid: np.ndarray
    basis_cutoff: Optional[int] = None
    renormalize: bool = True

    def __post_init__(self):
        if self.kappa < 0:
            raise ValueError("kappa must be non-negative")
        if self.n_particles < 1:
            raise ValueError("need at least one particle")
        if self.basis_cutoff is not None and self.basis_cutoff < self.n_particles:
            raise ValueError("basis cutoff must be >= N")
        object.__setattr__(self, "time_grid", validate_time_grid(self.time_grid))

    @property
    def cutoff(self):
        return self.basis_cutoff or max(4 * self.n_particles, 64)

    def basis(self, tol=DEFAULT_TOLERANCES):
        return _delta_basis_cached(self.kappa, self.n_particles, self.cutoff, self.renormalize, tol)


@functools.lru_cache(maxsize=64)
def _trap_basis(eta, N, cutoff, tol):
    if cutoff is None:
        return default_trap_cutoff(eta, N, tol)[1]
    basis = trap_overlap_coeffs(eta, cutoff, n_check=0, tol=tol)
    return basis.require_complete(N, tol.completeness)


@functools.lru_cache(maxsize=64)
def _delta_basis_cached(kappa, N, M, renormalize, tol):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return delta_basis(kappa, N, M, renormalize=renormalize, tol=tol)


# -- determinant dynamics ------------------------------------------------------------

def overlap_matrix(basis, N, t, tol=DEFAULT_TOLERANCES):
    """A_kl(t) = sum_m <psi_k|phi_m><psi_l|phi_m> exp(-i (E'_m - E_k) t), k, l < N."""
    if N > basis.size:
        raise ValueError("more particles than basis states")
    if t < 0:
        raise ValueError("t must be non-negative")
    basis.require_complete(N, tol.completeness)
    c = basis.coeffs[:N]
    e_ref = np.arange(N) + 0.5
    a = (c * np.exp(-1j * basis.energies * t)) @ c.T
    return a * np.exp(1j * e_ref * t)[:, None]


def _log_chi(basis, N, times, chunk=64):
    c = basis.coeffs[:N]
    e_ref = np.arange(N) + 0.5
    phases = np.empty(times.size, dtype=complex)
    logabs = np.empty(times.size)
    for start in range(0, times.size, chunk):
        t = times[start:start + chunk]
        p = np.exp(-1j * np.outer(t, basis.energies))
        a = (c[None, :, :] * p[:, None, :]) @ c.T
        a *= np.exp(1j * np.outer(t, e_ref))[:, :, None]
        sign, la = numerics.log_determinant(a)
        phases[start:start + chunk] = sign
        logabs[start:start + chunk] = la
    return phases, logabs


def chi_det(basis, N, times, tol=DEFAULT_TOLERANCES):
    """chi(t) = det A(t) on arbitrary times, returning (chi, log|chi|)."""
    basis.require_complete(N, tol.completeness)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    phase, logabs = _log_chi(basis, N, times)
    chi = np.where(logabs < tol.log_underflow, 0.0, phase * np.exp(np.maximum(logabs, tol.log_underflow)))
    return chi, logabs


def survival_series_det(spec, tol=DEFAULT_TOLERANCES):
    basis = spec.basis(tol)
    chi, logabs = chi_det(basis, spec.n_particles, spec.time_grid, tol)
    if not np.all(np.isfinite(chi)):
        raise ValueError("non-finite determinant")
    meta = {"model": basis.label, "cutoff": basis.size, "log_abs_chi": logabs}
    series = SurvivalSeries(spec.time_grid, chi, meta=meta)
    return series.check(tol)


def static_log_overlap(basis, N):
    """log |<Psi|Phi>| between the N-fermion ground states before and after."""
    _, logabs = numerics.log_determinant(basis.coeffs[:N, :N])
    return float(logabs)


# -- closed forms for the trap quench ---------------------------------------------------

def scaled_time(eta, t):
    """Argument of the closed-form fidelity for internal time t.

    Frozen by `calibrate_time_scale`: the closed form is written in units
    where the post-quench frequency is one.
    """
    return eta * np.asarray(t)


def _clamped(log_value, tol):
    return np.where(log_value < tol.log_underflow, 0.0, np.exp(np.maximum(log_value, tol.log_underflow)))


def fidelity_static_analytic(eta, N, log=False, tol=DEFAULT_TOLERANCES):
    """(2 sqrt(eta) / (eta + 1))^(N^2), or its logarithm."""
    if not eta > 0 or N < 1:
        raise ValueError("need eta > 0 and N >= 1")
    lf = N * N * (math.log(2.0) + 0.5 * math.log(eta) - math.log1p(eta))
    return lf if log else float(_clamped(lf, tol))


def fidelity_dynamic_analytic(eta, N, t, log=False, tol=DEFAULT_TOLERANCES):
    """Closed-form survival probability of the trap quench at internal time t."""
    if not eta > 0 or N < 1:
        raise ValueError("need eta > 0 and N >= 1")
    tau = scaled_time(eta, t)
    denom = 4 * eta ** 2 * np.cos(tau) ** 2 + (eta ** 2 + 1) ** 2 * np.sin(tau) ** 2
    lf = N * N * (math.log(2 * eta) - 0.5 * np.log(denom))
    if log:
        return lf
    out = _clamped(lf, tol)
    return float(out) if np.ndim(out) == 0 else out


def calibrate_time_scale(eta, candidates=None, n_points=257):
    """Pick the factor c with closed-form(c * t) == det result at N = 1.

    Returns (c, max deviation).  Used once to freeze `scaled_time`.
    """
    candidates = candidates if candidates is not None else (1.0, eta)
    times = np.linspace(0.0, 2 * math.pi, n_points)
    basis = _trap_basis(eta, 1, None, DEFAULT_TOLERANCES)
    chi, _ = chi_det(basis, 1, times)
    f_det = np.abs(chi) ** 2
    best = None
    for c in candidates:
        tau = c * times
        denom = 4 * eta ** 2 * np.cos(tau) ** 2 + (eta ** 2 + 1) ** 2 * np.sin(tau) ** 2
        dev = float(np.max(np.abs(f_det - 2 * eta / np.sqrt(denom))))
        if best is None or dev < best[1]:
            best = (c, dev)
    return best


class DeltaH(NamedTuple):
    exact: float
    large_n: float


def delta_h_per_particle(eta, N):
    """Printed closed form for the trap-quench energy spread and its large-N
    approximant.  This is the per-particle mean of single-orbital spreads."""
    if not eta > 0 or N < 1:
        raise ValueError("need eta > 0 and N >= 1")
    n = np.arange(1, N + 1, dtype=float)
    exact = (eta ** 2 - 1) / (2 * math.sqrt(2) * N) * float(np.sum(np.sqrt(n * n - n + 1)))
    return DeltaH(exact, N * (eta ** 2 - 1) / (4 * math.sqrt(2)))


def final_energy_moments(basis, N, tol=DEFAULT_TOLERANCES):
    """Mean and variance of the post-quench many-body Hamiltonian in the
    pre-quench N-fermion ground state.

    For a Slater determinant with occupied projector P and one-body h,
    Var = tr(P h^2) - tr(P h P h); only occupied -> empty transitions count.
    """
    basis.require_complete(N, tol.completeness)
    c = basis.coeffs[:N]
    e = basis.energies
    h = (c * e) @ c.T
    h2_diag = np.sum(c * c * e * e, axis=1)
    mean = float(np.trace(h))
    var = float(np.sum(h2_diag) - np.sum(np.abs(h) ** 2))
    return mean, max(var, 0.0)


def many_body_variance(basis_or_spec, N=None, tol=DEFAULT_TOLERANCES):
    """Brute-force energy spread Delta H_f (standard deviation, not its square)
    of the many-body initial state under the post-quench Hamiltonian."""
    if isinstance(basis_or_spec, SingleParticleBasis):
        basis = basis_or_spec
        if N is None:
            raise ValueError("N required with a bare basis")
    else:
        basis = basis_or_spec.basis(tol)
        N = basis_or_spec.n_particles
    return math.sqrt(final_energy_moments(basis, N, tol)[1])


class TMin(NamedTuple):
    """Times (internal units) for the trap-quench fidelity to first reach theta.

    `exact` and `large_n` are the printed closed forms converted to internal
    time; they are expressed in units of the fidelity period pi / eta.  `exact`
    is None outside its real-valued domain.
    """

    numeric: float
    exact: Optional[float]
    large_n: float


def fidelity_floor(eta, N):
    """min_t of the closed-form trap fidelity, reached at a quarter period."""
    return (2 * eta / (eta ** 2 + 1)) ** (N * N)


def t_min(eta, N, theta):
    if not 0 < theta <= 1:
        raise ValueError("theta must be in (0, 1]")
    if not eta > 0 or N < 1:
        raise ValueError("need eta > 0 and N >= 1")
    to_internal = math.pi / eta
    log_theta = math.log(theta)
    large_n = 2 * eta / (math.pi * N) * math.sqrt(-2 * log_theta) / (eta ** 2 - 1) if eta != 1 else math.inf
    if theta == 1.0:
        return TMin(0.0, 0.0, 0.0)
    log_floor = N * N * (math.log(2 * eta) - math.log(eta ** 2 + 1))
    if log_theta < log_floor:
        raise UnreachableThresholdError(theta, math.exp(log_floor))

    def excess(tau):
        return N * N * (math.log(2 * eta) - 0.5 * math.log(
            4 * eta ** 2 * math.cos(tau) ** 2 + (eta ** 2 + 1) ** 2 * math.sin(tau) ** 2)) - log_theta

    if excess(math.pi / 2) >= 0:
        tau = math.pi / 2
    else:
        tau = brentq(excess, 0.0, math.pi / 2, xtol=1e-15, rtol=4 * np.finfo(float).eps)

    exact = None
    radicand = 1 + eta ** 4 + eta ** 2 * (2 - 4 * math.exp(-2 * log_theta / (N * N)))
    if radicand > 0:
        x = (eta ** 2 - 1) / math.sqrt(radicand)
        if abs(x) >= 1:
            exact = math.acos(1 / x) / math.pi * to_internal
    return TMin(tau / eta, exact, large_n * to_internal)


def first_crossing_time(chi_fn, theta, times):
    """First t on the grid span where |chi(t)|^2 drops to theta, refined by
    root bracketing; None if the grid never reaches theta."""
    times = np.asarray(times, dtype=float)
    f = np.abs(chi_fn(times)) ** 2
    below = np.flatnonzero(f <= theta)
    if below.size == 0:
        return None
    i = below[0]
    if i == 0:
        return float(times[0])

    def g(t):
        return float(np.abs(chi_fn(np.array([t]))[0]) ** 2 - theta)

    return float(brentq(g, times[i - 1], times[i], xtol=1e-13))


def t_min_numeric(spec, theta, tol=DEFAULT_TOLERANCES):
    """First time the determinant fidelity of `spec` reaches theta."""
    basis = spec.basis(tol)
    return first_crossing_time(lambda t: chi_det(basis, spec.n_particles, t, tol)[0], theta, spec.time_grid)


# -- orthogonality exponent ---------------------------------------------------------------

def anderson_alpha(kappa, Ns, cutoff_factor=1, renormalize=True, tol=DEFAULT_TOLERANCES):
    """Fit ln|<Psi|Phi>| against ln N for the delta impurity.

    The slope is -alpha/2.  Cutoffs are cutoff_factor * max(4N, 64).
    """
    Ns = [int(n) for n in Ns]
    if len(Ns) < 3 or any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise ValueError("need at least three ascending particle numbers")
    logs = []
    for N in Ns:
        M = cutoff_factor * max(4 * N, 64)
        basis = delta_basis(kappa, N, M, renormalize=renormalize, tol=tol)
        logs.append(static_log_overlap(basis, N))
    return numerics.linear_fit(np.log(Ns), logs)
