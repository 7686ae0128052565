"""Spin-1/2 impurity coupled to an isotropic Lipkin-Meshkov-Glick bath.

The bath lives in its maximal-spin multiplet S = N/2 (dimension N + 1), which
the Hamiltonian conserves.  Basis index of |m, s> is 2 * (m + S) + s with
s = 0 for impurity down and s = 1 for impurity up.
"""
import functools
import itertools
import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from . import numerics
from .config import DEFAULT_TOLERANCES
from .series import SurvivalSeries, validate_time_grid

MAX_SPINS = 20000
DOWN, UP = 0, 1
DEFAULT_GRID_POINTS = 2048


class SignConvention(NamedTuple):
    """Signs multiplying the printed -2 S_z and -2 s_z field terms."""

    bath_field: int
    impurity_field: int


PRINTED = SignConvention(1, 1)


@dataclass(frozen=True)
class LMGSpec:
    lam: float
    n_spins: int
    time_grid: Optional[np.ndarray] = None
    gamma: Optional[float] = None

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lambda must be non-negative")
        if self.n_spins < 2:
            raise ValueError("need at least two bath spins")
        if self.n_spins > MAX_SPINS:
            raise ValueError(f"N={self.n_spins} exceeds the dense limit {MAX_SPINS}")
        if self.time_grid is not None:
            object.__setattr__(self, "time_grid", validate_time_grid(self.time_grid))

    @property
    def coupling(self):
        """gamma, defaulting to lambda * sqrt(N)."""
        return self.lam * math.sqrt(self.n_spins) if self.gamma is None else float(self.gamma)

    @property
    def spin(self):
        return self.n_spins / 2

    @property
    def dim(self):
        return 2 * (self.n_spins + 1)


def index(spec_or_n, m, s):
    n = spec_or_n if isinstance(spec_or_n, int) else spec_or_n.n_spins
    return int(round(2 * (m + n / 2))) + s


def magnetizations(N):
    return np.arange(N + 1) - N / 2


def ladder_coefficients(S, m):
    """<m+1|S_+|m> for each m."""
    return np.sqrt(np.maximum(S * (S + 1) - m * (m + 1), 0.0))


def bath_matrix(lam, N, convention):
    """Dense (N+1)-dim bath Hamiltonian assembled from ladder-operator products."""
    S = N / 2
    m = magnetizations(N)
    sp = np.diag(ladder_coefficients(S, m[:-1]), -1)  # S_+ raises the index
    sm = sp.T
    sz = np.diag(m)
    ident = np.eye(N + 1)
    return -(lam / N) * (sp @ sm + sm @ sp - N * ident) - 2 * convention.bath_field * sz


def bath_energies(lam, N, convention):
    """Closed-form diagonal of the bath Hamiltonian, indexed by m = -S..S."""
    S = N / 2
    m = magnetizations(N)
    return -(lam / N) * (2 * (S * (S + 1) - m * m) - N) - 2 * convention.bath_field * m


def build_hamiltonian(spec, interaction_on=True, convention=None):
    """Hermitian 2(N+1) matrix of bath + impurity (+ flip-flop coupling)."""
    conv = convention or frozen_convention()
    N, S = spec.n_spins, spec.spin
    dim = spec.dim
    m = magnetizations(N)
    h = np.zeros((dim, dim))
    eb = bath_energies(spec.lam, N, conv)
    sz_imp = np.array([-0.5, 0.5])
    for i in range(N + 1):
        for s in (DOWN, UP):
            h[2 * i + s, 2 * i + s] = eb[i] - 2 * conv.impurity_field * sz_imp[s]
    if interaction_on:
        g = -2 * spec.coupling / N
        # s_+ S_- : |m, down> -> |m-1, up>
        for i in range(1, N + 1):
            amp = g * math.sqrt(S * (S + 1) - m[i] * (m[i] - 1))
            a, b = 2 * i + DOWN, 2 * (i - 1) + UP
            h[a, b] = h[b, a] = amp
    return h


def conserved_charge(spec):
    """S_z + s_z as a diagonal matrix on the collective basis."""
    m = np.repeat(magnetizations(spec.n_spins), 2)
    s = np.tile([-0.5, 0.5], spec.n_spins + 1)
    return np.diag(m + s)


# -- sign-convention freeze ---------------------------------------------------------------

class LMGGroundInfo(NamedTuple):
    m_ground: float
    j_crossings: int
    energy: float


def _ground_info(lam, N, conv):
    e = bath_energies(lam, N, conv)
    m = magnetizations(N)
    # aligned level is the one favoured by the field at lambda = 0
    aligned = int(np.argmin(bath_energies(0.0, N, conv)))
    j = np.abs(np.arange(N + 1) - aligned)
    best = np.flatnonzero(np.isclose(e, e.min(), rtol=0, atol=1e-12 * max(1.0, abs(e.min()))))
    pick = best[np.argmin(j[best])]
    return LMGGroundInfo(float(m[pick]), int(j[pick]), float(e[pick]))


def _impurity_ground(conv):
    return UP if conv.impurity_field > 0 else DOWN


def _initial_index(spec, conv):
    info = _ground_info(spec.lam, spec.n_spins, conv)
    return index(spec.n_spins, info.m_ground, _impurity_ground(conv))


def _bruteforce_variance(spec, conv):
    h_f = build_hamiltonian(spec, True, conv)
    i0 = _initial_index(spec, conv)
    col = h_f[:, i0]
    return float(col @ col - col[i0] ** 2)


def eq23_closed_form(j, N, gamma):
    return math.sqrt(4 * (1 + j) * (N - j) * gamma ** 2 / N ** 2)


@functools.lru_cache(maxsize=1)
def frozen_convention():
    """Field-sign convention under which (a) the aligned-phase bath ground
    state is |-N/2> and (b) the brute-force variance reproduces the
    closed-form crossing-count expression.  Exactly one of the four sign
    choices must pass."""
    passing = []
    for signs in itertools.product((1, -1), repeat=2):
        conv = SignConvention(*signs)
        ok = all(_ground_info(0.9, N, conv).m_ground == -N / 2 for N in (4, 7, 10))
        for lam, N in ((0.5, 6), (1.3, 9), (1.8, 12)):
            spec = LMGSpec(lam, N)
            j = _ground_info(lam, N, conv).j_crossings
            closed = eq23_closed_form(j, N, spec.coupling)
            ok = ok and abs(math.sqrt(max(_bruteforce_variance(spec, conv), 0.0)) - closed) < 1e-10
        if ok:
            passing.append(conv)
    if len(passing) != 1:
        raise RuntimeError(f"sign convention not uniquely determined: {passing}")
    return passing[0]


def ground_info(lam, N, convention=None):
    """Bath ground level at gamma = 0 and the number of level crossings j
    passed relative to the aligned level.  Ties go to the smaller j."""
    return _ground_info(lam, N, convention or frozen_convention())


def initial_state(spec, convention=None):
    conv = convention or frozen_convention()
    psi = np.zeros(spec.dim)
    psi[_initial_index(spec, conv)] = 1.0
    return psi


# -- quench dynamics --------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralQuench:
    """Post-quench eigenenergies with weights p_j = |<phi_j|psi_0>|^2 and the
    initial energy; chi(t) = sum_j p_j exp(-i (E_j - E_i) t)."""

    energies: np.ndarray
    weights: np.ndarray
    e_initial: float
    e_ground_final: float

    def chi(self, times):
        t = np.atleast_1d(np.asarray(times, dtype=float))
        keep = self.weights > 0
        w = self.weights[keep]
        de = self.energies[keep] - self.e_initial
        out = np.empty(t.size, dtype=complex)
        for start in range(0, t.size, 512):
            out[start:start + 512] = np.exp(-1j * np.outer(t[start:start + 512], de)) @ w
        return out

    @property
    def mean_work(self):
        return float(self.weights @ self.energies - self.e_initial)

    @property
    def variance(self):
        mean = self.weights @ self.energies
        return float(max(self.weights @ (self.energies - mean) ** 2, 0.0))


@functools.lru_cache(maxsize=32)
def _spectral_quench(lam, N, gamma, tol):
    spec = LMGSpec(lam, N, gamma=gamma)
    conv = frozen_convention()
    h_i = build_hamiltonian(spec, False, conv)
    h_f = build_hamiltonian(spec, True, conv)
    i0 = _initial_index(spec, conv)
    dec = numerics.eigh(h_f, tol)
    weights = np.abs(dec.eigenvectors[i0]) ** 2
    return SpectralQuench(dec.eigenvalues, weights, float(h_i[i0, i0]), float(dec.eigenvalues[0]))


def spectral_quench(spec, tol=DEFAULT_TOLERANCES):
    return _spectral_quench(float(spec.lam), spec.n_spins, spec.gamma, tol)


def default_time_grid(spec, n_points=DEFAULT_GRID_POINTS):
    """n_points over one closed-form recurrence period 2 pi / Delta H."""
    j = ground_info(spec.lam, spec.n_spins).j_crossings
    dh = eq23_closed_form(j, spec.n_spins, spec.coupling)
    t_max = 2 * math.pi / dh if dh > 0 else 2 * math.pi
    return np.linspace(0.0, t_max, n_points)


def quench_chi(spec, tol=DEFAULT_TOLERANCES):
    times = spec.time_grid if spec.time_grid is not None else default_time_grid(spec)
    sq = spectral_quench(spec, tol)
    series = SurvivalSeries(times, sq.chi(times), meta={"model": "lmg", "lam": spec.lam, "n_spins": spec.n_spins})
    return series.check(tol)


class Eq23Variance(NamedTuple):
    closed_form: float
    bruteforce: float
    j_crossings: int


def variance_eq23(lam, N, gamma=None):
    """Energy spread Delta H: crossing-count closed form and the dense
    <H_f^2> - <H_f>^2 on the initial state."""
    spec = LMGSpec(lam, N, gamma=gamma)
    conv = frozen_convention()
    j = _ground_info(lam, N, conv).j_crossings
    closed = eq23_closed_form(j, N, spec.coupling)
    h_f = build_hamiltonian(spec, True, conv)
    psi = initial_state(spec, conv)
    hpsi = h_f @ psi
    brute = math.sqrt(max(float(hpsi @ hpsi - (psi @ hpsi) ** 2), 0.0))
    return Eq23Variance(closed, brute, j)


class FMin(NamedTuple):
    f_min: float
    t_min: float


def _refine_minimum(sq, times, f, i):
    """Parabola through grid points i-1, i, i+1; F re-evaluated at its vertex."""
    t3, f3 = times[i - 1:i + 2], f[i - 1:i + 2]
    denom = (t3[0] - t3[1]) * (t3[0] - t3[2]) * (t3[1] - t3[2])
    a = (t3[2] * (f3[1] - f3[0]) + t3[1] * (f3[0] - f3[2]) + t3[0] * (f3[2] - f3[1])) / denom
    b = (t3[2] ** 2 * (f3[0] - f3[1]) + t3[1] ** 2 * (f3[2] - f3[0]) + t3[0] ** 2 * (f3[1] - f3[2])) / denom
    if a <= 0:
        return float(times[i]), float(f[i])
    t_star = -b / (2 * a)
    if abs(t_star - times[i]) > times[i + 1] - times[i]:
        warnings.warn("grid too coarse: refinement moved t_min by more than one step", stacklevel=3)
    f_star = float(np.abs(sq.chi([t_star])[0]) ** 2)
    if f_star < f[i]:
        return float(t_star), f_star
    return float(times[i]), float(f[i])


def fmin_scan(spec, tol=DEFAULT_TOLERANCES):
    """Minimum of F over the grid and the time it is first reached.

    Every interior grid minimum is refined by a parabola through its
    neighbours; the dynamics recur, so the earliest minimum matching the
    global one (to 1e-6 relative) is reported.
    """
    if spec.coupling == 0.0:
        return FMin(1.0, 0.0)
    times = spec.time_grid if spec.time_grid is not None else default_time_grid(spec)
    sq = spectral_quench(spec, tol)
    f = np.abs(sq.chi(times)) ** 2
    interior = np.flatnonzero((f[1:-1] <= f[:-2]) & (f[1:-1] <= f[2:])) + 1
    candidates = [_refine_minimum(sq, times, f, i) for i in interior]
    i = int(np.argmin(f))
    candidates.append((float(times[i]), float(f[i])))
    f_best = min(c[1] for c in candidates)
    t_first = min(t for t, fv in candidates if fv <= f_best * (1 + 1e-6) + 1e-14)
    return FMin(f_best, t_first)


# -- bath spectrum ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectrumSweep:
    n_spins: int
    lambdas: np.ndarray
    energies: np.ndarray  # (len(lambdas), N + 1), ascending per row
    ground_m: np.ndarray
    crossings: np.ndarray  # exact lambda of each ground-level change in range


def crossing_point(N, m_a, m_b, convention=None):
    """Coupling where bath levels m_a and m_b are degenerate."""
    conv = convention or frozen_convention()
    # E(m) = lam * (2 m^2 / N - N/2) - 2 sign m, linear in lam
    slope = 2 * (m_a ** 2 - m_b ** 2) / N
    offset = -2 * conv.bath_field * (m_a - m_b)
    return -offset / slope


def spectrum_sweep(N, lambda_grid, convention=None):
    conv = convention or frozen_convention()
    lams = np.asarray(lambda_grid, dtype=float)
    energies = np.array([np.linalg.eigvalsh(bath_matrix(lam, N, conv)) for lam in lams])
    ground_m = np.array([_ground_info(lam, N, conv).m_ground for lam in lams])
    crossings = []
    if lams.size:
        lo, hi = lams.min(), lams.max()
        m_prev = _ground_info(lo, N, conv).m_ground
        # just above hi, so a degeneracy exactly at hi counts as a crossing
        m_last = _ground_info(hi * (1 + 1e-9), N, conv).m_ground
        step = 1 if m_last > m_prev else -1
        m = m_prev
        while m != m_last:
            lam_c = crossing_point(N, m, m + step, conv)
            if lo < lam_c <= hi * (1 + 1e-12):
                crossings.append(lam_c)
            m += step
    return SpectrumSweep(N, lams, energies, ground_m, np.array(crossings))
