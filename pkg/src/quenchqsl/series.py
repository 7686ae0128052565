from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_TOLERANCES


def uniform_grid(t_max, n_points):
    """Strictly ascending grid on [0, t_max] with `n_points` samples."""
    if n_points < 2 or not t_max > 0:
        raise ValueError("need t_max > 0 and at least two points")
    return np.linspace(0.0, float(t_max), int(n_points))


def validate_time_grid(times):
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("time grid must be a non-empty 1-d sequence")
    if times[0] != 0.0:
        raise ValueError("time grid must start at t=0")
    if np.any(np.diff(times) <= 0):
        raise ValueError("time grid must be strictly ascending")
    return times


@dataclass(frozen=True)
class SurvivalSeries:
    """Dynamical overlap chi(t) on a time grid; fidelity is |chi|^2."""

    times: np.ndarray
    chi: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        chi = np.asarray(self.chi, dtype=complex)
        if times.shape != chi.shape:
            raise ValueError("times and chi must have equal length")
        if not np.all(np.isfinite(chi)):
            raise ValueError("non-finite overlap in survival series")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "chi", chi)

    @property
    def fidelity(self):
        return np.abs(self.chi) ** 2

    def check(self, tol=DEFAULT_TOLERANCES):
        """Raise if F(0) != 1 or F leaves [0, 1] beyond roundoff."""
        f = self.fidelity
        if self.times.size and self.times[0] == 0.0 and abs(f[0] - 1.0) > tol.initial_fidelity:
            raise ValueError(f"F(0) = {f[0]!r} differs from 1")
        if np.any(f > 1.0 + tol.fidelity_excess):
            raise ValueError(f"fidelity exceeds one: max F = {f.max()!r}")
        return self
