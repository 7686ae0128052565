"""Spectral function S(w) = 2 Re int dt chi(t) exp(i w t) of a survival series.

chi is extended to negative times by chi(-t) = conj(chi(t)), so the
transform over the symmetric grid is real and S is twice it.  Discrete
normalization: S(w_n) = 2 * dt * sum_k chi(t_k) exp(i w_n t_k) over
t_k = -(K-1) dt .. (K-1) dt, with w_n = 2 pi n / (L dt), L = 2K - 1.
"""
from dataclasses import dataclass, field

import numpy as np

NORMALIZATION = "S(w_n) = 2 dt sum_{k=-(K-1)}^{K-1} chi(t_k) exp(i w_n t_k); w_n = 2 pi n / ((2K-1) dt)"


@dataclass(frozen=True)
class SpectralFunction:
    omegas: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def d_omega(self):
        return float(self.omegas[1] - self.omegas[0])


def _uniform_step(times):
    times = np.asarray(times, dtype=float)
    if times.size < 2:
        raise ValueError("need at least two samples")
    steps = np.diff(times)
    dt = steps.mean()
    if np.max(np.abs(steps - dt)) > 1e-9 * max(dt, 1.0) or times[0] != 0.0:
        raise ValueError("spectral transform needs a uniform grid starting at t=0")
    return float(dt)


def hermitian_extension(chi):
    chi = np.asarray(chi, dtype=complex)
    return np.concatenate([np.conj(chi[:0:-1]), chi])


def spectral_function(series, window="none"):
    dt = _uniform_step(series.times)
    x = hermitian_extension(series.chi)
    L = x.size
    K = series.times.size
    if window == "hann":
        k = np.arange(-(K - 1), K)
        x = x * np.cos(0.5 * np.pi * k / K) ** 2
    elif window != "none":
        raise ValueError(f"unknown window {window!r}")
    # put t = 0 at index 0; ifft supplies the exp(+i w t) kernel
    spectrum = L * np.fft.ifft(np.fft.ifftshift(x))
    values = 2.0 * dt * np.fft.fftshift(spectrum).real
    omegas = 2 * np.pi * np.fft.fftshift(np.fft.fftfreq(L, dt))
    return SpectralFunction(omegas, values, meta={"normalization": NORMALIZATION, "window": window, "dt": dt})


def parseval_defect(series, sf):
    """|sum |chi|^2 dt - (dw / 2 pi) sum (S/2)^2| over the extended grid."""
    dt = _uniform_step(series.times)
    x = hermitian_extension(series.chi)
    time_side = float(np.sum(np.abs(x) ** 2) * dt)
    freq_side = float(sf.d_omega / (2 * np.pi) * np.sum((sf.values / 2) ** 2))
    return abs(time_side - freq_side)


def peak_width(sf, level=0.5):
    """Span of frequencies where S exceeds `level` times its maximum."""
    above = np.flatnonzero(sf.values >= level * sf.values.max())
    return float(sf.omegas[above[-1]] - sf.omegas[above[0]])


def spectral_centroid_spread(sf):
    """Mean and standard deviation of w under the positive part of S."""
    w = np.clip(sf.values, 0.0, None)
    total = w.sum()
    mean = float(np.sum(w * sf.omegas) / total)
    return mean, float(np.sqrt(np.sum(w * (sf.omegas - mean) ** 2) / total))
