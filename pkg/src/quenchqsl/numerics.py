"""Dense matrix kernels shared by the model modules.

Determinants use LAPACK's partially pivoted LU (max-modulus row pivots), which
keeps the overlap matrices stable near orthogonality times.
"""
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOLERANCES


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def check(self, matrix, tol=DEFAULT_TOLERANCES):
        """Verify ordering, orthonormality and residuals against `matrix`."""
        vals, vecs = self.eigenvalues, self.eigenvectors
        if np.any(np.diff(vals) < 0):
            raise AssertionError("eigenvalues not ascending")
        gram = vecs.conj().T @ vecs
        ortho = np.max(np.abs(gram - np.eye(len(vals))))
        if ortho > tol.orthonormal:
            raise AssertionError(f"eigenvectors not orthonormal: defect {ortho:.3e}")
        scale = max(np.linalg.norm(matrix, 2), 1.0)
        resid = np.linalg.norm(matrix @ vecs - vecs * vals, axis=0).max()
        if resid > tol.eig_residual * scale:
            raise AssertionError(f"eigen-residual {resid:.3e} exceeds {tol.eig_residual:g}*|H|")
        return self


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    r_squared: float

    def __call__(self, x):
        return self.slope * np.asarray(x) + self.intercept


def as_matrix(m, square=True):
    a = np.asarray(m)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {a.shape}")
    if square and a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def determinant(m):
    """Determinant of a square matrix (or a stack of them along axis 0)."""
    a = np.asarray(m)
    if a.ndim == 2:
        a = as_matrix(a)
        if a.shape == (1, 1):
            return complex(a[0, 0])
        return complex(np.linalg.det(a))
    if a.ndim != 3 or a.shape[1] != a.shape[2]:
        raise ValueError(f"expected square matrices, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return np.linalg.det(a).astype(complex)


def log_determinant(m):
    """(phase, log|det|) so that det = phase * exp(logabs); survives underflow."""
    a = np.asarray(m)
    if a.ndim == 2:
        a = as_matrix(a)
    elif not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    sign, logabs = np.linalg.slogdet(a)
    return sign, logabs


def hermiticity_defect(m):
    a = np.asarray(m)
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


def eigh(m, tol=DEFAULT_TOLERANCES):
    """Full spectrum of a Hermitian matrix, eigenvalues ascending."""
    a = as_matrix(m)
    if a.shape[0] == 0:
        raise ValueError("empty matrix has no spectrum")
    defect = hermiticity_defect(a)
    if defect > tol.hermitian:
        raise ValueError(f"matrix not Hermitian: max |m - m^H| = {defect:.3e}")
    a = 0.5 * (a + a.conj().T)
    vals, vecs = np.linalg.eigh(a)
    return EigenDecomposition(vals, vecs)


def linear_fit(xs, ys):
    """Ordinary least-squares line through (xs, ys)."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("xs and ys must be 1-d with equal length")
    if np.unique(x).size < 2:
        raise ValueError("need at least two distinct abscissae")
    xm, ym = x.mean(), y.mean()
    sxx = np.sum((x - xm) ** 2)
    slope = np.sum((x - xm) * (y - ym)) / sxx
    intercept = ym - slope * xm
    ss_tot = np.sum((y - ym) ** 2)
    ss_res = np.sum((y - slope * x - intercept) ** 2)
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return LinearFit(float(slope), float(intercept), float(min(max(r2, 0.0), 1.0)))
