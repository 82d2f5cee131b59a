"""Dual-form kernel ridge regression with an incrementally grown Cholesky factor.

The regularized inverse covariance ``W = (sum_i K_i (x) K_i + lam I)^{-1}`` lives
in the RKHS and cannot be stored for a general kernel.  Everything needed from
it is recovered from the Gram matrix ``G`` of the anchors through the Woodbury
identity::

    <W K_z, K_z> = (K(z, z) - k(z)^T (G + lam I)^{-1} k(z)) / lam
    f(z)         = y^T (G + lam I)^{-1} k(z)

where ``k(z)[i] = K(x_i, z)``.  ``G + lam I`` is kept as a lower Cholesky
factor that is bordered by one row per :meth:`DualRegressor.push`.
"""
from __future__ import annotations

import numpy as np
from scipy.linalg import solve_triangular

from .errors import InvalidArgument, NumericalError
from .features import KernelSpec

# Triangular solves run block by block so that the factor, a strided view into
# preallocated storage, is never copied whole.
_BLOCK = 256


def _forward(L, B):
    """``L^{-1} B`` for lower-triangular ``L``."""
    n = L.shape[0]
    X = np.empty_like(B)
    for i0 in range(0, n, _BLOCK):
        i1 = min(i0 + _BLOCK, n)
        rhs = B[i0:i1] - L[i0:i1, :i0] @ X[:i0] if i0 else B[i0:i1]
        X[i0:i1] = solve_triangular(L[i0:i1, i0:i1], rhs, lower=True, check_finite=False)
    return X


def _backward(L, B):
    """``L^{-T} B`` for lower-triangular ``L``."""
    n = L.shape[0]
    X = np.empty_like(B)
    for i0 in reversed(range(0, n, _BLOCK)):
        i1 = min(i0 + _BLOCK, n)
        rhs = B[i0:i1] - L[i1:, i0:i1].T @ X[i1:] if i1 < n else B[i0:i1]
        X[i0:i1] = solve_triangular(L[i0:i1, i0:i1], rhs, lower=True, trans="T", check_finite=False)
    return X


class DualRegressor:
    """Anchors, Gram matrix and Cholesky factor of ``G + lam I``.

    Parameters
    ----------
    kernel : KernelSpec
        Kernel evaluated between feature vectors.
    lam : float
        Ridge parameter, must be positive.
    capacity : int, optional
        Initial storage size; grows automatically.
    """

    def __init__(self, kernel: KernelSpec, lam: float, capacity: int = 64):
        if not lam > 0:
            raise InvalidArgument(f"lambda must be positive, got {lam}")
        self.kernel = kernel
        self.lam = float(lam)
        capacity = max(int(capacity), 1)
        self._anchors = np.zeros((capacity, kernel.dim))
        self._gram = np.zeros((capacity, capacity))
        self._chol = np.zeros((capacity, capacity))
        self.n = 0

    @property
    def anchors(self) -> np.ndarray:
        return self._anchors[: self.n]

    @property
    def gram(self) -> np.ndarray:
        return self._gram[: self.n, : self.n]

    @property
    def chol(self) -> np.ndarray:
        return self._chol[: self.n, : self.n]

    def _grow(self):
        cap = self._anchors.shape[0]
        new = 2 * cap
        anchors = np.zeros((new, self.kernel.dim))
        anchors[:cap] = self._anchors
        gram = np.zeros((new, new))
        gram[:cap, :cap] = self._gram
        chol = np.zeros((new, new))
        chol[:cap, :cap] = self._chol
        self._anchors, self._gram, self._chol = anchors, gram, chol

    def kernel_vectors(self, Z) -> np.ndarray:
        """``k(z)`` for each row of ``Z``, shape ``(len(Z), n)``."""
        return self.kernel.matrix(Z, self.anchors)

    def half_solve(self, B) -> np.ndarray:
        """``L^{-1} B`` for the current factor ``L``."""
        B = np.asarray(B, dtype=float)
        if self.n == 0:
            return B
        return _forward(self.chol, B)

    def solve(self, B) -> np.ndarray:
        """``(G + lam I)^{-1} B``."""
        B = np.asarray(B, dtype=float)
        if self.n == 0:
            return B
        return _backward(self.chol, _forward(self.chol, B))

    def push(self, x, k_x=None) -> "DualRegressor":
        """Append anchor ``x`` and border the Cholesky factor by one row.

        ``k_x`` may pass precomputed kernel values against the current anchors.
        """
        x = np.asarray(x, dtype=float)
        if k_x is None:
            k_x = self.kernel_vectors(x[None, :])[0]
        kxx = float(self.kernel.diag(x[None, :])[0])
        c = self.half_solve(k_x)
        pivot = kxx + self.lam - float(c @ c)
        if not pivot > 0 or not np.isfinite(pivot):
            raise NumericalError(
                f"non-positive Cholesky pivot {pivot:.3e} at n={self.n} "
                f"(K(x,x)={kxx:.6g}, lam={self.lam:.3e}, |L^-1 k|^2={float(c @ c):.6g})"
            )
        if self.n == self._anchors.shape[0]:
            self._grow()
        n = self.n
        self._anchors[n] = x
        self._gram[n, :n] = k_x
        self._gram[:n, n] = k_x
        self._gram[n, n] = kxx
        self._chol[n, :n] = c
        self._chol[n, n] = np.sqrt(pivot)
        self.n = n + 1
        return self

    def widths_sq(self, Z, K_Z=None) -> np.ndarray:
        """Squared widths ``||K_z||^2_W`` for each row of ``Z``, clamped at 0."""
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        diag = self.kernel.diag(Z)
        if self.n == 0:
            return diag / self.lam
        if K_Z is None:
            K_Z = self.kernel_vectors(Z)
        C = self.half_solve(K_Z.T)
        rad = (diag - np.einsum("ij,ij->j", C, C)) / self.lam
        return np.maximum(rad, 0.0)

    def widths(self, Z, K_Z=None) -> np.ndarray:
        return np.sqrt(self.widths_sq(Z, K_Z))

    def width(self, z) -> float:
        """``||K_z||_W`` at a single feature vector."""
        return float(self.widths(np.asarray(z, dtype=float)[None, :])[0])

    def coefficients(self, targets) -> np.ndarray:
        """Dual coefficients ``alpha = (G + lam I)^{-1} y``."""
        targets = np.asarray(targets, dtype=float)
        if targets.shape != (self.n,):
            raise InvalidArgument(f"expected {self.n} targets, got shape {targets.shape}")
        return self.solve(targets)

    def ridge_predict(self, targets, z) -> float:
        alpha = self.coefficients(targets)
        if self.n == 0:
            return 0.0
        k = self.kernel_vectors(np.asarray(z, dtype=float)[None, :])[0]
        return float(k @ alpha)

    def rkhs_norm_sq(self, targets) -> float:
        """Squared RKHS norm ``alpha^T G alpha`` of the fitted predictor."""
        alpha = self.coefficients(targets)
        if self.n == 0:
            return 0.0
        return float(alpha @ self.gram @ alpha)

    def factor_error(self) -> float:
        """Relative Frobenius error of ``L L^T`` against ``G + lam I``."""
        if self.n == 0:
            return 0.0
        A = self.gram + self.lam * np.eye(self.n)
        L = self.chol
        return float(np.linalg.norm(L @ L.T - A) / np.linalg.norm(A))
