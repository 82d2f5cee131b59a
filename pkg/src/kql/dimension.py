"""Effective and pseudo dimension of kernel data, closed-form bounds, and checkers.

All quantities are computed from a finite Gram matrix ``G`` at scale ``lam``::

    d_eff = tr((G + lam I)^{-1} G)
    d_pse = ln det(I + G / lam)

The checkers return :class:`CheckResult` records that render as
``PASS|FAIL name lhs rhs`` lines.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular

from .errors import InvalidArgument, InvalidInput, OutOfDomain

PSD_TOL = 1e-8


def _validate_gram(gram, lam):
    gram = np.asarray(gram, dtype=float)
    if gram.ndim != 2 or gram.shape[0] != gram.shape[1]:
        raise InvalidInput(f"gram must be square, got shape {gram.shape}")
    if not lam > 0:
        raise InvalidArgument(f"lambda must be positive, got {lam}")
    n = gram.shape[0]
    if n == 0:
        return gram
    if not np.all(np.isfinite(gram)):
        raise InvalidInput("gram has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(gram))))
    if np.max(np.abs(gram - gram.T)) > PSD_TOL * scale:
        raise InvalidInput("gram is not symmetric")
    min_eig = float(np.linalg.eigvalsh(gram)[0])
    if min_eig < -PSD_TOL * n * scale:
        raise InvalidInput(f"gram is not positive semidefinite (smallest eigenvalue {min_eig:.3e})")
    return gram


def effective_dimension(gram, lam: float) -> float:
    gram = _validate_gram(gram, lam)
    n = gram.shape[0]
    if n == 0:
        return 0.0
    factor = cho_factor(gram + lam * np.eye(n), lower=True)
    return float(np.trace(cho_solve(factor, gram)))


def pseudo_dimension(gram, lam: float) -> float:
    gram = _validate_gram(gram, lam)
    n = gram.shape[0]
    if n == 0:
        return 0.0
    L = np.linalg.cholesky(np.eye(n) + gram / lam)
    return float(2.0 * np.sum(np.log(np.diag(L))))


def effective_dimension_dual_identity(gram, lam: float) -> float:
    """``sum_i ||K_{x_i}||^2`` in the ``(Sigma + lam I)^{-1}`` norm, via the Gram matrix."""
    gram = _validate_gram(gram, lam)
    n = gram.shape[0]
    if n == 0:
        return 0.0
    L = np.linalg.cholesky(gram + lam * np.eye(n))
    C = solve_triangular(L, gram, lower=True)
    return float(np.sum(np.diag(gram) - np.einsum("ij,ij->j", C, C)) / lam)


def prefix_widths_sq(gram, lam: float) -> np.ndarray:
    """``W[m, i] = ||K_{x_i}||^2`` in the norm of the first ``m`` points, ``m = 0..n-1``."""
    gram = np.asarray(gram, dtype=float)
    n = gram.shape[0]
    W = np.zeros((n, n))
    diag = np.diag(gram)
    W[0] = diag / lam
    for m in range(1, n):
        L = np.linalg.cholesky(gram[:m, :m] + lam * np.eye(m))
        C = solve_triangular(L, gram[:m], lower=True)
        W[m] = np.maximum(diag - np.einsum("ij,ij->j", C, C), 0.0) / lam
    return W


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    lhs: float
    rhs: float
    detail: str = ""

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        out = f"{tag} {self.name} {self.lhs:.10g} {self.rhs:.10g}"
        return f"{out} {self.detail}" if self.detail else out

    def __bool__(self):
        return self.passed


def check_dual_identity(gram, lam: float, rtol: float = 1e-6) -> CheckResult:
    trace = effective_dimension(gram, lam)
    dual = effective_dimension_dual_identity(gram, lam)
    ok = abs(trace - dual) <= rtol * max(abs(trace), 1e-12)
    return CheckResult("deff_dual_identity", ok, dual, trace)


def check_monotonicity(gram, lam: float, slack: float = 1e-10) -> list[CheckResult]:
    """Effective and pseudo dimension along all prefixes must be non-decreasing.

    Each result's ``detail`` names the first violating prefix length, if any.
    """
    gram = _validate_gram(gram, lam)
    n = gram.shape[0]
    results = []
    for name, fn in (("deff_monotone", effective_dimension), ("dpse_monotone", pseudo_dimension)):
        values = [fn(gram[:m, :m], lam) for m in range(n + 1)]
        diffs = np.diff(values)
        bad = np.flatnonzero(diffs < -slack)
        detail = f"first_violation_prefix={int(bad[0]) + 1}" if len(bad) else ""
        worst = float(diffs.min()) if len(diffs) else 0.0
        results.append(CheckResult(name, len(bad) == 0, worst, -slack, detail))
    return results


def check_pseudo_vs_effective(gram, lam: float) -> CheckResult:
    n = np.asarray(gram).shape[0]
    lhs = pseudo_dimension(gram, lam)
    rhs = math.log(math.e * (n + lam) / lam) * effective_dimension(gram, lam)
    return CheckResult("dpse_le_log_deff", lhs <= rhs * (1 + 1e-10) + 1e-12, lhs, rhs)


def sum_of_ucb(gram, lam: float, gamma: float) -> tuple[float, float]:
    """Both sides of the discounted sum-of-widths inequality.

    ``lhs = sum_i sum_{tau <= i} gamma^(i - tau) ||K_{x_i}||^2_{(Sigma_{tau-1} + lam I)^{-1}}``
    and ``rhs = (1/lam) / (ln(1 + 1/lam) (1 - gamma)^2) * d_pse``.
    """
    gram = _validate_gram(gram, lam)
    n = gram.shape[0]
    if n == 0:
        return 0.0, 0.0
    W = prefix_widths_sq(gram, lam)
    lhs = 0.0
    for i in range(n):
        taus = np.arange(i + 1)
        lhs += float(np.sum(gamma ** (i - taus) * W[taus, i]))
    rhs = (1.0 / lam) / (math.log1p(1.0 / lam) * (1.0 - gamma) ** 2) * pseudo_dimension(gram, lam)
    return lhs, rhs


def check_sum_of_ucb(gram, lam: float, gamma: float) -> CheckResult:
    lhs, rhs = sum_of_ucb(gram, lam, gamma)
    return CheckResult(f"sum_of_ucb_gamma={gamma:g}", lhs <= rhs * (1 + 1e-10) + 1e-12, lhs, rhs)


# -- closed-form bounds --------------------------------------------------


@dataclass(frozen=True)
class KernelDescriptor:
    """``kind`` is ``"linear"`` (dimension ``d``) or ``"gaussian"`` (``d``, ``eta``)."""

    kind: str
    d: int
    eta: float = 0.0

    def __post_init__(self):
        if self.kind not in ("linear", "gaussian"):
            raise InvalidArgument(f"unknown kernel descriptor {self.kind!r}")
        if self.d < 1 or self.eta < 0:
            raise InvalidArgument("d must be >= 1 and eta >= 0")


def d_lambda_bound(kernel: KernelDescriptor, n: int, lam: float) -> float:
    """Upper bound on the effective dimension of any ``n`` points in the unit ball."""
    if kernel.kind == "linear":
        return float(kernel.d)
    if lam > n:
        raise OutOfDomain(f"Gaussian bound needs lambda <= n, got lambda={lam}, n={n}")
    d = kernel.d
    return 3.0 * (6.0 + 41.0 / d * kernel.eta + 3.0 / d * math.log(n / lam)) ** d


def log_covering_h(kernel: KernelDescriptor, eps: float) -> float:
    """Bound on the log covering number of the RKHS unit ball in the sup norm."""
    if kernel.kind == "linear":
        return kernel.d * math.log1p(2.0 / eps)
    m = math.ceil(2.0 * (math.log(2.0 / eps) + math.e**2 * kernel.eta))
    return float(m) ** kernel.d * math.log1p(4.0 / eps)


def log_covering_hs(kernel: KernelDescriptor, eps: float) -> float:
    """Bound on the log covering number of the Hilbert-Schmidt unit ball."""
    if kernel.kind == "linear":
        return kernel.d**2 * math.log1p(2.0 / eps)
    m = math.ceil(2.0 * (math.log(2.0 * math.sqrt(2.0) / eps) + math.e**2 * kernel.eta))
    return float(m) ** (2 * kernel.d) * math.log1p(4.0 / eps)


def covering_granularities(T: int, lam: float, gamma: float) -> tuple[float, float]:
    eps_h = lam**2 * (1.0 - gamma) / (4.0 * T**2)
    eps_hs = lam**3 * (1.0 - gamma) / (32.0 * (T + lam) ** 3)
    return eps_h, eps_hs


def c_lambda_bound(kernel: KernelDescriptor, T: int, lam: float, gamma: float) -> float:
    eps_h, eps_hs = covering_granularities(T, lam, gamma)
    return log_covering_h(kernel, eps_h) + log_covering_hs(kernel, eps_hs)


@dataclass(frozen=True)
class TheoryParams:
    T: int
    gamma: float
    lam: float
    d_lambda: float
    c_lambda: float = 0.0
    rho: float = 1.0
    epsilon: float = 0.0
    sigma: float = 0.0
    p: float = 0.05

    def __post_init__(self):
        problems = []
        if not self.lam > 0:
            problems.append("lambda > 0")
        if not 0 <= self.gamma < 1:
            problems.append("gamma in [0, 1)")
        if not self.rho >= 1 - self.gamma:
            problems.append("rho >= 1 - gamma")
        if not self.epsilon >= 0:
            problems.append("epsilon >= 0")
        if not 0 <= self.sigma <= 1:
            problems.append("sigma in [0, 1]")
        if not self.p > 0:
            problems.append("p > 0")
        if not self.d_lambda >= 1:
            problems.append("d_lambda >= 1")
        if not self.c_lambda >= 0:
            problems.append("c_lambda >= 0")
        if self.T < 1:
            problems.append("T >= 1")
        if problems:
            raise InvalidArgument("violated hypotheses: " + ", ".join(problems))

    @classmethod
    def for_kernel(cls, kernel: KernelDescriptor, T: int, gamma: float, lam: float, **kw) -> "TheoryParams":
        """Fill ``d_lambda`` and ``c_lambda`` from the closed-form kernel bounds."""
        d_lam = max(1.0, d_lambda_bound(kernel, T, lam))
        return cls(T=T, gamma=gamma, lam=lam, d_lambda=d_lam, c_lambda=c_lambda_bound(kernel, T, lam, gamma), **kw)


def theoretical_beta(p: TheoryParams) -> float:
    T, lam = p.T, p.lam
    cap = 2.0 * math.sqrt(T + lam)
    confident = (
        3.0 * p.rho * math.sqrt(lam)
        + p.epsilon * math.sqrt(T * p.d_lambda)
        + 2.0 * p.sigma * math.sqrt(p.d_lambda * math.log(math.e * (T + lam) / lam) + math.log(2.0 / p.p) + p.c_lambda)
    )
    return min(cap, confident) / (1.0 - p.gamma)


def regret_bound(p: TheoryParams, corollary: bool = False) -> float:
    """Regret bound expression with its hidden constant set to 1.

    ``corollary=True`` uses the kernel-specific form of the noise term,
    ``sigma * d_lambda * sqrt(log(e (T + lam) / (lam p)) / lam)``.
    """
    T, lam, g = p.T, p.lam, p.gamma
    log_ratio = math.log(math.e * (T + lam) / lam)
    lead = math.sqrt(T * p.d_lambda * log_ratio / (math.log1p(1.0 / lam) * (1.0 - g) ** 5))
    log_noise = math.log(math.e * (T + lam) / (lam * p.p))
    if corollary:
        noise = p.sigma * p.d_lambda * math.sqrt(log_noise / lam)
    else:
        noise = p.sigma * math.sqrt((p.d_lambda * log_noise + p.c_lambda) / lam)
    return lead * (p.rho + p.epsilon * math.sqrt(p.d_lambda * T / lam) + noise)


def check_bound_domination(kernel: KernelDescriptor, gram, lam: float) -> CheckResult:
    n = np.asarray(gram).shape[0]
    measured = effective_dimension(gram, lam)
    bound = d_lambda_bound(kernel, n, lam)
    return CheckResult(f"deff_bound_{kernel.kind}", measured <= bound + 1e-9, measured, bound)
