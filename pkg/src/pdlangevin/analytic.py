"""Closed-form results for the linear-quadratic (Gaussian) sampling problem.

These serve as ground truth in tests: the 2x2 stationary covariance of the
primal-dual diffusion, its generalized-noise primal variance, the Lyapunov
equation they must both solve, and the large-step-ratio bias bound.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GaussModel1D:
    """One-dimensional quadratic potentials ``f(y) = y^2/(2 c_f)``,
    ``g(x) = x^2/(2 c_g)`` composed through the scalar map ``x -> k x``,
    with dual/primal time-scale ratio ``lam``."""

    c_f: float
    c_g: float
    k: float
    lam: float = 1.0

    def __post_init__(self):
        if self.c_f <= 0 or self.c_g <= 0 or self.lam <= 0:
            raise ValueError("c_f, c_g and lam must be positive")
        if self.k == 0:
            raise ValueError("k must be nonzero")

    def drift_matrix(self) -> np.ndarray:
        """Negative drift coefficient of the joint (x, y) linear diffusion."""
        return np.array(
            [[1.0 / self.c_g, self.k], [-self.lam * self.k, self.lam * self.c_f]]
        )

    def noise_matrix(self) -> np.ndarray:
        """Diffusion coefficient with noise only in the primal variable."""
        return np.array([[np.sqrt(2.0)], [0.0]])


def target_variance(m: GaussModel1D) -> float:
    """Variance of the target density ``exp(-f(kx) - g(x))``."""
    return m.c_f * m.c_g / (m.c_f + m.k**2 * m.c_g)


def stationary_cov_pd(m: GaussModel1D) -> np.ndarray:
    """Stationary covariance of the joint primal-dual diffusion.

    The primal marginal variance is the (0, 0) entry; it exceeds the target
    variance for every finite ``lam`` and approaches it as ``lam`` grows.
    """
    cf, cg, k, lam = m.c_f, m.c_g, m.k, m.lam
    denom = (cf + k**2 * cg) * (1.0 + lam * cf * cg)
    top_left = cg * (cf + k**2 * cg) + lam * cf**2 * cg**2
    off = k * lam * cf * cg**2
    bottom_right = k**2 * lam * cg**2
    return np.array([[top_left, off], [off, bottom_right]]) / denom


def lyapunov_cov(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Stationary covariance of ``dZ = -A Z dt + B dW``: solves
    ``A S + S A^T = B B^T`` for the symmetric 2x2 matrix S.

    Solved as an explicit dense linear system in the 3 symmetric unknowns
    (s11, s12, s22); raises if A is not Hurwitz after negation.
    """
    A = np.asarray(A, dtype=float)
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if B.shape[0] != 2:
        B = B.T
    if A.shape != (2, 2):
        raise ValueError("A must be 2x2")
    if np.any(np.linalg.eigvals(A).real <= 0):
        raise ValueError("A must have eigenvalues with positive real part")
    Q = B @ B.T
    a11, a12, a21, a22 = A.ravel()
    # rows: equations for (1,1), (1,2), (2,2) entries of A S + S A^T = Q
    M = np.array(
        [
            [2 * a11, 2 * a12, 0.0],
            [a21, a11 + a22, a12],
            [0.0, 2 * a21, 2 * a22],
        ]
    )
    rhs = np.array([Q[0, 0], Q[0, 1], Q[1, 1]])
    s11, s12, s22 = np.linalg.solve(M, rhs)
    return np.array([[s11, s12], [s12, s22]])


def general_noise_primal_variance(
    m: GaussModel1D, b11: float, b12: float, b21: float, b22: float
) -> float:
    """Primal marginal variance of the stationary state when the joint
    diffusion carries a general constant 2x2 noise coefficient."""
    cf, cg, k, lam = m.c_f, m.c_g, m.k, m.lam
    num = (
        (b11**2 + b12**2) * (lam * cf**2 * cg**2 + cg * (cf + k**2 * cg))
        - 2.0 * (b11 * b21 + b12 * b22) * k * cf * cg**2
        + (b21**2 + b22**2) * k**2 * cg**2 / lam
    )
    return num / (2.0 * (1.0 + lam * cf * cg) * (cf + k**2 * cg))


def modified_sde_coefficients(m: GaussModel1D) -> tuple[np.ndarray, np.ndarray]:
    """Drift and noise coefficients of the bias-corrected joint diffusion
    on the quadratic model."""
    cf, cg, k, lam = m.c_f, m.c_g, m.k, m.lam
    A = np.array(
        [
            [1.0 / cg, k],
            [-lam * k + k / (cf * cg) + k**3 / cf**2, lam * cf],
        ]
    )
    B = np.sqrt(2.0) * np.array([[1.0], [k / cf]])
    return A, B


def modified_sde_stationary_cov(m: GaussModel1D) -> np.ndarray:
    """Stationary covariance of the bias-corrected diffusion: a degenerate
    rank-one Gaussian whose primal entry is the target variance."""
    u = np.array([[1.0], [m.k / m.c_f]])
    v_h = 1.0 / m.c_g + m.k**2 / m.c_f
    return (u @ u.T) / v_h


def bias_bound_c1(
    lam: float, omega_g: float, omega_fstar: float, d1: float, d2: float, d3: float
) -> float:
    """Bound on the Wasserstein gap between the stationary primal marginal
    and the target, decaying like ``lam^{-1/2}``.

    Defined only for ``lam > omega_g / omega_fstar``.
    """
    if omega_g <= 0 or omega_fstar <= 0:
        raise ValueError("strong-convexity moduli must be positive")
    if lam <= omega_g / omega_fstar:
        raise ValueError(
            f"bound undefined: need lam > omega_g/omega_fstar = {omega_g / omega_fstar}"
        )
    return float(
        np.sqrt(d1 / (lam * omega_g) + (d2 + d3) / (4.0 * omega_g * (lam * omega_fstar - omega_g)))
    )


def gaussian_w2(mean1: float, var1: float, mean2: float, var2: float) -> float:
    """Exact 2-Wasserstein distance between two 1D Gaussians."""
    return float(np.hypot(mean1 - mean2, np.sqrt(var1) - np.sqrt(var2)))
