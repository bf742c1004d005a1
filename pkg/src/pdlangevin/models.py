"""Ready-made sampling problems: the 1D Gaussian benchmark, the 2-pixel
total-variation posterior, and image-scale TV / TGV denoising posteriors.

Each factory assembles a :class:`~pdlangevin.samplers.TargetSpec` with all
the oracles the different samplers need (proxes always; gradients,
subgradients and Hessian actions where the model is smooth enough).
"""

from __future__ import annotations

import numpy as np

from .analytic import GaussModel1D
from .linop import diff_pair, grad2d, scalar_map, sym_grad2d, tgv_block
from .prox import (
    ProxOperator,
    group_ball_projection,
    interval_projection,
    project_l2_ball_groups,
    prox_quadratic_data,
    quadratic_data_prox,
    scaled_square_prox,
)
from .samplers import TargetSpec


def gauss1d_target(m: GaussModel1D) -> TargetSpec:
    """Fully smooth 1D quadratic problem f(u) = u^2/(2 c_f), g(x) = x^2/(2 c_g),
    K = k. Supplies every optional oracle, so all samplers run on it."""
    cf, cg, k = m.c_f, m.c_g, m.k
    return TargetSpec(
        g_prox=scaled_square_prox(cg),
        fstar_prox=scaled_square_prox(1.0 / cf),  # f*(y) = c_f y^2 / 2
        K=scalar_map(k),
        g_grad=lambda x: x / cg,
        h_grad=lambda x: x * (1.0 / cg + k**2 / cf),
        f_subgrad=lambda u: u / cf,
        f_grad=lambda u: u / cf,
        f_hess_apply=lambda u, w: w / cf,
        fstar_grad=lambda y: cf * y,
    )


def _group_min_norm_subgrad(u: np.ndarray, alpha: float, group_size: int) -> np.ndarray:
    """Minimal-norm element of the subdifferential of alpha * ||.||_{2,1}
    over contiguous groups: alpha * u_g / ||u_g||, and 0 at zero groups."""
    g = u.reshape(u.shape[:-1] + (-1, group_size))
    norms = np.linalg.norm(g, axis=-1, keepdims=True)
    scale = np.zeros_like(norms)
    np.divide(alpha, norms, out=scale, where=norms > 0)
    return (g * scale).reshape(u.shape)


def tv2pixel_target(x_obs, sigma_eps: float, alpha: float) -> TargetSpec:
    """Two-pixel posterior with Gaussian likelihood and a total-variation
    prior alpha * |x2 - x1|."""
    x_obs = np.asarray(x_obs, dtype=float)
    if x_obs.shape != (2,):
        raise ValueError("x_obs must be a 2-vector")
    if sigma_eps <= 0 or alpha <= 0:
        raise ValueError("sigma_eps and alpha must be positive")
    var = sigma_eps**2

    def f_subgrad(u):
        return alpha * np.sign(u)

    return TargetSpec(
        g_prox=quadratic_data_prox(x_obs, var),
        fstar_prox=interval_projection(alpha),
        K=diff_pair(),
        g_grad=lambda x: (x - x_obs) / var,
        f_subgrad=f_subgrad,
    )


def tv_image_target(noisy, sigma_eps: float, alpha: float, width: int, height: int) -> TargetSpec:
    """Image denoising posterior with Gaussian likelihood and an isotropic
    total-variation prior alpha * ||grad x||_{2,1}."""
    noisy = np.asarray(noisy, dtype=float).reshape(width * height)
    if sigma_eps <= 0 or alpha <= 0:
        raise ValueError("sigma_eps and alpha must be positive")
    var = sigma_eps**2
    return TargetSpec(
        g_prox=quadratic_data_prox(noisy, var),
        fstar_prox=group_ball_projection(alpha, group_size=2),
        K=grad2d(width, height),
        g_grad=lambda x: (x - noisy) / var,
        f_subgrad=lambda u: _group_min_norm_subgrad(u, alpha, 2),
    )


def tgv_image_target(
    noisy, sigma_eps: float, alpha1: float, alpha0: float, width: int, height: int
) -> TargetSpec:
    """Image denoising posterior with a second-order total-generalized-
    variation prior on the extended variable (u, v):
    alpha1 * ||grad u - v||_{2,1} + alpha0 * ||E v||_{2,1}.

    The data term only touches the image block u, so the composite g is not
    strongly convex (modulus 0).
    """
    noisy = np.asarray(noisy, dtype=float).reshape(width * height)
    if sigma_eps <= 0 or alpha1 <= 0 or alpha0 <= 0:
        raise ValueError("sigma_eps, alpha1 and alpha0 must be positive")
    var = sigma_eps**2
    d = width * height
    E = sym_grad2d(width, height)
    K = tgv_block(width, height, E)
    m_top = 2 * d  # dual entries paired with grad u - v

    def g_eval(z, gamma):
        z = np.asarray(z, dtype=float)
        out = z.copy()
        out[..., :d] = prox_quadratic_data(z[..., :d], gamma, noisy, var)
        return out

    def fstar_eval(y, gamma):
        y = np.asarray(y, dtype=float)
        out = np.empty_like(y)
        out[..., :m_top] = project_l2_ball_groups(y[..., :m_top], alpha1, 2)
        out[..., m_top:] = project_l2_ball_groups(y[..., m_top:], alpha0, 3)
        return out

    def f_subgrad(u):
        u = np.asarray(u, dtype=float)
        out = np.empty_like(u)
        out[..., :m_top] = _group_min_norm_subgrad(u[..., :m_top], alpha1, 2)
        out[..., m_top:] = _group_min_norm_subgrad(u[..., m_top:], alpha0, 3)
        return out

    return TargetSpec(
        g_prox=ProxOperator(eval=g_eval, modulus=0.0, label="tgv_data_on_u"),
        fstar_prox=ProxOperator(eval=fstar_eval, modulus=0.0, label="tgv_dual_projection"),
        K=K,
        f_subgrad=f_subgrad,
    )
