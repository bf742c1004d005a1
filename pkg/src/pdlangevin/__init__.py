"""Primal-dual Langevin sampling toolkit.

Samplers for log-concave targets exp(-f(Kx) - g(x)) built from proximal
operators and matrix-free linear maps, with analytic Gaussian oracles,
Wasserstein metrics, and coupled-chain verification harnesses.
"""

from .analytic import (
    GaussModel1D,
    bias_bound_c1,
    gaussian_w2,
    general_noise_primal_variance,
    lyapunov_cov,
    modified_sde_coefficients,
    modified_sde_stationary_cov,
    stationary_cov_pd,
    target_variance,
)
from .coupling import (
    CouplingTrace,
    SweepResult,
    bias_sweep_tau,
    fit_contraction_rate,
    lambda_sweep,
    run_coupled_pair,
)
from .linop import (
    LinearMap,
    diff_pair,
    grad2d,
    power_iteration_norm,
    scalar_map,
    sym_grad2d,
    tgv_block,
)
from .metrics import (
    EmpiricalMeasure,
    WeightedNorm,
    moments,
    pixelwise_variance,
    psnr,
    w2_1d,
    w2_exact,
)
from .models import (
    gauss1d_target,
    tgv_image_target,
    tv2pixel_target,
    tv_image_target,
)
from .prox import (
    ProxOperator,
    group_ball_projection,
    interval_projection,
    project_interval,
    project_l2_ball_groups,
    prox_quadratic_data,
    prox_scaled_square,
    prox_via_moreau,
    quadratic_data_prox,
    scaled_square_prox,
    zero_prox,
)
from .samplers import (
    ChainState,
    SamplerParams,
    SampleStore,
    TargetSpec,
    ValidationReport,
    modified_sde_step,
    prox_sub_step,
    run_ensemble,
    ula_step,
    ulpda_step,
    validate_params,
)

__version__ = "0.1.0"
