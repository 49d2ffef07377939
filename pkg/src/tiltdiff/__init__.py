"""Tilted resampling, diffusion sampling on the resampled data, and the
transport-distance bounds that certify both steps."""

__version__ = "0.1.0"

from .tilting import (
    Dataset,
    Escort,
    Exponential,
    QExponential,
    TiltFunction,
    TiltSpec,
    WeightedMeasure,
    effective_sample_size,
    log_weights,
    plugin_measure,
    rejection_sample_tilted,
    resample,
    tilt_weight,
)
from .transport import (
    Box,
    DiscreteMeasure1D,
    HistogramGrid,
    exact_wp_small,
    set_discrepancy,
    sliced_wp,
    tv_histogram,
    wp_1d,
)
from .bounds import (
    EstimationMode,
    FiniteMeasure,
    TiltQuantities,
    bound_iid,
    bound_tilted_bounded,
    bound_tilted_unbounded,
    log_mgf,
    mgf,
    moment_q_tilted,
    plugin_clt_variance,
    set_discrepancy_bound,
    tilt_quantities,
    weight_lk_ratio,
)
from .diffusion import (
    DenoiserModel,
    LossTrace,
    NoiseSchedule,
    TrainConfig,
    denoiser_forward,
    denoiser_grad,
    empirical_denoiser_loss,
    forward_noise,
    gaussian_score_oracle,
    init_denoiser,
    mixture_score_oracle,
    reverse_sample,
    score_from_eps,
    train,
)
from .scoregap import (
    ErrorFieldSpec,
    discounted_lipschitz_integral,
    field_gap,
    field_gap_bound,
    field_gap_estimate,
    field_loss_estimate,
    inequality_battery,
)
from .synthdata import (
    BetaMixSpec,
    finite_measure,
    finite_sampler,
    gen_beta_mix_spec,
    ground_truth_tilted,
    load_csv,
    sample_beta_mix,
    save_csv,
)
