"""Information geometry of sampled dynamical systems."""

from .simplex import (
    Distribution,
    TangentVector,
    fisher_information,
    kl_divergence,
    self_information_rate,
    shahshahani_distance_sq,
)
from .dynamics import (
    SirParams,
    Trajectory,
    couplings_at,
    default_sir_params,
    grouped_sir_params,
    integrate_sir,
    mean_coupling,
    trajectory_at,
)
from .sampling import (
    MonteCarloEstimate,
    SampleGrid,
    SampledTrajectory,
    cluster_info_rate_hat,
    clustered_fisher_hat,
    fisher_hat,
    info_rate_hat,
    monte_carlo,
    monte_carlo_components,
    sample_multinomial,
    sample_trajectory,
)
from .clustering import (
    Clustering,
    cluster_probs,
    clustered_fisher,
    delta_g_coupling_form,
    delta_g_prob_form,
    elbow_select,
    kmeans,
    kmeans_features,
    sufficiency_residuals,
)
from .theory import (
    BiasVariancePrediction,
    cluster_info_rate_moments,
    clustered_fisher_prediction,
    distance_moments,
    fisher_bias,
    fisher_bias_second_order,
    fisher_prediction,
    info_rate_moments,
    normalization_z,
)
from .filtering import filter_probs, filter_trajectory, gaussian_kernel

__all__ = [name for name in dir() if not name.startswith("_")]
