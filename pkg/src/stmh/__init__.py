"""Bayesian structure learning in Gaussian graphical models with sparsifying-transform priors.

The covariance ``sigma`` carries a Wishart-family prior on the full positive
definite cone; a graph ``G`` carries one of four discrete priors; and the
precision matrix is the PD-completion ``Q = PD_G(sigma)``.  The sampler
alternates add/remove-edge proposals with inverse-Wishart block proposals on
``sigma`` and never needs a graph-dependent normalizing constant.
"""

from .dist import (
    InvWishartParams,
    SufficientStats,
    WishartParams,
    gaussian_loglik,
    log_pdf_inv_wishart,
    log_pdf_wishart,
    sample_inv_wishart,
    sample_wishart,
)
from .errors import STMHError
from .graphs import (
    BernoulliPrior,
    DoubleUniformPrior,
    Graph,
    TruncatedGeometricPrior,
    UniformPrior,
)
from .pdcomp import CompletionSettings, pd_complete, pd_complete_hastie, pd_complete_ips
from .sampler import SamplerConfig, estimate_edge_probabilities, run_chain, run_chains

__version__ = "0.1.0"

__all__ = [
    "BernoulliPrior",
    "CompletionSettings",
    "DoubleUniformPrior",
    "Graph",
    "InvWishartParams",
    "STMHError",
    "SamplerConfig",
    "SufficientStats",
    "TruncatedGeometricPrior",
    "UniformPrior",
    "WishartParams",
    "estimate_edge_probabilities",
    "gaussian_loglik",
    "log_pdf_inv_wishart",
    "log_pdf_wishart",
    "pd_complete",
    "pd_complete_hastie",
    "pd_complete_ips",
    "run_chain",
    "run_chains",
    "sample_inv_wishart",
    "sample_wishart",
]
