"""krrlab: kernel ridge regression spectra, eigenvalue envelopes, and
overfitting experiments at desk scale."""

__version__ = "0.1.0"

from .eigenbounds import (BoundConstants, ConcentrationReport, Envelope,
                          concentration, concentration_from_parts,
                          eigenvalue_envelopes, empirical_spectrum,
                          split_feature_gram, split_gram, split_gram_projection)
from .kernels import (KernelSpec, cross_gram, eval_dot_kernel, eval_pair,
                      gram, kappa0, kappa1)
from .krr import (BoundReport, FittedPredictor, GramSolver, RatePrediction,
                  estimate_bias, estimate_variance, fit, fit_gram,
                  rate_predictions, risk_bounds, target_degree_norms,
                  theta_norms, variance_from_features)
from .spectrum import (RankReport, SpectralProfile, alpha_beta, decay_profile,
                       effective_ranks, gaussian_features, hermite_feature,
                       hermite_features, hermite_moment, lemma_rank_bracket,
                       mercer_spectrum, rbf_hermite_eigenvalues,
                       rbf_hermite_profile)
from .sphere import (TargetSpec, gegenbauer, gegenbauer_series, harmonic_dim,
                     harmonic_dim_cumulative, sample_disk, sample_sphere,
                     synthesize_target)

__all__ = [name for name in dir() if not name.startswith("_")]
