//! Exact divergences, the binomial-vs-Gaussian KL pipeline, likelihood-ratio
//! evaluators, truncation tail masses and lower-bound calculators.

mod bounds;
mod edgeworth;
mod kl;
mod measures;
mod pmf;
mod ratio;
pub mod special;
mod tail;

pub use bounds::{bound_prediction, BoundFormula, BoundPrediction};
pub use edgeworth::{
    bernoulli_cumulants, edgeworth_binomial_approx, first_order_polynomial, hermite, second_order_polynomial,
    EdgeworthApprox,
};
pub use kl::{
    central_tail_split, central_tail_split_exact, kl_binomial_gaussian, kl_binomial_gaussian_scan, KlScanRow, TailSplit,
};
pub use measures::{divergences, divergences_exact, Divergences};
pub use pmf::{
    binomial_pmf, binomial_pmf_rational, discretized_gaussian_ln_mass, discretized_gaussian_pmf, Pmf, RationalPmf,
    MASS_TOLERANCE, RATIONAL_LIMIT,
};
pub use ratio::{
    biclique_ratio_at_weight, biclique_ratio_max, biclique_ratio_max_for, gaussian_mixture_ln_ratio,
    gaussian_mixture_ratio, pca_covariance, pca_density, pca_density_checked, pca_ln_density, pca_mixture_ln_ratio,
    pca_mixture_ratio, sigma_det, DensityRatioReport, PcaDensityCheck, RatioFamily, VariantRatio,
};
pub use tail::{trunc_tail_prob, TailEstimate, MIN_TAIL_TRIALS, TAIL_CONFIDENCE};
