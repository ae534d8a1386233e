//! Gaussian area, entropy, the shrinker residual, closed-form sphere
//! entropies and Gauss densities along flows.

mod density;
mod entropy;
mod gaussian;

pub use density::{gauss_density, gauss_density_samples, DensityConfig, DensityEstimate, ExcludedSample};
pub use entropy::{entropy, OptConfig, EntropyResult};
pub use gaussian::{
    f_translate_scale, f_with_gradient, gaussian_area, shrinker_residual, stone_entropy, GaussianAreaResult,
    ResidualReport,
};
