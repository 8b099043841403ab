//! Special functions and generic numerical kernels.

pub mod density;
pub mod polylog;
pub mod quad;
pub mod root;
pub mod sum;

pub use density::{density_quadrature, density_series, rho_alpha, DensityMethod, DensityValue};
pub use polylog::{bose_function, polylog_bose, zeta};
pub use quad::{adaptive_quad, QuadResult, QuadratureSpec};
pub use root::find_root;
pub use sum::{compensated_sum, CompensatedSum};
