//! Special functions, quadrature and root finding shared by every other module.

pub mod normal;
pub mod quadrature;
pub mod roots;

pub use normal::{
    norm_cdf, norm_pdf, norm_quantile, norm_quantile_upper, norm_sf, std_normal_cdf,
    std_normal_quantile,
};
pub use quadrature::{
    integrate, integrate_normal_weighted, integrate_with_breaks, QuadratureSettings,
};
pub use roots::{find_root, solve_monotone, MonotoneRoot, RootSettings};

/// Quadrature and root-finding settings travelling together through every
/// computation of a design.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Tolerances {
    pub quad: QuadratureSettings,
    pub root: RootSettings,
}
