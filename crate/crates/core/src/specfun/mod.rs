//! Special functions and quadrature shared by the rest of the crate.

mod beta;
mod gamma;
mod quadrature;

pub use beta::{beta_cdf, beta_pdf, Beta};
pub use gamma::{gamma_cdf, gamma_p, gamma_quantile, gamma_sf, log_gamma};
pub use quadrature::{gauss_legendre, integrate, QuadratureConfig, QuadratureRule};

pub(crate) use gamma::{gamma_pq, ln_gamma_unchecked};
