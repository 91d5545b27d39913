//! Numeric kernels: exact rational linear algebra for certificates, and a
//! small positive-definite float toolkit (Cholesky log-determinants) for the
//! Gaussian optimizer.

pub mod exact;
pub mod spd;

pub use exact::{
    kernel_of, parse_rational, rat_frac, rat_int, rat_to_f64, rational_to_string, Rat, RatMatrix,
    Subspace,
};
pub use spd::{cond_symmetric, logdet_spd, spd_inverse, SpdMatrix};
