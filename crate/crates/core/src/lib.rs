//! Separately (α,β)-harmonic functions on the unit polydisc: kernels,
//! Poisson extensions, series expansions, maximal functions and
//! non-tangential boundary limits.

pub mod error;
pub mod expansion;
pub mod fatou;
pub mod fourier;
pub mod geometry;
pub mod kernel;
pub mod maximal;
pub mod poisson;
pub mod special;
pub mod verify;

pub use error::{Error, Result};

use num_complex::Complex64;

/// Pairwise summation with a fixed tree, so the result depends only on
/// the order of `xs`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub fn pairwise_sum_c(xs: &[Complex64]) -> Complex64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum_c(&xs[..mid]) + pairwise_sum_c(&xs[mid..])
}
