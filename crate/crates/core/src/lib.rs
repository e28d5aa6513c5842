//! Learning item prices for a unit-demand buyer from samples or pricing queries.
//!
//! Distributions live on a shared rational lattice and every quantity is
//! generic over a [`Scalar`]: exact rationals ([`Exact`]) for oracle checks and
//! lemma verification, `f64` for speed.

pub mod dist;
pub mod error;
pub mod harness;
pub mod instances;
pub mod io;
pub mod learn;
pub mod optimize;
pub mod revenue;
pub mod rng;
pub mod scalar;

pub use dist::{
    dominates, hellinger_sq, hellinger_sq_product, kolmogorov, tv_distance, DiscreteDist,
    ProductDist,
};
pub use error::{Error, Result};
pub use revenue::{exante_rev, rev, rev_bruteforce, rev_monte_carlo, win_probabilities, PriceVector};
pub use scalar::{ratio, Scalar};

/// Exact rational scalar.
pub type Exact = num_rational::BigRational;
pub type ExactDist = DiscreteDist<Exact>;
pub type ExactProduct = ProductDist<Exact>;
pub type FloatDist = DiscreteDist<f64>;
pub type FloatProduct = ProductDist<f64>;
