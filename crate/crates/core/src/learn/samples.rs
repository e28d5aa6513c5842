//! Learning from i.i.d. value samples: take the empirical product and price it.

use crate::dist::{DiscreteDist, ProductDist};
use crate::error::{Error, Result};
use crate::optimize::PriceOptimizer;
use crate::revenue::PriceVector;
use crate::scalar::Scalar;

use super::{LearnerConfig, SampleOracle};

/// Formula sample count
/// `C * ln^4(n/(eps delta)) * ln^2(ln(n/(eps delta))) * n / eps^2`, rounded up
/// and at least 1.
pub fn sample_budget(n: usize, cfg: &LearnerConfig) -> u64 {
    let eps = cfg.eps_f64();
    let x = n as f64 / (eps * cfg.delta);
    let lx = x.ln();
    let llx = lx.ln();
    let raw = cfg.c * lx.powi(4) * llx.powi(2) * n as f64 / (eps * eps);
    if raw.is_finite() {
        raw.ceil().max(1.0) as u64
    } else {
        u64::MAX
    }
}

/// Error scale `ln(2 n N / delta) / N` of an empirical CDF built from `N`
/// samples of each of `n` coordinates.
pub fn bernstein_gamma(n: usize, samples: u64, delta: f64) -> f64 {
    let big_n = samples as f64;
    (2.0 * n as f64 * big_n / delta).ln() / big_n
}

/// Whether `|F_D(v) - F_E(v)| <= sqrt(F_D(v) (1 - F_D(v)) 2 gamma) + gamma` at
/// every lattice point. Both CDFs are constant between support points, so the
/// union of supports covers every case.
pub fn check_cdf_bound<T: Scalar>(d: &DiscreteDist<T>, e: &DiscreteDist<T>, gamma: f64) -> Result<bool> {
    if d.lattice() != e.lattice() {
        return Err(Error::LatticeMismatch(d.lattice(), e.lattice()));
    }
    let mut pts: Vec<u64> = d.support().iter().chain(e.support()).copied().collect();
    pts.sort_unstable();
    pts.dedup();
    Ok(pts.into_iter().all(|v| {
        let f = d.cdf(v).to_f64();
        let g = e.cdf(v).to_f64();
        (f - g).abs() <= (f * (1.0 - f) * 2.0 * gamma).sqrt() + gamma + 1e-12
    }))
}

/// Result of [`learn_from_samples`].
#[derive(Clone, Debug)]
pub struct SampleOutcome<U> {
    pub prices: PriceVector,
    pub empirical: ProductDist<U>,
    pub samples_used: u64,
}

/// Draws `N` value vectors (the formula budget, or `budget_override`), forms
/// the coordinate-wise empirical distribution and prices it with `optimizer`.
pub fn learn_from_samples<U, O>(
    oracle: &mut SampleOracle,
    cfg: &LearnerConfig,
    optimizer: &O,
) -> Result<SampleOutcome<U>>
where
    U: Scalar,
    O: PriceOptimizer<U> + ?Sized,
{
    cfg.validate()?;
    let budget = cfg
        .budget_override
        .unwrap_or_else(|| sample_budget(oracle.n(), cfg));
    let before = oracle.samples_drawn();
    let lattice = oracle.lattice();
    let items = oracle
        .draw_counts(budget)
        .iter()
        .map(|counts| DiscreteDist::from_counts(lattice, counts, budget))
        .collect::<Result<Vec<_>>>()?;
    let empirical = ProductDist::new(items)?;
    let (prices, _) = optimizer.optimize(&empirical)?;
    Ok(SampleOutcome {
        prices,
        empirical,
        samples_used: oracle.samples_drawn() - before,
    })
}
