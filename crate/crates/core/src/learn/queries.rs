//! Learning a CDF from pricing queries with a non-uniform binary search.
//!
//! Work happens on the grid `{k eps^2 : k = 0..=K}` with `K = eps^-2`, so
//! `eps` must be `1/m`. The estimate of `F(k eps^2)` comes from queries at
//! price `(k + 1) eps^2`: the fraction of answers `v < (k + 1) eps^2` is the
//! CDF of the values rounded down to the grid, whatever lattice the hidden
//! values live on.
//!
//! Starting from `F_H(K) = 1` and step `lambda_1 = eps/n`, each round binary
//! searches for the largest `k` below the current key threshold whose estimate
//! has dropped by at least `lambda_j / 2`, estimates the CDF there afresh,
//! fills the plateau in between, and sets
//! `lambda_{j+1} = eps (1 - F_H(k_{j+1})) + eps/n`. Rounds end at threshold 0.
//!
//! All estimates use the same query count `N`, so CDF values are kept as
//! integer counts over `N` and every comparison is exact.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::dist::{DiscreteDist, ProductDist};
use crate::error::{invalid, Result};
use crate::optimize::PriceOptimizer;
use crate::revenue::PriceVector;
use crate::scalar::Scalar;

use super::{scale_prices_refined, LearnerConfig, QueryOracle};

/// Queries per CDF estimate: `C * n * ln(n / (eps delta)) / eps^2` rounded up,
/// unless overridden.
pub fn query_budget(n: usize, cfg: &LearnerConfig) -> u64 {
    if let Some(b) = cfg.budget_override {
        return b;
    }
    let eps = cfg.eps_f64();
    let raw = cfg.c * n as f64 * (n as f64 / (eps * cfg.delta)).ln() / (eps * eps);
    if raw.is_finite() {
        raw.ceil().max(1.0) as u64
    } else {
        u64::MAX
    }
}

/// `m` for `eps = 1/m`.
fn inverse_eps(eps: Ratio<u64>) -> Result<u64> {
    if *eps.numer() != 1 || *eps.denom() < 2 {
        return Err(invalid(format!(
            "the query learner needs eps = 1/m with m >= 2, got {eps}"
        )));
    }
    Ok(*eps.denom())
}

/// One CDF estimate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Probe {
    /// Grid index `k` of the estimated point `k eps^2`.
    pub threshold: u64,
    pub queries: u64,
    /// Answers with `v < (k + 1) eps^2`.
    pub below: u64,
    /// Whether this estimate fixed a key threshold (as opposed to a search step).
    pub key: bool,
}

impl Probe {
    pub fn estimate(&self) -> f64 {
        self.below as f64 / self.queries as f64
    }
}

/// Record of one run of the single-item query learner.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryLearnTrace {
    /// Key thresholds `k_1 > k_2 > ... > k_R = 0`, as grid indices.
    pub k: Vec<u64>,
    /// Step lengths, one per key threshold.
    pub lambda: Vec<f64>,
    /// Queries spent in each round (search plus the key estimate).
    pub queries_per_threshold: Vec<u64>,
    #[serde(rename = "R")]
    pub rounds: usize,
    /// Queries behind each estimate.
    pub per_estimate: u64,
    pub probes: Vec<Probe>,
}

impl QueryLearnTrace {
    pub fn total_queries(&self) -> u64 {
        self.queries_per_threshold.iter().sum()
    }

    /// Largest `|F_hat - F| / (0.1 (eps (1 - F) + eps/n))` over all estimates,
    /// where `truth(k)` is the true CDF at grid index `k`. At most 1 means
    /// every estimate met the accuracy target.
    pub fn worst_estimate_ratio(&self, truth: &dyn Fn(u64) -> f64, eps: f64, n: usize) -> f64 {
        self.probes
            .iter()
            .map(|p| {
                let f = truth(p.threshold);
                (p.estimate() - f).abs() / (0.1 * (eps * (1.0 - f) + eps / n as f64))
            })
            .fold(0.0, f64::max)
    }

    /// Whether every step length lies within `[0.9, 1.1]` times
    /// `eps (1 - F(k_j eps^2)) + eps/n`.
    pub fn steps_sandwiched(&self, truth: &dyn Fn(u64) -> f64, eps: f64, n: usize) -> bool {
        self.k.iter().zip(&self.lambda).all(|(&k, &lam)| {
            let target = eps * (1.0 - truth(k)) + eps / n as f64;
            lam >= 0.9 * target - 1e-12 && lam <= 1.1 * target + 1e-12
        })
    }
}

/// Bound on the number of rounds, `ln(10 n / eps) / ln(1 + 0.1 eps) + 3`.
pub fn round_bound(n: usize, eps: f64) -> f64 {
    (10.0 * n as f64 / eps).ln() / (0.1 * eps).ln_1p() + 3.0
}

/// Learns item `item`'s CDF on the `eps^2` grid from pricing queries. The
/// output lives on lattice `eps^-2`.
pub fn learn_single_by_queries<U: Scalar>(
    oracle: &mut QueryOracle,
    item: usize,
    cfg: &LearnerConfig,
) -> Result<(DiscreteDist<U>, QueryLearnTrace)> {
    cfg.validate()?;
    let m = inverse_eps(cfg.eps)?;
    let top = m * m;
    let n = oracle.n();
    let per = query_budget(n, cfg);

    // F_H(k) as counts out of `per`.
    let mut cdf: Vec<Option<u64>> = vec![None; top as usize + 1];
    cdf[top as usize] = Some(per);

    let mut trace = QueryLearnTrace {
        k: vec![top],
        lambda: vec![1.0 / (m as f64 * n as f64)],
        queries_per_threshold: Vec::new(),
        rounds: 0,
        per_estimate: per,
        probes: Vec::new(),
    };

    let estimate = |oracle: &mut QueryOracle, k: u64, key: bool, trace: &mut QueryLearnTrace| {
        let price = Ratio::new(k + 1, top);
        let above = oracle.query_many(item, price, per)?;
        let below = per - above;
        trace.probes.push(Probe {
            threshold: k,
            queries: per,
            below,
            key,
        });
        Ok::<u64, crate::error::Error>(below)
    };

    let (mm, nn, big) = (m as i128, n as i128, per as i128);
    let mut k = top;
    while k > 0 {
        let start = oracle.queries_for(item);
        let current = cdf[k as usize].expect("key thresholds are set") as i128;
        // F_hat <= F_H(k_j) - lambda_j / 2, scaled by 2 m n N.
        let rhs = 2 * mm * nn * current - nn * (big - current) - big;
        let (mut lo, mut hi) = (0u64, k - 1);
        while lo < hi {
            let mid = (lo + hi).div_ceil(2);
            let below = estimate(oracle, mid, false, &mut trace)? as i128;
            if 2 * mm * nn * below <= rhs {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        let next = lo;
        let raw = estimate(oracle, next, true, &mut trace)?;
        // Estimates are independent, so they can cross; keep the CDF monotone.
        let value = raw.min(current as u64);
        cdf[next as usize] = Some(value);
        for slot in &mut cdf[next as usize + 1..k as usize] {
            *slot = Some(current as u64);
        }
        trace.k.push(next);
        trace
            .lambda
            .push((1.0 - value as f64 / per as f64) / m as f64 + 1.0 / (m as f64 * n as f64));
        trace
            .queries_per_threshold
            .push(oracle.queries_for(item) - start);
        k = next;
    }
    trace.rounds = trace.k.len();

    let points: Vec<u64> = (0..=top).collect();
    let values: Vec<U> = cdf
        .iter()
        .map(|c| U::from_ratio(c.expect("every grid point is filled"), per))
        .collect();
    let learned = DiscreteDist::from_cdf_points(top, &points, &values)?;
    Ok((learned, trace))
}

/// Result of [`learn_product_by_queries`].
#[derive(Clone, Debug)]
pub struct QueryOutcome<U> {
    /// Final prices: the optimizer's choice scaled by `1 - eps`, on lattice
    /// `eps^-3`.
    pub prices: PriceVector,
    /// Optimizer's choice on the learned product, lattice `eps^-2`.
    pub unscaled: PriceVector,
    pub learned: ProductDist<U>,
    pub traces: Vec<QueryLearnTrace>,
}

/// Learns every item with [`learn_single_by_queries`], prices the learned
/// product with `optimizer`, and scales the prices by `1 - eps`.
pub fn learn_product_by_queries<U, O>(
    oracle: &mut QueryOracle,
    cfg: &LearnerConfig,
    optimizer: &O,
) -> Result<QueryOutcome<U>>
where
    U: Scalar,
    O: PriceOptimizer<U> + ?Sized,
{
    let mut items = Vec::with_capacity(oracle.n());
    let mut traces = Vec::with_capacity(oracle.n());
    for i in 0..oracle.n() {
        let (d, t) = learn_single_by_queries(oracle, i, cfg)?;
        items.push(d);
        traces.push(t);
    }
    let learned = ProductDist::new(items)?;
    let (unscaled, _) = optimizer.optimize(&learned)?;
    let prices = scale_prices_refined(&unscaled, cfg.eps)?;
    Ok(QueryOutcome {
        prices,
        unscaled,
        learned,
        traces,
    })
}
