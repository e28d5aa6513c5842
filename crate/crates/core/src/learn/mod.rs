//! Learners that turn oracle access to a hidden product distribution into a
//! price vector: one from i.i.d. value samples, one from single-bit pricing
//! queries.

mod oracle;
mod queries;
mod samples;

pub use oracle::{QueryOracle, SampleOracle};
pub use queries::{
    learn_product_by_queries, learn_single_by_queries, query_budget, round_bound, Probe, QueryLearnTrace,
    QueryOutcome,
};
pub use samples::{bernstein_gamma, check_cdf_bound, learn_from_samples, sample_budget, SampleOutcome};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::revenue::PriceVector;

/// Accuracy target, failure probability and budget controls shared by both
/// learners.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub eps: Ratio<u64>,
    pub delta: f64,
    /// Leading constant of the budget formula.
    pub c: f64,
    /// Replaces the formula budget: total samples for the sample learner,
    /// queries per estimate for the query learner.
    pub budget_override: Option<u64>,
}

impl LearnerConfig {
    /// Defaults for the sample learner (`C = 1`).
    pub fn for_samples(eps: Ratio<u64>, delta: f64) -> Self {
        Self {
            eps,
            delta,
            c: 1.0,
            budget_override: None,
        }
    }

    /// Defaults for the query learner (`C = 1000`).
    pub fn for_queries(eps: Ratio<u64>, delta: f64) -> Self {
        Self {
            eps,
            delta,
            c: 1000.0,
            budget_override: None,
        }
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget_override = Some(budget);
        self
    }

    pub fn with_c(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    pub fn eps_f64(&self) -> f64 {
        *self.eps.numer() as f64 / *self.eps.denom() as f64
    }

    pub fn validate(&self) -> Result<()> {
        let e = self.eps;
        if *e.numer() == 0 || e >= Ratio::from_integer(1) {
            return Err(invalid(format!("eps must lie in (0, 1), got {e}")));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(invalid(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(invalid(format!("C must be positive, got {}", self.c)));
        }
        if self.budget_override == Some(0) {
            return Err(invalid("budget must be positive"));
        }
        Ok(())
    }
}

/// Multiplies every price by `1 - eps`. The result must stay on the lattice.
pub fn scale_prices(p: &PriceVector, eps: Ratio<u64>) -> Result<PriceVector> {
    let (a, b) = (*eps.numer(), *eps.denom());
    if a >= b {
        return Err(invalid(format!("eps must lie in [0, 1), got {eps}")));
    }
    let scaled = p
        .prices()
        .iter()
        .map(|&x| {
            let num = x as u128 * (b - a) as u128;
            if !num.is_multiple_of(b as u128) {
                Err(Error::IncompatibleLattice {
                    lattice: p.lattice(),
                    what: format!("{x}/{} scaled by 1 - {eps}", p.lattice()),
                })
            } else {
                Ok((num / b as u128) as u64)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    PriceVector::new(p.lattice(), scaled)
}

/// [`scale_prices`] after refining the lattice by the denominator of `eps`, so
/// it always succeeds.
pub fn scale_prices_refined(p: &PriceVector, eps: Ratio<u64>) -> Result<PriceVector> {
    let fine = p
        .lattice()
        .checked_mul(*eps.denom())
        .ok_or_else(|| invalid("refined lattice overflows"))?;
    scale_prices(&p.with_lattice(fine)?, eps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaling_examples() {
        let p = PriceVector::new(2, vec![2, 1]).unwrap();
        assert_eq!(scale_prices(&p, Ratio::new(0, 1)).unwrap(), p);
        let half = scale_prices_refined(&p, Ratio::new(1, 2)).unwrap();
        assert_eq!(half.as_f64(), vec![0.5, 0.25]);
        assert!(matches!(
            scale_prices(&p, Ratio::new(1, 2)),
            Err(Error::IncompatibleLattice { .. })
        ));
        let p4 = PriceVector::new(4, vec![4, 2]).unwrap();
        assert_eq!(scale_prices(&p4, Ratio::new(1, 2)).unwrap().prices(), &[2, 1]);
    }

    #[test]
    fn config_validation() {
        assert!(LearnerConfig::for_samples(Ratio::new(1, 8), 0.1).validate().is_ok());
        assert!(LearnerConfig::for_samples(Ratio::new(1, 1), 0.1).validate().is_err());
        assert!(LearnerConfig::for_samples(Ratio::new(1, 8), 1.0).validate().is_err());
        assert!(LearnerConfig::for_queries(Ratio::new(1, 8), 0.1)
            .with_c(0.0)
            .validate()
            .is_err());
    }
}
