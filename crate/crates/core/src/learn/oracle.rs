//! Budget-counting access to a hidden product distribution.
//!
//! Learners receive an oracle, never the distribution itself. Counters are the
//! only record of how much information a learner consumed.

use std::collections::BTreeMap;

use num_rational::Ratio;
use rand::SeedableRng;
use rand_distr::{Binomial, Distribution};

use crate::dist::{ProductDist, Sampler};
use crate::error::{invalid, Error, Result};
use crate::rng::TrialRng;
use crate::scalar::Scalar;

/// Draws `Binomial(count, p)` with `p` clamped into `[0, 1]`.
fn binomial(rng: &mut TrialRng, count: u64, p: f64) -> u64 {
    if count == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return count;
    }
    Binomial::new(count, p)
        .expect("probability in (0, 1)")
        .sample(rng)
}

/// Hands out i.i.d. value vectors.
pub struct SampleOracle {
    samplers: Vec<Sampler>,
    lattice: u64,
    rng: TrialRng,
    drawn: u64,
}

impl SampleOracle {
    pub fn new<T: Scalar>(hidden: &ProductDist<T>, seed: u64) -> Self {
        Self {
            samplers: hidden.items().iter().map(|d| d.sampler()).collect(),
            lattice: hidden.lattice(),
            rng: TrialRng::seed_from_u64(seed),
            drawn: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.samplers.len()
    }

    /// Lattice the values are reported on.
    pub fn lattice(&self) -> u64 {
        self.lattice
    }

    pub fn samples_drawn(&self) -> u64 {
        self.drawn
    }

    /// One value vector.
    pub fn draw(&mut self) -> Vec<u64> {
        self.drawn += 1;
        let rng = &mut self.rng;
        self.samplers.iter().map(|s| s.sample(rng)).collect()
    }

    /// Per-item value counts of `count` vectors.
    ///
    /// Items are independent, so each item's counts are multinomial and are
    /// drawn directly by a chain of binomials. This has the same law as
    /// tallying `count` calls to [`draw`](Self::draw) but costs time linear in
    /// the support size rather than in `count`.
    pub fn draw_counts(&mut self, count: u64) -> Vec<BTreeMap<u64, u64>> {
        self.drawn += count;
        let mut out = Vec::with_capacity(self.samplers.len());
        for s in &self.samplers {
            let probs = s.probabilities();
            let mut remaining = count;
            let mut mass_left = 1.0f64;
            let mut counts = BTreeMap::new();
            for (i, (&v, &p)) in s.support().iter().zip(&probs).enumerate() {
                if remaining == 0 {
                    break;
                }
                let c = if i + 1 == probs.len() {
                    remaining
                } else {
                    binomial(&mut self.rng, remaining, p / mass_left)
                };
                if c > 0 {
                    counts.insert(v, c);
                }
                remaining -= c;
                mass_left -= p;
            }
            out.push(counts);
        }
        out
    }
}

/// Answers pricing queries: each query draws a fresh value `v_i` and reveals
/// only whether `v_i >= price`.
pub struct QueryOracle {
    /// `Pr[v_i >= k / L]` for `k = 0..=L`.
    tails: Vec<Vec<f64>>,
    lattice: u64,
    rng: TrialRng,
    per_item: Vec<u64>,
    total: u64,
}

impl QueryOracle {
    pub fn new<T: Scalar>(hidden: &ProductDist<T>, seed: u64) -> Self {
        let lattice = hidden.lattice();
        let tails = hidden
            .items()
            .iter()
            .map(|d| {
                let mut t = vec![0.0; lattice as usize + 1];
                let mut acc = 0.0;
                let mut idx = d.len();
                for k in (0..=lattice).rev() {
                    while idx > 0 && d.support()[idx - 1] >= k {
                        idx -= 1;
                        acc += d.masses()[idx].to_f64();
                    }
                    t[k as usize] = acc.min(1.0);
                }
                t
            })
            .collect();
        Self {
            tails,
            lattice,
            rng: TrialRng::seed_from_u64(seed),
            per_item: vec![0; hidden.n()],
            total: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.tails.len()
    }

    pub fn queries_used(&self) -> u64 {
        self.total
    }

    pub fn queries_for(&self, item: usize) -> u64 {
        self.per_item[item]
    }

    fn sale_probability(&self, item: usize, price: Ratio<u64>) -> Result<f64> {
        if item >= self.n() {
            return Err(Error::ItemCount {
                expected: self.n(),
                got: item + 1,
            });
        }
        if price > Ratio::from_integer(1) {
            return Err(invalid(format!("price {price} exceeds 1")));
        }
        // Smallest lattice value at or above the price.
        let scaled = price * Ratio::from_integer(self.lattice);
        Ok(self.tails[item][scaled.ceil().to_integer() as usize])
    }

    /// One query: a fresh `v_i`, compared against `price`.
    pub fn query(&mut self, item: usize, price: Ratio<u64>) -> Result<bool> {
        Ok(self.query_many(item, price, 1)? == 1)
    }

    /// `count` independent queries at the same `(item, price)`; returns how many
    /// answered 1. Equivalent in law to `count` calls to [`query`](Self::query).
    pub fn query_many(&mut self, item: usize, price: Ratio<u64>, count: u64) -> Result<u64> {
        let p = self.sale_probability(item, price)?;
        self.per_item[item] += count;
        self.total += count;
        Ok(binomial(&mut self.rng, count, p))
    }
}
