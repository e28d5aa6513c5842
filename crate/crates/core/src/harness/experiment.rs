//! Budget sweeps: many seeded learner runs scored against a fixed optimum.

use std::path::PathBuf;
use std::time::Instant;

use num_rational::{BigRational, Ratio};
use rand::SeedableRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::dist::ProductDist;
use crate::error::{invalid, Error, Result};
use crate::instances::{
    base_g, equal_revenue_h, equal_revenue_prices, guess_perturbed_first, make_query_hard,
    make_sample_hard, nonmonotonicity_example, random_product,
};
use crate::io::Instance;
use crate::learn::{
    learn_from_samples, learn_product_by_queries, LearnerConfig, QueryOracle, SampleOracle,
};
use crate::optimize::{
    coordinate_ascent, optimal_bruteforce, CoordinateSearch, GridSearch, PriceGrid,
    PriceOptimizer, SEARCH_LIMIT,
};
use crate::revenue::{rev, PriceVector};
use crate::rng::{mix_seed, TrialRng};
use crate::scalar::Scalar;

type Q = BigRational;

/// Where the hidden instance comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InstanceSource {
    BaseG {
        n: u64,
    },
    SampleHard {
        n: u64,
        eps: Ratio<u64>,
        seed: u64,
    },
    QueryHard {
        n: u64,
        eps: Ratio<u64>,
        seed: u64,
    },
    EqualRevenue {
        n: u64,
        eps: Ratio<u64>,
    },
    Nonmono {
        #[serde(default)]
        perturbed: bool,
    },
    Random {
        n: usize,
        lattice: u64,
        max_support: usize,
        seed: u64,
    },
    File {
        path: PathBuf,
    },
}

/// A generated instance with the price grid its family suggests.
#[derive(Clone, Debug)]
pub struct ResolvedInstance {
    pub dist: ProductDist<Q>,
    /// `{1/2, 1}` for the three-point family, `{1/2 + k eps}` for the
    /// equal-revenue family, every lattice point otherwise.
    pub natural_grid: PriceGrid,
    pub hidden: Option<Value>,
}

impl ResolvedInstance {
    pub fn into_instance(self) -> Instance<Q> {
        Instance {
            dist: self.dist,
            hidden: self.hidden,
        }
    }
}

impl InstanceSource {
    pub fn resolve(&self) -> Result<ResolvedInstance> {
        let half_or_one = || PriceGrid::new(2, vec![1, 2]);
        let equal_revenue_grid = |eps: Ratio<u64>| -> Result<PriceGrid> {
            PriceGrid::new(4 * (*eps.denom() / 4), equal_revenue_prices(eps)?)
        };
        Ok(match self {
            Self::BaseG { n } => ResolvedInstance {
                dist: ProductDist::iid(base_g(*n)?, *n as usize)?,
                natural_grid: half_or_one()?,
                hidden: None,
            },
            Self::SampleHard { n, eps, seed } => {
                let mut rng = TrialRng::seed_from_u64(*seed);
                let inst = make_sample_hard::<Q, _>(*n, *eps, &mut rng)?;
                ResolvedInstance {
                    natural_grid: half_or_one()?,
                    hidden: Some(json!({
                        "kind": "sample-hard",
                        "eps": inst.eps,
                        "q_star": inst.q_star,
                        "pairs": inst.pairs,
                    })),
                    dist: inst.dist,
                }
            }
            Self::QueryHard { n, eps, seed } => {
                let mut rng = TrialRng::seed_from_u64(*seed);
                let inst = make_query_hard::<Q, _>(*n, *eps, &mut rng)?;
                ResolvedInstance {
                    natural_grid: equal_revenue_grid(*eps)?,
                    hidden: Some(json!({
                        "kind": "query-hard",
                        "eps": inst.eps,
                        "hidden_k": inst.hidden_k,
                    })),
                    dist: inst.dist,
                }
            }
            Self::EqualRevenue { n, eps } => ResolvedInstance {
                dist: ProductDist::iid(equal_revenue_h(*n, *eps)?, *n as usize)?,
                natural_grid: equal_revenue_grid(*eps)?,
                hidden: None,
            },
            Self::Nonmono { perturbed } => {
                let (plain, up) = nonmonotonicity_example::<Q>()?;
                ResolvedInstance {
                    dist: if *perturbed { up } else { plain },
                    natural_grid: PriceGrid::multiples(10, 1)?,
                    hidden: None,
                }
            }
            Self::Random {
                n,
                lattice,
                max_support,
                seed,
            } => {
                let mut rng = TrialRng::seed_from_u64(*seed);
                ResolvedInstance {
                    dist: random_product(*n, *lattice, *max_support, &mut rng)?,
                    natural_grid: PriceGrid::multiples(*lattice, 1)?,
                    hidden: None,
                }
            }
            Self::File { path } => {
                let inst = Instance::<Q>::read(path)?;
                ResolvedInstance {
                    natural_grid: PriceGrid::multiples(inst.dist.lattice(), 1)?,
                    dist: inst.dist,
                    hidden: inst.hidden,
                }
            }
        })
    }
}

/// Candidate prices for the optimum and for the sample learner.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridSpec {
    #[default]
    Natural,
    /// Every lattice point.
    Lattice,
    /// Multiples of `eps^2`.
    EpsSquared,
    /// Explicit numerators on the instance lattice.
    Prices(Vec<u64>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LearnerKind {
    Sample,
    Query,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptimizerKind {
    #[default]
    Brute,
    Coord,
}

fn default_starts() -> usize {
    20
}

/// Everything that determines an experiment's output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub instance: InstanceSource,
    pub learner: LearnerKind,
    /// Sample count (sample learner) or queries per estimate (query learner).
    pub budgets: Vec<u64>,
    pub trials: u64,
    pub master_seed: u64,
    #[serde(default)]
    pub optimizer: OptimizerKind,
    #[serde(default = "default_starts")]
    pub starts: usize,
    #[serde(default)]
    pub grid: GridSpec,
    pub eps: Ratio<u64>,
    pub delta: f64,
    /// Leading budget constant; only matters when no override applies.
    #[serde(default)]
    pub c: Option<f64>,
    /// Off by default so that repeated runs produce identical files.
    #[serde(default)]
    pub record_wall_time: bool,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.budgets.is_empty() {
            return Err(invalid("budgets must be nonempty"));
        }
        if self.budgets.windows(2).any(|w| w[0] >= w[1]) || self.budgets[0] == 0 {
            return Err(invalid("budgets must be positive and strictly increasing"));
        }
        if self.trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        if self.starts == 0 {
            return Err(invalid("starts must be at least 1"));
        }
        self.config(1).validate()
    }

    fn config(&self, budget: u64) -> LearnerConfig {
        let base = match self.learner {
            LearnerKind::Sample => LearnerConfig::for_samples(self.eps, self.delta),
            LearnerKind::Query => LearnerConfig::for_queries(self.eps, self.delta),
        };
        let base = match self.c {
            Some(c) => base.with_c(c),
            None => base,
        };
        base.with_budget(budget)
    }

    fn grid(&self, inst: &ResolvedInstance) -> Result<PriceGrid> {
        let lattice = inst.dist.lattice();
        match &self.grid {
            GridSpec::Natural => Ok(inst.natural_grid.clone()),
            GridSpec::Lattice => PriceGrid::multiples(lattice, 1),
            GridSpec::EpsSquared => PriceGrid::eps_squared(lattice, self.eps),
            GridSpec::Prices(p) => PriceGrid::new(lattice, p.clone()),
        }
    }

    fn optimizer<T: Scalar>(&self, grid: PriceGrid, seed: u64) -> Box<dyn PriceOptimizer<T>> {
        match self.optimizer {
            OptimizerKind::Brute => Box::new(GridSearch { grid }),
            OptimizerKind::Coord => Box::new(CoordinateSearch {
                grid,
                starts: self.starts,
                seed,
            }),
        }
    }
}

/// One learner run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub budget: u64,
    pub trial: u64,
    /// Grid optimum minus the true revenue of the learned prices.
    pub revenue_loss: f64,
    pub queries_used: u64,
    pub samples_used: u64,
    pub wall_time_ms: u64,
}

/// Exact grid optimum of the hidden instance, computed once per experiment.
fn grid_optimum(spec: &ExperimentSpec, d: &ProductDist<Q>, grid: &PriceGrid) -> Result<Q> {
    let space = (grid.len() as u128).saturating_pow(d.n() as u32);
    if space <= SEARCH_LIMIT {
        return Ok(optimal_bruteforce(d, grid)?.1);
    }
    match spec.optimizer {
        OptimizerKind::Coord => {
            let mut rng = TrialRng::seed_from_u64(mix_seed(&[spec.master_seed, u64::MAX]));
            Ok(coordinate_ascent(d, grid, spec.starts, &mut rng)?.1)
        }
        OptimizerKind::Brute => Err(Error::SearchSpaceTooLarge(space, SEARCH_LIMIT)),
    }
}

/// True revenue of `p` on `d`, lifting both to a common lattice.
fn true_revenue(d: &ProductDist<Q>, p: &PriceVector) -> Result<Q> {
    let common = num_integer::lcm(d.lattice(), p.lattice());
    rev(&d.with_lattice(common)?, &p.with_lattice(common)?)
}

/// Runs every `(budget, trial)` pair. Trials run in parallel on `threads`
/// workers (or the global pool); output order and content do not depend on
/// the thread count.
pub fn run_experiment(spec: &ExperimentSpec, threads: Option<usize>) -> Result<Vec<ExperimentRecord>> {
    spec.validate()?;
    let inst = spec.instance.resolve()?;
    let grid = spec.grid(&inst)?;
    super::with_threads(threads, || {
        let optimum = grid_optimum(spec, &inst.dist, &grid)?;
        let jobs: Vec<(u64, u64)> = spec
            .budgets
            .iter()
            .flat_map(|&b| (0..spec.trials).map(move |t| (b, t)))
            .collect();
        jobs.into_par_iter()
            .map(|(budget, trial)| run_trial(spec, &inst, &grid, &optimum, budget, trial))
            .collect()
    })?
}

fn run_trial(
    spec: &ExperimentSpec,
    inst: &ResolvedInstance,
    grid: &PriceGrid,
    optimum: &Q,
    budget: u64,
    trial: u64,
) -> Result<ExperimentRecord> {
    let started = Instant::now();
    let seed = mix_seed(&[spec.master_seed, budget, trial]);
    let cfg = spec.config(budget);
    let (prices, queries_used, samples_used) = match spec.learner {
        LearnerKind::Sample => {
            let mut oracle = SampleOracle::new(&inst.dist, seed);
            let opt = spec.optimizer::<f64>(grid.clone(), mix_seed(&[seed, 1]));
            let out = learn_from_samples::<f64, _>(&mut oracle, &cfg, opt.as_ref())?;
            (out.prices, 0, out.samples_used)
        }
        LearnerKind::Query => {
            let mut oracle = QueryOracle::new(&inst.dist, seed);
            let m = *spec.eps.denom();
            let learned_grid = PriceGrid::multiples(m * m, 1)?;
            let opt = spec.optimizer::<f64>(learned_grid, mix_seed(&[seed, 1]));
            let out = learn_product_by_queries::<f64, _>(&mut oracle, &cfg, opt.as_ref())?;
            (out.prices, oracle.queries_used(), 0)
        }
    };
    let loss = optimum.clone() - true_revenue(&inst.dist, &prices)?;
    Ok(ExperimentRecord {
        budget,
        trial,
        revenue_loss: loss.to_f64(),
        queries_used,
        samples_used,
        wall_time_ms: if spec.record_wall_time {
            started.elapsed().as_millis() as u64
        } else {
            0
        },
    })
}

/// Mean share of pairs whose perturbed member a maximum-likelihood test
/// misses, when each trial sees `samples` draws of a fresh sample-hard
/// instance.
pub fn pair_misidentification_rate(
    n: u64,
    eps: Ratio<u64>,
    samples: u64,
    trials: u64,
    seed: u64,
) -> Result<f64> {
    if trials == 0 || samples == 0 {
        return Err(invalid("trials and samples must be positive"));
    }
    let eps_f = *eps.numer() as f64 / *eps.denom() as f64;
    let rates = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<f64> {
            let mut rng = TrialRng::seed_from_u64(mix_seed(&[seed, t]));
            let inst = make_sample_hard::<f64, _>(n, eps, &mut rng)?;
            let mut oracle = SampleOracle::new(&inst.dist, mix_seed(&[seed, t, 1]));
            let counts = oracle.draw_counts(samples);
            let tally = |i: usize| -> [u64; 3] {
                [0u64, 1, 2].map(|v| counts[i].get(&v).copied().unwrap_or(0))
            };
            let wrong = inst
                .pairs
                .iter()
                .filter(|p| {
                    let guess =
                        guess_perturbed_first(tally(p.first), tally(p.second), n, eps_f, &mut rng);
                    guess != p.first_is_perturbed
                })
                .count();
            Ok(wrong as f64 / inst.pairs.len() as f64)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rates.iter().sum::<f64>() / trials as f64)
}
