//! Numerical checks of the structural inequalities behind the learners and the
//! lower-bound instances. Each check runs a batch of seeded cases and reports
//! the worst margin seen (positive means the inequality held with room).

use std::str::FromStr;

use num_rational::{BigRational, Ratio};
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{DiscreteDist, ProductDist};
use crate::error::{invalid, Error, Result};
use crate::instances::{
    equal_revenue_h, equal_revenue_prices, make_query_hard, make_sample_hard, random_item,
    random_prices, random_product,
};
use crate::learn::{
    bernstein_gamma, check_cdf_bound, learn_single_by_queries, round_bound, scale_prices_refined,
    LearnerConfig, QueryOracle, SampleOracle,
};

use crate::optimize::{exante_optimal, PriceGrid};
use crate::revenue::{exante_rev, rev, tie_rank, PriceVector};
use crate::rng::{mix_seed, TrialRng};
use crate::scalar::{ratio, Scalar};

type Q = BigRational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lemma {
    /// Revenue loss when every CDF moves down by a bounded amount.
    ApproxSm,
    /// Gain from correcting one mislabeled pair on the sample-hard instance.
    MistakeLoss,
    /// Ex-ante loss of deviating from the best prices on the query-hard instance.
    QueryLowLoss,
    /// Mass of utilities whose blocking mass is below a threshold.
    SumIntegral,
    /// Rounding values down and scaling prices by `1 - eps`.
    Nisan,
    /// Empirical CDF concentration.
    CdfBound,
    /// Number of rounds of the query learner.
    RoundBound,
    /// Output accuracy of the query learner.
    QueryAccuracy,
}

impl Lemma {
    pub const ALL: [Lemma; 8] = [
        Lemma::ApproxSm,
        Lemma::MistakeLoss,
        Lemma::QueryLowLoss,
        Lemma::SumIntegral,
        Lemma::Nisan,
        Lemma::CdfBound,
        Lemma::RoundBound,
        Lemma::QueryAccuracy,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Lemma::ApproxSm => "approx_sm",
            Lemma::MistakeLoss => "mistake_loss",
            Lemma::QueryLowLoss => "query_low_loss",
            Lemma::SumIntegral => "sum_integral",
            Lemma::Nisan => "nisan",
            Lemma::CdfBound => "cdf_bound",
            Lemma::RoundBound => "round_bound",
            Lemma::QueryAccuracy => "query_accuracy",
        }
    }
}

impl FromStr for Lemma {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Lemma::ALL
            .into_iter()
            .find(|l| l.name() == s.replace('-', "_"))
            .ok_or_else(|| Error::UnknownLemma(s.to_string()))
    }
}

/// Hidden single-item shapes for the query learner checks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HiddenShape {
    #[default]
    PointMassTop,
    UniformGrid,
    EqualRevenue,
}

/// Parameters for [`verify_lemma`]. Unset fields take per-check defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyParams {
    pub n: Option<u64>,
    pub eps: Option<Ratio<u64>>,
    pub gamma: Option<Ratio<u64>>,
    pub delta: Option<f64>,
    pub cases: Option<u64>,
    pub samples: Option<u64>,
    pub c: Option<f64>,
    pub seed: u64,
    pub shape: HiddenShape,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub lemma: String,
    pub passed: bool,
    pub cases: u64,
    pub failures: u64,
    /// Smallest slack `rhs - lhs` over all cases.
    pub worst_margin: f64,
    /// The bound the cases were checked against.
    pub bound: f64,
    pub note: String,
}

fn f(r: &Q) -> f64 {
    r.to_f64()
}

fn q_of(r: Ratio<u64>) -> Q {
    ratio(*r.numer(), *r.denom())
}

fn ratio_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub fn verify_lemma(lemma: Lemma, params: &VerifyParams) -> Result<VerificationReport> {
    match lemma {
        Lemma::ApproxSm => approx_sm(params),
        Lemma::MistakeLoss => mistake_loss(params),
        Lemma::QueryLowLoss => query_low_loss(params),
        Lemma::SumIntegral => sum_integral(params),
        Lemma::Nisan => nisan(params),
        Lemma::CdfBound => cdf_bound(params),
        Lemma::RoundBound => round_bound_check(params),
        Lemma::QueryAccuracy => query_accuracy(params),
    }
}

/// Whether `0 <= F_G - F_H <= sqrt((1 - F_G) gamma) + gamma` holds at every
/// lattice point, decided exactly by squaring.
fn gap_hypothesis(g: &DiscreteDist<Q>, h: &DiscreteDist<Q>, gamma: &Q) -> bool {
    (0..=g.lattice()).all(|v| {
        let fg = g.cdf(v);
        let d = fg.clone() - h.cdf(v);
        if d < ratio(0, 1) {
            return false;
        }
        if d <= *gamma {
            return true;
        }
        let over = d - gamma.clone();
        over.clone() * over <= (ratio(1, 1) - fg) * gamma.clone()
    })
}

/// A distribution `H` dominating `G` whose CDF sits below `F_G` by a random
/// fraction of the allowed gap.
fn lowered<R: Rng>(g: &DiscreteDist<Q>, gamma: f64, rng: &mut R) -> Result<DiscreteDist<Q>> {
    let top = g.lattice();
    let mut running = 0.0f64;
    let cdf: Vec<Q> = (0..=top)
        .map(|v| {
            if v == top {
                return ratio(1, 1);
            }
            let fg = f(&g.cdf(v));
            let slack = ((1.0 - fg) * gamma).sqrt() + gamma;
            let c = (fg - 0.98 * rng.random::<f64>() * slack).max(0.0);
            running = running.max(c);
            Q::from_f64(running)
        })
        .collect();
    let points: Vec<u64> = (0..=top).collect();
    DiscreteDist::from_cdf_points(top, &points, &cdf)
}

fn approx_sm(params: &VerifyParams) -> Result<VerificationReport> {
    let gamma_r = params.gamma.unwrap_or(Ratio::new(1, 64));
    let n = params.n.unwrap_or(4) as usize;
    let cases = params.cases.unwrap_or(200);
    let gamma = ratio_f64(gamma_r);
    let gq = q_of(gamma_r);
    let log_inv = (1.0 / gamma).ln();
    let bound = 7.0 * log_inv * (gamma * n as f64 + (log_inv * gamma * n as f64).sqrt());
    let lattice = 16;
    let prices_per_pair = 5;

    let results = (0..cases)
        .into_par_iter()
        .map(|case| -> Result<(f64, f64)> {
            let mut rng = TrialRng::seed_from_u64(mix_seed(&[params.seed, case]));
            let mut gs = Vec::with_capacity(n);
            let mut hs = Vec::with_capacity(n);
            for _ in 0..n {
                loop {
                    let g: DiscreteDist<Q> = random_item(lattice, 5, &mut rng)?;
                    let h = lowered(&g, gamma, &mut rng)?;
                    if gap_hypothesis(&g, &h, &gq) {
                        gs.push(g);
                        hs.push(h);
                        break;
                    }
                }
            }
            let g = ProductDist::new(gs)?;
            let h = ProductDist::new(hs)?;
            let mut worst = f64::INFINITY;
            let mut drop = f64::NEG_INFINITY;
            for _ in 0..prices_per_pair {
                let p = random_prices(n, lattice, &mut rng);
                let diff = f(&(rev(&g, &p)? - rev(&h, &p)?));
                worst = worst.min(bound - diff);
                drop = drop.max(diff);
            }
            Ok((worst, drop))
        })
        .collect::<Result<Vec<_>>>()?;
    let failures = results.iter().filter(|r| r.0 < 0.0).count() as u64;
    let worst = results.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let drop = results.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(VerificationReport {
        lemma: Lemma::ApproxSm.name().into(),
        passed: failures == 0,
        cases: cases * prices_per_pair,
        failures,
        worst_margin: worst,
        bound,
        note: format!("largest observed revenue drop {drop:.6}"),
    })
}

fn mistake_loss(params: &VerifyParams) -> Result<VerificationReport> {
    let n = params.n.unwrap_or(100);
    let eps = params.eps.unwrap_or(Ratio::new(1, 100));
    let cases = params.cases.unwrap_or(20);
    let bound = q_of(eps) / ratio(5 * n, 1);
    let mut rng = TrialRng::seed_from_u64(params.seed);
    let inst = make_sample_hard::<Q, _>(n, eps, &mut rng)?;
    let correct = inst.correct_prices();

    let results = (0..cases)
        .into_par_iter()
        .map(|case| -> Result<Q> {
            let mut rng = TrialRng::seed_from_u64(mix_seed(&[params.seed, case]));
            // Case 0 keeps every other pair right; later cases price the
            // remaining items at 1/2 or 1 at random.
            let mut prices = correct.prices().to_vec();
            let pair = if case == 0 {
                inst.pairs[0]
            } else {
                for p in prices.iter_mut() {
                    *p = rng.random_range(1..=2);
                }
                inst.pairs[rng.random_range(0..inst.pairs.len())]
            };
            prices[pair.perturbed()] = 2;
            prices[pair.unperturbed()] = 1;
            let wrong = PriceVector::new(2, prices.clone())?;
            prices[pair.perturbed()] = 1;
            prices[pair.unperturbed()] = 2;
            let right = PriceVector::new(2, prices)?;
            Ok(rev(&inst.dist, &right)? - rev(&inst.dist, &wrong)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let failures = results.iter().filter(|g| **g < bound).count() as u64;
    let min_gain = results.iter().cloned().reduce(Q::min_of).expect("cases >= 1");
    Ok(VerificationReport {
        lemma: Lemma::MistakeLoss.name().into(),
        passed: failures == 0,
        cases,
        failures,
        worst_margin: f(&(min_gain.clone() - bound.clone())),
        bound: f(&bound),
        note: format!("smallest gain {:.6e}", f(&min_gain)),
    })
}

fn query_low_loss(params: &VerifyParams) -> Result<VerificationReport> {
    let n = params.n.unwrap_or(8);
    let eps = params.eps.unwrap_or(Ratio::new(1, 32));
    let random_cases = params.cases.unwrap_or(200);
    let mut rng = TrialRng::seed_from_u64(params.seed);
    let inst = make_query_hard::<Q, _>(n, eps, &mut rng)?;
    let lattice = inst.dist.lattice();
    let grid = PriceGrid::new(lattice, equal_revenue_prices(eps)?)?;
    let best = inst.best_prices();
    let opt = exante_rev(&inst.dist, &best)?;
    let (found, found_value) = exante_optimal(&inst.dist, &grid)?;
    let unit = q_of(eps) / ratio(4 * n, 1);

    let mut deviations: Vec<Vec<u64>> = Vec::new();
    for i in 0..n as usize {
        for &g in grid.prices() {
            if g != best.prices()[i] {
                let mut p = best.prices().to_vec();
                p[i] = g;
                deviations.push(p);
            }
        }
    }
    for _ in 0..random_cases {
        let mut p = best.prices().to_vec();
        for slot in p.iter_mut() {
            if rng.random_bool(0.5) {
                *slot = grid.prices()[rng.random_range(0..grid.len())];
            }
        }
        deviations.push(p);
    }
    let margins = deviations
        .par_iter()
        .map(|p| -> Result<Q> {
            let changed = p.iter().zip(best.prices()).filter(|(a, b)| a != b).count() as u64;
            let value = exante_rev(&inst.dist, &PriceVector::new(lattice, p.clone())?)?;
            Ok(opt.clone() - unit.clone() * ratio(changed, 1) - value)
        })
        .collect::<Result<Vec<_>>>()?;
    let failures = margins.iter().filter(|m| **m < ratio(0, 1)).count() as u64;
    let worst = margins.iter().cloned().reduce(Q::min_of).expect("deviations exist");
    let recovered = found == best && found_value == opt;
    Ok(VerificationReport {
        lemma: Lemma::QueryLowLoss.name().into(),
        passed: failures == 0 && recovered,
        cases: margins.len() as u64,
        failures,
        worst_margin: f(&worst),
        bound: f(&unit),
        note: format!(
            "ex-ante optimizer {} the planted prices",
            if recovered { "recovers" } else { "misses" }
        ),
    })
}

/// `sum_i sum_{theta : S_i(theta) < beta} Pr[v_i = p_i + theta]`, with items
/// indexed in tie order and `S_i(theta)` the mass above `p_j + theta` for
/// items ranked at or below `i` plus the mass at or above it for the rest.
pub fn blocked_mass(d: &ProductDist<Q>, p: &PriceVector, beta: &Q) -> Q {
    let order = tie_rank(p);
    let prices = p.prices();
    let mut total = ratio(0, 1);
    for (r, &i) in order.iter().enumerate() {
        for (v, mass) in d.item(i).iter() {
            if v < prices[i] {
                continue;
            }
            let theta = v - prices[i];
            let s = order.iter().enumerate().fold(ratio(0, 1), |acc, (rj, &j)| {
                let at = prices[j] + theta;
                let below = if rj <= r {
                    d.item(j).cdf(at)
                } else {
                    d.item(j).cdf_left(at)
                };
                acc + ratio(1, 1) - below
            });
            if s < *beta {
                total += mass.clone();
            }
        }
    }
    total
}

fn sum_integral(params: &VerifyParams) -> Result<VerificationReport> {
    let n = params.n.unwrap_or(4) as usize;
    let cases = params.cases.unwrap_or(200);
    let lattice = 16;
    let margins = (0..cases)
        .into_par_iter()
        .map(|case| -> Result<Q> {
            let mut rng = TrialRng::seed_from_u64(mix_seed(&[params.seed, case]));
            let items = rng.random_range(1..=n);
            let d = random_product::<Q, _>(items, lattice, 5, &mut rng)?;
            let p = random_prices(items, lattice, &mut rng);
            let beta = ratio(rng.random_range(1..=24), 4);
            Ok(beta.clone() + ratio(1, 1) - blocked_mass(&d, &p, &beta))
        })
        .collect::<Result<Vec<_>>>()?;
    let failures = margins.iter().filter(|m| **m < ratio(0, 1)).count() as u64;
    let worst = margins.iter().cloned().reduce(Q::min_of).expect("cases >= 1");
    Ok(VerificationReport {
        lemma: Lemma::SumIntegral.name().into(),
        passed: failures == 0,
        cases,
        failures,
        worst_margin: f(&worst),
        bound: 1.0,
        note: "bound is beta + 1 with beta drawn from {1/4, ..., 6}".into(),
    })
}

fn nisan(params: &VerifyParams) -> Result<VerificationReport> {
    let eps = params.eps.unwrap_or(Ratio::new(1, 8));
    let cases = params.cases.unwrap_or(100);
    let prices_per_case = 50;
    let b = *eps.denom();
    let lattice = 5 * b * b;
    let fine = lattice * b;
    let eq = q_of(eps);
    let margins = (0..cases)
        .into_par_iter()
        .map(|case| -> Result<Q> {
            let mut rng = TrialRng::seed_from_u64(mix_seed(&[params.seed, case]));
            let n = rng.random_range(1..=3);
            let d = random_product::<Q, _>(n, lattice, 4, &mut rng)?;
            let rounded = d.discretize(eps)?.with_lattice(fine)?;
            let mut worst: Option<Q> = None;
            for _ in 0..prices_per_case {
                let p = random_prices(n, lattice, &mut rng);
                let scaled = scale_prices_refined(&p, eps)?;
                let m = rev(&rounded, &scaled)? - rev(&d, &p)? + eq.clone();
                worst = Some(match worst {
                    Some(w) => Q::min_of(w, m),
                    None => m,
                });
            }
            Ok(worst.expect("prices_per_case >= 1"))
        })
        .collect::<Result<Vec<_>>>()?;
    let failures = margins.iter().filter(|m| **m < ratio(0, 1)).count() as u64;
    let worst = margins.iter().cloned().reduce(Q::min_of).expect("cases >= 1");
    Ok(VerificationReport {
        lemma: Lemma::Nisan.name().into(),
        passed: failures == 0,
        cases: cases * prices_per_case,
        failures,
        worst_margin: f(&worst),
        bound: f(&eq),
        note: format!("lattice {lattice}, scaled prices on lattice {fine}"),
    })
}

fn cdf_bound(params: &VerifyParams) -> Result<VerificationReport> {
    let n = params.n.unwrap_or(4) as usize;
    let samples = params.samples.unwrap_or(10_000);
    let delta = params.delta.unwrap_or(0.1);
    let trials = params.cases.unwrap_or(200);
    let gamma = bernstein_gamma(n, samples, delta);
    let mut rng = TrialRng::seed_from_u64(params.seed);
    let hidden = random_product::<Q, _>(n, 20, 6, &mut rng)?;
    let held = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<bool> {
            let mut oracle = SampleOracle::new(&hidden, mix_seed(&[params.seed, t]));
            let counts = oracle.draw_counts(samples);
            for (i, c) in counts.iter().enumerate() {
                let e = DiscreteDist::<Q>::from_counts(hidden.lattice(), c, samples)?;
                if !check_cdf_bound(hidden.item(i), &e, gamma)? {
                    return Ok(false);
                }
            }
            Ok(true)
        })
        .collect::<Result<Vec<_>>>()?;
    let ok = held.iter().filter(|&&h| h).count() as u64;
    let coverage = ok as f64 / trials as f64;
    Ok(VerificationReport {
        lemma: Lemma::CdfBound.name().into(),
        passed: coverage >= 1.0 - delta,
        cases: trials,
        failures: trials - ok,
        worst_margin: coverage - (1.0 - delta),
        bound: 1.0 - delta,
        note: format!("coverage {coverage:.4} with gamma {gamma:.6e}"),
    })
}

/// Outcome of one query-learner run on a known hidden item.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryTrial {
    /// `|F_G - F_H| <= eps (1 - F_G) + eps/n` at every grid point.
    pub accurate: bool,
    /// Every estimate within a tenth of that tolerance.
    pub concentrated: bool,
    /// Step lengths within `[0.9, 1.1]` of their targets.
    pub sandwiched: bool,
    pub rounds: usize,
    pub queries: u64,
}

fn hidden_item(shape: HiddenShape, n: u64, eps: Ratio<u64>) -> Result<DiscreteDist<Q>> {
    let m = *eps.denom();
    let top = m * m;
    match shape {
        HiddenShape::PointMassTop => DiscreteDist::point_mass(top, top),
        HiddenShape::UniformGrid => DiscreteDist::uniform_grid(top),
        HiddenShape::EqualRevenue => equal_revenue_h(n, eps)?.with_lattice(top),
    }
}

/// Runs the single-item query learner `trials` times on item 0 of `n` i.i.d.
/// copies of the given shape.
pub fn query_trials(
    shape: HiddenShape,
    n: u64,
    cfg: &LearnerConfig,
    trials: u64,
    seed: u64,
) -> Result<Vec<QueryTrial>> {
    cfg.validate()?;
    if *cfg.eps.numer() != 1 {
        return Err(invalid("query trials need eps = 1/m"));
    }
    let item = hidden_item(shape, n, cfg.eps)?;
    let hidden = ProductDist::iid(item.clone(), n as usize)?;
    let eps_q = q_of(cfg.eps);
    let eps_f = ratio_f64(cfg.eps);
    let per_item = eps_q.clone() / ratio(n, 1);
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut oracle = QueryOracle::new(&hidden, mix_seed(&[seed, t]));
            let (learned, trace) = learn_single_by_queries::<Q>(&mut oracle, 0, cfg)?;
            let accurate = (0..=item.lattice()).all(|v| {
                let fg = item.cdf(v);
                let tol = eps_q.clone() * (ratio(1, 1) - fg.clone()) + per_item.clone();
                fg.abs_diff(&learned.cdf(v)) <= tol
            });
            let truth = |k: u64| f(&item.cdf(k));
            Ok(QueryTrial {
                accurate,
                concentrated: trace.worst_estimate_ratio(&truth, eps_f, n as usize) <= 1.0,
                sandwiched: trace.steps_sandwiched(&truth, eps_f, n as usize),
                rounds: trace.rounds,
                queries: oracle.queries_used(),
            })
        })
        .collect()
}

fn query_config(params: &VerifyParams) -> LearnerConfig {
    let eps = params.eps.unwrap_or(Ratio::new(1, 8));
    let cfg = LearnerConfig::for_queries(eps, params.delta.unwrap_or(0.1))
        .with_c(params.c.unwrap_or(1000.0));
    match params.samples {
        Some(b) => cfg.with_budget(b),
        None => cfg,
    }
}

fn query_accuracy(params: &VerifyParams) -> Result<VerificationReport> {
    let n = params.n.unwrap_or(4);
    let cfg = query_config(params);
    let trials = params.cases.unwrap_or(200);
    let runs = query_trials(params.shape, n, &cfg, trials, params.seed)?;
    let ok = runs.iter().filter(|r| r.accurate).count() as u64;
    let rate = ok as f64 / trials as f64;
    Ok(VerificationReport {
        lemma: Lemma::QueryAccuracy.name().into(),
        passed: rate >= 1.0 - cfg.delta,
        cases: trials,
        failures: trials - ok,
        worst_margin: rate - (1.0 - cfg.delta),
        bound: 1.0 - cfg.delta,
        note: format!("accurate in {ok} of {trials} runs ({:?})", params.shape),
    })
}

fn round_bound_check(params: &VerifyParams) -> Result<VerificationReport> {
    let n = params.n.unwrap_or(4);
    let cfg = query_config(params);
    let trials = params.cases.unwrap_or(200);
    let runs = query_trials(params.shape, n, &cfg, trials, params.seed)?;
    let bound = round_bound(n as usize, cfg.eps_f64());
    let eligible: Vec<&QueryTrial> = runs.iter().filter(|r| r.concentrated).collect();
    let failures = eligible
        .iter()
        .filter(|r| r.rounds as f64 > bound || !r.sandwiched)
        .count() as u64;
    let worst = eligible
        .iter()
        .map(|r| bound - r.rounds as f64)
        .fold(f64::INFINITY, f64::min);
    Ok(VerificationReport {
        lemma: Lemma::RoundBound.name().into(),
        passed: failures == 0,
        cases: eligible.len() as u64,
        failures,
        worst_margin: worst,
        bound,
        note: format!(
            "{} of {trials} runs met the estimate-accuracy event",
            eligible.len()
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lemma_names_parse() {
        for l in Lemma::ALL {
            assert_eq!(l.name().parse::<Lemma>().unwrap(), l);
        }
        assert_eq!("mistake-loss".parse::<Lemma>().unwrap(), Lemma::MistakeLoss);
        assert!(matches!("nope".parse::<Lemma>(), Err(Error::UnknownLemma(_))));
    }

    #[test]
    fn lowered_pairs_meet_hypothesis() {
        let mut rng = TrialRng::seed_from_u64(4);
        let gamma = ratio(1, 64);
        let mut met = 0;
        for _ in 0..50 {
            let g: DiscreteDist<Q> = random_item(16, 5, &mut rng).unwrap();
            let h = lowered(&g, 1.0 / 64.0, &mut rng).unwrap();
            assert!(crate::dist::dominates(&h, &g).unwrap());
            if gap_hypothesis(&g, &h, &gamma) {
                met += 1;
            }
        }
        assert!(met >= 45);
    }

    #[test]
    fn blocked_mass_single_item() {
        // One item: S(theta) = Pr[v > p + theta], so with beta tiny only the
        // top value counts.
        let d = ProductDist::new(vec![DiscreteDist::<Q>::new(
            4,
            vec![1, 3, 4],
            vec![ratio(1, 4), ratio(1, 4), ratio(1, 2)],
        )
        .unwrap()])
        .unwrap();
        let p = PriceVector::new(4, vec![1]).unwrap();
        assert_eq!(blocked_mass(&d, &p, &ratio(1, 100)), ratio(1, 2));
        assert_eq!(blocked_mass(&d, &p, &ratio(2, 1)), ratio(1, 1));
    }

    #[test]
    fn small_runs_pass() {
        let quick = VerifyParams {
            cases: Some(10),
            ..Default::default()
        };
        for l in [Lemma::ApproxSm, Lemma::SumIntegral, Lemma::Nisan] {
            let r = verify_lemma(l, &quick).unwrap();
            assert!(r.passed, "{r:?}");
        }
        let r = verify_lemma(
            Lemma::MistakeLoss,
            &VerifyParams {
                n: Some(20),
                eps: Some(Ratio::new(1, 100)),
                cases: Some(4),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(r.cases, 4);
    }
}
