//! Expected revenue of posted prices for a unit-demand buyer.
//!
//! The buyer takes the item with the largest utility `v_i - p_i` as long as it
//! is non-negative (zero utility still buys). Ties go to the higher price and,
//! among equal prices, to the higher item index. [`rev`] evaluates this
//! exactly through per-item win probabilities; [`rev_bruteforce`] and
//! [`rev_monte_carlo`] walk joint outcomes directly and serve as independent
//! checks.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dist::ProductDist;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One posted price per item, as numerators over `lattice`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PriceVector {
    lattice: u64,
    prices: Vec<u64>,
}

impl PriceVector {
    pub fn new(lattice: u64, prices: Vec<u64>) -> Result<Self> {
        if lattice == 0 {
            return Err(Error::InvalidParameter("lattice must be positive".into()));
        }
        if prices.is_empty() {
            return Err(Error::Empty("prices"));
        }
        if let Some(&bad) = prices.iter().find(|&&p| p > lattice) {
            return Err(Error::OutOfRange {
                value: bad,
                lattice,
            });
        }
        Ok(Self { lattice, prices })
    }

    pub fn uniform(lattice: u64, price: u64, n: usize) -> Result<Self> {
        Self::new(lattice, vec![price; n])
    }

    pub fn lattice(&self) -> u64 {
        self.lattice
    }

    pub fn prices(&self) -> &[u64] {
        &self.prices
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    pub fn price<T: Scalar>(&self, i: usize) -> T {
        T::from_ratio(self.prices[i], self.lattice)
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.prices
            .iter()
            .map(|&p| p as f64 / self.lattice as f64)
            .collect()
    }

    /// Same prices on a finer lattice (a multiple of the current one).
    pub fn with_lattice(&self, new_lattice: u64) -> Result<Self> {
        if new_lattice == 0 || !new_lattice.is_multiple_of(self.lattice) {
            return Err(Error::IncompatibleLattice {
                lattice: new_lattice,
                what: format!("refinement of lattice {}", self.lattice),
            });
        }
        let f = new_lattice / self.lattice;
        Ok(Self {
            lattice: new_lattice,
            prices: self.prices.iter().map(|p| p * f).collect(),
        })
    }
}

/// Per-item win probabilities plus the probability of no sale.
#[derive(Clone, Debug, PartialEq)]
pub struct WinProfile<T> {
    pub win: Vec<T>,
    pub no_purchase: T,
}

impl<T: Scalar> WinProfile<T> {
    pub fn total(&self) -> T {
        self.win
            .iter()
            .fold(self.no_purchase.clone(), |a, b| a + b.clone())
    }
}

fn check_shapes<T: Scalar>(d: &ProductDist<T>, p: &PriceVector) -> Result<()> {
    if d.lattice() != p.lattice() {
        return Err(Error::LatticeMismatch(d.lattice(), p.lattice()));
    }
    if d.n() != p.len() {
        return Err(Error::ItemCount {
            expected: d.n(),
            got: p.len(),
        });
    }
    Ok(())
}

/// Items ordered by (price, index) ascending. An item beats every item ranked
/// below it on equal utility and loses to every item ranked above it.
pub fn tie_rank(p: &PriceVector) -> Vec<usize> {
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by_key(|&i| (p.prices()[i], i));
    order
}

/// Exact win probability of each item.
///
/// For every utility level `theta` that some item can reach, the chance that
/// item `i` wins at `theta` is its mass at `p_i + theta` times
/// `prod_{lower rank} F_j(p_j + theta) * prod_{higher rank} F_j((p_j + theta)^-)`.
/// Both products are formed once per level as prefix and suffix products over
/// the tie ranking.
pub fn win_probabilities<T: Scalar>(d: &ProductDist<T>, p: &PriceVector) -> Result<WinProfile<T>> {
    check_shapes(d, p)?;
    let n = d.n();
    let prices = p.prices();
    let order = tie_rank(p);

    let mut levels: Vec<u64> = d
        .items()
        .iter()
        .zip(prices)
        .flat_map(|(item, &price)| {
            item.support()
                .iter()
                .filter(move |&&v| v >= price)
                .map(move |&v| v - price)
        })
        .collect();
    levels.sort_unstable();
    levels.dedup();

    let mut win = vec![T::zero(); n];
    let mut prefix = vec![T::one(); n + 1];
    let mut suffix = vec![T::one(); n + 1];
    for &theta in &levels {
        for (r, &j) in order.iter().enumerate() {
            let at = prices[j] + theta;
            prefix[r + 1] = prefix[r].clone() * d.item(j).cdf(at);
        }
        for (r, &j) in order.iter().enumerate().rev() {
            let at = prices[j] + theta;
            suffix[r] = suffix[r + 1].clone() * d.item(j).cdf_left(at);
        }
        for (r, &i) in order.iter().enumerate() {
            let mass = d.item(i).mass_at(prices[i] + theta);
            if mass.is_zero() {
                continue;
            }
            win[i] = win[i].clone() + mass * prefix[r].clone() * suffix[r + 1].clone();
        }
    }

    let no_purchase = d
        .items()
        .iter()
        .zip(prices)
        .fold(T::one(), |acc, (item, &price)| acc * item.cdf_left(price));
    Ok(WinProfile { win, no_purchase })
}

/// Expected revenue `sum_i p_i * P_i`.
pub fn rev<T: Scalar>(d: &ProductDist<T>, p: &PriceVector) -> Result<T> {
    let profile = win_probabilities(d, p)?;
    Ok(revenue_from_profile(&profile, p))
}

pub(crate) fn revenue_from_profile<T: Scalar>(profile: &WinProfile<T>, p: &PriceVector) -> T {
    profile
        .win
        .iter()
        .enumerate()
        .fold(T::zero(), |acc, (i, w)| acc + p.price::<T>(i) * w.clone())
}

/// Index of the item a buyer with `values` purchases, if any.
pub fn buyer_choice(values: &[u64], prices: &[u64]) -> Option<usize> {
    let mut best: Option<(i64, u64, usize)> = None;
    for (i, (&v, &p)) in values.iter().zip(prices).enumerate() {
        let u = v as i64 - p as i64;
        if u < 0 {
            continue;
        }
        let key = (u, p, i);
        if best.is_none_or(|b| key > b) {
            best = Some(key);
        }
    }
    best.map(|(_, _, i)| i)
}

/// Largest joint support [`rev_bruteforce`] will enumerate.
pub const BRUTEFORCE_LIMIT: u128 = 1_000_000;

/// Revenue by enumerating every joint value vector.
pub fn rev_bruteforce<T: Scalar>(d: &ProductDist<T>, p: &PriceVector) -> Result<T> {
    check_shapes(d, p)?;
    let size = d.joint_support_size();
    if size > BRUTEFORCE_LIMIT {
        return Err(Error::SearchSpaceTooLarge(size, BRUTEFORCE_LIMIT));
    }
    let n = d.n();
    let mut idx = vec![0usize; n];
    let mut values = vec![0u64; n];
    let mut total = T::zero();
    'outer: loop {
        let mut prob = T::one();
        for (j, &k) in idx.iter().enumerate() {
            values[j] = d.item(j).support()[k];
            prob = prob * d.item(j).masses()[k].clone();
        }
        if let Some(w) = buyer_choice(&values, p.prices()) {
            total = total + p.price::<T>(w) * prob;
        }
        for j in 0..n {
            idx[j] += 1;
            if idx[j] < d.item(j).len() {
                continue 'outer;
            }
            idx[j] = 0;
        }
        break;
    }
    Ok(total)
}

/// Monte Carlo revenue estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
}

pub fn rev_monte_carlo<T: Scalar, R: Rng + ?Sized>(
    d: &ProductDist<T>,
    p: &PriceVector,
    trials: u64,
    rng: &mut R,
) -> Result<McEstimate> {
    check_shapes(d, p)?;
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    let samplers: Vec<_> = d.items().iter().map(|it| it.sampler()).collect();
    let prices_f = p.as_f64();
    let mut values = vec![0u64; d.n()];
    let (mut sum, mut sum_sq) = (0.0f64, 0.0f64);
    for _ in 0..trials {
        for (v, s) in values.iter_mut().zip(&samplers) {
            *v = s.sample(rng);
        }
        let r = buyer_choice(&values, p.prices()).map_or(0.0, |i| prices_f[i]);
        sum += r;
        sum_sq += r * r;
    }
    let t = trials as f64;
    let mean = sum / t;
    let var = if trials > 1 {
        ((sum_sq - t * mean * mean) / (t - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(McEstimate {
        mean,
        stderr: (var / t).sqrt(),
    })
}

/// Value of the ex-ante relaxation: maximize `sum q_i p_i` subject to
/// `sum q_i <= 1` and `q_i <= Pr[v_i >= p_i]`.
///
/// A fractional knapsack with unit weights, so filling the budget greedily in
/// decreasing price order is optimal.
pub fn exante_rev<T: Scalar>(d: &ProductDist<T>, p: &PriceVector) -> Result<T> {
    Ok(exante_allocation(d, p)?
        .iter()
        .enumerate()
        .fold(T::zero(), |acc, (i, q)| acc + p.price::<T>(i) * q.clone()))
}

/// Optimal `q` of the ex-ante relaxation in item order.
pub fn exante_allocation<T: Scalar>(d: &ProductDist<T>, p: &PriceVector) -> Result<Vec<T>> {
    check_shapes(d, p)?;
    let mut order: Vec<usize> = (0..d.n()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(p.prices()[i]));
    let mut remaining = T::one();
    let mut q = vec![T::zero(); d.n()];
    for i in order {
        if remaining.is_zero() {
            break;
        }
        let take = T::min_of(d.item(i).tail(p.prices()[i]), remaining.clone());
        remaining = remaining - take.clone();
        q[i] = take;
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::DiscreteDist;
    use crate::scalar::ratio;
    use num_rational::BigRational;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type Q = BigRational;

    fn ab() -> ProductDist<Q> {
        let a = DiscreteDist::point_mass(2, 1).unwrap();
        let b = DiscreteDist::new(2, vec![0, 2], vec![ratio(1, 2), ratio(1, 2)]).unwrap();
        ProductDist::new(vec![a, b]).unwrap()
    }

    fn arb_product(lattice: u64) -> impl Strategy<Value = ProductDist<Q>> {
        let item = prop::collection::btree_map(0..=lattice, 1u64..9, 1..5).prop_map(move |m| {
            let total: u64 = m.values().sum();
            let (s, w): (Vec<u64>, Vec<u64>) = m.into_iter().unzip();
            DiscreteDist::new(lattice, s, w.into_iter().map(|c| ratio(c, total)).collect())
                .unwrap()
        });
        prop::collection::vec(item, 1..5).prop_map(|items| ProductDist::new(items).unwrap())
    }

    fn arb_case(lattice: u64) -> impl Strategy<Value = (ProductDist<Q>, PriceVector)> {
        arb_product(lattice).prop_flat_map(move |d| {
            let n = d.n();
            (
                Just(d),
                prop::collection::vec(0..=lattice, n)
                    .prop_map(move |ps| PriceVector::new(lattice, ps).unwrap()),
            )
        })
    }

    #[test]
    fn single_item_zero_utility_buys() {
        let d = ProductDist::new(vec![DiscreteDist::<Q>::point_mass(4, 2).unwrap()]).unwrap();
        let w = win_probabilities(&d, &PriceVector::new(4, vec![2]).unwrap()).unwrap();
        assert_eq!(w.win, vec![ratio(1, 1)]);
        let w = win_probabilities(&d, &PriceVector::new(4, vec![3]).unwrap()).unwrap();
        assert_eq!(w.win, vec![ratio(0, 1)]);
        assert_eq!(w.no_purchase, ratio(1, 1));
    }

    #[test]
    fn tie_between_items_goes_to_higher_price() {
        let d = ab();
        let p = PriceVector::new(2, vec![1, 2]).unwrap();
        let w = win_probabilities(&d, &p).unwrap();
        assert_eq!(w.win, vec![ratio(1, 2), ratio(1, 2)]);
        assert_eq!(rev(&d, &p).unwrap(), ratio(3, 4));
        assert_eq!(rev_bruteforce(&d, &p).unwrap(), ratio(3, 4));
    }

    #[test]
    fn equal_prices_tie_to_higher_index() {
        let one = DiscreteDist::<Q>::point_mass(2, 2).unwrap();
        let d = ProductDist::iid(one, 3).unwrap();
        let w = win_probabilities(&d, &PriceVector::uniform(2, 1, 3).unwrap()).unwrap();
        assert_eq!(w.win, vec![ratio(0, 1), ratio(0, 1), ratio(1, 1)]);
        assert_eq!(buyer_choice(&[2, 2, 2], &[1, 1, 1]), Some(2));
    }

    #[test]
    fn perturbed_a_loses_revenue() {
        let a_tilde =
            DiscreteDist::<Q>::new(10, vec![6, 5], vec![ratio(1, 10), ratio(9, 10)]).unwrap();
        let b = DiscreteDist::new(10, vec![0, 10], vec![ratio(1, 2), ratio(1, 2)]).unwrap();
        let d = ProductDist::new(vec![a_tilde, b]).unwrap();
        let p = PriceVector::new(10, vec![5, 10]).unwrap();
        assert_eq!(rev(&d, &p).unwrap(), ratio(29, 40));
    }

    #[test]
    fn point_mass_at_top_price() {
        let d = ProductDist::new(vec![DiscreteDist::<Q>::point_mass(1, 1).unwrap()]).unwrap();
        let p = PriceVector::new(1, vec![1]).unwrap();
        assert_eq!(rev(&d, &p).unwrap(), ratio(1, 1));
        assert_eq!(exante_rev(&d, &p).unwrap(), ratio(1, 1));
    }

    #[test]
    fn zero_values_give_zero_revenue() {
        let d = ProductDist::iid(DiscreteDist::<Q>::point_mass(4, 0).unwrap(), 2).unwrap();
        let p = PriceVector::new(4, vec![1, 3]).unwrap();
        assert_eq!(rev_bruteforce(&d, &p).unwrap(), ratio(0, 1));
    }

    #[test]
    fn shape_errors() {
        let d = ab();
        assert!(matches!(
            rev(&d, &PriceVector::new(4, vec![1, 2]).unwrap()),
            Err(Error::LatticeMismatch(2, 4))
        ));
        assert!(matches!(
            rev(&d, &PriceVector::new(2, vec![1]).unwrap()),
            Err(Error::ItemCount { .. })
        ));
        let big = ProductDist::iid(DiscreteDist::<f64>::uniform_grid(99).unwrap(), 4).unwrap();
        assert!(matches!(
            rev_bruteforce(&big, &PriceVector::uniform(99, 50, 4).unwrap()),
            Err(Error::SearchSpaceTooLarge(..))
        ));
    }

    #[test]
    fn monte_carlo_on_two_item_example() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let p = PriceVector::new(2, vec![1, 2]).unwrap();
        let est = rev_monte_carlo(&ab(), &p, 1_000_000, &mut rng).unwrap();
        assert!((est.mean - 0.75).abs() <= 3.0 * est.stderr);

        let det = ProductDist::new(vec![DiscreteDist::<Q>::point_mass(4, 3).unwrap()]).unwrap();
        let est = rev_monte_carlo(&det, &PriceVector::new(4, vec![2]).unwrap(), 100, &mut rng)
            .unwrap();
        assert_eq!((est.mean, est.stderr), (0.5, 0.0));
    }

    #[test]
    fn exante_greedy_by_hand() {
        let one = DiscreteDist::<Q>::point_mass(2, 2).unwrap();
        let d = ProductDist::iid(one, 2).unwrap();
        let p = PriceVector::new(2, vec![2, 1]).unwrap();
        assert_eq!(
            exante_allocation(&d, &p).unwrap(),
            vec![ratio(1, 1), ratio(0, 1)]
        );
        assert_eq!(exante_rev(&d, &p).unwrap(), ratio(1, 1));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn exact_matches_enumeration((d, p) in arb_case(6)) {
            let w = win_probabilities(&d, &p).unwrap();
            prop_assert_eq!(w.total(), ratio(1, 1));
            prop_assert_eq!(rev(&d, &p).unwrap(), rev_bruteforce(&d, &p).unwrap());
        }

        #[test]
        fn rounding_prices_up_to_half_or_one((d, p) in arb_case(2)) {
            // Values in {0, 1/2, 1}: lifting prices in (0, 1/2) to 1/2 and
            // (1/2, 1) to 1 never hurts. On lattice 4 this is the map
            // 1 -> 2 and 3 -> 4.
            let d4 = d.with_lattice(4).unwrap();
            let p4 = p.with_lattice(4).unwrap();
            let mut shifted: Vec<u64> = p4.prices().to_vec();
            let mut rng = ChaCha8Rng::seed_from_u64(shifted.iter().sum());
            for x in shifted.iter_mut() {
                if *x % 2 == 0 && rng.random_bool(0.5) && *x < 4 {
                    *x += 1;
                }
            }
            let off = PriceVector::new(4, shifted.clone()).unwrap();
            let lifted: Vec<u64> = shifted.iter().map(|&x| if x % 2 == 1 { x + 1 } else { x }).collect();
            let lifted = PriceVector::new(4, lifted).unwrap();
            prop_assert!(rev(&d4, &lifted).unwrap() >= rev(&d4, &off).unwrap());
        }

        #[test]
        fn exante_beats_feasible_points((d, p) in arb_case(6), seed in any::<u64>()) {
            let best = exante_rev(&d, &p).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..20 {
                let mut budget = ratio(1, 1);
                let mut obj = ratio(0, 1);
                for i in 0..d.n() {
                    let cap = Q::min_of(d.item(i).tail(p.prices()[i]), budget.clone());
                    let frac = ratio(rng.random_range(0..=8), 8);
                    let q = cap * frac;
                    budget -= q.clone();
                    obj += p.price::<Q>(i) * q;
                }
                prop_assert!(obj <= best);
            }
        }
    }
}
