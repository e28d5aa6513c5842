//! Price optimization over a finite grid of candidate prices.

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use crate::dist::{grid_step, ProductDist};
use crate::error::{invalid, Error, Result};
use crate::revenue::{exante_rev, rev, PriceVector};
use crate::rng::TrialRng;
use crate::scalar::Scalar;

/// Sorted, deduplicated candidate prices on one lattice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PriceGrid {
    lattice: u64,
    prices: Vec<u64>,
}

impl PriceGrid {
    pub fn new(lattice: u64, mut prices: Vec<u64>) -> Result<Self> {
        prices.sort_unstable();
        prices.dedup();
        if prices.is_empty() {
            return Err(Error::Empty("price grid"));
        }
        PriceVector::new(lattice, prices.clone())?;
        Ok(Self { lattice, prices })
    }

    /// Every multiple of `step` lattice units in `[0, 1]`.
    pub fn multiples(lattice: u64, step: u64) -> Result<Self> {
        if step == 0 {
            return Err(invalid("grid step must be positive"));
        }
        Self::new(lattice, (0..=lattice).step_by(step as usize).collect())
    }

    /// All multiples of `eps^2`, the default grid for discretized instances.
    pub fn eps_squared(lattice: u64, eps: Ratio<u64>) -> Result<Self> {
        Self::multiples(lattice, grid_step(lattice, eps)?)
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

    pub fn with_lattice(&self, new_lattice: u64) -> Result<Self> {
        let v = PriceVector::new(self.lattice, self.prices.clone())?.with_lattice(new_lattice)?;
        Self::new(new_lattice, v.prices().to_vec())
    }

    fn search_space(&self, n: usize) -> u128 {
        (self.len() as u128).saturating_pow(n as u32)
    }

    /// Grid vector number `index` in lexicographic order.
    fn decode(&self, n: usize, mut index: u128) -> Vec<u64> {
        let base = self.len() as u128;
        let mut out = vec![0u64; n];
        for slot in out.iter_mut().rev() {
            *slot = self.prices[(index % base) as usize];
            index /= base;
        }
        out
    }

    fn check<T: Scalar>(&self, d: &ProductDist<T>) -> Result<()> {
        if d.lattice() != self.lattice {
            return Err(Error::LatticeMismatch(d.lattice(), self.lattice));
        }
        Ok(())
    }
}

/// Largest number of grid vectors the exhaustive searches will visit.
pub const SEARCH_LIMIT: u128 = 10_000_000;

/// Keeps the higher revenue; on equal revenue keeps the smaller key.
fn better<T: Scalar, K: Ord>(a: (T, K), b: (T, K)) -> (T, K) {
    if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}

fn exhaustive<T, F>(d: &ProductDist<T>, grid: &PriceGrid, objective: F) -> Result<(PriceVector, T)>
where
    T: Scalar,
    F: Fn(&ProductDist<T>, &PriceVector) -> Result<T> + Sync,
{
    grid.check(d)?;
    let n = d.n();
    let size = grid.search_space(n);
    if size > SEARCH_LIMIT {
        return Err(Error::SearchSpaceTooLarge(size, SEARCH_LIMIT));
    }
    let (best, index) = (0..size as u64)
        .into_par_iter()
        .map(|i| -> Result<(T, u64)> {
            let p = PriceVector::new(grid.lattice, grid.decode(n, i as u128))?;
            Ok((objective(d, &p)?, i))
        })
        .try_reduce_with(|a, b| Ok(better(a, b)))
        .expect("grid is nonempty")?;
    let p = PriceVector::new(grid.lattice, grid.decode(n, index as u128))?;
    Ok((p, best))
}

/// Revenue-maximizing grid vector with its exact revenue. Among maximizers the
/// lexicographically smallest vector is returned.
pub fn optimal_bruteforce<T: Scalar>(
    d: &ProductDist<T>,
    grid: &PriceGrid,
) -> Result<(PriceVector, T)> {
    exhaustive(d, grid, rev)
}

/// Exact revenue on `n` i.i.d. copies of the three-point base distribution
/// `{0: 1 - 1.5/n, 1/2: 1/n, 1: 0.5/n}` when the first `half_count` items are
/// priced at 1/2 and the rest at 1.
///
/// Revenue is 1 when some full-price item has value 1 and no half-price item
/// does, and 0 when nobody buys:
/// `P1 = a^k - a^n`, `P0 = a^(n-k) * b^k` with `a = 1 - 0.5/n`, `b = 1 - 1.5/n`.
pub fn two_price_revenue_count<T: Scalar>(n: u64, half_count: u64) -> Result<T> {
    if n < 2 || half_count > n {
        return Err(invalid(format!(
            "need n >= 2 and 0 <= k <= n, got n = {n}, k = {half_count}"
        )));
    }
    let a = T::from_ratio(2 * n - 1, 2 * n);
    let b = T::from_ratio(2 * n - 3, 2 * n);
    let pw = |x: &T, e: u64| (0..e).fold(T::one(), |acc, _| acc * x.clone());
    let a_k = pw(&a, half_count);
    let a_rest = pw(&a, n - half_count);
    let b_k = pw(&b, half_count);
    Ok(two_price_from_powers(a_k.clone(), a_k * a_rest.clone(), a_rest * b_k))
}

fn two_price_from_powers<T: Scalar>(a_k: T, a_n: T, p0: T) -> T {
    let p1 = a_k - a_n;
    let half = T::from_ratio(1, 2);
    p1.clone() + half * (T::one() - p1 - p0)
}

/// [`two_price_revenue_count`] with the half-price share given as a fraction
/// `q`; `q * n` must be an integer.
pub fn two_price_revenue<T: Scalar>(n: u64, q: Ratio<u64>) -> Result<T> {
    let k = q * Ratio::from_integer(n);
    if !k.is_integer() || q > Ratio::from_integer(1) {
        return Err(invalid(format!("q * n must be an integer in [0, n], got {q} * {n}")));
    }
    two_price_revenue_count(n, k.to_integer())
}

/// Best half-price share `q` in `{0, 1/n, ..., 1}` for the base instance, with
/// its exact revenue. The smallest maximizer wins ties.
pub fn optimal_two_price(n: u64) -> Result<(Ratio<u64>, BigRational)> {
    let (k, r) = optimal_two_price_count(n)?;
    Ok((Ratio::new(k, n), r))
}

/// Like [`optimal_two_price`] but returns the number of half-price items.
pub fn optimal_two_price_count(n: u64) -> Result<(u64, BigRational)> {
    if n < 2 {
        return Err(invalid(format!("need n >= 2, got {n}")));
    }
    // Over the common denominator D^n with D = 2n, twice the revenue is
    // `D^n - A^n + A^k D^(n-k) - A^(n-k) B^k` where A = 2n - 1 and B = 2n - 3, so
    // the argmax needs integer arithmetic only.
    let powers = |x: u64| {
        let mut out = Vec::with_capacity(n as usize + 1);
        out.push(BigInt::from(1u8));
        for j in 0..n as usize {
            out.push(&out[j] * x);
        }
        out
    };
    let pa = powers(2 * n - 1);
    let pb = powers(2 * n - 3);
    let pd = powers(2 * n);
    let n_us = n as usize;
    let (score, k) = (0..=n_us)
        .into_par_iter()
        .map(|k| (&pa[k] * &pd[n_us - k] - &pa[n_us - k] * &pb[k], k as u64))
        .reduce_with(|x, y| if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) { y } else { x })
        .expect("nonempty range");
    let denom = &pd[n_us] * 2u8;
    let best = (BigRational::new(&pd[n_us] - &pa[n_us] + score, denom), k);
    Ok((best.1, best.0))
}

/// Local search from `starts` random grid vectors, re-optimizing one
/// coordinate at a time by an exact scan until a full pass changes nothing.
/// Returns the best local optimum (lexicographically smallest on ties).
pub fn coordinate_ascent<T: Scalar, R: Rng + ?Sized>(
    d: &ProductDist<T>,
    grid: &PriceGrid,
    starts: usize,
    rng: &mut R,
) -> Result<(PriceVector, T)> {
    grid.check(d)?;
    if starts == 0 {
        return Err(invalid("starts must be at least 1"));
    }
    let seeds: Vec<u64> = (0..starts).map(|_| rng.next_u64()).collect();
    let (best, prices) = seeds
        .into_par_iter()
        .map(|seed| {
            let mut local = TrialRng::seed_from_u64(seed);
            let init: Vec<u64> = (0..d.n())
                .map(|_| *grid.prices().choose(&mut local).expect("nonempty grid"))
                .collect();
            ascend(d, grid, init)
        })
        .try_reduce_with(|a, b| Ok(better(a, b)))
        .expect("starts >= 1")?;
    Ok((PriceVector::new(grid.lattice, prices)?, best))
}

fn ascend<T: Scalar>(d: &ProductDist<T>, grid: &PriceGrid, init: Vec<u64>) -> Result<(T, Vec<u64>)> {
    let mut current = init;
    let mut value = rev(d, &PriceVector::new(grid.lattice, current.clone())?)?;
    loop {
        let mut changed = false;
        for i in 0..current.len() {
            let mut trial = current.clone();
            for &g in grid.prices() {
                if g == current[i] {
                    continue;
                }
                trial[i] = g;
                let r = rev(d, &PriceVector::new(grid.lattice, trial.clone())?)?;
                if r > value {
                    value = r;
                    current[i] = g;
                    changed = true;
                }
            }
        }
        if !changed {
            return Ok((value, current));
        }
    }
}

/// Maximizer of the ex-ante relaxation over grid vectors.
///
/// When each item's own best posted price leaves the unit-demand budget slack
/// (their sale probabilities sum to at most 1), those prices are optimal and
/// no search is needed. Ties among an item's best prices go to the highest
/// price, which has the smallest sale probability. Otherwise every grid vector
/// is scored.
pub fn exante_optimal<T: Scalar>(
    d: &ProductDist<T>,
    grid: &PriceGrid,
) -> Result<(PriceVector, T)> {
    grid.check(d)?;
    let mut prices = Vec::with_capacity(d.n());
    let mut sold = T::zero();
    let mut total = T::zero();
    for item in d.items() {
        let (best, price) = grid
            .prices()
            .iter()
            .map(|&g| {
                let r = T::from_ratio(g, grid.lattice) * item.tail(g);
                (r, std::cmp::Reverse(g))
            })
            .reduce(better)
            .expect("nonempty grid");
        sold = sold + item.tail(price.0);
        total = total + best;
        prices.push(price.0);
    }
    if sold <= T::one() {
        return Ok((PriceVector::new(grid.lattice, prices)?, total));
    }
    exhaustive(d, grid, exante_rev)
}

/// Anything that maps an instance to a price vector and its claimed revenue.
pub trait PriceOptimizer<T: Scalar>: Sync {
    fn optimize(&self, d: &ProductDist<T>) -> Result<(PriceVector, T)>;
}

impl<T: Scalar, F> PriceOptimizer<T> for F
where
    F: Fn(&ProductDist<T>) -> Result<(PriceVector, T)> + Sync,
{
    fn optimize(&self, d: &ProductDist<T>) -> Result<(PriceVector, T)> {
        self(d)
    }
}

/// Exhaustive search over a fixed grid.
#[derive(Clone, Debug)]
pub struct GridSearch {
    pub grid: PriceGrid,
}

impl<T: Scalar> PriceOptimizer<T> for GridSearch {
    fn optimize(&self, d: &ProductDist<T>) -> Result<(PriceVector, T)> {
        optimal_bruteforce(d, &self.grid)
    }
}

/// Seeded coordinate ascent over a fixed grid.
#[derive(Clone, Debug)]
pub struct CoordinateSearch {
    pub grid: PriceGrid,
    pub starts: usize,
    pub seed: u64,
}

impl<T: Scalar> PriceOptimizer<T> for CoordinateSearch {
    fn optimize(&self, d: &ProductDist<T>) -> Result<(PriceVector, T)> {
        let mut rng = TrialRng::seed_from_u64(self.seed);
        coordinate_ascent(d, &self.grid, self.starts, &mut rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::DiscreteDist;
    use crate::scalar::ratio;
    use proptest::prelude::*;

    type Q = BigRational;

    fn base(n: u64) -> DiscreteDist<Q> {
        DiscreteDist::new(
            2,
            vec![0, 1, 2],
            vec![ratio(2 * n - 3, 2 * n), ratio(1, n), ratio(1, 2 * n)],
        )
        .unwrap()
    }

    fn arb_product(lattice: u64, max_n: usize) -> impl Strategy<Value = ProductDist<Q>> {
        let item = prop::collection::btree_map(0..=lattice, 1u64..9, 1..4).prop_map(move |m| {
            let total: u64 = m.values().sum();
            let (s, w): (Vec<u64>, Vec<u64>) = m.into_iter().unzip();
            DiscreteDist::new(lattice, s, w.into_iter().map(|c| ratio(c, total)).collect())
                .unwrap()
        });
        prop::collection::vec(item, 1..=max_n).prop_map(|items| ProductDist::new(items).unwrap())
    }

    #[test]
    fn two_item_example_optimum() {
        let a = DiscreteDist::<Q>::point_mass(2, 1).unwrap();
        let b = DiscreteDist::new(2, vec![0, 2], vec![ratio(1, 2), ratio(1, 2)]).unwrap();
        let d = ProductDist::new(vec![a, b]).unwrap();
        let grid = PriceGrid::new(2, vec![1, 2]).unwrap();
        let (p, r) = optimal_bruteforce(&d, &grid).unwrap();
        assert_eq!(p.prices(), &[1, 2]);
        assert_eq!(r, ratio(3, 4));
    }

    #[test]
    fn single_item_monopoly_price() {
        let d = ProductDist::new(vec![DiscreteDist::<Q>::point_mass(8, 5).unwrap()]).unwrap();
        let grid = PriceGrid::multiples(8, 1).unwrap();
        let (p, r) = optimal_bruteforce(&d, &grid).unwrap();
        assert_eq!((p.prices()[0], r.clone()), (5, ratio(5, 8)));
        let mut rng = TrialRng::seed_from_u64(0);
        let (p, _) = coordinate_ascent(&d, &grid, 1, &mut rng).unwrap();
        assert_eq!(p.prices()[0], 5);
    }

    #[test]
    fn search_space_limit() {
        let d = ProductDist::iid(DiscreteDist::<f64>::point_mass(100, 1).unwrap(), 4).unwrap();
        let grid = PriceGrid::multiples(100, 1).unwrap();
        assert!(matches!(
            optimal_bruteforce(&d, &grid),
            Err(Error::SearchSpaceTooLarge(..))
        ));
    }

    #[test]
    fn two_price_edges() {
        for n in [2u64, 5, 9] {
            let a = ratio(2 * n - 1, 2 * n);
            let none_top = (0..n).fold(ratio(1, 1), |acc, _| acc * a.clone());
            assert_eq!(
                two_price_revenue::<Q>(n, Ratio::new(0, 1)).unwrap(),
                ratio(1, 1) - none_top
            );
        }
        assert!(two_price_revenue::<Q>(4, Ratio::new(1, 3)).is_err());
    }

    #[test]
    fn two_price_matches_exact_revenue() {
        for n in 2..=12u64 {
            let d = ProductDist::iid(base(n), n as usize).unwrap();
            for k in 0..=n {
                let prices = (0..n).map(|i| if i < k { 1 } else { 2 }).collect();
                let p = PriceVector::new(2, prices).unwrap();
                assert_eq!(
                    two_price_revenue_count::<Q>(n, k).unwrap(),
                    rev(&d, &p).unwrap(),
                    "n={n} k={k}"
                );
            }
        }
    }

    #[test]
    fn two_price_argmax_small_n() {
        let (q, r) = optimal_two_price(2).unwrap();
        for k in 0..=2 {
            assert!(r >= two_price_revenue_count::<Q>(2, k).unwrap());
        }
        assert_eq!(r, two_price_revenue::<Q>(2, q).unwrap());
        let (k, _) = optimal_two_price_count(8).unwrap();
        assert_eq!(k, 4);
        let (k, _) = optimal_two_price_count(12).unwrap();
        assert_eq!(k, 5);
    }

    #[test]
    fn exante_single_item_and_equal_revenue() {
        let d = ProductDist::new(vec![DiscreteDist::<Q>::point_mass(1, 1).unwrap()]).unwrap();
        let (p, r) = exante_optimal(&d, &PriceGrid::multiples(1, 1).unwrap()).unwrap();
        assert_eq!((p.prices(), r), (&[1u64][..], ratio(1, 1)));
    }

    #[test]
    fn exante_coupled_case_uses_search() {
        // Both items sell surely at their monopoly price 1, so the budget binds.
        let d = ProductDist::iid(DiscreteDist::<Q>::point_mass(2, 2).unwrap(), 2).unwrap();
        let grid = PriceGrid::new(2, vec![1, 2]).unwrap();
        let (p, r) = exante_optimal(&d, &grid).unwrap();
        assert_eq!(r, ratio(1, 1));
        assert_eq!(exante_rev(&d, &p).unwrap(), r);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(60))]

        #[test]
        fn bruteforce_matches_independent_scan(d in arb_product(4, 3)) {
            let grid = PriceGrid::multiples(4, 1).unwrap();
            let (p, best) = optimal_bruteforce(&d, &grid).unwrap();
            prop_assert_eq!(rev(&d, &p).unwrap(), best.clone());
            let n = d.n();
            let mut first_max: Option<(Q, Vec<u64>)> = None;
            for code in 0..5u64.pow(n as u32) {
                let v: Vec<u64> = (0..n).rev().map(|j| code / 5u64.pow(j as u32) % 5).collect();
                let r = crate::revenue::rev_bruteforce(&d, &PriceVector::new(4, v.clone()).unwrap()).unwrap();
                if first_max.as_ref().is_none_or(|(b, _)| r > *b) {
                    first_max = Some((r, v));
                }
            }
            let (r, v) = first_max.unwrap();
            prop_assert_eq!(r, best);
            prop_assert_eq!(v, p.prices().to_vec());
        }

        #[test]
        fn ascent_never_beats_optimum_and_improves_with_starts(d in arb_product(4, 3), seed in any::<u64>()) {
            let grid = PriceGrid::multiples(4, 1).unwrap();
            let (_, best) = optimal_bruteforce(&d, &grid).unwrap();
            let one = coordinate_ascent(&d, &grid, 1, &mut TrialRng::seed_from_u64(seed)).unwrap().1;
            let many = coordinate_ascent(&d, &grid, 8, &mut TrialRng::seed_from_u64(seed)).unwrap().1;
            prop_assert!(one <= many);
            prop_assert!(many <= best);
        }
    }
}
