//! Generators for the lower-bound instances, the non-monotonicity example and
//! random test instances.
//!
//! The three-point family lives on lattice 2 (values 0, 1/2, 1). The
//! equal-revenue family for `eps = 1/(4m)` lives on lattice `4m`, where
//! `1/2 + k * eps` is the numerator `2m + k`.

use num_rational::{BigRational, Ratio};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dist::{DiscreteDist, ProductDist};
use crate::error::{invalid, Result};
use crate::optimize::optimal_two_price_count;
use crate::revenue::PriceVector;
use crate::scalar::{ratio, Scalar};

fn big(r: Ratio<u64>) -> BigRational {
    ratio(*r.numer(), *r.denom())
}

fn cast<T: Scalar>(lattice: u64, support: Vec<u64>, masses: Vec<BigRational>) -> Result<DiscreteDist<T>> {
    let d = DiscreteDist::<BigRational>::new(lattice, support, masses)?;
    Ok(d.convert())
}

/// `{0: 1 - 1.5/n, 1/2: 1/n, 1: 0.5/n}` on lattice 2.
pub fn base_g<T: Scalar>(n: u64) -> Result<DiscreteDist<T>> {
    perturbed_gl(n, Ratio::new(0, 1))
}

/// `{0: 1 - 1.5/n, 1/2: (1 + eps)/n, 1: (0.5 - eps)/n}` on lattice 2.
pub fn perturbed_gl<T: Scalar>(n: u64, eps: Ratio<u64>) -> Result<DiscreteDist<T>> {
    if n < 2 {
        return Err(invalid(format!("need n >= 2, got {n}")));
    }
    if eps >= Ratio::new(1, 2) {
        return Err(invalid(format!("perturbation must be below 1/2, got {eps}")));
    }
    let e = big(eps);
    let nn = ratio(n, 1);
    let zero = ratio(1, 1) - ratio(3, 2 * n);
    let half = (ratio(1, 1) + e.clone()) / nn.clone();
    let top = (ratio(1, 2) - e) / nn;
    cast(2, vec![0, 1, 2], vec![zero, half, top])
}

/// One pair of the sample-hard instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HardPair {
    pub first: usize,
    pub second: usize,
    /// Whether `first` carries the perturbed distribution.
    pub first_is_perturbed: bool,
}

impl HardPair {
    pub fn perturbed(&self) -> usize {
        if self.first_is_perturbed {
            self.first
        } else {
            self.second
        }
    }

    pub fn unperturbed(&self) -> usize {
        if self.first_is_perturbed {
            self.second
        } else {
            self.first
        }
    }
}

/// Paired instance on which learning from few samples mislabels pairs.
#[derive(Clone, Debug)]
pub struct SampleHardInstance<T> {
    pub dist: ProductDist<T>,
    pub pairs: Vec<HardPair>,
    pub n: u64,
    pub eps: Ratio<u64>,
    /// Share of items priced at 1/2 by the best two-price vector.
    pub q_star: Ratio<u64>,
}

impl<T: Scalar> SampleHardInstance<T> {
    /// Optimal-structure pricing: the perturbed member of each pair at 1/2,
    /// everything else at 1.
    pub fn correct_prices(&self) -> PriceVector {
        let mut prices = vec![2u64; self.n as usize];
        for pair in &self.pairs {
            prices[pair.perturbed()] = 1;
        }
        PriceVector::new(2, prices).expect("prices on lattice 2")
    }

    /// Number of pairs whose half-price item is not the perturbed one.
    pub fn mispriced_pairs(&self, p: &PriceVector) -> usize {
        self.pairs
            .iter()
            .filter(|pair| {
                let lo = p.prices()[pair.perturbed()];
                let hi = p.prices()[pair.unperturbed()];
                !(2 * lo == p.lattice() && hi == p.lattice())
            })
            .count()
    }
}

/// Builds the paired instance: `k` disjoint pairs `(2j, 2j+1)`, where `k` is
/// the number of half-price items in the best two-price vector for `n`, each
/// oriented by a fair coin. Remaining items get the base distribution.
pub fn make_sample_hard<T: Scalar, R: Rng + ?Sized>(
    n: u64,
    eps: Ratio<u64>,
    rng: &mut R,
) -> Result<SampleHardInstance<T>> {
    let (k, _) = optimal_two_price_count(n)?;
    let count = k.min(n / 2);
    if count == 0 {
        return Err(invalid(format!("n = {n} is too small to form a pair")));
    }
    let g: DiscreteDist<T> = base_g(n)?;
    let gl: DiscreteDist<T> = perturbed_gl(n, eps)?;
    let mut items = vec![g.clone(); n as usize];
    let mut pairs = Vec::with_capacity(count as usize);
    for j in 0..count as usize {
        let first_is_perturbed = rng.random_bool(0.5);
        let pair = HardPair {
            first: 2 * j,
            second: 2 * j + 1,
            first_is_perturbed,
        };
        items[pair.perturbed()] = gl.clone();
        pairs.push(pair);
    }
    Ok(SampleHardInstance {
        dist: ProductDist::new(items)?,
        pairs,
        n,
        eps,
        q_star: Ratio::new(k, n),
    })
}

/// Maximum-likelihood guess of which pair member is perturbed, from value
/// counts `[#0, #1/2, #1]` observed for each member. Returns `true` for
/// "first". Exact likelihood ties are broken by `rng`.
pub fn guess_perturbed_first<R: Rng + ?Sized>(
    first: [u64; 3],
    second: [u64; 3],
    n: u64,
    eps: f64,
    rng: &mut R,
) -> bool {
    let n = n as f64;
    let log_half = ((1.0 + eps) / n).ln() - (1.0 / n).ln();
    let log_top = ((0.5 - eps) / n).ln() - (0.5 / n).ln();
    let d_half = first[1] as f64 - second[1] as f64;
    let d_top = first[2] as f64 - second[2] as f64;
    let llr = d_half * log_half + d_top * log_top;
    if llr.abs() < 1e-12 {
        rng.random_bool(0.5)
    } else {
        llr > 0.0
    }
}

/// `m` with `eps = 1/(4m)`.
pub fn equal_revenue_steps(eps: Ratio<u64>) -> Result<u64> {
    let (a, b) = (*eps.numer(), *eps.denom());
    if a != 1 || b % 4 != 0 || b == 0 {
        return Err(invalid(format!("eps must equal 1/(4m), got {eps}")));
    }
    Ok(b / 4)
}

/// Exact masses of the equal-revenue distribution on `{0} ∪ {1/2 + k eps}`.
fn equal_revenue_masses(n: u64, m: u64) -> (Vec<u64>, Vec<BigRational>) {
    // Pr[X >= (2m + k)/(4m)] = 2m / (n (2m + k))
    let tail = |k: u64| ratio(2 * m, n * (2 * m + k));
    let mut support = vec![0];
    let mut masses = vec![ratio(1, 1) - tail(0)];
    for k in 0..=m {
        support.push(2 * m + k);
        let next = if k == m { ratio(0, 1) } else { tail(k + 1) };
        masses.push(tail(k) - next);
    }
    (support, masses)
}

/// Equal-revenue distribution: posting any price `1/2 + k eps` earns exactly
/// `1/(2n)`. Lattice `4m` for `eps = 1/(4m)`.
pub fn equal_revenue_h<T: Scalar>(n: u64, eps: Ratio<u64>) -> Result<DiscreteDist<T>> {
    if n == 0 {
        return Err(invalid("need n >= 1"));
    }
    let m = equal_revenue_steps(eps)?;
    let (support, masses) = equal_revenue_masses(n, m);
    cast(4 * m, support, masses)
}

/// Candidate prices `1/2 + k eps`, `k = 0..=m`, as lattice numerators.
pub fn equal_revenue_prices(eps: Ratio<u64>) -> Result<Vec<u64>> {
    let m = equal_revenue_steps(eps)?;
    Ok((0..=m).map(|k| 2 * m + k).collect())
}

/// Equal-revenue items, each with the mass at `1/2 + k_i eps` moved up one step.
#[derive(Clone, Debug)]
pub struct QueryHardInstance<T> {
    pub dist: ProductDist<T>,
    pub hidden_k: Vec<u64>,
    pub n: u64,
    pub eps: Ratio<u64>,
}

impl<T: Scalar> QueryHardInstance<T> {
    /// The per-item best prices `1/2 + (k_i + 1) eps`.
    pub fn best_prices(&self) -> PriceVector {
        let m = self.dist.lattice() / 4;
        let prices = self.hidden_k.iter().map(|k| 2 * m + k + 1).collect();
        PriceVector::new(self.dist.lattice(), prices).expect("prices on instance lattice")
    }
}

/// Perturbed equal-revenue item with the step `k` moved to `k + 1`.
pub fn perturbed_h<T: Scalar>(n: u64, eps: Ratio<u64>, k: u64) -> Result<DiscreteDist<T>> {
    let m = equal_revenue_steps(eps)?;
    if k >= m {
        return Err(invalid(format!("k must lie in 0..{m}, got {k}")));
    }
    let (support, mut masses) = equal_revenue_masses(n, m);
    // Index 0 is the mass at value 0; step k sits at index k + 1.
    let moved = std::mem::replace(&mut masses[k as usize + 1], ratio(0, 1));
    masses[k as usize + 2] += moved;
    cast(4 * m, support, masses)
}

/// Draws each `k_i` uniformly from `0..m` and perturbs item `i` accordingly.
pub fn make_query_hard<T: Scalar, R: Rng + ?Sized>(
    n: u64,
    eps: Ratio<u64>,
    rng: &mut R,
) -> Result<QueryHardInstance<T>> {
    let m = equal_revenue_steps(eps)?;
    if n == 0 {
        return Err(invalid("need n >= 1"));
    }
    let hidden_k: Vec<u64> = (0..n).map(|_| rng.random_range(0..m)).collect();
    let items = hidden_k
        .iter()
        .map(|&k| perturbed_h(n, eps, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(QueryHardInstance {
        dist: ProductDist::new(items)?,
        hidden_k,
        n,
        eps,
    })
}

/// Two-item pair showing revenue can drop when one item's values rise:
/// `{A, B}` and `{A', B}` with `A` a point mass at 1/2,
/// `A' = {0.6: 0.1, 0.5: 0.9}` and `B = {1: 0.5, 0: 0.5}`, on lattice 10.
pub fn nonmonotonicity_example<T: Scalar>() -> Result<(ProductDist<T>, ProductDist<T>)> {
    let a = cast(10, vec![5], vec![ratio(1, 1)])?;
    let a_up = cast(10, vec![5, 6], vec![ratio(9, 10), ratio(1, 10)])?;
    let b: DiscreteDist<T> = cast(10, vec![0, 10], vec![ratio(1, 2), ratio(1, 2)])?;
    Ok((
        ProductDist::new(vec![a, b.clone()])?,
        ProductDist::new(vec![a_up, b])?,
    ))
}

/// Random item with up to `max_support` points on `lattice` and integer
/// weights in `1..=9`, normalized.
pub fn random_item<T: Scalar, R: Rng + ?Sized>(
    lattice: u64,
    max_support: usize,
    rng: &mut R,
) -> Result<DiscreteDist<T>> {
    let size = rng.random_range(1..=max_support.max(1)).min(lattice as usize + 1);
    let mut support: Vec<u64> = Vec::with_capacity(size);
    while support.len() < size {
        let v = rng.random_range(0..=lattice);
        if !support.contains(&v) {
            support.push(v);
        }
    }
    let weights: Vec<u64> = (0..size).map(|_| rng.random_range(1..=9)).collect();
    let total: u64 = weights.iter().sum();
    cast(lattice, support, weights.into_iter().map(|w| ratio(w, total)).collect())
}

pub fn random_product<T: Scalar, R: Rng + ?Sized>(
    n: usize,
    lattice: u64,
    max_support: usize,
    rng: &mut R,
) -> Result<ProductDist<T>> {
    if n == 0 {
        return Err(invalid("need n >= 1"));
    }
    let items = (0..n)
        .map(|_| random_item(lattice, max_support, rng))
        .collect::<Result<Vec<_>>>()?;
    ProductDist::new(items)
}

/// Uniformly random price vector on `lattice`.
pub fn random_prices<R: Rng + ?Sized>(n: usize, lattice: u64, rng: &mut R) -> PriceVector {
    let prices = (0..n).map(|_| rng.random_range(0..=lattice)).collect();
    PriceVector::new(lattice, prices).expect("prices within lattice")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{dominates, hellinger_sq};
    use crate::optimize::{exante_optimal, optimal_bruteforce, PriceGrid};
    use crate::revenue::{exante_rev, rev};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    type Q = BigRational;

    #[test]
    fn base_and_perturbed_masses() {
        let g: DiscreteDist<Q> = base_g(10).unwrap();
        assert_eq!(g.masses(), &[ratio(17, 20), ratio(1, 10), ratio(1, 20)]);
        let gl: DiscreteDist<Q> = perturbed_gl(10, Ratio::new(1, 10)).unwrap();
        assert_eq!(gl.masses(), &[ratio(17, 20), ratio(11, 100), ratio(1, 25)]);
        assert_eq!(perturbed_gl::<Q>(10, Ratio::new(0, 1)).unwrap(), g);
        assert_eq!(gl.tail(1), ratio(3, 20));
        assert!(dominates(&g, &gl).unwrap());
        assert!(!dominates(&gl, &g).unwrap());
        assert!(base_g::<Q>(1).is_err());
        assert!(perturbed_gl::<Q>(10, Ratio::new(1, 2)).is_err());
    }

    #[test]
    fn hellinger_between_base_and_perturbed() {
        for (n, e) in [(100u64, (1u64, 10u64)), (8, (1, 10)), (20, (1, 4)), (1000, (1, 100))] {
            let eps = Ratio::new(e.0, e.1);
            let g: DiscreteDist<f64> = base_g(n).unwrap();
            let gl: DiscreteDist<f64> = perturbed_gl(n, eps).unwrap();
            let bound = 3.0 * (e.0 as f64 / e.1 as f64).powi(2) / n as f64;
            assert!(hellinger_sq(&g, &gl).unwrap() <= bound);
        }
    }

    #[test]
    fn sample_hard_orientation_is_fair() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let builds = 1000;
        let mut firsts = 0;
        for _ in 0..builds {
            let inst: SampleHardInstance<Q> = make_sample_hard(8, Ratio::new(1, 10), &mut rng).unwrap();
            assert_eq!(inst.pairs.len(), 4);
            firsts += inst.pairs.iter().filter(|p| p.first_is_perturbed).count();
            let g = base_g::<Q>(8).unwrap();
            let gl = perturbed_gl::<Q>(8, Ratio::new(1, 10)).unwrap();
            assert!(inst.dist.items().iter().all(|d| *d == g || *d == gl));
        }
        let trials = (builds * 4) as f64;
        let sigma = (trials * 0.25).sqrt();
        assert!((firsts as f64 - trials / 2.0).abs() < 5.0 * sigma);
        assert!(make_sample_hard::<Q, _>(2, Ratio::new(1, 10), &mut rng).is_ok());
    }

    #[test]
    fn sample_hard_optimum_prices_perturbed_items_low() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..3 {
            let inst: SampleHardInstance<Q> = make_sample_hard(8, Ratio::new(1, 10), &mut rng).unwrap();
            let grid = PriceGrid::new(2, vec![1, 2]).unwrap();
            let (p, best) = optimal_bruteforce(&inst.dist, &grid).unwrap();
            assert_eq!(p, inst.correct_prices());
            assert_eq!(rev(&inst.dist, &inst.correct_prices()).unwrap(), best);
            assert_eq!(inst.mispriced_pairs(&p), 0);
        }
    }

    #[test]
    fn equal_revenue_properties() {
        for (n, m) in [(4u64, 4u64), (16, 8), (3, 2)] {
            let eps = Ratio::new(1, 4 * m);
            let h: DiscreteDist<Q> = equal_revenue_h(n, eps).unwrap();
            assert_eq!(h.mass_at(3 * m), ratio(2, 3 * n));
            assert_eq!(h.mass_at(0), ratio(n - 1, n));
            for p in equal_revenue_prices(eps).unwrap() {
                assert_eq!(ratio(p, 4 * m) * h.tail(p), ratio(1, 2 * n));
            }
            let e = ratio(1, 4 * m);
            for k in 0..m {
                let mass = h.mass_at(2 * m + k);
                assert!(mass >= e.clone() / ratio(2 * n, 1));
                assert!(mass <= ratio(2, n) * e.clone());
            }
        }
        assert!(equal_revenue_h::<Q>(4, Ratio::new(1, 10)).is_err());
    }

    #[test]
    fn query_hard_instance() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let inst: QueryHardInstance<Q> = make_query_hard(4, Ratio::new(1, 8), &mut rng).unwrap();
        assert!(inst.hidden_k.iter().all(|&k| k < 2));
        let h: DiscreteDist<Q> = equal_revenue_h(4, Ratio::new(1, 8)).unwrap();
        for (item, &k) in inst.dist.items().iter().zip(&inst.hidden_k) {
            let up = 4 + k + 1;
            assert!(item.tail(up) > h.tail(up));
        }
        let grid = PriceGrid::new(8, equal_revenue_prices(Ratio::new(1, 8)).unwrap()).unwrap();
        let (p, _) = exante_optimal(&inst.dist, &grid).unwrap();
        assert_eq!(p, inst.best_prices());
    }

    #[test]
    fn base_equal_revenue_ties_everywhere() {
        let eps = Ratio::new(1, 16);
        let d = ProductDist::iid(equal_revenue_h::<Q>(4, eps).unwrap(), 4).unwrap();
        for p in equal_revenue_prices(eps).unwrap() {
            let pv = PriceVector::uniform(16, p, 4).unwrap();
            assert_eq!(exante_rev(&d, &pv).unwrap(), ratio(1, 2));
        }
    }

    #[test]
    fn nonmonotone_pair() {
        let (ab, ab_up) = nonmonotonicity_example::<Q>().unwrap();
        let p = PriceVector::new(10, vec![5, 10]).unwrap();
        assert_eq!(rev(&ab, &p).unwrap(), ratio(3, 4));
        assert_eq!(rev(&ab_up, &p).unwrap(), ratio(29, 40));
        assert!(dominates(ab_up.item(0), ab.item(0)).unwrap());
        let grid = PriceGrid::multiples(10, 1).unwrap();
        let best = optimal_bruteforce(&ab, &grid).unwrap().1;
        let best_up = optimal_bruteforce(&ab_up, &grid).unwrap().1;
        assert!(best_up < best);
    }

    #[test]
    fn ml_guess_prefers_evidence() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        // More value-1 draws on the second item points at the first being perturbed.
        assert!(guess_perturbed_first([90, 5, 0], [90, 5, 5], 8, 0.1, &mut rng));
        assert!(!guess_perturbed_first([90, 5, 5], [90, 5, 0], 8, 0.1, &mut rng));
        let ties = (0..1000)
            .filter(|_| guess_perturbed_first([1, 0, 0], [1, 0, 0], 8, 0.1, &mut rng))
            .count();
        assert!((400..600).contains(&ties));
    }
}
