//! Discrete value distributions on a rational lattice in `[0, 1]`.
//!
//! A value is stored as a lattice numerator `k` with the lattice size `L`
//! shared by the whole distribution, so `k` stands for `k / L`. Masses are
//! kept in the scalar type `T`; with [`BigRational`](num_rational::BigRational)
//! every CDF, distance and revenue is an exact rational.

use std::collections::BTreeMap;

use num_rational::Ratio;
use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::{complement, Scalar};

/// Single-item value distribution with strictly positive point masses.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteDist<T> {
    lattice: u64,
    support: Vec<u64>,
    masses: Vec<T>,
}

impl<T: Scalar> DiscreteDist<T> {
    /// Builds a distribution from parallel support/mass lists.
    ///
    /// The support may come in any order; it is sorted and zero masses are
    /// dropped. Masses must total one (exactly for rational scalars).
    pub fn new(lattice: u64, support: Vec<u64>, masses: Vec<T>) -> Result<Self> {
        if lattice == 0 {
            return Err(Error::InvalidParameter("lattice must be positive".into()));
        }
        if support.len() != masses.len() {
            return Err(Error::LengthMismatch {
                support: support.len(),
                masses: masses.len(),
            });
        }
        if support.is_empty() {
            return Err(Error::Empty("support"));
        }
        let mut pairs: Vec<(u64, T)> = support.into_iter().zip(masses).collect();
        pairs.sort_by_key(|(v, _)| *v);
        let mut total = T::zero();
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::DuplicateSupport(w[0].0));
            }
        }
        for (v, m) in &pairs {
            if *v > lattice {
                return Err(Error::OutOfRange {
                    value: *v,
                    lattice,
                });
            }
            if *m < T::zero() {
                return Err(Error::NegativeMass(m.to_string()));
            }
            total = total + m.clone();
        }
        let off = (total.to_f64() - 1.0).abs();
        let ok = if T::EXACT {
            total.is_one()
        } else {
            off <= T::SUM_TOLERANCE
        };
        if !ok {
            return Err(Error::MassTotal(total.to_string()));
        }
        let (support, masses) = pairs.into_iter().filter(|(_, m)| !m.is_zero()).unzip();
        Ok(Self {
            lattice,
            support,
            masses,
        })
    }

    pub fn point_mass(lattice: u64, value: u64) -> Result<Self> {
        Self::new(lattice, vec![value], vec![T::one()])
    }

    /// Uniform distribution on every lattice point `0..=lattice`.
    pub fn uniform_grid(lattice: u64) -> Result<Self> {
        let m = T::from_ratio(1, lattice + 1);
        Self::new(lattice, (0..=lattice).collect(), vec![m; lattice as usize + 1])
    }

    /// Distribution whose CDF at lattice point `points[i]` is `cdf[i]`.
    ///
    /// `points` must be increasing and end at `lattice`; the CDF is taken to be
    /// constant between consecutive points.
    pub fn from_cdf_points(lattice: u64, points: &[u64], cdf: &[T]) -> Result<Self> {
        if points.len() != cdf.len() {
            return Err(Error::LengthMismatch {
                support: points.len(),
                masses: cdf.len(),
            });
        }
        let mut prev = T::zero();
        let mut masses = Vec::with_capacity(cdf.len());
        for c in cdf {
            masses.push(c.clone() - prev);
            prev = c.clone();
        }
        Self::new(lattice, points.to_vec(), masses)
    }

    /// Uniform distribution over a multiset of lattice values, with masses
    /// `count / N`.
    pub fn empirical(lattice: u64, values: &[u64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("sample values"));
        }
        let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
        for &v in values {
            *counts.entry(v).or_default() += 1;
        }
        Self::from_counts(lattice, &counts, values.len() as u64)
    }

    /// Empirical distribution from value counts that sum to `total`.
    pub fn from_counts(lattice: u64, counts: &BTreeMap<u64, u64>, total: u64) -> Result<Self> {
        if total == 0 {
            return Err(Error::Empty("sample values"));
        }
        let support = counts.keys().copied().collect();
        let masses = counts.values().map(|&c| T::from_ratio(c, total)).collect();
        Self::new(lattice, support, masses)
    }

    pub fn lattice(&self) -> u64 {
        self.lattice
    }

    pub fn support(&self) -> &[u64] {
        &self.support
    }

    pub fn masses(&self) -> &[T] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &T)> + '_ {
        self.support.iter().copied().zip(self.masses.iter())
    }

    pub fn max_value(&self) -> u64 {
        *self.support.last().expect("nonempty support")
    }

    /// `Pr[X = v]`.
    pub fn mass_at(&self, v: u64) -> T {
        match self.support.binary_search(&v) {
            Ok(i) => self.masses[i].clone(),
            Err(_) => T::zero(),
        }
    }

    /// `Pr[X <= v]`. Arguments beyond the lattice are allowed and give 1.
    pub fn cdf(&self, v: u64) -> T {
        let upto = self.support.partition_point(|&s| s <= v);
        self.prefix(upto)
    }

    /// `Pr[X < v]`.
    pub fn cdf_left(&self, v: u64) -> T {
        let upto = self.support.partition_point(|&s| s < v);
        self.prefix(upto)
    }

    /// `Pr[X >= v]`, the sale probability at posted price `v`.
    pub fn tail(&self, v: u64) -> T {
        let from = self.support.partition_point(|&s| s < v);
        self.masses[from..]
            .iter()
            .fold(T::zero(), |acc, m| acc + m.clone())
    }

    fn prefix(&self, upto: usize) -> T {
        if upto == self.support.len() {
            return T::one();
        }
        self.masses[..upto]
            .iter()
            .fold(T::zero(), |acc, m| acc + m.clone())
    }

    /// CDF evaluated at each support point, in support order.
    pub fn cdf_at_support(&self) -> Vec<T> {
        let mut acc = T::zero();
        let mut out = Vec::with_capacity(self.len());
        for (i, m) in self.masses.iter().enumerate() {
            acc = if i + 1 == self.len() {
                T::one()
            } else {
                acc + m.clone()
            };
            out.push(acc.clone());
        }
        out
    }

    /// Draws one value. Inversion against the `f64` cumulative masses.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (v, m) in self.iter() {
            acc += m.to_f64();
            if u < acc {
                return v;
            }
        }
        self.max_value()
    }

    /// Precomputed sampler for repeated draws.
    pub fn sampler(&self) -> Sampler {
        Sampler::new(self)
    }

    /// Re-expresses the distribution on a finer lattice `new_lattice`, which
    /// must be a multiple of the current one.
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
            support: self.support.iter().map(|v| v * f).collect(),
            masses: self.masses.clone(),
        })
    }

    /// Rounds every value down to the nearest multiple of `eps^2`, merging
    /// masses that land on the same grid point. The lattice is unchanged.
    pub fn discretize(&self, eps: Ratio<u64>) -> Result<Self> {
        let step = grid_step(self.lattice, eps)?;
        let mut merged: BTreeMap<u64, T> = BTreeMap::new();
        for (v, m) in self.iter() {
            let g = v / step * step;
            let slot = merged.entry(g).or_insert_with(T::zero);
            *slot = slot.clone() + m.clone();
        }
        let (support, masses) = merged.into_iter().unzip();
        Ok(Self {
            lattice: self.lattice,
            support,
            masses,
        })
    }

    /// Upward-shifted companion whose CDF is
    /// `min{1, F(v) + sqrt(F(v)(1 - F(v)) * 2 gamma) + gamma}`.
    ///
    /// The shifted CDF only changes where `F` changes, so it is evaluated at 0
    /// and at the support points. A running maximum keeps it monotone where the
    /// square-root term bends downwards near `F = 1`.
    pub fn breve_shift(&self, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "gamma must lie in (0, 1), got {gamma}"
            )));
        }
        let mut points: Vec<u64> = Vec::with_capacity(self.len() + 2);
        if self.support[0] != 0 {
            points.push(0);
        }
        points.extend_from_slice(&self.support);
        if *points.last().unwrap() != self.lattice {
            points.push(self.lattice);
        }
        let mut running = 0.0f64;
        let cdf: Vec<T> = points
            .iter()
            .map(|&v| {
                if v >= self.max_value() {
                    return T::one();
                }
                let f = self.cdf(v).to_f64();
                let g = (f + (f * (1.0 - f) * 2.0 * gamma).sqrt() + gamma).min(1.0);
                running = running.max(g);
                T::from_f64(running)
            })
            .collect();
        Self::from_cdf_points(self.lattice, &points, &cdf)
    }

    /// Converts masses into another scalar type.
    pub fn convert<U: Scalar>(&self) -> DiscreteDist<U> {
        DiscreteDist {
            lattice: self.lattice,
            support: self.support.clone(),
            masses: self
                .masses
                .iter()
                .map(|m| U::from_big_ratio(&m.to_big_ratio()))
                .collect(),
        }
    }
}

/// Width of one `eps^2` cell in lattice units.
pub fn grid_step(lattice: u64, eps: Ratio<u64>) -> Result<u64> {
    let (a, b) = (*eps.numer(), *eps.denom());
    if a == 0 || a >= b {
        return Err(Error::InvalidParameter(format!("eps must lie in (0, 1), got {eps}")));
    }
    let num = lattice as u128 * (a as u128 * a as u128);
    let den = b as u128 * b as u128;
    if !num.is_multiple_of(den) {
        return Err(Error::IncompatibleLattice {
            lattice,
            what: format!("multiples of eps^2 = ({eps})^2"),
        });
    }
    Ok((num / den) as u64)
}

/// Inverse-CDF sampler over `f64` cumulative masses.
#[derive(Clone, Debug)]
pub struct Sampler {
    support: Vec<u64>,
    cumulative: Vec<f64>,
}

impl Sampler {
    pub fn new<T: Scalar>(d: &DiscreteDist<T>) -> Self {
        let mut acc = 0.0;
        let cumulative = d
            .masses()
            .iter()
            .map(|m| {
                acc += m.to_f64();
                acc
            })
            .collect();
        Self {
            support: d.support().to_vec(),
            cumulative,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u: f64 = rng.random();
        let i = self.cumulative.partition_point(|&c| c <= u);
        self.support[i.min(self.support.len() - 1)]
    }

    /// Probability masses as `f64`, in support order.
    pub fn probabilities(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.cumulative
            .iter()
            .map(|&c| {
                let p = c - prev;
                prev = c;
                p
            })
            .collect()
    }

    pub fn support(&self) -> &[u64] {
        &self.support
    }
}

/// Independent product of single-item distributions on one lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductDist<T> {
    lattice: u64,
    items: Vec<DiscreteDist<T>>,
}

impl<T: Scalar> ProductDist<T> {
    pub fn new(items: Vec<DiscreteDist<T>>) -> Result<Self> {
        let first = items.first().ok_or(Error::Empty("items"))?;
        let lattice = first.lattice();
        if let Some(bad) = items.iter().find(|d| d.lattice() != lattice) {
            return Err(Error::LatticeMismatch(lattice, bad.lattice()));
        }
        Ok(Self { lattice, items })
    }

    /// Builds a product after lifting every item to the least common lattice.
    pub fn aligned(items: Vec<DiscreteDist<T>>) -> Result<Self> {
        let lattice = items
            .iter()
            .map(|d| d.lattice())
            .fold(1u64, num_integer::lcm);
        let items = items
            .iter()
            .map(|d| d.with_lattice(lattice))
            .collect::<Result<Vec<_>>>()?;
        Self::new(items)
    }

    pub fn iid(item: DiscreteDist<T>, n: usize) -> Result<Self> {
        Self::new(vec![item; n])
    }

    pub fn lattice(&self) -> u64 {
        self.lattice
    }

    pub fn n(&self) -> usize {
        self.items.len()
    }

    pub fn items(&self) -> &[DiscreteDist<T>] {
        &self.items
    }

    pub fn item(&self, i: usize) -> &DiscreteDist<T> {
        &self.items[i]
    }

    pub fn into_items(self) -> Vec<DiscreteDist<T>> {
        self.items
    }

    pub fn with_lattice(&self, new_lattice: u64) -> Result<Self> {
        let items = self
            .items
            .iter()
            .map(|d| d.with_lattice(new_lattice))
            .collect::<Result<_>>()?;
        Ok(Self {
            lattice: new_lattice,
            items,
        })
    }

    pub fn discretize(&self, eps: Ratio<u64>) -> Result<Self> {
        let items = self
            .items
            .iter()
            .map(|d| d.discretize(eps))
            .collect::<Result<_>>()?;
        Ok(Self {
            lattice: self.lattice,
            items,
        })
    }

    /// Size of the joint support.
    pub fn joint_support_size(&self) -> u128 {
        self.items.iter().map(|d| d.len() as u128).product()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<u64> {
        self.items.iter().map(|d| d.sample(rng)).collect()
    }

    pub fn convert<U: Scalar>(&self) -> ProductDist<U> {
        ProductDist {
            lattice: self.lattice,
            items: self.items.iter().map(|d| d.convert()).collect(),
        }
    }
}

fn same_lattice<T: Scalar>(d: &DiscreteDist<T>, e: &DiscreteDist<T>) -> Result<()> {
    if d.lattice() != e.lattice() {
        return Err(Error::LatticeMismatch(d.lattice(), e.lattice()));
    }
    Ok(())
}

/// Union of both supports, ascending.
fn union_support<T: Scalar>(d: &DiscreteDist<T>, e: &DiscreteDist<T>) -> Vec<u64> {
    let mut pts: Vec<u64> = d.support().iter().chain(e.support()).copied().collect();
    pts.sort_unstable();
    pts.dedup();
    pts
}

/// `sup_v |F_D(v) - F_E(v)|`, attained at a support point of either side.
pub fn kolmogorov<T: Scalar>(d: &DiscreteDist<T>, e: &DiscreteDist<T>) -> Result<T> {
    same_lattice(d, e)?;
    Ok(union_support(d, e)
        .into_iter()
        .map(|v| d.cdf(v).abs_diff(&e.cdf(v)))
        .fold(T::zero(), T::max_of))
}

/// Total variation distance, half the L1 distance of the mass functions.
pub fn tv_distance<T: Scalar>(d: &DiscreteDist<T>, e: &DiscreteDist<T>) -> Result<T> {
    same_lattice(d, e)?;
    let l1 = union_support(d, e)
        .into_iter()
        .map(|v| d.mass_at(v).abs_diff(&e.mass_at(v)))
        .fold(T::zero(), |a, b| a + b);
    Ok(l1 / T::from_ratio(2, 1))
}

/// Squared Hellinger distance `1/2 * sum (sqrt p - sqrt q)^2`, in `f64`.
///
/// Accurate to about `1e-12` for distributions with moderate support.
pub fn hellinger_sq<T: Scalar>(d: &DiscreteDist<T>, e: &DiscreteDist<T>) -> Result<f64> {
    same_lattice(d, e)?;
    let s: f64 = union_support(d, e)
        .into_iter()
        .map(|v| {
            let diff = d.mass_at(v).to_f64().sqrt() - e.mass_at(v).to_f64().sqrt();
            diff * diff
        })
        .sum();
    Ok((0.5 * s).clamp(0.0, 1.0))
}

/// Squared Hellinger distance between two product measures given their
/// coordinate pairs: `1 - prod_i (1 - H^2(P_i, Q_i))`.
pub fn hellinger_sq_product<T: Scalar>(
    pairs: &[(DiscreteDist<T>, DiscreteDist<T>)],
) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::Empty("distribution pairs"));
    }
    let mut affinity = 1.0;
    for (p, q) in pairs {
        affinity *= 1.0 - hellinger_sq(p, q)?;
    }
    Ok((1.0 - affinity).clamp(0.0, 1.0))
}

/// First-order stochastic dominance: `F_D(v) <= F_E(v)` at every lattice point.
pub fn dominates<T: Scalar>(d: &DiscreteDist<T>, e: &DiscreteDist<T>) -> Result<bool> {
    same_lattice(d, e)?;
    Ok(union_support(d, e).into_iter().all(|v| d.cdf(v) <= e.cdf(v)))
}

/// `1 - F(v)`, the quantile at `v`.
pub fn quantile<T: Scalar>(d: &DiscreteDist<T>, v: u64) -> T {
    complement(&d.cdf(v))
}
