//! Zero-mean Gaussian mixtures recovered from their exact moments.
//!
//! For `Y ~ sum_i w_i N(0, Sigma_i)` the degree-`2m` part of the moment
//! generating function gives `m!/(2m)! E[<x, Y>^(2m)] = sum_i w_i Q_i(x)^m`
//! with `Q_i(x) = x^T Sigma_i x / 2`. Learning `f_m` and `f_(m-1)` as sums
//! of powers and matching their terms pins down every `w_i` and `Sigma_i`.

mod learn;
mod table;

pub use learn::{
    learn_mixture, mixture_power_box, MixtureLearnReport, MixtureParams, MomentInput, PrimeAttempt, RecoveredMixture, PRIME_BITS,
    VERIFY_POINTS,
};
pub use table::{MomentEntry, MomentTable};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{format_rational, parse_rational, Field};
use crate::error::{Error, Result};
use crate::multipoly::{Monomial, SparsePoly};

/// Exact moments `E[<x, Y>^r]` at rational points.
pub trait MomentOracle: Send + Sync {
    fn dim(&self) -> usize;
    fn moment(&self, x: &[BigRational], r: usize) -> Result<BigRational>;
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaussianComponent {
    pub weight: BigRational,
    /// Symmetric `n x n` covariance, row-major.
    pub cov: Vec<Vec<BigRational>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaussianMixture {
    pub n: usize,
    pub components: Vec<GaussianComponent>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComponentJson {
    pub weight: String,
    pub cov: Vec<Vec<String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MixtureJson {
    pub n: usize,
    pub components: Vec<ComponentJson>,
}

fn rat(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// `(2j - 1)!! = 1 * 3 * ... * (2j - 1)`.
pub fn double_factorial_odd(j: usize) -> BigUint {
    (1..=j).fold(BigUint::one(), |acc, i| acc * BigUint::from(2 * i - 1))
}

impl GaussianMixture {
    /// Checks shapes, symmetry, positive weights and `sum w_i = 1`.
    pub fn new(n: usize, components: Vec<GaussianComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidInput("a mixture needs at least one component".into()));
        }
        let mut total = BigRational::zero();
        for (i, c) in components.iter().enumerate() {
            if !c.weight.is_positive() {
                return Err(Error::InvalidInput(format!("component {i} has weight {}", c.weight)));
            }
            total += &c.weight;
            if c.cov.len() != n || c.cov.iter().any(|r| r.len() != n) {
                return Err(Error::InvalidInput(format!("component {i} covariance is not {n}x{n}")));
            }
            for a in 0..n {
                for b in 0..a {
                    if c.cov[a][b] != c.cov[b][a] {
                        return Err(Error::InvalidInput(format!("component {i} covariance is not symmetric at ({a}, {b})")));
                    }
                }
            }
        }
        if !total.is_one() {
            return Err(Error::InvalidInput(format!("weights sum to {total}, not 1")));
        }
        Ok(GaussianMixture { n, components })
    }

    pub fn s(&self) -> usize {
        self.components.len()
    }

    /// `x^T Sigma_i x`.
    pub fn quadratic_form(&self, i: usize, x: &[BigRational]) -> BigRational {
        let cov = &self.components[i].cov;
        let mut acc = BigRational::zero();
        for a in 0..self.n {
            let row: BigRational = (0..self.n).map(|b| &cov[a][b] * &x[b]).sum();
            acc += &x[a] * row;
        }
        acc
    }

    /// `Q_i(x) = x^T Sigma_i x / 2` as a polynomial over `field`, or `None`
    /// when a denominator vanishes there.
    pub fn quadratic<F: Field>(&self, field: &F, i: usize) -> Option<SparsePoly<F>> {
        let cov = &self.components[i].cov;
        let mut q = SparsePoly::zero(field, self.n);
        let half = field.inv(&field.from_u64(2))?;
        for a in 0..self.n {
            for b in a..self.n {
                let mut e = vec![0u32; self.n];
                e[a] += 1;
                e[b] += 1;
                let c = field.from_rational(&cov[a][b])?;
                let c = if a == b { field.mul(&c, &half) } else { c };
                q.add_term(Monomial(e), &c);
            }
        }
        Some(q)
    }

    pub fn to_json(&self) -> MixtureJson {
        MixtureJson {
            n: self.n,
            components: self
                .components
                .iter()
                .map(|c| ComponentJson {
                    weight: format_rational(&c.weight),
                    cov: c.cov.iter().map(|r| r.iter().map(format_rational).collect()).collect(),
                })
                .collect(),
        }
    }

    pub fn from_json(j: &MixtureJson) -> Result<Self> {
        let components = j
            .components
            .iter()
            .map(|c| {
                Ok(GaussianComponent {
                    weight: parse_rational(&c.weight)?,
                    cov: c.cov.iter().map(|r| r.iter().map(|x| parse_rational(x)).collect::<Result<Vec<_>>>()).collect::<Result<_>>()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        GaussianMixture::new(j.n, components)
    }

    /// Whether `other` has the same components in some order.
    pub fn same_up_to_order(&self, other: &GaussianMixture) -> bool {
        if self.n != other.n || self.s() != other.s() {
            return false;
        }
        let mut used = vec![false; other.s()];
        self.components.iter().all(|c| match (0..other.s()).find(|&j| !used[j] && other.components[j] == *c) {
            Some(j) => {
                used[j] = true;
                true
            }
            None => false,
        })
    }
}

impl MomentOracle for GaussianMixture {
    fn dim(&self) -> usize {
        self.n
    }

    fn moment(&self, x: &[BigRational], r: usize) -> Result<BigRational> {
        exact_moment(self, x, r)
    }
}

/// `E[<x, Y>^r]`: zero for odd `r`, else `(r - 1)!! sum_i w_i (x^T Sigma_i x)^(r/2)`.
pub fn exact_moment(mix: &GaussianMixture, x: &[BigRational], r: usize) -> Result<BigRational> {
    if x.len() != mix.n {
        return Err(Error::DimensionMismatch(format!("point of length {} for dimension {}", x.len(), mix.n)));
    }
    if r % 2 == 1 {
        return Ok(BigRational::zero());
    }
    let j = r / 2;
    let sum: BigRational = (0..mix.s())
        .map(|i| &mix.components[i].weight * num_traits::pow(mix.quadratic_form(i, x), j))
        .sum();
    Ok(sum * BigRational::from_integer(double_factorial_odd(j).into()))
}

/// Evaluations of `f_m(x) = m!/(2m)! E[<x, Y>^(2m)]` through a moment oracle.
pub struct PowerFromMoments<'a> {
    pub oracle: &'a dyn MomentOracle,
    pub m: usize,
}

impl PowerFromMoments<'_> {
    pub fn eval(&self, x: &[BigRational]) -> Result<BigRational> {
        let factor: BigUint = (self.m + 1..=2 * self.m).fold(BigUint::one(), |a, i| a * BigUint::from(i));
        Ok(self.oracle.moment(x, 2 * self.m)? / BigRational::from_integer(factor.into()))
    }
}

/// `f_m` and `f_(m-1)` as rational evaluators.
pub fn moments_to_power_boxes(oracle: &dyn MomentOracle, m: usize) -> Result<(PowerFromMoments<'_>, PowerFromMoments<'_>)> {
    if m < 2 {
        return Err(Error::InvalidInput(format!("need m >= 2, got {m}")));
    }
    Ok((PowerFromMoments { oracle, m }, PowerFromMoments { oracle, m: m - 1 }))
}

/// `s` components with `Sigma_i = A_i A_i^T`, entries of `A_i` uniform in
/// `-range..=range`, and weights proportional to integers in `1..=9`.
pub fn random_mixture<R: Rng + ?Sized>(n: usize, s: usize, range: i64, rng: &mut R) -> Result<GaussianMixture> {
    if n == 0 || s == 0 || range <= 0 {
        return Err(Error::InvalidInput("need n, s and the entry range positive".into()));
    }
    let raw: Vec<i64> = (0..s).map(|_| rng.gen_range(1..=9)).collect();
    let total: i64 = raw.iter().sum();
    let components = raw
        .iter()
        .map(|&w| {
            let a: Vec<Vec<i64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-range..=range)).collect()).collect();
            let cov = (0..n)
                .map(|r| (0..n).map(|c| rat((0..n).map(|k| a[r][k] * a[c][k]).sum())).collect())
                .collect();
            GaussianComponent { weight: BigRational::new(w.into(), total.into()), cov }
        })
        .collect();
    GaussianMixture::new(n, components)
}

/// A random point with integer entries in `-bound..=bound`.
pub fn random_rational_point<R: Rng + ?Sized>(n: usize, bound: i64, rng: &mut R) -> Vec<BigRational> {
    (0..n).map(|_| rat(rng.gen_range(-bound..=bound))).collect()
}
