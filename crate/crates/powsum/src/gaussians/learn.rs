//! Recovery of a mixture from `f_m` and `f_(m-1)` learned modulo a prime.

use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{exact_moment, GaussianComponent, GaussianMixture, MomentOracle, MomentTable};
use crate::algebra::{format_rational, random_prime, rational_reconstruct, Field, PrimeField, UniPoly};
use crate::blackbox::{BlackBox, Jet, Oracle, PolyBox, PowerSumBox, Provenance};
use crate::error::{Error, Result};
use crate::learner::{learn, LearnedModel, LearnerConfig, ParamMode};
use crate::multipoly::{Monomial, SparsePoly};

/// Prime sizes tried in order; each failed verification doubles the size.
pub const PRIME_BITS: [u64; 4] = [192, 384, 768, 1536];

/// Fresh primes drawn per size when a denominator vanishes modulo the prime.
const PRIME_DRAWS: usize = 8;

/// Fresh rational points used to certify a recovered mixture.
pub const VERIFY_POINTS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixtureParams {
    /// `ceil(260 log s / log n)` before any override.
    pub ell_formula: usize,
    pub ell: usize,
    /// Power learned from the top moment; `f_(m-1)` comes from the next one.
    pub m: usize,
    pub e: usize,
    /// `floor(n^(1/6))` and `floor(n^(1/60))`; the learner picks its own
    /// projection sizes, these are reported for comparison.
    pub n0_formula: usize,
    pub m0_formula: usize,
    pub clamped: bool,
}

impl MixtureParams {
    /// Desk defaults: `ell = 1` and the smallest `m` for which both learner
    /// runs have a usable derivative order (`m - 1 >= 3` once `s >= 2`).
    pub fn new(n: usize, s: usize) -> Self {
        let ell_formula = if s <= 1 || n <= 1 {
            0
        } else {
            (260.0 * (s as f64).ln() / (n as f64).ln() - 1e-9).ceil() as usize
        };
        let m = if s >= 2 { 4 } else { 3 };
        let root = |r: u32| crate::learner::integer_root(n as u64, r) as usize;
        MixtureParams {
            ell_formula,
            ell: 1,
            m,
            e: m - 1,
            n0_formula: root(6),
            m0_formula: root(60),
            clamped: ell_formula != 1 || m != 3,
        }
    }

    pub fn with_m(mut self, m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidInput(format!("need m >= 2, got {m}")));
        }
        self.m = m;
        self.e = m - 1;
        self.clamped = self.ell_formula != self.ell || m != 3 * self.ell;
        Ok(self)
    }
}

/// Where the moments come from.
#[derive(Clone, Copy)]
pub enum MomentInput<'a> {
    Mixture(&'a GaussianMixture),
    Table(&'a MomentTable),
}

impl MomentInput<'_> {
    fn oracle(&self) -> &dyn MomentOracle {
        match self {
            MomentInput::Mixture(g) => *g,
            MomentInput::Table(t) => *t,
        }
    }

    pub fn dim(&self) -> usize {
        self.oracle().dim()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PrimeAttempt {
    pub bits: u64,
    pub prime: String,
    pub outcome: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MixtureLearnReport {
    pub params: MixtureParams,
    pub attempts: Vec<PrimeAttempt>,
    /// Moments compared exactly against the input.
    pub verified_moments: usize,
    pub verified_orders: Vec<usize>,
    /// The recovered weights sum to one modulo the prime, a check the
    /// matching step never uses.
    pub weights_sum_to_one_mod_p: bool,
}

#[derive(Clone, Debug)]
pub struct RecoveredMixture {
    pub mixture: GaussianMixture,
    pub report: MixtureLearnReport,
}

/// `f_m(x) = m!/(2m)! E[<x, Y>^(2m)] = 2^-m sum_i w_i (x^T Sigma_i x)^m`
/// over `F`: evaluations follow the moment formula, lines and jets come from
/// the quadratic forms directly.
struct MixtureBox<F: Field> {
    field: F,
    n: usize,
    m: usize,
    weights: Vec<F::Elem>,
    covs: Vec<Vec<Vec<F::Elem>>>,
    /// `m!/(2m)! (2m - 1)!!`.
    scale: F::Elem,
    inner: PowerSumBox<F>,
}

impl<F: Field> Oracle<F> for MixtureBox<F> {
    fn field(&self) -> &F {
        &self.field
    }
    fn nvars(&self) -> usize {
        self.n
    }
    fn degree(&self) -> usize {
        2 * self.m
    }
    fn provenance(&self) -> Provenance {
        Provenance::External
    }
    fn eval(&self, x: &[F::Elem]) -> Vec<F::Elem> {
        let f = &self.field;
        let mut acc = f.zero();
        for (w, cov) in self.weights.iter().zip(&self.covs) {
            let mut q = f.zero();
            for (a, row) in cov.iter().enumerate() {
                f.mul_add_assign(&mut q, &x[a], &f.dot(row, x));
            }
            f.mul_add_assign(&mut acc, w, &f.pow(&q, self.m as u64));
        }
        vec![f.mul(&acc, &self.scale)]
    }
    fn line(&self, base: &[F::Elem], dir: &[F::Elem]) -> Vec<UniPoly<F>> {
        self.inner.line(base, dir)
    }
    fn jet(&self, base: &[F::Elem], dirs: &[Vec<F::Elem>], order: usize) -> Vec<Jet<F>> {
        self.inner.jet(base, dirs, order)
    }
}

fn factorial_ratio(m: usize) -> BigRational {
    let num: BigUint = (1..=m).fold(BigUint::one(), |a, i| a * BigUint::from(i));
    let den: BigUint = (1..=2 * m).fold(BigUint::one(), |a, i| a * BigUint::from(i));
    BigRational::new(num.into(), den.into())
}

/// `f_m` of `mix` over `field`, or `None` when a weight or covariance
/// denominator vanishes there.
pub fn mixture_power_box<F: Field>(field: &F, mix: &GaussianMixture, m: usize) -> Option<BlackBox<F>> {
    let weights = mix.components.iter().map(|c| field.from_rational(&c.weight)).collect::<Option<Vec<_>>>()?;
    let covs = mix
        .components
        .iter()
        .map(|c| c.cov.iter().map(|r| r.iter().map(|v| field.from_rational(v)).collect::<Option<Vec<_>>>()).collect())
        .collect::<Option<Vec<Vec<_>>>>()?;
    let dfact = BigRational::from_integer(super::double_factorial_odd(m).into());
    let scale = field.from_rational(&(factorial_ratio(m) * dfact))?;
    let terms = (0..mix.s())
        .map(|i| Some((weights[i].clone(), mix.quadratic(field, i)?)))
        .collect::<Option<Vec<_>>>()?;
    let inner = PowerSumBox::new(field, mix.n, m as u32, terms);
    Some(Arc::new(MixtureBox { field: field.clone(), n: mix.n, m, weights, covs, scale, inner }))
}

fn power_box<F: Field>(field: &F, input: MomentInput<'_>, m: usize) -> Result<Option<BlackBox<F>>> {
    Ok(match input {
        MomentInput::Mixture(g) => mixture_power_box(field, g, m),
        MomentInput::Table(t) => t.interpolate_power(field, m)?.map(|p| Arc::new(PolyBox::new(p)) as BlackBox<F>),
    })
}

/// `Some(c)` with `a = c b` when the coefficient vectors are proportional.
fn proportionality<F: Field>(a: &SparsePoly<F>, b: &SparsePoly<F>) -> Option<F::Elem> {
    let f = a.field();
    let (mono, bc) = b.terms().next()?;
    let c = f.div(&a.coefficient(mono), bc).ok()?;
    if f.is_zero(&c) || a != &b.scale(&c) {
        return None;
    }
    Some(c)
}

/// Pairs each `f_(m-1)` term with the `f_m` term whose form is proportional
/// to it, rescales, and returns `(w_i, Q_i)` over the prime field.
fn combine<F: Field>(
    top: &LearnedModel<F>,
    next: &LearnedModel<F>,
    m: usize,
) -> std::result::Result<Vec<(F::Elem, SparsePoly<F>)>, String> {
    let s = top.qs.len();
    let mut used = vec![false; s];
    let mut out = Vec::with_capacity(s);
    for (qp, up) in next.qs.iter().zip(&next.us) {
        let f = qp.field();
        let matches: Vec<(usize, F::Elem)> =
            (0..s).filter_map(|j| proportionality(qp, &top.qs[j]).map(|c| (j, c))).collect();
        let [(j, c)] = matches.as_slice() else {
            return Err(format!("a form of f_(m-1) is proportional to {} forms of f_m", matches.len()));
        };
        if std::mem::replace(&mut used[*j], true) {
            return Err("two forms of f_(m-1) match the same form of f_m".into());
        }
        // Q_i = d Q~_j with w d^m = u~_j and w d^(m-1) = u' c^(m-1).
        let den = f.mul(up, &f.pow(c, (m - 1) as u64));
        let d = f.div(&top.us[*j], &den).map_err(|_| "zero coefficient in f_(m-1)".to_string())?;
        let w = f.div(&top.us[*j], &f.pow(&d, m as u64)).map_err(|_| "zero scale".to_string())?;
        out.push((w, top.qs[*j].scale(&d)));
    }
    Ok(out)
}

/// Lifts `(w_i, Q_i)` mod `p` to rationals, with `Sigma_jj = 2 [x_j^2] Q`
/// and `Sigma_jk = [x_j x_k] Q`.
fn lift<const L: usize>(
    field: &PrimeField<L>,
    n: usize,
    terms: &[(crate::algebra::Fp<L>, SparsePoly<PrimeField<L>>)],
) -> Option<GaussianMixture> {
    let p = field.modulus();
    let rr = |v: &crate::algebra::Fp<L>| rational_reconstruct(&field.to_biguint(v), &p);
    let two = BigRational::from_integer(BigInt::from(2));
    let mut comps = Vec::with_capacity(terms.len());
    for (w, q) in terms {
        let mut cov = vec![vec![BigRational::zero(); n]; n];
        for a in 0..n {
            for b in a..n {
                let mut e = vec![0u32; n];
                e[a] += 1;
                e[b] += 1;
                let c = rr(&q.coefficient(&Monomial(e)))?;
                if a == b {
                    cov[a][a] = c * &two;
                } else {
                    cov[a][b] = c.clone();
                    cov[b][a] = c;
                }
            }
        }
        comps.push(GaussianComponent { weight: rr(w)?, cov });
    }
    GaussianMixture::new(n, comps).ok()
}

fn random_fraction<R: Rng + ?Sized>(rng: &mut R) -> BigRational {
    BigRational::new(BigInt::from(rng.gen_range(-9i64..=9)), BigInt::from(rng.gen_range(1i64..=9)))
}

/// Exact comparison of every even moment up to `2m`: at fresh points for a
/// mixture, at the tabulated points for a table. Returns the number compared
/// or the first disagreement.
fn verify<R: Rng + ?Sized>(
    input: MomentInput<'_>,
    rec: &GaussianMixture,
    m: usize,
    rng: &mut R,
) -> Result<std::result::Result<usize, String>> {
    let mut count = 0;
    let mut check = |x: &[BigRational], r: usize, want: &BigRational| -> Result<Option<String>> {
        count += 1;
        let got = exact_moment(rec, x, r)?;
        Ok((&got != want).then(|| format!("order {r} moment: recovered {}, expected {}", format_rational(&got), format_rational(want))))
    };
    match input {
        MomentInput::Mixture(g) => {
            for _ in 0..VERIFY_POINTS {
                let x: Vec<BigRational> = (0..g.n).map(|_| random_fraction(rng)).collect();
                for r in (2..=2 * m).step_by(2) {
                    if let Some(msg) = check(&x, r, &g.moment(&x, r)?)? {
                        return Ok(Err(msg));
                    }
                }
            }
        }
        MomentInput::Table(t) => {
            for e in &t.entries {
                if let Some(msg) = check(&e.x, e.order, &e.value)? {
                    return Ok(Err(msg));
                }
            }
        }
    }
    Ok(Ok(count))
}

enum Attempt {
    Recovered(GaussianMixture, bool),
    /// A denominator vanished mod p; the prime is redrawn at the same size.
    Clash,
    Failed(String),
}

fn attempt<const L: usize>(
    input: MomentInput<'_>,
    s: usize,
    params: &MixtureParams,
    p: &BigUint,
    seed: u64,
) -> Result<Attempt> {
    let field = PrimeField::<L>::new(p)?;
    let m = params.m;
    let (Some(fm), Some(fm1)) = (power_box(&field, input, m)?, power_box(&field, input, m - 1)?) else {
        return Ok(Attempt::Clash);
    };
    let config = |seed| LearnerConfig { mode: ParamMode::Auto, seed, ..LearnerConfig::default() };
    let (cm, cm1) = (config(seed), config(seed.wrapping_add(1)));
    let (top, next) = std::thread::scope(|sc| {
        let h = sc.spawn(|| learn(fm, 2 * m, 2, s, &cm));
        let next = learn(fm1, 2 * (m - 1), 2, s, &cm1);
        (h.join().expect("learner thread panicked"), next)
    });
    let (top, next) = (top?, next?);
    let terms = match combine(&top, &next, m) {
        Ok(t) => t,
        Err(msg) => return Ok(Attempt::Failed(msg)),
    };
    let total = terms.iter().fold(field.zero(), |a, (w, _)| field.add(&a, w));
    match lift(&field, input.dim(), &terms) {
        Some(g) => Ok(Attempt::Recovered(g, field.is_one(&total))),
        None => Ok(Attempt::Failed("rational reconstruction failed".into())),
    }
}

/// Recovers the weights and covariances of an `s`-component zero-mean
/// mixture from exact moments of orders `2(m - 1)` and `2m`.
pub fn learn_mixture<R: Rng + ?Sized>(
    input: MomentInput<'_>,
    s: usize,
    params: &MixtureParams,
    rng: &mut R,
) -> Result<RecoveredMixture> {
    if s == 0 || params.m < 2 {
        return Err(Error::InvalidInput(format!("need s >= 1 and m >= 2, got s = {s}, m = {}", params.m)));
    }
    let mut attempts = Vec::new();
    for &bits in &PRIME_BITS {
        for _ in 0..PRIME_DRAWS {
            let p = random_prime(bits, rng);
            let seed = rng.gen();
            let outcome = match bits {
                192 => attempt::<3>(input, s, params, &p, seed)?,
                384 => attempt::<6>(input, s, params, &p, seed)?,
                768 => attempt::<12>(input, s, params, &p, seed)?,
                _ => attempt::<24>(input, s, params, &p, seed)?,
            };
            let mut record = |msg: String| attempts.push(PrimeAttempt { bits, prime: p.to_string(), outcome: msg });
            match outcome {
                Attempt::Clash => {
                    record("denominator vanishes modulo the prime".into());
                    continue;
                }
                Attempt::Failed(msg) => record(msg),
                Attempt::Recovered(g, sum_ok) => match verify(input, &g, params.m, rng)? {
                    Ok(count) => {
                        record("verified".into());
                        let report = MixtureLearnReport {
                            params: *params,
                            attempts,
                            verified_moments: count,
                            verified_orders: (2..=2 * params.m).step_by(2).collect(),
                            weights_sum_to_one_mod_p: sum_ok,
                        };
                        return Ok(RecoveredMixture { mixture: g, report });
                    }
                    Err(msg) => record(msg),
                },
            }
            break;
        }
    }
    Err(Error::RetryExhausted(format!(
        "no prime up to {} bits gave a verified mixture; last outcome: {}",
        PRIME_BITS[PRIME_BITS.len() - 1],
        attempts.last().map_or("none", |a| a.outcome.as_str())
    )))
}
