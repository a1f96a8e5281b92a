//! The affine-projections-of-partials measure, the polynomial that maximizes
//! it, and the fan-in bounds it implies.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{Field, Matrix};
use crate::blackbox::{span_basis, BlackBox, DiffOp, DiffOps, Project};
use crate::error::{Error, Result};
use crate::multipoly::{monomial_enumeration, LinearTuple, Monomial, MonomialKind, SparsePoly};
use crate::witness::span_rank;

/// Independent draws of `L` in [`app_measure`] unless told otherwise.
pub const DEFAULT_TRIALS: usize = 5;

/// Every multi-index of order `k` that divides some monomial of `f`.
fn dividing_multi_indices<F: Field>(f: &SparsePoly<F>, k: usize) -> BTreeSet<Monomial> {
    fn walk(exps: &[u32], i: usize, left: u32, cur: &mut Vec<u32>, out: &mut BTreeSet<Monomial>) {
        if left == 0 {
            out.insert(Monomial(cur.clone()));
            return;
        }
        if i == exps.len() {
            return;
        }
        for a in (0..=exps[i].min(left)).rev() {
            cur[i] = a;
            walk(exps, i + 1, left - a, cur, out);
        }
        cur[i] = 0;
    }
    let mut out = BTreeSet::new();
    for (mo, _) in f.terms() {
        let mut cur = vec![0u32; f.nvars()];
        walk(mo.exps(), 0, k as u32, &mut cur, &mut out);
    }
    out
}

/// The nonzero projections `pi_L(d^alpha f)`, `|alpha| = k`.
pub fn projected_partials<F: Field>(f: &SparsePoly<F>, k: usize, l: &LinearTuple<F>) -> Result<Vec<SparsePoly<F>>> {
    let mut out = Vec::new();
    for alpha in dividing_multi_indices(f, k) {
        let p = f.partial_derivative(&alpha)?.compose_affine(l)?;
        if !p.is_zero() {
            out.push(p);
        }
    }
    Ok(out)
}

/// `dim <pi_L(d^k f)>` for one fixed `L`.
pub fn app_dimension<F: Field>(f: &SparsePoly<F>, k: usize, l: &LinearTuple<F>) -> Result<usize> {
    Ok(span_rank(f.field(), &projected_partials(f, k, l)?))
}

/// The largest `dim <pi_L(d^k f)>` over `trials` random `n x n0` maps `L`.
pub fn app_measure<F: Field, R: Rng + ?Sized>(
    f: &SparsePoly<F>,
    k: usize,
    n0: usize,
    trials: usize,
    rng: &mut R,
) -> Result<usize> {
    check_order(f.degree().unwrap_or(0) as usize, k, f.is_zero())?;
    let mut best = 0;
    for _ in 0..trials.max(1) {
        let l = Matrix::random(f.field(), f.nvars(), n0, rng);
        best = best.max(app_dimension(f, k, &l)?);
    }
    Ok(best)
}

/// [`app_measure`] from evaluations only: each trial finds a basis of the
/// projected partials of the oracle.
pub fn app_measure_oracle<F: Field, R: Rng + ?Sized>(
    f: &BlackBox<F>,
    k: usize,
    n0: usize,
    trials: usize,
    rng: &mut R,
) -> Result<usize> {
    check_order(f.degree(), k, false)?;
    let ops: Vec<DiffOp<F>> =
        monomial_enumeration(f.nvars(), k, MonomialKind::All).into_iter().map(DiffOp::Partial).collect();
    let partials: BlackBox<F> = std::sync::Arc::new(DiffOps::new(f.clone(), ops));
    let mut best = 0;
    for _ in 0..trials.max(1) {
        let l = Matrix::random(f.field(), f.nvars(), n0, rng);
        let projected: BlackBox<F> = std::sync::Arc::new(Project::new(partials.clone(), l)?);
        best = best.max(span_basis(projected, rng)?.dim());
    }
    Ok(best)
}

fn check_order(deg: usize, k: usize, zero: bool) -> Result<()> {
    if !zero && k > deg {
        return Err(Error::InvalidInput(format!("derivative order {k} exceeds the degree {deg}")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// The hard polynomial.

/// Parameters of the hard polynomial: `y` has `n1 = n - n0 (d - k)`
/// variables and `u` splits into `d - k` blocks of `n0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HardPolySpec {
    pub n: usize,
    pub d: usize,
    pub t: usize,
    pub k: usize,
    pub n0: usize,
}

impl HardPolySpec {
    pub fn n2(&self) -> usize {
        self.n0 * (self.d - self.k)
    }

    pub fn n1(&self) -> usize {
        self.n - self.n2()
    }

    /// `C(d - k + n0 - 1, n0 - 1)`, the number of non-decreasing `u` monomials.
    pub fn bound(&self) -> BigUint {
        binom(self.d - self.k + self.n0 - 1, self.n0 - 1)
    }

    /// Why the spec cannot carry a hard polynomial, if it cannot.
    pub fn infeasibility(&self) -> Option<String> {
        if self.n0 == 0 || self.k > self.d {
            return Some(format!("need n0 >= 1 and k <= d, got n0 = {}, k = {}, d = {}", self.n0, self.k, self.d));
        }
        if self.n2() > self.n {
            return Some(format!("n0 (d - k) = {} exceeds n = {}", self.n2(), self.n));
        }
        let y_monos = binom(self.n1(), self.k);
        if y_monos < self.bound() {
            return Some(format!("C(n1, k) = {y_monos} is below C(d - k + n0 - 1, n0 - 1) = {}", self.bound()));
        }
        None
    }

    fn check(&self) -> Result<()> {
        match self.infeasibility() {
            Some(why) => Err(Error::InvalidInput(why)),
            None => Ok(()),
        }
    }

    /// The map sending `y` to zero and `u_{i,j}` to `z_j`.
    pub fn witness_projection<F: Field>(&self, field: &F) -> LinearTuple<F> {
        let mut l = Matrix::zeros(field, self.n, self.n0);
        for block in 0..self.d - self.k {
            for j in 0..self.n0 {
                l.set(self.n1() + block * self.n0 + j, j, field.one());
            }
        }
        l
    }
}

/// `sum_i mu_i beta_i`, pairing the lex-first multilinear `y` monomials of
/// degree `k` with the lex-ordered non-decreasing set-multilinear `u` monomials.
pub fn hard_polynomial<F: Field>(field: &F, spec: &HardPolySpec) -> Result<SparsePoly<F>> {
    spec.check()?;
    let (n1, n2) = (spec.n1(), spec.n2());
    let betas = monomial_enumeration(spec.n0, spec.d - spec.k, MonomialKind::SetMultilinearNondecreasing);
    let mus = monomial_enumeration(n1, spec.k, MonomialKind::Multilinear);
    let terms = mus.iter().zip(&betas).map(|(mu, beta)| {
        let mut e = Vec::with_capacity(spec.n);
        e.extend_from_slice(mu.exps());
        e.extend_from_slice(beta.exps());
        debug_assert_eq!(e.len(), n1 + n2);
        (Monomial(e), field.one())
    });
    Ok(SparsePoly::from_terms(field, spec.n, terms))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HardPolyVerdict {
    pub spec: HardPolySpec,
    /// `C(d - k + n0 - 1, n0 - 1)`.
    pub bound: String,
    /// Best dimension over random projections.
    pub measured: usize,
    /// Dimension under the `y -> 0`, `u_{i,j} -> z_j` projection.
    pub witness_dimension: usize,
    pub equal: bool,
}

/// Measures the hard polynomial under random maps and under the witness map.
pub fn verify_hard_poly<F: Field, R: Rng + ?Sized>(
    field: &F,
    spec: &HardPolySpec,
    trials: usize,
    rng: &mut R,
) -> Result<HardPolyVerdict> {
    let f = hard_polynomial(field, spec)?;
    let measured = app_measure(&f, spec.k, spec.n0, trials, rng)?;
    let witness_dimension = app_dimension(&f, spec.k, &spec.witness_projection(field))?;
    let bound = spec.bound();
    let equal = BigUint::from(measured) == bound && BigUint::from(witness_dimension) == bound;
    Ok(HardPolyVerdict { spec: *spec, bound: bound.to_string(), measured, witness_dimension, equal })
}

// ---------------------------------------------------------------------------
// Regimes and bounds.

pub fn binom(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    HighT,
    LowT,
}

/// A constraint of a regime, evaluated in floating point and reported only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeConstraint {
    pub name: String,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeParams {
    pub regime: Regime,
    /// Rational approximant of the irrational constant.
    pub delta: String,
    pub c: Option<String>,
    pub k: usize,
    pub n0: usize,
    /// Set when the formulas give `k = 0` or `n0 = 0` and the value was raised to 1.
    pub clamped: bool,
    pub constraints: Vec<RegimeConstraint>,
}

fn approx(x: f64) -> BigRational {
    BigRational::from_f64(x).expect("finite constant")
}

fn floor_rat(x: &BigRational) -> usize {
    x.floor().to_integer().to_usize().unwrap_or(usize::MAX)
}

fn ceil_rat(x: &BigRational) -> usize {
    x.ceil().to_integer().to_usize().unwrap_or(usize::MAX)
}

/// The smallest `x` with `x^d >= n^k`, i.e. `ceil(n^(k/d))`, exactly.
pub fn ceil_root_power(n: usize, k: usize, d: usize) -> usize {
    let target = BigUint::from(n).pow(k as u32);
    let mut x = BigUint::from(n).pow(k as u32).nth_root(d as u32);
    while x.pow(d as u32) < target {
        x += 1u32;
    }
    x.to_usize().unwrap_or(usize::MAX)
}

pub fn regime_params(n: usize, d: usize, t: usize, regime: Regime) -> Result<RegimeParams> {
    if n == 0 || d == 0 || t == 0 {
        return Err(Error::InvalidInput("n, d and t must be positive".into()));
    }
    let (nf, df, tf) = (n as f64, d as f64, t as f64);
    let e = std::f64::consts::E;
    let d_over_t = BigRational::new(d.into(), t.into());
    Ok(match regime {
        Regime::HighT => {
            let delta = approx(1.0 / (4.0 * e.powi(10)));
            let k_raw = floor_rat(&(&delta * &d_over_t));
            let k = k_raw.clamp(1, d);
            let (c, n0_raw) = if d > k {
                let c = approx(0.75 * (nf / k as f64).ln() / (df / k as f64).ln());
                let n0 = floor_rat(&(&c * BigRational::from_integer(k.into())));
                (Some(c), n0)
            } else {
                (None, n)
            };
            let n0 = n0_raw.clamp(1, n);
            let constraints = vec![
                RegimeConstraint { name: "n >= d^2".into(), holds: nf >= df * df },
                RegimeConstraint { name: "ln(n/d) <= t".into(), holds: (nf / df).ln() <= tf },
                RegimeConstraint { name: "t <= d / (4 e^10 ln d)".into(), holds: tf <= df / (4.0 * e.powi(10) * df.ln()) },
            ];
            RegimeParams {
                regime,
                delta: delta.to_string(),
                c: c.map(|c| c.to_string()),
                k,
                n0,
                clamped: k != k_raw || n0 != n0_raw,
                constraints,
            }
        }
        Regime::LowT => {
            let delta = approx(1.0 / (3.0 * e));
            let k_raw = ceil_rat(&(&delta * &d_over_t));
            let k = k_raw.clamp(1, d);
            let n0_raw = ceil_root_power(n, k, d);
            let n0 = n0_raw.clamp(1, n);
            let constraints = vec![
                RegimeConstraint { name: "n >= d^20".into(), holds: nf.ln() >= 20.0 * df.ln() },
                RegimeConstraint {
                    name: "t <= min(ln n / (6 e ln d), d)".into(),
                    holds: tf <= df && (d == 1 || tf <= nf.ln() / (6.0 * e * df.ln())),
                },
            ];
            RegimeParams { regime, delta: delta.to_string(), c: None, k, n0, clamped: k != k_raw || n0 != n0_raw, constraints }
        }
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeBounds {
    pub params: RegimeParams,
    /// `floor(d / t) + 1`.
    pub m: usize,
    /// `C(d - k + n0 - 1, n0 - 1)`, the measure of the hard polynomial.
    pub hard_measure: String,
    /// `C(m, k) C(n0 + 2kt, n0)`, the bound for one product term.
    pub term_bound: String,
    /// `s C(m, k) C(n0 + 2kt, n0)` for the hypothesized `s`.
    pub circuit_bound: String,
    /// `hard_measure / term_bound` as an exact fraction.
    pub fan_in_ratio: String,
    /// The least `s` the ratio forces.
    pub fan_in_lower_bound: String,
    /// Whether `s` terms are too few to compute the hard polynomial.
    pub hypothesis_refuted: bool,
    /// Why the hard polynomial does not exist at these parameters, if it does not.
    pub hard_poly_infeasible: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub n: usize,
    pub d: usize,
    pub t: usize,
    pub s: usize,
    pub regimes: Vec<RegimeBounds>,
}

pub fn regime_bounds(n: usize, d: usize, t: usize, s: usize, params: RegimeParams) -> RegimeBounds {
    let (k, n0) = (params.k, params.n0);
    let m = d / t + 1;
    let hard = binom(d - k + n0 - 1, n0 - 1);
    let term = binom(m, k) * binom(n0 + 2 * k * t, n0);
    let circuit = BigUint::from(s) * &term;
    let ratio = BigRational::new(hard.clone().into(), term.clone().into());
    let lower = ratio.ceil().to_integer();
    let spec = HardPolySpec { n, d, t, k, n0 };
    RegimeBounds {
        params,
        m,
        hard_measure: hard.to_string(),
        term_bound: term.to_string(),
        circuit_bound: circuit.to_string(),
        fan_in_ratio: ratio.to_string(),
        fan_in_lower_bound: lower.to_string(),
        hypothesis_refuted: circuit < hard,
        hard_poly_infeasible: spec.infeasibility(),
    }
}

/// Both regimes' parameters and the fan-in bound each implies.
pub fn bound_report(n: usize, d: usize, t: usize, s: usize) -> Result<BoundReport> {
    let regimes = [Regime::HighT, Regime::LowT]
        .into_iter()
        .map(|r| Ok(regime_bounds(n, d, t, s, regime_params(n, d, t, r)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundReport { n, d, t, s, regimes })
}
