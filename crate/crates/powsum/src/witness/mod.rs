//! Designs, explicit and random circuits, and the non-degeneracy checker.
//!
//! The explicit witness splits the variables as `x = z ⊎ y` with `z` the
//! first `n0` coordinates. Each `Q_i = R_i + G_i` pairs a `y`-linear part
//! `R_i`, built from a design on the `y` variables, with a power `G_i` of a
//! sum over a design on the `z` variables.

mod design;
mod nondegen;

pub use design::{nw_design, CombinatorialDesign, DesignJson, DesignStrategy, GREEDY_ATTEMPTS};
pub use nondegen::{
    check_nondegeneracy, check_nondegeneracy_with, projected_power_partials, span_rank, NonDegeneracyJson,
    NonDegeneracyReport,
};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{Field, Matrix};
use crate::error::{Error, Result};
use crate::learner::{integer_root, PowerSumCircuit};
use crate::multipoly::{binomial, monomial_enumeration, LinearTuple, Monomial, MonomialKind, SparsePoly};

/// `sum_i Q_i^m` with every coefficient of every `Q_i` uniform in the field.
pub fn random_circuit<F: Field, R: Rng + ?Sized>(
    field: &F,
    n: usize,
    d: usize,
    t: usize,
    s: usize,
    rng: &mut R,
) -> Result<PowerSumCircuit<F>> {
    if t == 0 || !d.is_multiple_of(t) {
        return Err(Error::InvalidInput(format!("t = {t} does not divide d = {d}")));
    }
    if n == 0 || s == 0 {
        return Err(Error::InvalidInput("n and s must be positive".into()));
    }
    let terms = (0..s).map(|_| (field.one(), SparsePoly::random_homogeneous(field, n, t, rng))).collect();
    PowerSumCircuit::new(field, n, t, d / t, terms)
}

/// One of the asymptotic parameter relations, evaluated at the given scale.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    pub name: String,
    pub lhs: u128,
    pub rhs: u128,
    pub holds: bool,
}

fn relation(name: &str, lhs: u128, rhs: u128, holds: bool) -> Relation {
    Relation { name: name.into(), lhs, rhs, holds }
}

#[derive(Clone, Debug)]
pub struct ExplicitWitness<F: Field> {
    pub circuit: PowerSumCircuit<F>,
    /// Sends every `y` variable to zero and `z_u` to `z_u`.
    pub l: LinearTuple<F>,
    pub k: usize,
    pub n0: usize,
    /// The degree-`(t-1)` `z` monomials `gamma_1, ..., gamma_b`.
    pub gammas: Vec<Monomial>,
    /// Design on the `y` variables, numbered from 0 (variable `n0 + j`).
    pub y_design: CombinatorialDesign,
    /// Design on the `z` variables, numbered from 0.
    pub z_design: CombinatorialDesign,
    /// The asymptotic relations at this scale. They are advisory: the
    /// designs were built and verified whether or not these hold.
    pub relations: Vec<Relation>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExplicitWitnessJson {
    pub circuit: crate::learner::CircuitJson,
    #[serde(rename = "L")]
    pub l: Vec<Vec<String>>,
    pub k: usize,
    pub n0: usize,
    pub y_design: DesignJson,
    pub z_design: DesignJson,
    pub relations: Vec<Relation>,
}

impl<F: Field> ExplicitWitness<F> {
    /// The variable index of `y_{ijl}` (all indices from 0).
    pub fn y_var(&self, i: usize, j: usize, l: usize) -> usize {
        self.n0 + self.y_design.sets[i][j * self.gammas.len() + l]
    }

    /// `prod_j y_{ijl}`, whose derivative of `f` keeps only term `i`.
    pub fn isolating_multi_index(&self, i: usize, l: usize) -> Monomial {
        let mut e = vec![0u32; self.circuit.n];
        for j in 0..self.k {
            e[self.y_var(i, j, l)] += 1;
        }
        Monomial(e)
    }

    pub fn to_json(&self) -> ExplicitWitnessJson {
        let f = self.circuit.field();
        ExplicitWitnessJson {
            circuit: self.circuit.to_json(),
            l: self.l.to_rows().iter().map(|r| r.iter().map(|x| f.format(x)).collect()).collect(),
            k: self.k,
            n0: self.n0,
            y_design: self.y_design.to_json(),
            z_design: self.z_design.to_json(),
            relations: self.relations.clone(),
        }
    }
}

/// The explicit circuit `sum_i (R_i + G_i)^m` and the projection `L`.
///
/// The `z` design has sets of size `max(1, floor(sqrt(n0) / 2))`. When that
/// size is 1 the sets avoid `z_1`, since a `G_i = z_1^t` would vanish on
/// `z_1 = 0`.
#[allow(clippy::too_many_arguments)]
pub fn build_explicit_witness<F: Field, R: Rng + ?Sized>(
    field: &F,
    n: usize,
    d: usize,
    t: usize,
    s: usize,
    k: usize,
    n0: usize,
    rng: &mut R,
) -> Result<ExplicitWitness<F>> {
    if t == 0 || !d.is_multiple_of(t) {
        return Err(Error::InvalidInput(format!("t = {t} does not divide d = {d}")));
    }
    let m = d / t;
    if s == 0 || k == 0 || k > m {
        return Err(Error::InvalidInput(format!("need s >= 1 and 1 <= k <= m = {m}")));
    }
    if n0 == 0 || n0 >= n {
        return Err(Error::InvalidInput(format!("need 1 <= n0 < n, got n0 = {n0}, n = {n}")));
    }
    let gammas = monomial_enumeration(n0, t - 1, MonomialKind::All);
    let b = gammas.len();
    let ny = n - n0;
    let y_design = nw_design(ny, k * b, s, k - 1, rng)
        .map_err(|e| Error::InvalidInput(format!("relation n - n0 >= (2kb)^2 fails in practice: {e}")))?;

    let sqrt_n0 = integer_root(n0 as u64, 2) as usize;
    let p = (sqrt_n0 / 2).max(1);
    let z_bound = (t * (m - k)).min(sqrt_n0) / 10;
    let z_offset = usize::from(p == 1);
    let mut z_design = nw_design(n0 - z_offset, p, s, z_bound, rng)
        .map_err(|e| Error::InvalidInput(format!("relation on s, p and the z intersection bound fails in practice: {e}")))?;
    for set in &mut z_design.sets {
        set.iter_mut().for_each(|v| *v += z_offset);
    }
    z_design.universe = n0;

    let one = field.one();
    let mut terms = Vec::with_capacity(s);
    for i in 0..s {
        let mut q = SparsePoly::zero(field, n);
        for j in 0..k {
            for (l, gamma) in gammas.iter().enumerate() {
                let mut e = vec![0u32; n];
                e[..n0].copy_from_slice(gamma.exps());
                e[n0 + y_design.sets[i][j * b + l]] += 1;
                q.add_term(Monomial(e), &one);
            }
        }
        let zs: Vec<F::Elem> = (0..n).map(|v| if z_design.sets[i].contains(&v) { one.clone() } else { field.zero() }).collect();
        let g = SparsePoly::linear_form(field, &zs).pow(t as u32);
        terms.push((one.clone(), q.add(&g)?));
    }
    let circuit = PowerSumCircuit::new(field, n, t, m, terms)?;

    let mut l = Matrix::zeros(field, n, n0);
    for u in 0..n0 {
        l.set(u, u, one.clone());
    }

    let two_kb = (2 * k * b) as u128;
    let kb_pow_k = (k as u128 * b as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    let p_pow = (p as u128).checked_pow(z_bound as u32).unwrap_or(u128::MAX);
    let e = (m - k) as u128;
    let relations = vec![
        relation("n - n0 >= (2kb)^2", ny as u128, two_kb * two_kb, ny as u128 >= two_kb * two_kb),
        relation("s <= (kb)^k", s as u128, kb_pow_k, s as u128 <= kb_pow_k),
        relation("m - k > 7k", e, 7 * k as u128, e > 7 * k as u128),
        relation("s <= p^floor(min(t(m-k), sqrt(n0)) / 10)", s as u128, p_pow, s as u128 <= p_pow),
    ];
    Ok(ExplicitWitness { circuit, l, k, n0, gammas, y_design, z_design, relations })
}

/// The expected dimension of each `U_i`, `C(n0 + k(t-1) - 1, k(t-1))`.
pub fn expected_dim_ui(n0: usize, k: usize, t: usize) -> usize {
    let kappa = k * (t - 1);
    binomial((n0 + kappa - 1) as u64, kappa as u64) as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Fp64;
    use num_bigint::BigUint;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn field() -> Fp64 {
        Fp64::new(&BigUint::from(1_000_000_007u64)).unwrap()
    }

    #[test]
    fn random_circuit_is_seeded() {
        let f = field();
        let a = random_circuit(&f, 5, 6, 2, 2, &mut ChaCha20Rng::seed_from_u64(1)).unwrap();
        let b = random_circuit(&f, 5, 6, 2, 2, &mut ChaCha20Rng::seed_from_u64(1)).unwrap();
        let c = random_circuit(&f, 5, 6, 2, 2, &mut ChaCha20Rng::seed_from_u64(2)).unwrap();
        assert_eq!(a.terms, b.terms);
        assert_ne!(a.terms, c.terms);
        assert_eq!(a.m, 3);
        assert!(a.terms.iter().all(|(c, q)| f.is_one(c) && q.num_terms() == 15));
    }

    #[test]
    fn random_circuit_rejects_bad_degree() {
        assert!(random_circuit(&field(), 5, 7, 2, 2, &mut ChaCha20Rng::seed_from_u64(1)).is_err());
    }

    #[test]
    fn single_term_witness() {
        let f = field();
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let w = build_explicit_witness(&f, 10, 6, 2, 1, 1, 3, &mut rng).unwrap();
        assert_eq!(w.circuit.s(), 1);
        // R_1 + G_1 under L is G_1 alone.
        let g = w.circuit.terms[0].1.compose_affine(&w.l).unwrap();
        assert!(g.terms().all(|(mo, _)| mo.exps().iter().filter(|&&x| x > 0).count() == 1));
        let p = Matrix::random(&f, 3, 2, &mut rng);
        let r = check_nondegeneracy_with(&w.circuit, 1, &w.l, &p).unwrap();
        assert!(r.condition(1) && r.condition(3) && r.condition(4), "{:?}", r.checks);
    }

    #[test]
    fn derivative_isolates_one_term() {
        let f = field();
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let (n, t, m, k, n0) = (20, 2, 4, 2, 3);
        let w = build_explicit_witness(&f, n, t * m, t, 2, k, n0, &mut rng).unwrap();
        let expanded = w.circuit.expand();
        // m (m-1) ... (m-k+1) = k! C(m, k).
        let falling = f.from_u64(binomial(m as u64, k as u64) as u64 * (1..=k as u64).product::<u64>());
        for i in 0..2 {
            for (l, gamma) in w.gammas.iter().enumerate() {
                let alpha = w.isolating_multi_index(i, l);
                let lhs = expanded.partial_derivative(&alpha).unwrap();
                let mut mu = vec![0u32; n];
                for (v, &x) in gamma.exps().iter().enumerate() {
                    mu[v] = x * k as u32;
                }
                let mu = SparsePoly::from_terms(&f, n, [(Monomial(mu), falling)]);
                let rhs = mu.mul(&w.circuit.terms[i].1.pow((m - k) as u32)).unwrap();
                assert_eq!(lhs, rhs, "term {i}, gamma {l}");
            }
        }
    }

    #[test]
    fn desk_witness_passes_conditions_one_three_four() {
        let f = field();
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let w = build_explicit_witness(&f, 30, 8, 2, 3, 1, 6, &mut rng).unwrap();
        let p = Matrix::random(&f, 6, 2, &mut rng);
        let r = check_nondegeneracy_with(&w.circuit, 1, &w.l, &p).unwrap();
        for c in [1, 3, 4] {
            assert!(r.condition(c), "condition {c}: {:?}", r.checks);
        }
        // At this scale the asymptotic relations do not all hold.
        assert!(w.relations.iter().any(|r| !r.holds));
    }

    #[test]
    fn infeasible_witness_names_the_relation() {
        let f = field();
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        // Five disjoint y-sets of size 6 need 30 y variables, only 24 exist.
        let err = build_explicit_witness(&f, 30, 8, 2, 5, 1, 6, &mut rng).unwrap_err();
        assert!(err.to_string().contains("n - n0"), "{err}");
    }
}
