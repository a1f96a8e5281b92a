//! Exact, white-box evaluation of the four non-degeneracy conditions.
//!
//! Every span here is computed from coefficients. For a polynomial `q` in `n`
//! variables and an `n x n0` map `L`, the expansion of `q(Lz + u)^m` in fresh
//! variables `u` has, as the coefficient of `u^alpha`, the projected partial
//! `pi_L(d^alpha q^m) / alpha!`. Truncating every product at `u`-degree `k`
//! keeps the expansion small.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{Field, Matrix};
use crate::error::{Error, Result};
use crate::learner::{ConditionCheck, PowerSumCircuit};
use crate::multipoly::{binomial, monomial_enumeration, LinearTuple, Monomial, MonomialKind, SparsePoly};

type Terms<E> = HashMap<Vec<u32>, E>;

fn u_degree(e: &[u32], split: usize) -> u32 {
    e[split..].iter().sum()
}

fn mul_trunc<F: Field>(f: &F, a: &Terms<F::Elem>, b: &Terms<F::Elem>, split: usize, k: u32) -> Terms<F::Elem> {
    let b: Vec<(&Vec<u32>, &F::Elem, u32)> = b.iter().map(|(e, c)| (e, c, u_degree(e, split))).collect();
    let mut out: Terms<F::Elem> = HashMap::new();
    for (ea, ca) in a {
        let da = u_degree(ea, split);
        for &(eb, cb, db) in &b {
            if da + db > k {
                continue;
            }
            let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            let slot = out.entry(e).or_insert_with(|| f.zero());
            f.mul_add_assign(slot, ca, cb);
        }
    }
    out.retain(|_, c| !f.is_zero(c));
    out
}

/// `pi_L(d^alpha q^m)` for every `alpha` of order `k`, keyed by `alpha`.
/// Multi-indices whose partial vanishes are absent.
pub fn projected_power_partials<F: Field>(
    q: &SparsePoly<F>,
    m: usize,
    l: &LinearTuple<F>,
    k: usize,
) -> Result<HashMap<Monomial, SparsePoly<F>>> {
    let f = q.field();
    let n = q.nvars();
    if l.rows() != n {
        return Err(Error::DimensionMismatch(format!("{} linear forms for {n} variables", l.rows())));
    }
    let n0 = l.cols();
    // Row i of [L | I] sends x_i to l_i(z) + u_i.
    let mut shift = Matrix::zeros(f, n, n0 + n);
    for i in 0..n {
        for j in 0..n0 {
            shift.set(i, j, l.get(i, j).clone());
        }
        shift.set(i, n0 + i, f.one());
    }
    let base: Terms<F::Elem> = q
        .compose_affine(&shift)?
        .terms()
        .filter(|(mo, _)| u_degree(mo.exps(), n0) <= k as u32)
        .map(|(mo, c)| (mo.exps().to_vec(), c.clone()))
        .collect();
    let mut acc: Terms<F::Elem> = HashMap::from([(vec![0u32; n0 + n], f.one())]);
    for _ in 0..m {
        acc = mul_trunc(f, &acc, &base, n0, k as u32);
    }
    let mut out: HashMap<Monomial, SparsePoly<F>> = HashMap::new();
    for (e, c) in acc {
        if u_degree(&e, n0) != k as u32 {
            continue;
        }
        let alpha = Monomial(e[n0..].to_vec());
        let fact = f.from_u64(alpha.factorial() as u64);
        let zpart = Monomial(e[..n0].to_vec());
        out.entry(alpha).or_insert_with(|| SparsePoly::zero(f, n0)).add_term(zpart, &f.mul(&c, &fact));
    }
    out.retain(|_, p| !p.is_zero());
    Ok(out)
}

/// Rank of a family of polynomials, computed on their coefficient vectors.
pub fn span_rank<'a, F: Field>(field: &F, polys: impl IntoIterator<Item = &'a SparsePoly<F>>) -> usize {
    let polys: Vec<&SparsePoly<F>> = polys.into_iter().collect();
    let mut index: HashMap<&Monomial, usize> = HashMap::new();
    for p in &polys {
        for (mo, _) in p.terms() {
            let next = index.len();
            index.entry(mo).or_insert(next);
        }
    }
    // Rank is at most the smaller dimension, so put that dimension on the rows.
    let (r, c) = (polys.len(), index.len());
    let mut mat = if r <= c { Matrix::zeros(field, r, c) } else { Matrix::zeros(field, c, r) };
    for (i, p) in polys.iter().enumerate() {
        for (mo, v) in p.terms() {
            let j = index[mo];
            if r <= c {
                mat.set(i, j, v.clone());
            } else {
                mat.set(j, i, v.clone());
            }
        }
    }
    mat.rank()
}

/// Verdicts of the four conditions under one draw of `(L, P)`.
#[derive(Clone, Debug)]
pub struct NonDegeneracyReport<F: Field> {
    pub k: usize,
    pub n0: usize,
    pub m0: usize,
    pub checks: Vec<ConditionCheck>,
    pub l: LinearTuple<F>,
    pub p: LinearTuple<F>,
}

impl<F: Field> NonDegeneracyReport<F> {
    /// Whether every check filed under `condition` passed.
    pub fn condition(&self, condition: u8) -> bool {
        self.checks.iter().filter(|c| c.condition == condition).all(|c| c.passed)
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> NonDegeneracyJson {
        let f = self.l.field();
        let rows = |m: &Matrix<F>| m.to_rows().iter().map(|r| r.iter().map(|x| f.format(x)).collect()).collect();
        NonDegeneracyJson {
            k: self.k,
            n0: self.n0,
            m0: self.m0,
            conditions: (1..=4).map(|c| (c.to_string(), self.condition(c))).collect(),
            non_degenerate: self.all_pass(),
            checks: self.checks.clone(),
            l: rows(&self.l),
            p: rows(&self.p),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NonDegeneracyJson {
    pub k: usize,
    pub n0: usize,
    pub m0: usize,
    pub conditions: std::collections::BTreeMap<String, bool>,
    pub non_degenerate: bool,
    pub checks: Vec<ConditionCheck>,
    #[serde(rename = "L")]
    pub l: Vec<Vec<String>>,
    #[serde(rename = "P")]
    pub p: Vec<Vec<String>>,
}

fn push(checks: &mut Vec<ConditionCheck>, condition: u8, quantity: String, measured: usize, expected: usize) {
    checks.push(ConditionCheck { condition, quantity, measured, expected, passed: measured == expected });
}

/// Checks the conditions under random `L` (`n x n0`) and `P` (`n0 x m0`).
pub fn check_nondegeneracy<F: Field, R: Rng + ?Sized>(
    c: &PowerSumCircuit<F>,
    k: usize,
    n0: usize,
    m0: usize,
    rng: &mut R,
) -> Result<NonDegeneracyReport<F>> {
    let f = c.field();
    let l = Matrix::random(f, c.n, n0, rng);
    let p = Matrix::random(f, n0, m0, rng);
    check_nondegeneracy_with(c, k, &l, &p)
}

/// Checks the conditions under the given `L` and `P`.
pub fn check_nondegeneracy_with<F: Field>(
    c: &PowerSumCircuit<F>,
    k: usize,
    l: &LinearTuple<F>,
    p: &LinearTuple<F>,
) -> Result<NonDegeneracyReport<F>> {
    let f = c.field();
    let (t, m, s) = (c.t, c.m, c.s());
    if k == 0 || k > m {
        return Err(Error::InvalidInput(format!("derivative order {k} outside 1..={m}")));
    }
    if l.rows() != c.n || p.rows() != l.cols() {
        return Err(Error::DimensionMismatch(format!(
            "L is {}x{} and P is {}x{} for n = {}",
            l.rows(),
            l.cols(),
            p.rows(),
            p.cols(),
            c.n
        )));
    }
    let (n0, m0) = (l.cols(), p.cols());
    let kappa = k * (t - 1);
    let e = m - k;
    let mut checks = Vec::new();

    // Condition 1.
    let per_term: Vec<HashMap<Monomial, SparsePoly<F>>> =
        c.terms.iter().map(|(_, q)| projected_power_partials(q, m, l, k)).collect::<Result<_>>()?;
    let dim_ui = binomial((n0 + kappa - 1) as u64, kappa as u64) as usize;
    for (i, parts) in per_term.iter().enumerate() {
        push(&mut checks, 1, format!("dimension of U_{}", i + 1), span_rank(f, parts.values()), dim_ui);
    }
    let mut u_gens: HashMap<&Monomial, SparsePoly<F>> = HashMap::new();
    for ((ci, _), parts) in c.terms.iter().zip(&per_term) {
        for (alpha, poly) in parts {
            let scaled = poly.scale(ci);
            let slot = u_gens.entry(alpha).or_insert_with(|| SparsePoly::zero(f, n0));
            *slot = slot.add(&scaled)?;
        }
    }
    push(&mut checks, 1, "dimension of U".into(), span_rank(f, u_gens.values()), s * dim_ui);

    // G_i = pi_L(Q_i) and its e-th power.
    let gs: Vec<SparsePoly<F>> = c.terms.iter().map(|(_, q)| q.compose_affine(l)).collect::<Result<_>>()?;
    let ge: Vec<SparsePoly<F>> = gs.iter().map(|g| g.pow(e as u32)).collect();

    // Condition 3: the shifted spans z^(2 kappa) G_i^e are independent.
    let shifts = monomial_enumeration(n0, 2 * kappa, MonomialKind::All);
    let shifted: Vec<SparsePoly<F>> = ge
        .iter()
        .flat_map(|g| {
            shifts.iter().map(move |mo| SparsePoly::from_terms(f, n0, g.terms().map(|(gm, gc)| (gm.mul(mo), gc.clone()))))
        })
        .collect();
    push(&mut checks, 3, "dimension of the shifted spans".into(), span_rank(f, &shifted), s * shifts.len());

    // Condition 4.
    let restricted: Vec<SparsePoly<F>> = ge.iter().map(|g| g.restrict_zero(0)).collect();
    push(&mut checks, 4, "rank of G_i^e at z_1 = 0".into(), span_rank(f, &restricted), s);

    // Condition 2, the same construction one level down with g_0 = sum G_i^e.
    let dim_wi = binomial((m0 + kappa - 1) as u64, kappa as u64) as usize;
    let w_term: Vec<HashMap<Monomial, SparsePoly<F>>> =
        gs.iter().map(|g| projected_power_partials(g, e, p, k)).collect::<Result<_>>()?;
    for (i, parts) in w_term.iter().enumerate() {
        push(&mut checks, 2, format!("dimension of W_{}", i + 1), span_rank(f, parts.values()), dim_wi);
    }
    let mut w_gens: HashMap<&Monomial, SparsePoly<F>> = HashMap::new();
    for parts in &w_term {
        for (beta, poly) in parts {
            let slot = w_gens.entry(beta).or_insert_with(|| SparsePoly::zero(f, m0));
            *slot = slot.add(poly)?;
        }
    }
    push(&mut checks, 2, "dimension of W".into(), span_rank(f, w_gens.values()), s * dim_wi);

    checks.sort_by_key(|c| c.condition);
    Ok(NonDegeneracyReport { k, n0, m0, checks, l: l.clone(), p: p.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Fp64;
    use crate::witness::random_circuit;
    use num_bigint::BigUint;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn field() -> Fp64 {
        Fp64::new(&BigUint::from(1_000_000_007u64)).unwrap()
    }

    #[test]
    fn taylor_coefficients_match_direct_partials() {
        let f = field();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let q = SparsePoly::random_homogeneous(&f, 4, 2, &mut rng);
        let l = Matrix::random(&f, 4, 2, &mut rng);
        let parts = projected_power_partials(&q, 3, &l, 2).unwrap();
        let qm = q.pow(3);
        for alpha in monomial_enumeration(4, 2, MonomialKind::All) {
            let direct = qm.partial_derivative(&alpha).unwrap().compose_affine(&l).unwrap();
            let got = parts.get(&alpha).cloned().unwrap_or_else(|| SparsePoly::zero(&f, 2));
            assert_eq!(got, direct, "alpha = {:?}", alpha.exps());
        }
    }

    #[test]
    fn single_term_satisfies_conditions_one_three_four() {
        let f = field();
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let c = random_circuit(&f, 6, 8, 2, 1, &mut rng).unwrap();
        let r = check_nondegeneracy(&c, 1, 3, 2, &mut rng).unwrap();
        assert!(r.condition(1) && r.condition(3) && r.condition(4), "{:?}", r.checks);
    }

    #[test]
    fn duplicate_terms_fail_condition_one() {
        let f = field();
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let q = SparsePoly::random_homogeneous(&f, 9, 2, &mut rng);
        let c = PowerSumCircuit::new(&f, 9, 2, 4, vec![(f.one(), q.clone()), (f.from_i64(2), q)]).unwrap();
        let r = check_nondegeneracy(&c, 1, 3, 2, &mut rng).unwrap();
        assert!(!r.condition(1));
        let dim_u = r.checks.iter().find(|c| c.quantity == "dimension of U").unwrap();
        let dim_u1 = r.checks.iter().find(|c| c.quantity == "dimension of U_1").unwrap();
        assert_eq!(dim_u.measured, dim_u1.measured);
    }

    #[test]
    fn json_has_per_condition_booleans() {
        let f = field();
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        let c = random_circuit(&f, 9, 8, 2, 2, &mut rng).unwrap();
        let r = check_nondegeneracy(&c, 1, 4, 2, &mut rng).unwrap();
        let j = r.to_json();
        assert_eq!(j.conditions.len(), 4);
        assert_eq!(j.l.len(), 9);
        assert_eq!(j.p[0].len(), 2);
        assert_eq!(j.non_degenerate, r.all_pass());
    }
}
