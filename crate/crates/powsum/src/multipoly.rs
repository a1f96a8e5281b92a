//! Sparse multivariate polynomials.
//!
//! Terms live in a `BTreeMap` keyed by [`Monomial`], whose ordering is graded
//! lexicographic: lower total degree first, and within a degree the monomial
//! with the larger exponent on the earliest variable first (`x1^2 < x1 x2 <
//! x2^2`).

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::algebra::{Field, Matrix};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(n: usize) -> Self {
        Monomial(vec![0; n])
    }

    pub fn var(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        Monomial(e)
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn mul(&self, other: &Self) -> Self {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self / other` when `other` divides `self`.
    pub fn div(&self, other: &Self) -> Option<Self> {
        self.0.iter().zip(&other.0).map(|(a, b)| a.checked_sub(*b)).collect::<Option<Vec<_>>>().map(Monomial)
    }

    /// `prod e_i!`.
    pub fn factorial(&self) -> u128 {
        self.0.iter().map(|&e| (1..=e as u128).product::<u128>()).product()
    }

    pub fn is_multilinear(&self) -> bool {
        self.0.iter().all(|&e| e <= 1)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            for (a, b) in self.0.iter().zip(&other.0) {
                if a != b {
                    return b.cmp(a);
                }
            }
            self.0.len().cmp(&other.0.len())
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Which monomials `monomial_enumeration` lists.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MonomialKind {
    All,
    Multilinear,
    /// `u_{1,j1} u_{2,j2} ... u_{d,jd}` with `j1 <= ... <= jd` over `d` blocks
    /// of `n` variables; block `i` occupies indices `i*n .. (i+1)*n`.
    SetMultilinearNondecreasing,
}

/// All monomials of the requested kind and degree, sorted in graded-lex order.
pub fn monomial_enumeration(n: usize, d: usize, kind: MonomialKind) -> Vec<Monomial> {
    let mut out = Vec::new();
    match kind {
        MonomialKind::All => {
            let mut cur = vec![0u32; n];
            fill_all(&mut cur, 0, d as u32, &mut out);
        }
        MonomialKind::Multilinear => {
            let mut cur = vec![0u32; n];
            fill_multilinear(&mut cur, 0, d, &mut out);
        }
        MonomialKind::SetMultilinearNondecreasing => {
            if n == 0 && d > 0 {
                return out;
            }
            let mut js = Vec::with_capacity(d);
            fill_nondecreasing(n, d, 0, &mut js, &mut out);
        }
    }
    out.sort();
    out
}

fn fill_all(cur: &mut Vec<u32>, i: usize, left: u32, out: &mut Vec<Monomial>) {
    if i + 1 >= cur.len() {
        if cur.is_empty() {
            if left == 0 {
                out.push(Monomial(Vec::new()));
            }
            return;
        }
        cur[i] = left;
        out.push(Monomial(cur.clone()));
        cur[i] = 0;
        return;
    }
    for e in (0..=left).rev() {
        cur[i] = e;
        fill_all(cur, i + 1, left - e, out);
    }
    cur[i] = 0;
}

fn fill_multilinear(cur: &mut Vec<u32>, i: usize, left: usize, out: &mut Vec<Monomial>) {
    if left == 0 {
        out.push(Monomial(cur.clone()));
        return;
    }
    if cur.len() - i < left {
        return;
    }
    cur[i] = 1;
    fill_multilinear(cur, i + 1, left - 1, out);
    cur[i] = 0;
    fill_multilinear(cur, i + 1, left, out);
}

fn fill_nondecreasing(n: usize, d: usize, lo: usize, js: &mut Vec<usize>, out: &mut Vec<Monomial>) {
    if js.len() == d {
        let mut e = vec![0u32; n * d];
        for (block, &j) in js.iter().enumerate() {
            e[block * n + j] = 1;
        }
        out.push(Monomial(e));
        return;
    }
    for j in lo..n {
        js.push(j);
        fill_nondecreasing(n, d, j, js, out);
        js.pop();
    }
}

/// `binom(n, k)` as `u128`, zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// `m` linear forms in `n_out` variables, stored as an `m x n_out` matrix;
/// row `i` is the image of source variable `i`.
pub type LinearTuple<F> = Matrix<F>;

#[derive(Clone, Debug)]
pub struct SparsePoly<F: Field> {
    field: F,
    n: usize,
    terms: BTreeMap<Monomial, F::Elem>,
}

impl<F: Field> PartialEq for SparsePoly<F> {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.terms == other.terms
    }
}

impl<F: Field> Eq for SparsePoly<F> {}

impl<F: Field> SparsePoly<F> {
    pub fn zero(field: &F, n: usize) -> Self {
        SparsePoly { field: field.clone(), n, terms: BTreeMap::new() }
    }

    pub fn constant(field: &F, n: usize, c: F::Elem) -> Self {
        Self::from_terms(field, n, [(Monomial::one(n), c)])
    }

    pub fn var(field: &F, n: usize, i: usize) -> Self {
        Self::from_terms(field, n, [(Monomial::var(n, i), field.one())])
    }

    /// The linear form `sum_i c_i x_i`.
    pub fn linear_form(field: &F, coeffs: &[F::Elem]) -> Self {
        let n = coeffs.len();
        Self::from_terms(field, n, coeffs.iter().enumerate().map(|(i, c)| (Monomial::var(n, i), c.clone())))
    }

    /// Sums coefficients of repeated monomials and drops zeros.
    pub fn from_terms(field: &F, n: usize, terms: impl IntoIterator<Item = (Monomial, F::Elem)>) -> Self {
        let mut p = Self::zero(field, n);
        for (m, c) in terms {
            assert_eq!(m.nvars(), n, "monomial arity");
            p.add_term(m, &c);
        }
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: &F::Elem) {
        if self.field.is_zero(c) {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v = self.field.add(v, c);
                if self.field.is_zero(v) {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c.clone());
            }
        }
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &F::Elem)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &Monomial) -> F::Elem {
        self.terms.get(m).cloned().unwrap_or_else(|| self.field.zero())
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    /// The common degree of all terms, if there is one (zero counts as
    /// homogeneous of every degree and reports `None`).
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut it = self.terms.keys().map(Monomial::degree);
        let first = it.next()?;
        it.all(|d| d == first).then_some(first)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.is_zero() || self.homogeneous_degree().is_some()
    }

    pub fn is_multilinear(&self) -> bool {
        self.terms.keys().all(Monomial::is_multilinear)
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!("{} vs {} variables", self.n, other.n)));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.map_coeffs(|f, c| f.neg(c))
    }

    pub fn scale(&self, s: &F::Elem) -> Self {
        self.map_coeffs(|f, c| f.mul(c, s))
    }

    fn map_coeffs(&self, op: impl Fn(&F, &F::Elem) -> F::Elem) -> Self {
        Self::from_terms(&self.field, self.n, self.terms.iter().map(|(m, c)| (m.clone(), op(&self.field, c))))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let f = &self.field;
        let mut out = Self::zero(f, self.n);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), &f.mul(ca, cb));
            }
        }
        Ok(out)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::constant(&self.field, self.n, self.field.one());
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).expect("same ring");
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base).expect("same ring");
            }
        }
        acc
    }

    pub fn evaluate(&self, point: &[F::Elem]) -> Result<F::Elem> {
        if point.len() != self.n {
            return Err(Error::DimensionMismatch(format!("point of length {} for {} variables", point.len(), self.n)));
        }
        let f = &self.field;
        let mut acc = f.zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(&m.0) {
                if e > 0 {
                    t = f.mul(&t, &f.pow(x, e as u64));
                }
            }
            acc = f.add(&acc, &t);
        }
        Ok(acc)
    }

    /// `d^alpha f` with falling-factorial coefficients.
    pub fn partial_derivative(&self, alpha: &Monomial) -> Result<Self> {
        if alpha.nvars() != self.n {
            return Err(Error::DimensionMismatch("multi-index arity".into()));
        }
        let f = &self.field;
        let mut out = Self::zero(f, self.n);
        for (m, c) in &self.terms {
            let Some(rest) = m.div(alpha) else { continue };
            let mut coeff = c.clone();
            for (&e, &a) in m.0.iter().zip(&alpha.0) {
                for j in 0..a {
                    coeff = f.mul(&coeff, &f.from_u64((e - j) as u64));
                }
            }
            out.add_term(rest, &coeff);
        }
        Ok(out)
    }

    /// `f(l_1(z), ..., l_n(z))` where row `i` of `l` gives `l_i`.
    pub fn compose_affine(&self, l: &LinearTuple<F>) -> Result<Self> {
        if l.rows() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "{} linear forms for {} variables",
                l.rows(),
                self.n
            )));
        }
        let f = &self.field;
        let n_out = l.cols();
        let forms: Vec<Self> = (0..self.n).map(|i| Self::linear_form(f, l.row(i))).collect();
        let mut powers: Vec<Vec<Self>> = forms.iter().map(|p| vec![Self::constant(f, n_out, f.one()), p.clone()]).collect();
        let mut out = Self::zero(f, n_out);
        for (m, c) in &self.terms {
            let mut t = Self::constant(f, n_out, c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[i].len() <= e as usize {
                    let next = powers[i].last().expect("seeded").mul(&forms[i])?;
                    powers[i].push(next);
                }
                t = t.mul(&powers[i][e as usize])?;
            }
            out = out.add(&t)?;
        }
        Ok(out)
    }

    /// Coefficients listed against the given monomials.
    pub fn coeff_vector(&self, monos: &[Monomial]) -> Vec<F::Elem> {
        monos.iter().map(|m| self.coefficient(m)).collect()
    }

    pub fn from_coeff_vector(field: &F, n: usize, monos: &[Monomial], coeffs: &[F::Elem]) -> Self {
        Self::from_terms(field, n, monos.iter().cloned().zip(coeffs.iter().cloned()))
    }

    /// Embeds into a ring with more variables; variable `i` goes to `map[i]`.
    pub fn rename_vars(&self, n_new: usize, map: &[usize]) -> Self {
        Self::from_terms(
            &self.field,
            n_new,
            self.terms.iter().map(|(m, c)| {
                let mut e = vec![0u32; n_new];
                for (i, &k) in m.0.iter().enumerate() {
                    e[map[i]] += k;
                }
                (Monomial(e), c.clone())
            }),
        )
    }

    /// Sets variable `i` to zero.
    pub fn restrict_zero(&self, i: usize) -> Self {
        Self::from_terms(
            &self.field,
            self.n,
            self.terms.iter().filter(|(m, _)| m.0[i] == 0).map(|(m, c)| (m.clone(), c.clone())),
        )
    }

    pub fn to_json(&self) -> SparsePolyJson {
        SparsePolyJson {
            n: self.n,
            terms: self.terms.iter().map(|(m, c)| TermJson { exps: m.0.clone(), coeff: self.field.format(c) }).collect(),
        }
    }

    pub fn from_json(field: &F, j: &SparsePolyJson) -> Result<Self> {
        let mut out = Self::zero(field, j.n);
        for t in &j.terms {
            if t.exps.len() != j.n {
                return Err(Error::Parse(format!("exponent vector of length {} for n = {}", t.exps.len(), j.n)));
            }
            out.add_term(Monomial(t.exps.clone()), &field.parse(&t.coeff)?);
        }
        Ok(out)
    }

    pub fn random_homogeneous<R: rand::Rng + ?Sized>(field: &F, n: usize, deg: usize, rng: &mut R) -> Self {
        let monos = monomial_enumeration(n, deg, MonomialKind::All);
        let coeffs = field.random_vec(rng, monos.len());
        Self::from_coeff_vector(field, n, &monos, &coeffs)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub exps: Vec<u32>,
    pub coeff: String,
}

/// Wire format `{"n": .., "terms": [{"exps": [..], "coeff": ".."}]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparsePolyJson {
    pub n: usize,
    pub terms: Vec<TermJson>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{PrimeField, Rationals};
    use num_bigint::BigUint;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn fp() -> PrimeField<1> {
        PrimeField::new(&BigUint::from(1_000_000_007u64)).unwrap()
    }

    fn mono(e: &[u32]) -> Monomial {
        Monomial(e.to_vec())
    }

    fn random_poly(f: &PrimeField<1>, n: usize, maxdeg: usize, terms: usize, rng: &mut ChaCha20Rng) -> SparsePoly<PrimeField<1>> {
        use rand::Rng;
        SparsePoly::from_terms(
            f,
            n,
            (0..terms).map(|_| {
                let mut e = vec![0u32; n];
                for _ in 0..rng.gen_range(0..=maxdeg) {
                    e[rng.gen_range(0..n)] += 1;
                }
                (Monomial(e), f.random(rng))
            }),
        )
    }

    #[test]
    fn evaluation_examples() {
        let q = Rationals;
        let p = SparsePoly::from_terms(&q, 2, [(mono(&[2, 1]), q.one())]);
        assert_eq!(p.evaluate(&[q.from_i64(2), q.from_i64(3)]).unwrap(), q.from_i64(12));
        assert_eq!(SparsePoly::zero(&q, 2).evaluate(&[q.one(), q.one()]).unwrap(), q.zero());
        assert!(p.evaluate(&[q.one()]).is_err());
    }

    #[test]
    fn evaluation_matches_term_sum() {
        let f = fp();
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        let p = SparsePoly::random_homogeneous(&f, 4, 4, &mut rng);
        let x = f.random_vec(&mut rng, 4);
        // Independent oracle: multiply exponents out one factor at a time.
        let mut acc = f.zero();
        for (m, c) in p.terms() {
            let mut t = *c;
            for (i, &e) in m.exps().iter().enumerate() {
                for _ in 0..e {
                    t = f.mul(&t, &x[i]);
                }
            }
            acc = f.add(&acc, &t);
        }
        assert_eq!(p.evaluate(&x).unwrap(), acc);
    }

    #[test]
    fn derivative_examples() {
        let q = Rationals;
        let p = SparsePoly::from_terms(&q, 2, [(mono(&[2, 1]), q.one())]);
        let d = p.partial_derivative(&mono(&[1, 0])).unwrap();
        assert_eq!(d, SparsePoly::from_terms(&q, 2, [(mono(&[1, 1]), q.from_i64(2))]));
        let xy = SparsePoly::from_terms(&q, 2, [(mono(&[1, 1]), q.one())]);
        assert_eq!(xy.partial_derivative(&mono(&[1, 1])).unwrap(), SparsePoly::constant(&q, 2, q.one()));
    }

    #[test]
    fn derivatives_of_a_power_of_a_linear_form_are_proportional() {
        let f = fp();
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let n = 4;
        let l = SparsePoly::linear_form(&f, &f.random_vec(&mut rng, n));
        let d = 6;
        let ld = l.pow(d);
        for alpha in monomial_enumeration(n, 2, MonomialKind::All) {
            let der = ld.partial_derivative(&alpha).unwrap();
            let lower = l.pow(d - 2);
            // Every coefficient ratio is the same scalar.
            let (m0, c0) = lower.terms().next().unwrap();
            let ratio = f.div(&der.coefficient(m0), c0).unwrap();
            assert_eq!(der, lower.scale(&ratio));
        }
    }

    #[test]
    fn compose_examples() {
        let q = Rationals;
        let xy = SparsePoly::from_terms(&q, 2, [(mono(&[1, 1]), q.one())]);
        let l = Matrix::from_i64(&q, &[&[1, 0], &[1, 1]]);
        let want = SparsePoly::from_terms(&q, 2, [(mono(&[2, 0]), q.one()), (mono(&[1, 1]), q.one())]);
        assert_eq!(xy.compose_affine(&l).unwrap(), want);
        assert_eq!(xy.compose_affine(&Matrix::identity(&q, 2)).unwrap(), xy);
        assert!(xy.compose_affine(&Matrix::identity(&q, 3)).is_err());
    }

    #[test]
    fn composition_commutes_with_evaluation() {
        let f = fp();
        let mut rng = ChaCha20Rng::seed_from_u64(10);
        let p = random_poly(&f, 4, 4, 12, &mut rng);
        let l = Matrix::random(&f, 4, 3, &mut rng);
        let c = p.compose_affine(&l).unwrap();
        for _ in 0..100 {
            let a = f.random_vec(&mut rng, 3);
            let la = l.mul_vec(&a).unwrap();
            assert_eq!(c.evaluate(&a).unwrap(), p.evaluate(&la).unwrap());
        }
    }

    #[test]
    fn enumeration_examples() {
        let all = monomial_enumeration(2, 2, MonomialKind::All);
        assert_eq!(all, vec![mono(&[2, 0]), mono(&[1, 1]), mono(&[0, 2])]);
        assert_eq!(monomial_enumeration(4, 2, MonomialKind::Multilinear).len(), 6);
        let nd = monomial_enumeration(2, 3, MonomialKind::SetMultilinearNondecreasing);
        // j1 <= j2 <= j3 over {0, 1}: 000, 001, 011, 111.
        assert_eq!(nd.len(), 4);
        for m in &nd {
            assert_eq!(m.nvars(), 6);
            let js: Vec<usize> = (0..3).map(|b| (0..2).find(|&j| m.0[b * 2 + j] == 1).unwrap()).collect();
            assert!(js.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn enumeration_counts_match_binomials() {
        for n in 1..6u64 {
            for d in 0..5u64 {
                let all = monomial_enumeration(n as usize, d as usize, MonomialKind::All);
                assert_eq!(all.len() as u128, binomial(n + d - 1, d));
                let ml = monomial_enumeration(n as usize, d as usize, MonomialKind::Multilinear);
                assert_eq!(ml.len() as u128, binomial(n, d));
                let nd = monomial_enumeration(n as usize, d as usize, MonomialKind::SetMultilinearNondecreasing);
                assert_eq!(nd.len() as u128, binomial(d + n - 1, n - 1));
                for list in [&all, &ml, &nd] {
                    assert!(list.windows(2).all(|w| w[0] < w[1]), "sorted and duplicate-free");
                }
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let q = Rationals;
        let p = SparsePoly::from_terms(&q, 2, [(mono(&[1, 1]), q.parse("-3/4").unwrap()), (mono(&[0, 0]), q.one())]);
        let s = serde_json::to_string(&p.to_json()).unwrap();
        assert_eq!(s, r#"{"n":2,"terms":[{"exps":[0,0],"coeff":"1"},{"exps":[1,1],"coeff":"-3/4"}]}"#);
        let back: SparsePolyJson = serde_json::from_str(&s).unwrap();
        assert_eq!(SparsePoly::from_json(&q, &back).unwrap(), p);
    }

    proptest! {
        #[test]
        fn differentiation_commutes(seed in any::<u64>(), a in prop::collection::vec(0u32..3, 3), b in prop::collection::vec(0u32..3, 3)) {
            prop_assume!(a.iter().sum::<u32>() + b.iter().sum::<u32>() <= 4);
            let f = fp();
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let p = random_poly(&f, 3, 6, 10, &mut rng);
            let (ma, mb) = (Monomial(a), Monomial(b));
            let lhs = p.partial_derivative(&mb).unwrap().partial_derivative(&ma).unwrap();
            prop_assert_eq!(lhs, p.partial_derivative(&ma.mul(&mb)).unwrap());
        }

        #[test]
        fn composition_is_multiplicative(seed in any::<u64>()) {
            let f = fp();
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let p = random_poly(&f, 3, 3, 5, &mut rng);
            let q = random_poly(&f, 3, 3, 5, &mut rng);
            let l = Matrix::random(&f, 3, 2, &mut rng);
            let lhs = p.mul(&q).unwrap().compose_affine(&l).unwrap();
            let rhs = p.compose_affine(&l).unwrap().mul(&q.compose_affine(&l).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn homogeneity_is_preserved(seed in any::<u64>(), deg in 2usize..5) {
            let f = fp();
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let p = SparsePoly::random_homogeneous(&f, 3, deg, &mut rng);
            let d = p.partial_derivative(&Monomial(vec![1, 0, 0])).unwrap();
            prop_assert_eq!(d.homogeneous_degree(), Some(deg as u32 - 1));
            let l = Matrix::random(&f, 3, 2, &mut rng);
            prop_assert_eq!(p.compose_affine(&l).unwrap().homogeneous_degree(), Some(deg as u32));
        }
    }
}
