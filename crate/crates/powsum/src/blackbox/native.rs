//! White-box oracles that answer line and jet queries from the coefficients.

use std::sync::Arc;

use super::jet::{Jet, JetShape};
use super::{Oracle, Provenance};
use crate::algebra::{Field, UniPoly};
use crate::multipoly::SparsePoly;

/// Recursive Horner layout: `c + sum_(v, child) x_v * child`, where a child
/// under variable `v` only mentions variables `>= v`.
#[derive(Clone, Debug)]
struct Node<E> {
    c: E,
    kids: Vec<(u32, Node<E>)>,
    height: usize,
}

fn build<F: Field>(field: &F, terms: Vec<(Vec<u32>, F::Elem)>, lo: usize) -> Node<F::Elem> {
    let mut c = field.zero();
    let mut groups: std::collections::BTreeMap<usize, Vec<(Vec<u32>, F::Elem)>> = Default::default();
    for (mut e, coeff) in terms {
        match e.iter().skip(lo).position(|&k| k > 0) {
            None => c = field.add(&c, &coeff),
            Some(off) => {
                let v = lo + off;
                e[v] -= 1;
                groups.entry(v).or_default().push((e, coeff));
            }
        }
    }
    let kids: Vec<(u32, Node<F::Elem>)> =
        groups.into_iter().map(|(v, ts)| (v as u32, build(field, ts, v))).collect();
    let height = kids.iter().map(|(_, k)| k.height + 1).max().unwrap_or(0);
    Node { c, kids, height }
}

/// Per-variable affine jet data: value at the base and sparse direction row.
struct Affine<E> {
    base: Vec<E>,
    lin: Vec<Vec<(u32, E)>>,
}

fn eval_scalar<F: Field>(field: &F, node: &Node<F::Elem>, x: &[F::Elem]) -> F::Elem {
    let mut acc = node.c.clone();
    for (v, kid) in &node.kids {
        let k = eval_scalar(field, kid, x);
        field.mul_add_assign(&mut acc, &k, &x[*v as usize]);
    }
    acc
}

fn eval_jet<F: Field>(field: &F, node: &Node<F::Elem>, a: &Affine<F::Elem>, shape: &Arc<JetShape>) -> Jet<F> {
    let mut acc = Jet::constant(field, shape, node.c.clone());
    for (v, kid) in &node.kids {
        let v = *v as usize;
        if kid.kids.is_empty() {
            // Leaf: add c * (b_v + lin_v . u) without building a jet.
            let c = &kid.c;
            field.mul_add_assign(&mut acc.coeffs[0], c, &a.base[v]);
            if shape.order >= 1 {
                for (j, l) in &a.lin[v] {
                    field.mul_add_assign(&mut acc.coeffs[1 + *j as usize], c, l);
                }
                if !a.lin[v].is_empty() {
                    acc.maxdeg = acc.maxdeg.max(1);
                }
            }
        } else {
            let kj = eval_jet(field, kid, a, shape);
            acc.add_mul_affine(field, &kj, &a.base[v], &a.lin[v]);
        }
    }
    acc
}

fn affine_data<F: Field>(field: &F, base: &[F::Elem], dirs: &[Vec<F::Elem>]) -> Affine<F::Elem> {
    let n = base.len();
    let lin = (0..n)
        .map(|i| {
            dirs.iter()
                .enumerate()
                .filter(|(_, d)| !field.is_zero(&d[i]))
                .map(|(j, d)| (j as u32, d[i].clone()))
                .collect()
        })
        .collect();
    Affine { base: base.to_vec(), lin }
}

/// A sparse polynomial exposed as an oracle.
pub struct PolyBox<F: Field> {
    poly: SparsePoly<F>,
    tree: Node<F::Elem>,
    degree: usize,
}

impl<F: Field> PolyBox<F> {
    pub fn new(poly: SparsePoly<F>) -> Self {
        let terms = poly.terms().map(|(m, c)| (m.exps().to_vec(), c.clone())).collect();
        let tree = build(poly.field(), terms, 0);
        let degree = poly.degree().unwrap_or(0) as usize;
        PolyBox { poly, tree, degree }
    }

    pub fn poly(&self) -> &SparsePoly<F> {
        &self.poly
    }

    fn jet1(&self, base: &[F::Elem], dirs: &[Vec<F::Elem>], order: usize) -> Jet<F> {
        let f = self.poly.field();
        let shape = JetShape::get(dirs.len(), order);
        if dirs.is_empty() || order == 0 {
            return Jet::constant(f, &shape, eval_scalar(f, &self.tree, base));
        }
        eval_jet(f, &self.tree, &affine_data(f, base, dirs), &shape)
    }
}

impl<F: Field> Oracle<F> for PolyBox<F> {
    fn field(&self) -> &F {
        self.poly.field()
    }
    fn nvars(&self) -> usize {
        self.poly.nvars()
    }
    fn degree(&self) -> usize {
        self.degree
    }
    fn provenance(&self) -> Provenance {
        Provenance::WhiteBox
    }
    fn eval(&self, x: &[F::Elem]) -> Vec<F::Elem> {
        vec![eval_scalar(self.poly.field(), &self.tree, x)]
    }
    fn line(&self, base: &[F::Elem], dir: &[F::Elem]) -> Vec<UniPoly<F>> {
        let j = self.jet1(base, &[dir.to_vec()], self.degree);
        vec![UniPoly::new(self.field(), j.coeffs)]
    }
    fn jet(&self, base: &[F::Elem], dirs: &[Vec<F::Elem>], order: usize) -> Vec<Jet<F>> {
        vec![self.jet1(base, dirs, order)]
    }
}

/// `sum_i c_i Q_i^m` answered from the `Q_i` directly.
pub struct PowerSumBox<F: Field> {
    field: F,
    n: usize,
    m: u32,
    terms: Vec<(F::Elem, PolyBox<F>)>,
    degree: usize,
}

impl<F: Field> PowerSumBox<F> {
    pub fn new(field: &F, n: usize, m: u32, terms: Vec<(F::Elem, SparsePoly<F>)>) -> Self {
        let degree = terms.iter().map(|(_, q)| q.degree().unwrap_or(0) as usize).max().unwrap_or(0) * m as usize;
        let terms = terms.into_iter().map(|(c, q)| (c, PolyBox::new(q))).collect();
        PowerSumBox { field: field.clone(), n, m, terms, degree }
    }
}

impl<F: Field> Oracle<F> for PowerSumBox<F> {
    fn field(&self) -> &F {
        &self.field
    }
    fn nvars(&self) -> usize {
        self.n
    }
    fn degree(&self) -> usize {
        self.degree
    }
    fn provenance(&self) -> Provenance {
        Provenance::WhiteBox
    }
    fn eval(&self, x: &[F::Elem]) -> Vec<F::Elem> {
        let f = &self.field;
        let mut acc = f.zero();
        for (c, q) in &self.terms {
            let v = f.pow(&eval_scalar(f, &q.tree, x), self.m as u64);
            f.mul_add_assign(&mut acc, c, &v);
        }
        vec![acc]
    }
    fn line(&self, base: &[F::Elem], dir: &[F::Elem]) -> Vec<UniPoly<F>> {
        let j = self.jet(base, &[dir.to_vec()], self.degree).swap_remove(0);
        vec![UniPoly::new(&self.field, j.coeffs)]
    }
    fn jet(&self, base: &[F::Elem], dirs: &[Vec<F::Elem>], order: usize) -> Vec<Jet<F>> {
        let f = &self.field;
        let shape = JetShape::get(dirs.len(), order);
        if dirs.is_empty() || order == 0 {
            return vec![Jet::constant(f, &shape, self.eval(base).swap_remove(0))];
        }
        let aff = affine_data(f, base, dirs);
        let mut acc = Jet::zero(f, &shape);
        for (c, q) in &self.terms {
            let qj = eval_jet(f, &q.tree, &aff, &shape);
            acc.add_scaled(f, c, &qj.pow(f, self.m));
        }
        vec![acc]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::PrimeField;
    use crate::blackbox::{eval1, polarized_jet, random_point};
    use num_bigint::BigUint;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn power_sum_box_matches_expanded_polynomial() {
        let f = PrimeField::<1>::new(&BigUint::from(1_000_000_007u64)).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(41);
        let qs: Vec<_> = (0..2).map(|_| SparsePoly::random_homogeneous(&f, 3, 2, &mut rng)).collect();
        let cs = [f.from_i64(3), f.from_i64(-2)];
        let expanded = qs[0].pow(3).scale(&cs[0]).add(&qs[1].pow(3).scale(&cs[1])).unwrap();
        let ps = PowerSumBox::new(&f, 3, 3, cs.iter().cloned().zip(qs).collect());
        let pb = PolyBox::new(expanded);
        let base = random_point(&f, 3, &mut rng);
        assert_eq!(eval1(&ps, &base), eval1(&pb, &base));
        let dirs: Vec<_> = (0..2).map(|_| random_point(&f, 3, &mut rng)).collect();
        for order in [1, 2, 4] {
            assert_eq!(ps.jet(&base, &dirs, order)[0].coeffs, pb.jet(&base, &dirs, order)[0].coeffs);
            assert_eq!(ps.jet(&base, &dirs, order)[0].coeffs, polarized_jet(&pb, &base, &dirs, order)[0].coeffs);
        }
        assert_eq!(ps.line(&base, &dirs[0]), pb.line(&base, &dirs[0]));
    }
}
