//! Evaluation oracles and the calculus built on top of them.
//!
//! An [`Oracle`] answers point queries for a vector of polynomials sharing an
//! ambient ring (most oracles have width one). Besides plain evaluation it can
//! return restrictions to lines and truncated Taylor expansions ("jets") along
//! a set of directions. Base oracles that only know how to evaluate inherit
//! both from evaluation: lines by interpolation, jets by polarization over
//! lines. Derived oracles (projections, derivatives, quotients, linear
//! combinations) push jet requests down to their inputs, which keeps nested
//! derivative oracles cheap.

pub mod derived;
pub mod jet;
pub mod native;
pub mod span;

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::algebra::{Field, Matrix, UniPoly};
use crate::error::Result;
use crate::multipoly::{LinearTuple, Monomial};

pub use derived::{
    ClosureBox, Combination, DiffOp, DiffOps, Memo, Metered, Opaque, Project, Quotient, Select,
};
pub use jet::{Jet, JetShape};
pub use native::{PolyBox, PowerSumBox};
pub use span::{express_in_basis, span_basis, SpanBasis};

/// Where an oracle's answers come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    WhiteBox,
    Derived,
    External,
}

pub trait Oracle<F: Field>: Send + Sync {
    fn field(&self) -> &F;
    fn nvars(&self) -> usize;
    /// Number of polynomials answered per query.
    fn width(&self) -> usize {
        1
    }
    /// Upper bound on the total degree of every output.
    fn degree(&self) -> usize;
    fn provenance(&self) -> Provenance;
    fn eval(&self, x: &[F::Elem]) -> Vec<F::Elem>;

    /// Each output restricted to `base + y * dir`.
    fn line(&self, base: &[F::Elem], dir: &[F::Elem]) -> Vec<UniPoly<F>> {
        line_by_interpolation(self, base, dir)
    }

    /// Each output expanded as `p(base + sum_j u_j dirs[j])`, truncated after
    /// total degree `order` in `u`.
    fn jet(&self, base: &[F::Elem], dirs: &[Vec<F::Elem>], order: usize) -> Vec<Jet<F>> {
        polarized_jet(self, base, dirs, order)
    }
}

pub type BlackBox<F> = Arc<dyn Oracle<F>>;

/// Shared query counter.
#[derive(Clone, Debug, Default)]
pub struct QueryCounter(Arc<AtomicU64>);

impl QueryCounter {
    pub fn add(&self, n: u64) {
        self.0.fetch_add(n, Ordering::Relaxed);
    }

    pub fn get(&self) -> u64 {
        self.0.load(Ordering::Relaxed)
    }
}

/// `degree + 1` evaluations at `y = 0, 1, ...` and interpolation.
pub fn line_by_interpolation<F: Field, O: Oracle<F> + ?Sized>(
    o: &O,
    base: &[F::Elem],
    dir: &[F::Elem],
) -> Vec<UniPoly<F>> {
    let f = o.field();
    let d = o.degree();
    let mut values: Vec<Vec<F::Elem>> = vec![Vec::with_capacity(d + 1); o.width()];
    for y in 0..=d {
        let yv = f.from_u64(y as u64);
        let x: Vec<F::Elem> = base.iter().zip(dir).map(|(b, v)| f.add(b, &f.mul(&yv, v))).collect();
        for (slot, v) in values.iter_mut().zip(o.eval(&x)) {
            slot.push(v);
        }
    }
    values
        .iter()
        .map(|vals| UniPoly::interpolate_range(f, vals).expect("abscissae 0..=d are distinct when char > d"))
        .collect()
}

/// Jets recovered from lines along the directions `sum_j c_j dirs[j]` for all
/// non-negative integer vectors `c` with `|c| = order`.
///
/// The degree-`j` coefficient of such a line is the degree-`j` homogeneous
/// part of the jet evaluated at `c`; the points `|c| = order` are unisolvent
/// for every homogeneous degree up to `order`, so each part is recovered by an
/// exact linear solve.
pub fn polarized_jet<F: Field, O: Oracle<F> + ?Sized>(
    o: &O,
    base: &[F::Elem],
    dirs: &[Vec<F::Elem>],
    order: usize,
) -> Vec<Jet<F>> {
    let f = o.field();
    let r = dirs.len();
    let shape = JetShape::get(r, order);
    let k = order.min(o.degree());
    if r == 0 || k == 0 {
        return o.eval(base).into_iter().map(|v| Jet::constant(f, &shape, v)).collect();
    }
    let points: Vec<Vec<u8>> = {
        let full = JetShape::get(r, k);
        (full.prefix_len(k - 1)..full.len()).map(|i| full.monomial(i).to_vec()).collect()
    };
    let lines: Vec<Vec<UniPoly<F>>> = points
        .iter()
        .map(|c| {
            let mut dir = vec![f.zero(); base.len()];
            for (j, &cj) in c.iter().enumerate() {
                if cj > 0 {
                    let cj = f.from_u64(cj as u64);
                    for (acc, v) in dir.iter_mut().zip(&dirs[j]) {
                        f.mul_add_assign(acc, &cj, v);
                    }
                }
            }
            o.line(base, &dir)
        })
        .collect();
    let width = o.width();
    let mut out: Vec<Jet<F>> = (0..width)
        .map(|w| Jet::constant(f, &shape, lines[0][w].coeff(0)))
        .collect();
    for deg in 1..=k {
        let cols: Vec<usize> = (shape.prefix_len(deg - 1)..shape.prefix_len(deg)).collect();
        let rows: Vec<Vec<F::Elem>> = points
            .iter()
            .map(|c| {
                cols.iter()
                    .map(|&ci| {
                        let beta = shape.monomial(ci);
                        let mut v = 1u64;
                        for (cj, bj) in c.iter().zip(beta) {
                            v *= (*cj as u64).pow(*bj as u32);
                        }
                        f.from_u64(v)
                    })
                    .collect()
            })
            .collect();
        let m = Matrix::from_rows(f, rows).expect("rectangular");
        let rhs_cols: Vec<Vec<F::Elem>> = (0..width).map(|w| lines.iter().map(|l| l[w].coeff(deg)).collect()).collect();
        let rhs = Matrix::from_cols(f, points.len(), &rhs_cols).expect("shapes agree");
        let sol = m.solve(&rhs).expect("jet parts are consistent for a polynomial of the stated degree");
        for (w, jet) in out.iter_mut().enumerate() {
            for (row, &ci) in cols.iter().enumerate() {
                jet.coeffs[ci] = sol.particular.get(row, w).clone();
            }
            jet.maxdeg = deg;
        }
    }
    out
}

/// The single output of a width-one oracle.
pub fn eval1<F: Field>(o: &dyn Oracle<F>, x: &[F::Elem]) -> F::Elem {
    o.eval(x).swap_remove(0)
}

/// Oracle for `d^alpha f`.
pub fn derivative_box<F: Field>(f: BlackBox<F>, alpha: &Monomial) -> BlackBox<F> {
    if alpha.degree() == 0 {
        return f;
    }
    Arc::new(DiffOps::new(f, vec![DiffOp::Partial(alpha.clone())]))
}

/// Oracle for `f(L z)`.
pub fn project_box<F: Field>(f: BlackBox<F>, l: &LinearTuple<F>) -> Result<BlackBox<F>> {
    Ok(Arc::new(Project::new(f, l.clone())?))
}

/// The univariate `f(base + y dir)` of a width-one oracle.
pub fn restrict_to_line<F: Field>(f: &dyn Oracle<F>, base: &[F::Elem], dir: &[F::Elem]) -> UniPoly<F> {
    f.line(base, dir).swap_remove(0)
}

/// Uniformly random point of the ambient space.
pub fn random_point<F: Field, R: rand::Rng + ?Sized>(field: &F, n: usize, rng: &mut R) -> Vec<F::Elem> {
    field.random_vec(rng, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{PrimeField, Rationals};
    use crate::multipoly::SparsePoly;
    use num_bigint::BigUint;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn fp() -> PrimeField<2> {
        PrimeField::new(&"170141183460469231731687303715884105727".parse::<BigUint>().unwrap()).unwrap()
    }

    fn mono(e: &[u32]) -> Monomial {
        Monomial(e.to_vec())
    }

    #[test]
    fn derivative_box_examples() {
        let q = Rationals;
        let cube = SparsePoly::from_terms(&q, 2, [(mono(&[3, 0]), q.one())]);
        let fb: BlackBox<Rationals> = Arc::new(PolyBox::new(cube));
        let d2 = derivative_box(fb.clone(), &mono(&[2, 0]));
        assert_eq!(eval1(&*d2, &[q.from_i64(2), q.from_i64(5)]), q.from_i64(12));
        let same = derivative_box(fb.clone(), &mono(&[0, 0]));
        assert_eq!(eval1(&*same, &[q.from_i64(2), q.zero()]), q.from_i64(8));
        // Opaque access takes the interpolation path and must agree.
        let opaque: BlackBox<Rationals> = Arc::new(Opaque::new(fb));
        let d2o = derivative_box(opaque, &mono(&[2, 0]));
        assert_eq!(eval1(&*d2o, &[q.from_i64(2), q.from_i64(5)]), q.from_i64(12));
    }

    #[test]
    fn derivative_box_matches_symbolic_derivative() {
        let f = fp();
        let mut rng = ChaCha20Rng::seed_from_u64(21);
        let p = SparsePoly::random_homogeneous(&f, 3, 5, &mut rng);
        let native: BlackBox<_> = Arc::new(PolyBox::new(p.clone()));
        let opaque: BlackBox<_> = Arc::new(Opaque::new(native.clone()));
        for alpha in [mono(&[1, 0, 0]), mono(&[0, 2, 1]), mono(&[1, 1, 1]), mono(&[6, 0, 0])] {
            let sym = p.partial_derivative(&alpha).unwrap();
            let a = derivative_box(native.clone(), &alpha);
            let b = derivative_box(opaque.clone(), &alpha);
            for _ in 0..50 {
                let x = random_point(&f, 3, &mut rng);
                let want = sym.evaluate(&x).unwrap();
                assert_eq!(eval1(&*a, &x), want);
                assert_eq!(eval1(&*b, &x), want);
            }
        }
    }

    #[test]
    fn iterated_derivatives_compose() {
        let f = fp();
        let mut rng = ChaCha20Rng::seed_from_u64(22);
        let p = SparsePoly::random_homogeneous(&f, 3, 5, &mut rng);
        let base: BlackBox<_> = Arc::new(Opaque::new(Arc::new(PolyBox::new(p))));
        let (a, b) = (mono(&[1, 0, 1]), mono(&[0, 1, 1]));
        let twice = derivative_box(derivative_box(base.clone(), &a), &b);
        let once = derivative_box(base, &a.mul(&b));
        for _ in 0..50 {
            let x = random_point(&f, 3, &mut rng);
            assert_eq!(eval1(&*twice, &x), eval1(&*once, &x));
        }
    }

    #[test]
    fn project_box_examples() {
        let f = fp();
        let mut rng = ChaCha20Rng::seed_from_u64(23);
        let p = SparsePoly::random_homogeneous(&f, 3, 3, &mut rng).add(&SparsePoly::constant(&f, 3, f.from_i64(7))).unwrap();
        let fb: BlackBox<_> = Arc::new(PolyBox::new(p.clone()));
        let id = project_box(fb.clone(), &Matrix::identity(&f, 3)).unwrap();
        let x = random_point(&f, 3, &mut rng);
        assert_eq!(id.eval(&x), fb.eval(&x));
        let zero = project_box(fb.clone(), &Matrix::zeros(&f, 3, 2)).unwrap();
        assert_eq!(eval1(&*zero, &random_point(&f, 2, &mut rng)), f.from_i64(7));
        let l = Matrix::random(&f, 3, 2, &mut rng);
        let sym = p.compose_affine(&l).unwrap();
        let pb = project_box(fb, &l).unwrap();
        for _ in 0..50 {
            let z = random_point(&f, 2, &mut rng);
            assert_eq!(eval1(&*pb, &z), sym.evaluate(&z).unwrap());
        }
        assert!(project_box(pb, &Matrix::identity(&f, 3)).is_err());
    }

    #[test]
    fn restrict_to_line_examples() {
        let q = Rationals;
        let sq = SparsePoly::from_terms(&q, 2, [(mono(&[2, 0]), q.one())]);
        let fb = PolyBox::new(sq);
        let line = restrict_to_line(&fb, &[q.zero(), q.zero()], &[q.one(), q.zero()]);
        assert_eq!(line, UniPoly::from_i64s(&q, &[0, 0, 1]));
        let flat = restrict_to_line(&fb, &[q.from_i64(3), q.one()], &[q.zero(), q.zero()]);
        assert_eq!(flat, UniPoly::from_i64s(&q, &[9]));
    }

    #[test]
    fn line_restriction_matches_substitution() {
        let f = fp();
        let mut rng = ChaCha20Rng::seed_from_u64(24);
        let p = SparsePoly::random_homogeneous(&f, 4, 4, &mut rng);
        let fb = Opaque::new(Arc::new(PolyBox::new(p.clone())));
        let base = random_point(&f, 4, &mut rng);
        let dir = random_point(&f, 4, &mut rng);
        // Substitute x = base + y dir symbolically: a 1-column affine map plus constants.
        let line = restrict_to_line(&fb, &base, &dir);
        for _ in 0..10 {
            let y = f.random(&mut rng);
            let x: Vec<_> = base.iter().zip(&dir).map(|(b, v)| f.add(b, &f.mul(&y, v))).collect();
            assert_eq!(line.eval(&y), p.evaluate(&x).unwrap());
        }
        assert!(line.degree().unwrap() <= 4);
    }

    #[test]
    fn polarized_and_native_jets_agree() {
        let f = fp();
        let mut rng = ChaCha20Rng::seed_from_u64(25);
        let p = SparsePoly::random_homogeneous(&f, 4, 3, &mut rng);
        let native = PolyBox::new(p);
        let base = random_point(&f, 4, &mut rng);
        let dirs: Vec<_> = (0..3).map(|_| random_point(&f, 4, &mut rng)).collect();
        for order in 0..=4 {
            let a = native.jet(&base, &dirs, order);
            let b = polarized_jet(&native, &base, &dirs, order);
            assert_eq!(a[0].coeffs, b[0].coeffs, "order {order}");
        }
    }

    #[test]
    fn homogeneity_of_white_box_oracles() {
        let f = fp();
        let mut rng = ChaCha20Rng::seed_from_u64(26);
        let p = SparsePoly::random_homogeneous(&f, 5, 4, &mut rng);
        let fb = PolyBox::new(p);
        for _ in 0..20 {
            let a = random_point(&f, 5, &mut rng);
            let lam = f.random(&mut rng);
            let la: Vec<_> = a.iter().map(|x| f.mul(x, &lam)).collect();
            assert_eq!(eval1(&fb, &la), f.mul(&f.pow(&lam, 4), &eval1(&fb, &a)));
        }
    }
}
