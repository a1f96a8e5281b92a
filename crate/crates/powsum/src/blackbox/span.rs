//! Bases of spans of oracles, computed from evaluations only.

use std::sync::Arc;

use rand::Rng;

use super::{random_point, BlackBox, Select};
use crate::algebra::{Field, Matrix};
use crate::error::{Error, Result};

/// Fresh points used to certify a basis or an expression in it.
const CERTIFY_POINTS: usize = 2;
const RETRIES: usize = 6;

/// An independent subset of a generator family together with points at which
/// its evaluation matrix is invertible.
#[derive(Clone)]
pub struct SpanBasis<F: Field> {
    pub generators: BlackBox<F>,
    /// Indices (into the generator outputs) of the basis elements.
    pub indices: Vec<usize>,
    /// The basis elements as one oracle of width `dim`.
    pub elements: BlackBox<F>,
    pub witness_points: Vec<Vec<F::Elem>>,
    /// `eval_matrix[p][j]` is element `j` at witness point `p`; square, invertible.
    pub eval_matrix: Matrix<F>,
    eval_inverse: Matrix<F>,
    /// Generator `g` equals `sum_j coeff_matrix[j][g] * element_j`.
    pub coeff_matrix: Matrix<F>,
    /// The random points the basis was found from and the generator values
    /// there (one row per point). Callers may reuse them as fresh samples.
    pub sample_points: Vec<Vec<F::Elem>>,
    pub sample_values: Matrix<F>,
}

impl<F: Field> SpanBasis<F> {
    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    pub fn field(&self) -> &F {
        self.generators.field()
    }

    /// Coefficients of a vector of values at the witness points.
    pub fn coords_from_witness_values(&self, values: &Matrix<F>) -> Matrix<F> {
        self.eval_inverse.mul(values).expect("shapes agree")
    }
}

fn eval_rows<F: Field>(o: &BlackBox<F>, points: &[Vec<F::Elem>]) -> Matrix<F> {
    let rows: Vec<Vec<F::Elem>> = points.iter().map(|p| o.eval(p)).collect();
    if rows.is_empty() {
        return Matrix::zeros(o.field(), 0, o.width());
    }
    Matrix::from_rows(o.field(), rows).expect("oracle width is constant")
}

/// Computes a basis of the span of the outputs of `gens`.
///
/// Evaluates at `width` random points first and adds points only when the
/// sample looks rank deficient or a certification at fresh points fails.
pub fn span_basis<F: Field, R: Rng + ?Sized>(gens: BlackBox<F>, rng: &mut R) -> Result<SpanBasis<F>> {
    let f = gens.field().clone();
    let r = gens.width();
    let n = gens.nvars();
    let mut npts = r.max(1);
    for _ in 0..RETRIES {
        let points: Vec<Vec<F::Elem>> = (0..npts).map(|_| random_point(&f, n, rng)).collect();
        let e = eval_rows(&gens, &points);
        let indices = e.rref().pivots;
        let rank = indices.len();
        if rank == npts && npts < r {
            // Every sampled point was independent, so more may be needed.
            npts = (2 * npts).min(r);
            continue;
        }
        let sub = Matrix::from_cols(&f, npts, &indices.iter().map(|&j| e.col(j)).collect::<Vec<_>>())?;
        let rows = sub.transpose().rref().pivots;
        let witness_points: Vec<Vec<F::Elem>> = rows.iter().map(|&i| points[i].clone()).collect();
        let eval_matrix = Matrix::from_rows(&f, rows.iter().map(|&i| sub.row(i).to_vec()).collect())
            .unwrap_or_else(|_| Matrix::zeros(&f, 0, 0));
        let eval_inverse = if rank == 0 { Matrix::zeros(&f, 0, 0) } else { eval_matrix.inverse()? };
        let witness_all = Matrix::from_rows(&f, rows.iter().map(|&i| e.row(i).to_vec()).collect())
            .unwrap_or_else(|_| Matrix::zeros(&f, 0, r));
        let coeff_matrix =
            if rank == 0 { Matrix::zeros(&f, 0, r) } else { eval_inverse.mul(&witness_all)? };
        let elements: BlackBox<F> = Arc::new(Select::new(gens.clone(), indices.clone())?);
        let basis = SpanBasis {
            generators: gens.clone(),
            indices,
            elements,
            witness_points,
            eval_matrix,
            eval_inverse,
            coeff_matrix,
            sample_points: Vec::new(),
            sample_values: Matrix::zeros(&f, 0, 0),
        };
        if certify(&basis, &gens, &basis.coeff_matrix, &e, &points, rng) {
            let mut basis = basis;
            basis.sample_points = points;
            basis.sample_values = e;
            return Ok(basis);
        }
        npts *= 2;
    }
    Err(Error::RetryExhausted("span basis failed certification".into()))
}

/// Checks `target(x) = elements(x) * coeffs` at the sampled and fresh points.
fn certify<F: Field, R: Rng + ?Sized>(
    basis: &SpanBasis<F>,
    target: &BlackBox<F>,
    coeffs: &Matrix<F>,
    sampled: &Matrix<F>,
    points: &[Vec<F::Elem>],
    rng: &mut R,
) -> bool {
    let f = basis.field();
    let n = basis.generators.nvars();
    let check = |tv: &[F::Elem], bv: &[F::Elem]| -> bool {
        if basis.dim() == 0 {
            return tv.iter().all(|v| f.is_zero(v));
        }
        let pred = coeffs.transpose().mul_vec(bv).expect("shapes agree");
        pred == tv
    };
    for (i, p) in points.iter().enumerate() {
        let bv: Vec<F::Elem> = basis.indices.iter().map(|&j| sampled.get(i, j).clone()).collect();
        if !check(sampled.row(i), &bv) {
            return false;
        }
        let _ = p;
    }
    for _ in 0..CERTIFY_POINTS {
        let x = random_point(f, n, rng);
        let tv = target.eval(&x);
        let bv = if basis.dim() == 0 { Vec::new() } else { basis.elements.eval(&x) };
        if !check(&tv, &bv) {
            return false;
        }
    }
    true
}

/// Expresses every output of `target` over the basis: column `w` of the
/// result holds the coefficients of output `w`. `None` when some output is
/// not in the span (detected at fresh points).
pub fn express_in_basis<F: Field, R: Rng + ?Sized>(
    target: &BlackBox<F>,
    basis: &SpanBasis<F>,
    rng: &mut R,
) -> Result<Option<Matrix<F>>> {
    if target.nvars() != basis.generators.nvars() {
        return Err(Error::DimensionMismatch("target and basis live in different rings".into()));
    }
    let f = basis.field();
    let values = eval_rows(target, &basis.witness_points);
    let coeffs = if basis.dim() == 0 {
        Matrix::zeros(f, 0, target.width())
    } else {
        basis.coords_from_witness_values(&values)
    };
    let empty = Matrix::zeros(f, 0, target.width());
    if certify(basis, target, &coeffs, &empty, &[], rng) {
        Ok(Some(coeffs))
    } else {
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{PrimeField, Rationals};
    use crate::blackbox::{Combination, PolyBox, PowerSumBox};
    use crate::multipoly::{Monomial, SparsePoly};
    use num_bigint::BigUint;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    /// Stacks width-one polynomial oracles into one family.
    struct Stack<F: Field>(Vec<BlackBox<F>>);

    impl<F: Field> crate::blackbox::Oracle<F> for Stack<F> {
        fn field(&self) -> &F {
            self.0[0].field()
        }
        fn nvars(&self) -> usize {
            self.0[0].nvars()
        }
        fn width(&self) -> usize {
            self.0.len()
        }
        fn degree(&self) -> usize {
            self.0.iter().map(|o| o.degree()).max().unwrap_or(0)
        }
        fn provenance(&self) -> crate::blackbox::Provenance {
            crate::blackbox::Provenance::Derived
        }
        fn eval(&self, x: &[F::Elem]) -> Vec<F::Elem> {
            self.0.iter().map(|o| o.eval(x)[0].clone()).collect()
        }
    }

    fn polys<F: Field>(ps: Vec<SparsePoly<F>>) -> BlackBox<F> {
        Arc::new(Stack(ps.into_iter().map(|p| Arc::new(PolyBox::new(p)) as BlackBox<F>).collect()))
    }

    fn fp() -> PrimeField<2> {
        PrimeField::new(&"170141183460469231731687303715884105727".parse::<BigUint>().unwrap()).unwrap()
    }

    #[test]
    fn small_examples() {
        let q = Rationals;
        let mut rng = ChaCha20Rng::seed_from_u64(51);
        let x1 = SparsePoly::var(&q, 2, 0);
        let x2 = SparsePoly::var(&q, 2, 1);
        let b = span_basis(polys(vec![x1.clone(), x1.scale(&q.from_i64(2)), x2.clone()]), &mut rng).unwrap();
        assert_eq!(b.dim(), 2);
        assert_eq!(b.indices, vec![0, 2]);
        let z = span_basis(polys(vec![SparsePoly::zero(&q, 2)]), &mut rng).unwrap();
        assert_eq!(z.dim(), 0);
    }

    #[test]
    fn express_examples() {
        let f = fp();
        let mut rng = ChaCha20Rng::seed_from_u64(52);
        let ps: Vec<_> = (0..3).map(|_| SparsePoly::random_homogeneous(&f, 3, 2, &mut rng)).collect();
        let basis = span_basis(polys(ps.clone()), &mut rng).unwrap();
        assert_eq!(basis.dim(), 3);
        let unit = express_in_basis(&polys(vec![ps[1].clone()]), &basis, &mut rng).unwrap().unwrap();
        assert_eq!(unit.col(0), vec![f.zero(), f.one(), f.zero()]);
        let sum = express_in_basis(&polys(vec![ps[0].add(&ps[1]).unwrap()]), &basis, &mut rng).unwrap().unwrap();
        assert_eq!(sum.col(0), vec![f.one(), f.one(), f.zero()]);
        let c = f.random_vec(&mut rng, 3);
        let comb: BlackBox<_> = Arc::new(Combination::new(basis.elements.clone(), Matrix::from_rows(&f, vec![c.clone()]).unwrap()).unwrap());
        assert_eq!(express_in_basis(&comb, &basis, &mut rng).unwrap().unwrap().col(0), c);
        let outside = SparsePoly::random_homogeneous(&f, 3, 2, &mut rng);
        assert!(express_in_basis(&polys(vec![outside]), &basis, &mut rng).unwrap().is_none());
    }

    #[test]
    fn power_generators_match_symbolic_rank() {
        let f = fp();
        let mut rng = ChaCha20Rng::seed_from_u64(53);
        for s in 1..=4 {
            let qs: Vec<_> = (0..s).map(|_| SparsePoly::random_homogeneous(&f, 3, 2, &mut rng)).collect();
            let powers: Vec<_> = qs.iter().map(|q| q.pow(3)).collect();
            let monos = crate::multipoly::monomial_enumeration(3, 6, crate::multipoly::MonomialKind::All);
            let rows: Vec<_> = powers.iter().map(|p| p.coeff_vector(&monos)).collect();
            let sym = crate::algebra::matrix::rank_of_rows(&f, &rows);
            assert_eq!(span_basis(polys(powers), &mut rng).unwrap().dim(), sym);
        }
        // Same check through the native power-sum path, one term per oracle.
        let q = SparsePoly::random_homogeneous(&f, 3, 2, &mut rng);
        let single: BlackBox<_> = Arc::new(PowerSumBox::new(&f, 3, 2, vec![(f.one(), q)]));
        assert_eq!(span_basis(single, &mut rng).unwrap().dim(), 1);
    }

    #[test]
    fn dimension_is_invariant_under_rescaling_and_permutation() {
        let f = fp();
        let mut rng = ChaCha20Rng::seed_from_u64(54);
        let a = SparsePoly::random_homogeneous(&f, 3, 2, &mut rng);
        let b = SparsePoly::random_homogeneous(&f, 3, 2, &mut rng);
        let gens = vec![a.clone(), b.clone(), a.add(&b).unwrap(), SparsePoly::var(&f, 3, 0).pow(2)];
        let base = span_basis(polys(gens.clone()), &mut rng).unwrap().dim();
        let mut shuffled: Vec<_> = gens.iter().map(|p| p.scale(&f.from_i64(5))).collect();
        shuffled.reverse();
        assert_eq!(span_basis(polys(shuffled), &mut rng).unwrap().dim(), base);
        assert_eq!(base, 3);
        let _ = Monomial::one(3);
    }

    #[test]
    fn witness_points_reproduce_the_stored_matrix() {
        let f = fp();
        let mut rng = ChaCha20Rng::seed_from_u64(55);
        let ps: Vec<_> = (0..4).map(|_| SparsePoly::random_homogeneous(&f, 2, 2, &mut rng)).collect();
        let basis = span_basis(polys(ps), &mut rng).unwrap();
        assert_eq!(basis.dim(), 3);
        for (i, p) in basis.witness_points.iter().enumerate() {
            assert_eq!(basis.elements.eval(p), basis.eval_matrix.row(i));
        }
        assert_eq!(basis.eval_matrix.rank(), 3);
    }
}
