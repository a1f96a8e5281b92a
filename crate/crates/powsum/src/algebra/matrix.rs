//! Dense matrices over a field: elimination, kernels, solving, inverses and
//! characteristic polynomials.

use super::field::Field;
use super::uni::UniPoly;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct Matrix<F: Field> {
    field: F,
    rows: usize,
    cols: usize,
    data: Vec<F::Elem>,
}

impl<F: Field> PartialEq for Matrix<F> {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.data == other.data
    }
}

impl<F: Field> Eq for Matrix<F> {}

/// Result of `solve`: one particular solution per target column, a kernel
/// basis of the coefficient matrix, and its rank.
#[derive(Clone, Debug)]
pub struct Solution<F: Field> {
    pub particular: Matrix<F>,
    pub kernel: Vec<Vec<F::Elem>>,
    pub rank: usize,
}

/// Reduced row echelon form together with the pivot column of each nonzero row.
#[derive(Clone, Debug)]
pub struct Echelon<F: Field> {
    pub matrix: Matrix<F>,
    pub pivots: Vec<usize>,
}

impl<F: Field> Matrix<F> {
    pub fn zeros(field: &F, rows: usize, cols: usize) -> Self {
        Matrix { field: field.clone(), rows, cols, data: vec![field.zero(); rows * cols] }
    }

    pub fn identity(field: &F, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, field.one());
        }
        m
    }

    pub fn from_rows(field: &F, rows: Vec<Vec<F::Elem>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(Matrix { field: field.clone(), rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_cols(field: &F, rows: usize, cols: &[Vec<F::Elem>]) -> Result<Self> {
        let mut m = Self::zeros(field, rows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            if col.len() != rows {
                return Err(Error::DimensionMismatch(format!("column {j} has length {}", col.len())));
            }
            for (i, v) in col.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        Ok(m)
    }

    pub fn from_i64(field: &F, rows: &[&[i64]]) -> Self {
        Self::from_rows(field, rows.iter().map(|r| r.iter().map(|&v| field.from_i64(v)).collect()).collect())
            .expect("rectangular literal")
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &F::Elem {
        &self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: F::Elem) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[F::Elem] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<F::Elem> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<F::Elem>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn push_row(&mut self, row: Vec<F::Elem>) -> Result<()> {
        if self.rows == 0 && self.cols == 0 {
            self.cols = row.len();
        }
        if row.len() != self.cols {
            return Err(Error::DimensionMismatch(format!("row of length {} into {} columns", row.len(), self.cols)));
        }
        self.data.extend(row);
        self.rows += 1;
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| self.field.is_zero(v))
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(&self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = &self.field;
        let mut out = Self::zeros(f, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if f.is_zero(a) {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * out.cols + j;
                    f.mul_add_assign(&mut out.data[idx], a, other.get(k, j));
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[F::Elem]) -> Result<Vec<F::Elem>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!("{}x{} times vector of {}", self.rows, self.cols, v.len())));
        }
        Ok((0..self.rows).map(|i| self.field.dot(self.row(i), v)).collect())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |f, a, b| f.add(a, b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |f, a, b| f.sub(a, b))
    }

    fn zip_with(&self, other: &Self, op: impl Fn(&F, &F::Elem, &F::Elem) -> F::Elem) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch("elementwise shapes differ".into()));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| op(&self.field, a, b)).collect();
        Ok(Matrix { field: self.field.clone(), rows: self.rows, cols: self.cols, data })
    }

    pub fn scale(&self, c: &F::Elem) -> Self {
        let data = self.data.iter().map(|a| self.field.mul(a, c)).collect();
        Matrix { field: self.field.clone(), rows: self.rows, cols: self.cols, data }
    }

    /// Gauss-Jordan elimination to reduced row echelon form.
    pub fn rref(&self) -> Echelon<F> {
        let f = &self.field;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !f.is_zero(m.get(i, c))) else { continue };
            m.swap_rows(r, p);
            let inv = f.inv(m.get(r, c)).expect("pivot is nonzero");
            for j in c..m.cols {
                let v = f.mul(m.get(r, j), &inv);
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let factor = m.get(i, c).clone();
                if f.is_zero(&factor) {
                    continue;
                }
                for j in c..m.cols {
                    let t = f.mul(&factor, m.get(r, j));
                    let v = f.sub(m.get(i, j), &t);
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        Echelon { matrix: m, pivots }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().pivots.len()
    }

    /// Basis of `{x : A x = 0}`, one vector per free column.
    pub fn kernel(&self) -> Vec<Vec<F::Elem>> {
        let ech = self.rref();
        kernel_from_echelon(&ech, self.cols)
    }

    /// Solves `A X = B` column by column.
    pub fn solve(&self, targets: &Self) -> Result<Solution<F>> {
        if targets.rows != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "system has {} rows, targets have {}",
                self.rows, targets.rows
            )));
        }
        let f = &self.field;
        let aug = self.hstack(targets)?;
        let ech = aug.rref();
        let rank = ech.pivots.iter().filter(|&&c| c < self.cols).count();
        if ech.pivots.iter().any(|&c| c >= self.cols) {
            return Err(Error::InconsistentSystem);
        }
        let mut particular = Self::zeros(f, self.cols, targets.cols);
        for (r, &c) in ech.pivots.iter().enumerate() {
            for t in 0..targets.cols {
                particular.set(c, t, ech.matrix.get(r, self.cols + t).clone());
            }
        }
        let left = Echelon { matrix: ech.matrix.submatrix(0, self.rows, 0, self.cols), pivots: ech.pivots };
        Ok(Solution { particular, kernel: kernel_from_echelon(&left, self.cols), rank })
    }

    /// Unique solution of a square or overdetermined system with full column rank.
    pub fn solve_unique(&self, b: &[F::Elem]) -> Result<Vec<F::Elem>> {
        let rhs = Self::from_cols(&self.field, self.rows, &[b.to_vec()])?;
        let sol = self.solve(&rhs)?;
        if !sol.kernel.is_empty() {
            return Err(Error::InvalidInput(format!("system has a {}-dimensional kernel", sol.kernel.len())));
        }
        Ok(sol.particular.col(0))
    }

    pub fn hstack(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch("hstack row counts differ".into()));
        }
        let mut out = Self::zeros(&self.field, self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).clone());
            }
            for j in 0..other.cols {
                out.set(i, self.cols + j, other.get(i, j).clone());
            }
        }
        Ok(out)
    }

    pub fn submatrix(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Self {
        let mut out = Self::zeros(&self.field, r1 - r0, c1 - c0);
        for i in r0..r1 {
            for j in c0..c1 {
                out.set(i - r0, j - c0, self.get(i, j).clone());
            }
        }
        out
    }

    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::NotSquare { rows: self.rows, cols: self.cols });
        }
        let n = self.rows;
        let ech = self.hstack(&Self::identity(&self.field, n))?.rref();
        if ech.pivots.len() < n || ech.pivots[n - 1] != n - 1 {
            return Err(Error::DivisionByZero);
        }
        Ok(ech.matrix.submatrix(0, n, n, 2 * n))
    }

    pub fn det(&self) -> Result<F::Elem> {
        if !self.is_square() {
            return Err(Error::NotSquare { rows: self.rows, cols: self.cols });
        }
        let f = &self.field;
        let mut m = self.clone();
        let n = self.rows;
        let mut det = f.one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| !f.is_zero(m.get(i, c))) else { return Ok(f.zero()) };
            if p != c {
                m.swap_rows(p, c);
                det = f.neg(&det);
            }
            let piv = m.get(c, c).clone();
            det = f.mul(&det, &piv);
            let inv = f.inv(&piv).expect("pivot is nonzero");
            for i in c + 1..n {
                let factor = f.mul(m.get(i, c), &inv);
                if f.is_zero(&factor) {
                    continue;
                }
                for j in c..n {
                    let t = f.mul(&factor, m.get(c, j));
                    let v = f.sub(m.get(i, j), &t);
                    m.set(i, j, v);
                }
            }
        }
        Ok(det)
    }

    /// The monic characteristic polynomial `det(x I - A)`.
    ///
    /// Reduces to upper Hessenberg form by similarity transforms, then runs
    /// the standard recurrence over leading principal blocks.
    pub fn char_poly(&self) -> Result<UniPoly<F>> {
        if !self.is_square() {
            return Err(Error::NotSquare { rows: self.rows, cols: self.cols });
        }
        let f = &self.field;
        let n = self.rows;
        let mut h = self.clone();
        for c in 0..n.saturating_sub(2) {
            let Some(p) = (c + 1..n).find(|&i| !f.is_zero(h.get(i, c))) else { continue };
            if p != c + 1 {
                h.swap_rows(p, c + 1);
                h.swap_cols(p, c + 1);
            }
            let inv = f.inv(h.get(c + 1, c)).expect("pivot is nonzero");
            for i in c + 2..n {
                let u = f.mul(h.get(i, c), &inv);
                if f.is_zero(&u) {
                    continue;
                }
                // row_i -= u row_{c+1}; col_{c+1} += u col_i
                for j in 0..n {
                    let t = f.mul(&u, h.get(c + 1, j));
                    let v = f.sub(h.get(i, j), &t);
                    h.set(i, j, v);
                }
                for j in 0..n {
                    let t = f.mul(&u, h.get(j, i));
                    let v = f.add(h.get(j, c + 1), &t);
                    h.set(j, c + 1, v);
                }
            }
        }
        // p_0 = 1; p_k = (x - h_kk) p_{k-1} - sum_{i<k} h_ik (prod_{j=i+1}^{k} h_{j,j-1}) p_{i-1}
        let x = UniPoly::monomial(f, f.one(), 1);
        let mut ps: Vec<UniPoly<F>> = vec![UniPoly::constant(f, f.one())];
        for k in 0..n {
            let mut pk = x.sub(&UniPoly::constant(f, h.get(k, k).clone())).mul(&ps[k]);
            let mut prod = f.one();
            for i in (0..k).rev() {
                prod = f.mul(&prod, h.get(i + 1, i));
                if f.is_zero(&prod) {
                    break;
                }
                let coef = f.mul(&prod, h.get(i, k));
                pk = pk.sub(&ps[i].scale(&coef));
            }
            ps.push(pk);
        }
        Ok(ps.pop().expect("at least the constant"))
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    /// Evaluates a polynomial at this (square) matrix.
    pub fn eval_poly(&self, p: &UniPoly<F>) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::NotSquare { rows: self.rows, cols: self.cols });
        }
        let f = &self.field;
        let mut acc = Self::zeros(f, self.rows, self.cols);
        for c in p.coeffs().iter().rev() {
            acc = acc.mul(self)?.add(&Self::identity(f, self.rows).scale(c))?;
        }
        Ok(acc)
    }

    pub fn random<R: rand::Rng + ?Sized>(field: &F, rows: usize, cols: usize, rng: &mut R) -> Self {
        Matrix { field: field.clone(), rows, cols, data: field.random_vec(rng, rows * cols) }
    }
}

fn kernel_from_echelon<F: Field>(ech: &Echelon<F>, cols: usize) -> Vec<Vec<F::Elem>> {
    let f = ech.matrix.field();
    let mut is_pivot = vec![false; cols];
    for &p in &ech.pivots {
        is_pivot[p] = true;
    }
    let mut basis = Vec::new();
    for free in (0..cols).filter(|&c| !is_pivot[c]) {
        let mut v = vec![f.zero(); cols];
        v[free] = f.one();
        for (r, &p) in ech.pivots.iter().enumerate() {
            v[p] = f.neg(ech.matrix.get(r, free));
        }
        basis.push(v);
    }
    basis
}

/// Rank of a list of row vectors.
pub fn rank_of_rows<F: Field>(field: &F, rows: &[Vec<F::Elem>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    Matrix::from_rows(field, rows.to_vec()).map(|m| m.rank()).unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::field::{PrimeField, Rationals};
    use num_bigint::BigUint;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn fp() -> PrimeField<1> {
        PrimeField::new(&BigUint::from(1_000_000_007u64)).unwrap()
    }

    /// `det(x I - A)` by cofactor expansion along the first row, computed in
    /// the polynomial ring directly.
    fn cofactor_char_poly<F: Field>(a: &Matrix<F>) -> UniPoly<F> {
        let f = a.field();
        let n = a.rows();
        let entries: Vec<Vec<UniPoly<F>>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let c = UniPoly::constant(f, f.neg(a.get(i, j)));
                        if i == j {
                            c.add(&UniPoly::monomial(f, f.one(), 1))
                        } else {
                            c
                        }
                    })
                    .collect()
            })
            .collect();
        fn det<F: Field>(f: &F, m: &[Vec<UniPoly<F>>]) -> UniPoly<F> {
            if m.is_empty() {
                return UniPoly::constant(f, f.one());
            }
            let mut acc = UniPoly::zero(f);
            for j in 0..m.len() {
                let minor: Vec<Vec<UniPoly<F>>> = m[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, v)| v.clone()).collect())
                    .collect();
                let term = m[0][j].mul(&det(f, &minor));
                acc = if j % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
            }
            acc
        }
        det(f, &entries)
    }

    #[test]
    fn solve_examples() {
        let q = Rationals;
        let id = Matrix::identity(&q, 3);
        let b = Matrix::from_i64(&q, &[&[4], &[5], &[6]]);
        let sol = id.solve(&b).unwrap();
        assert_eq!(sol.particular, b);
        assert!(sol.kernel.is_empty());
        assert_eq!(sol.rank, 3);

        let a = Matrix::from_i64(&q, &[&[1, 1], &[2, 2]]);
        let sol = a.solve(&Matrix::zeros(&q, 2, 1)).unwrap();
        assert_eq!(sol.rank, 1);
        assert_eq!(sol.kernel, vec![vec![q.from_i64(-1), q.from_i64(1)]]);

        let inconsistent = a.solve(&Matrix::from_i64(&q, &[&[1], &[3]]));
        assert!(matches!(inconsistent, Err(Error::InconsistentSystem)));
    }

    #[test]
    fn random_full_rank_residual() {
        let f = fp();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let a = Matrix::random(&f, 5, 5, &mut rng);
        let b = Matrix::random(&f, 5, 2, &mut rng);
        let sol = a.solve(&b).unwrap();
        assert_eq!(a.mul(&sol.particular).unwrap(), b);
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv).unwrap(), Matrix::identity(&f, 5));
    }

    #[test]
    fn char_poly_examples() {
        let q = Rationals;
        let d = Matrix::from_i64(&q, &[&[2, 0], &[0, 3]]);
        assert_eq!(d.char_poly().unwrap(), UniPoly::from_i64s(&q, &[6, -5, 1]));
        assert_eq!(Matrix::zeros(&q, 2, 2).char_poly().unwrap(), UniPoly::from_i64s(&q, &[0, 0, 1]));
        assert!(matches!(Matrix::zeros(&q, 2, 3).char_poly(), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn char_poly_matches_cofactor_expansion() {
        let f = fp();
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        for n in 1..=5 {
            let a = Matrix::random(&f, n, n, &mut rng);
            assert_eq!(a.char_poly().unwrap(), cofactor_char_poly(&a));
        }
        // A sparse matrix that forces row swaps during the Hessenberg reduction.
        let q = Rationals;
        let a = Matrix::from_i64(&q, &[&[1, 2, 0, 0], &[0, 0, 3, 1], &[0, 5, 0, 0], &[4, 0, 0, 2]]);
        assert_eq!(a.char_poly().unwrap(), cofactor_char_poly(&a));
    }

    #[test]
    fn det_matches_cofactor_constant_term() {
        let f = fp();
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let a = Matrix::random(&f, 4, 4, &mut rng);
        let cp = cofactor_char_poly(&a);
        // char poly at 0 is det(-A) = det(A) for even n.
        assert_eq!(a.det().unwrap(), cp.coeff(0));
    }

    proptest! {
        #[test]
        fn cayley_hamilton(n in 1usize..=6, seed in any::<u64>()) {
            let f = fp();
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let a = Matrix::random(&f, n, n, &mut rng);
            prop_assert!(a.eval_poly(&a.char_poly().unwrap()).unwrap().is_zero());
        }

        #[test]
        fn kernel_vectors_are_annihilated(r in 1usize..6, c in 1usize..7, seed in any::<u64>()) {
            let f = PrimeField::<1>::new(&BigUint::from(7u32)).unwrap();
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let a = Matrix::random(&f, r, c, &mut rng);
            let ker = a.kernel();
            prop_assert_eq!(ker.len() + a.rank(), c);
            for v in ker {
                prop_assert!(a.mul_vec(&v).unwrap().iter().all(|x| f.is_zero(x)));
            }
        }
    }
}
