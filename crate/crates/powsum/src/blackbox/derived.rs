//! Oracles built from other oracles.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use super::jet::{Jet, JetShape};
use super::{line_by_interpolation, polarized_jet, BlackBox, Oracle, Provenance, QueryCounter};
use crate::algebra::{Field, Matrix, UniPoly};
use crate::error::{Error, Result};
use crate::multipoly::{LinearTuple, Monomial};

/// Applies a linear map to jet directions: `L v` for each `v`.
fn map_dirs<F: Field>(l: &Matrix<F>, dirs: &[Vec<F::Elem>]) -> Vec<Vec<F::Elem>> {
    dirs.iter().map(|v| l.mul_vec(v).expect("direction arity checked at construction")).collect()
}

// ---------------------------------------------------------------------------

/// `p(L z)` for every output `p` of the inner oracle.
pub struct Project<F: Field> {
    inner: BlackBox<F>,
    l: LinearTuple<F>,
}

impl<F: Field> Project<F> {
    pub fn new(inner: BlackBox<F>, l: LinearTuple<F>) -> Result<Self> {
        if l.rows() != inner.nvars() {
            return Err(Error::DimensionMismatch(format!(
                "projection supplies {} forms for {} variables",
                l.rows(),
                inner.nvars()
            )));
        }
        Ok(Project { inner, l })
    }

    pub fn map(&self) -> &LinearTuple<F> {
        &self.l
    }
}

impl<F: Field> Oracle<F> for Project<F> {
    fn field(&self) -> &F {
        self.inner.field()
    }
    fn nvars(&self) -> usize {
        self.l.cols()
    }
    fn width(&self) -> usize {
        self.inner.width()
    }
    fn degree(&self) -> usize {
        self.inner.degree()
    }
    fn provenance(&self) -> Provenance {
        Provenance::Derived
    }
    fn eval(&self, x: &[F::Elem]) -> Vec<F::Elem> {
        self.inner.eval(&self.l.mul_vec(x).expect("point arity"))
    }
    fn line(&self, base: &[F::Elem], dir: &[F::Elem]) -> Vec<UniPoly<F>> {
        self.inner.line(&self.l.mul_vec(base).expect("point arity"), &self.l.mul_vec(dir).expect("point arity"))
    }
    fn jet(&self, base: &[F::Elem], dirs: &[Vec<F::Elem>], order: usize) -> Vec<Jet<F>> {
        self.inner.jet(&self.l.mul_vec(base).expect("point arity"), &map_dirs(&self.l, dirs), order)
    }
}

// ---------------------------------------------------------------------------

/// A homogeneous constant-coefficient differential operator.
#[derive(Clone, Debug)]
pub enum DiffOp<F: Field> {
    /// `d^alpha`.
    Partial(Monomial),
    /// `sum_i c_i d^{alpha_i}`, all `|alpha_i|` equal.
    Combination(Vec<(Monomial, F::Elem)>),
    /// `sum_l v_l d_l`, the derivative along `v`.
    Directional(Vec<F::Elem>),
}

impl<F: Field> DiffOp<F> {
    pub fn order(&self) -> usize {
        match self {
            DiffOp::Partial(a) => a.degree() as usize,
            DiffOp::Combination(terms) => terms.first().map_or(0, |(a, _)| a.degree() as usize),
            DiffOp::Directional(_) => 1,
        }
    }

    /// Rewrites a first-order combination as a directional derivative.
    pub fn simplify(self, n: usize, field: &F) -> Self {
        match self {
            DiffOp::Combination(terms) if terms.iter().all(|(a, _)| a.degree() == 1) => {
                let mut v = vec![field.zero(); n];
                for (a, c) in terms {
                    let i = a.exps().iter().position(|&e| e == 1).expect("degree one");
                    v[i] = field.add(&v[i], &c);
                }
                DiffOp::Directional(v)
            }
            other => other,
        }
    }
}

/// Applies each operator to each inner output. Output `o * w + j` is operator
/// `o` applied to inner output `j`, with `w` the inner width.
pub struct DiffOps<F: Field> {
    inner: BlackBox<F>,
    ops: Vec<DiffOp<F>>,
    /// Extra jet directions: coordinate axes first, then one per directional op.
    axes: Vec<usize>,
    directional: Vec<Vec<F::Elem>>,
    max_order: usize,
    /// Per op, the list of (exponent on the extra variables, weight) to read.
    reads: Vec<Vec<(Vec<u8>, F::Elem)>>,
}

impl<F: Field> DiffOps<F> {
    pub fn new(inner: BlackBox<F>, ops: Vec<DiffOp<F>>) -> Self {
        let f = inner.field().clone();
        let n = inner.nvars();
        let ops: Vec<DiffOp<F>> = ops.into_iter().map(|o| o.simplify(n, &f)).collect();
        let mut axes: Vec<usize> = Vec::new();
        let mut directional = Vec::new();
        for op in &ops {
            match op {
                DiffOp::Partial(a) => axes.extend(a.exps().iter().enumerate().filter(|(_, &e)| e > 0).map(|(i, _)| i)),
                DiffOp::Combination(t) => {
                    for (a, _) in t {
                        axes.extend(a.exps().iter().enumerate().filter(|(_, &e)| e > 0).map(|(i, _)| i));
                    }
                }
                DiffOp::Directional(v) => directional.push(v.clone()),
            }
        }
        axes.sort_unstable();
        axes.dedup();
        let q = axes.len() + directional.len();
        let pos: HashMap<usize, usize> = axes.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let mut next_dir = axes.len();
        let read_alpha = |a: &Monomial, c: F::Elem| -> (Vec<u8>, F::Elem) {
            let mut beta = vec![0u8; q];
            for (i, &e) in a.exps().iter().enumerate() {
                if e > 0 {
                    beta[pos[&i]] = e as u8;
                }
            }
            // d^alpha p = alpha! times the Taylor coefficient.
            (beta, f.mul(&c, &f.from_bigint(&a.factorial().into())))
        };
        let reads = ops
            .iter()
            .map(|op| match op {
                DiffOp::Partial(a) => vec![read_alpha(a, f.one())],
                DiffOp::Combination(t) => t.iter().map(|(a, c)| read_alpha(a, c.clone())).collect(),
                DiffOp::Directional(_) => {
                    let mut beta = vec![0u8; q];
                    beta[next_dir] = 1;
                    next_dir += 1;
                    vec![(beta, f.one())]
                }
            })
            .collect();
        let max_order = ops.iter().map(DiffOp::order).max().unwrap_or(0);
        DiffOps { inner, ops, axes, directional, max_order, reads }
    }

    pub fn ops(&self) -> &[DiffOp<F>] {
        &self.ops
    }
}

impl<F: Field> Oracle<F> for DiffOps<F> {
    fn field(&self) -> &F {
        self.inner.field()
    }
    fn nvars(&self) -> usize {
        self.inner.nvars()
    }
    fn width(&self) -> usize {
        self.ops.len() * self.inner.width()
    }
    fn degree(&self) -> usize {
        let min_order = self.ops.iter().map(DiffOp::order).min().unwrap_or(0);
        self.inner.degree().saturating_sub(min_order)
    }
    fn provenance(&self) -> Provenance {
        Provenance::Derived
    }
    fn eval(&self, x: &[F::Elem]) -> Vec<F::Elem> {
        self.jet(x, &[], 0).into_iter().map(|j| j.coeffs[0].clone()).collect()
    }
    fn line(&self, base: &[F::Elem], dir: &[F::Elem]) -> Vec<UniPoly<F>> {
        let f = self.field();
        let d = self.degree();
        self.jet(base, &[dir.to_vec()], d)
            .into_iter()
            .map(|j| UniPoly::new(f, j.coeffs[..=d.min(j.shape.order)].to_vec()))
            .collect()
    }
    fn jet(&self, base: &[F::Elem], dirs: &[Vec<F::Elem>], order: usize) -> Vec<Jet<F>> {
        let f = self.field();
        let n = self.nvars();
        let mut all_dirs = dirs.to_vec();
        for &i in &self.axes {
            let mut e = vec![f.zero(); n];
            e[i] = f.one();
            all_dirs.push(e);
        }
        all_dirs.extend(self.directional.iter().cloned());
        let inner = self.inner.jet(base, &all_dirs, order + self.max_order);
        let target = JetShape::get(dirs.len(), order);
        let mut out = Vec::with_capacity(self.width());
        for reads in &self.reads {
            for ij in &inner {
                let mut acc = Jet::zero(f, &target);
                for (beta, w) in reads {
                    acc.add_scaled(f, w, &ij.extract(f, &target, beta));
                }
                out.push(acc);
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------

/// Outputs `M * (inner outputs)` for a `k x w` matrix `M`.
pub struct Combination<F: Field> {
    inner: BlackBox<F>,
    m: Matrix<F>,
}

impl<F: Field> Combination<F> {
    pub fn new(inner: BlackBox<F>, m: Matrix<F>) -> Result<Self> {
        if m.cols() != inner.width() {
            return Err(Error::DimensionMismatch(format!(
                "combination of {} outputs with {} columns",
                inner.width(),
                m.cols()
            )));
        }
        Ok(Combination { inner, m })
    }

    pub fn matrix(&self) -> &Matrix<F> {
        &self.m
    }
}

impl<F: Field> Oracle<F> for Combination<F> {
    fn field(&self) -> &F {
        self.inner.field()
    }
    fn nvars(&self) -> usize {
        self.inner.nvars()
    }
    fn width(&self) -> usize {
        self.m.rows()
    }
    fn degree(&self) -> usize {
        self.inner.degree()
    }
    fn provenance(&self) -> Provenance {
        Provenance::Derived
    }
    fn eval(&self, x: &[F::Elem]) -> Vec<F::Elem> {
        self.m.mul_vec(&self.inner.eval(x)).expect("width checked")
    }
    fn line(&self, base: &[F::Elem], dir: &[F::Elem]) -> Vec<UniPoly<F>> {
        let f = self.field();
        let inner = self.inner.line(base, dir);
        (0..self.m.rows())
            .map(|i| {
                let mut acc = UniPoly::zero(f);
                for (c, p) in self.m.row(i).iter().zip(&inner) {
                    if !f.is_zero(c) {
                        acc = acc.add(&p.scale(c));
                    }
                }
                acc
            })
            .collect()
    }
    fn jet(&self, base: &[F::Elem], dirs: &[Vec<F::Elem>], order: usize) -> Vec<Jet<F>> {
        let f = self.field();
        let inner = self.inner.jet(base, dirs, order);
        let shape = JetShape::get(dirs.len(), order);
        (0..self.m.rows())
            .map(|i| {
                let mut acc = Jet::zero(f, &shape);
                for (c, j) in self.m.row(i).iter().zip(&inner) {
                    acc.add_scaled(f, c, j);
                }
                acc
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------

/// A subset of the inner outputs, in the given order.
pub struct Select<F: Field> {
    inner: BlackBox<F>,
    idx: Vec<usize>,
}

impl<F: Field> Select<F> {
    pub fn new(inner: BlackBox<F>, idx: Vec<usize>) -> Result<Self> {
        if idx.iter().any(|&i| i >= inner.width()) {
            return Err(Error::DimensionMismatch("selected output out of range".into()));
        }
        Ok(Select { inner, idx })
    }
}

impl<F: Field> Oracle<F> for Select<F> {
    fn field(&self) -> &F {
        self.inner.field()
    }
    fn nvars(&self) -> usize {
        self.inner.nvars()
    }
    fn width(&self) -> usize {
        self.idx.len()
    }
    fn degree(&self) -> usize {
        self.inner.degree()
    }
    fn provenance(&self) -> Provenance {
        Provenance::Derived
    }
    fn eval(&self, x: &[F::Elem]) -> Vec<F::Elem> {
        let all = self.inner.eval(x);
        self.idx.iter().map(|&i| all[i].clone()).collect()
    }
    fn line(&self, base: &[F::Elem], dir: &[F::Elem]) -> Vec<UniPoly<F>> {
        let all = self.inner.line(base, dir);
        self.idx.iter().map(|&i| all[i].clone()).collect()
    }
    fn jet(&self, base: &[F::Elem], dirs: &[Vec<F::Elem>], order: usize) -> Vec<Jet<F>> {
        let all = self.inner.jet(base, dirs, order);
        self.idx.iter().map(|&i| all[i].clone()).collect()
    }
}

// ---------------------------------------------------------------------------

/// `p / z_var^power` for inner outputs known to be divisible by that power.
///
/// Off the hyperplane `z_var = 0` this is a plain division. On it, the value
/// is read from the restriction to a fixed transversal line, where the
/// division is exact in the line parameter.
pub struct Quotient<F: Field> {
    inner: BlackBox<F>,
    var: usize,
    power: usize,
}

impl<F: Field> Quotient<F> {
    pub fn new(inner: BlackBox<F>, var: usize, power: usize) -> Result<Self> {
        if var >= inner.nvars() {
            return Err(Error::DimensionMismatch("quotient variable out of range".into()));
        }
        Ok(Quotient { inner, var, power })
    }

    fn transversal(&self) -> Vec<F::Elem> {
        let f = self.field();
        (0..self.nvars()).map(|i| f.from_u64(i as u64 + 1)).collect()
    }
}

impl<F: Field> Oracle<F> for Quotient<F> {
    fn field(&self) -> &F {
        self.inner.field()
    }
    fn nvars(&self) -> usize {
        self.inner.nvars()
    }
    fn width(&self) -> usize {
        self.inner.width()
    }
    fn degree(&self) -> usize {
        self.inner.degree().saturating_sub(self.power)
    }
    fn provenance(&self) -> Provenance {
        Provenance::Derived
    }
    fn eval(&self, x: &[F::Elem]) -> Vec<F::Elem> {
        let f = self.field();
        match f.inv(&x[self.var]) {
            Some(inv) => {
                let s = f.pow(&inv, self.power as u64);
                self.inner.eval(x).into_iter().map(|v| f.mul(&v, &s)).collect()
            }
            None => {
                // On z_var = 0, z_var(x + y w) = y w_var, so p(x + y w) / (y w_var)^power
                // at y = 0 is the y^power coefficient over w_var^power.
                let w = self.transversal();
                let s = f.inv(&f.pow(&w[self.var], self.power as u64)).expect("transversal entry is nonzero");
                self.inner.line(x, &w).into_iter().map(|p| f.mul(&p.coeff(self.power), &s)).collect()
            }
        }
    }
    fn line(&self, base: &[F::Elem], dir: &[F::Elem]) -> Vec<UniPoly<F>> {
        let f = self.field();
        if f.is_zero(&base[self.var]) && f.is_zero(&dir[self.var]) {
            return line_by_interpolation(self, base, dir);
        }
        let lin = UniPoly::new(f, vec![base[self.var].clone(), dir[self.var].clone()]);
        let den = lin.pow(self.power as u32);
        self.inner
            .line(base, dir)
            .into_iter()
            .map(|p| p.div_exact(&den).expect("numerator is divisible along every line"))
            .collect()
    }
    fn jet(&self, base: &[F::Elem], dirs: &[Vec<F::Elem>], order: usize) -> Vec<Jet<F>> {
        let f = self.field();
        if f.is_zero(&base[self.var]) {
            return polarized_jet(self, base, dirs, order);
        }
        let shape = JetShape::get(dirs.len(), order);
        let lin: Vec<F::Elem> = dirs.iter().map(|v| v[self.var].clone()).collect();
        let z = Jet::affine(f, &shape, base[self.var].clone(), &lin);
        let inv = z.inverse(f).expect("constant term is nonzero").pow(f, self.power as u32);
        self.inner.jet(base, dirs, order).into_iter().map(|j| j.mul(f, &inv)).collect()
    }
}

// ---------------------------------------------------------------------------

/// Hides everything but evaluation, so callers take the generic paths.
pub struct Opaque<F: Field> {
    inner: BlackBox<F>,
}

impl<F: Field> Opaque<F> {
    pub fn new(inner: BlackBox<F>) -> Self {
        Opaque { inner }
    }
}

impl<F: Field> Oracle<F> for Opaque<F> {
    fn field(&self) -> &F {
        self.inner.field()
    }
    fn nvars(&self) -> usize {
        self.inner.nvars()
    }
    fn width(&self) -> usize {
        self.inner.width()
    }
    fn degree(&self) -> usize {
        self.inner.degree()
    }
    fn provenance(&self) -> Provenance {
        Provenance::External
    }
    fn eval(&self, x: &[F::Elem]) -> Vec<F::Elem> {
        self.inner.eval(x)
    }
}

// ---------------------------------------------------------------------------

type EvalFn<F> = dyn Fn(&[<F as Field>::Elem]) -> <F as Field>::Elem + Send + Sync;

/// A width-one oracle backed by a closure.
pub struct ClosureBox<F: Field> {
    field: F,
    n: usize,
    d: usize,
    f: Arc<EvalFn<F>>,
}

impl<F: Field> ClosureBox<F> {
    pub fn new(field: &F, n: usize, d: usize, f: impl Fn(&[F::Elem]) -> F::Elem + Send + Sync + 'static) -> Self {
        ClosureBox { field: field.clone(), n, d, f: Arc::new(f) }
    }
}

impl<F: Field> Oracle<F> for ClosureBox<F> {
    fn field(&self) -> &F {
        &self.field
    }
    fn nvars(&self) -> usize {
        self.n
    }
    fn degree(&self) -> usize {
        self.d
    }
    fn provenance(&self) -> Provenance {
        Provenance::External
    }
    fn eval(&self, x: &[F::Elem]) -> Vec<F::Elem> {
        vec![(self.f)(x)]
    }
}

// ---------------------------------------------------------------------------

/// Caches evaluations by point. The table is bounded and simply cleared when
/// it fills up; values are deterministic, so concurrent writers agree.
pub struct Memo<F: Field> {
    inner: BlackBox<F>,
    cache: Mutex<HashMap<Vec<F::Elem>, Vec<F::Elem>>>,
    capacity: usize,
}

impl<F: Field> Memo<F> {
    pub fn new(inner: BlackBox<F>, capacity: usize) -> Self {
        Memo { inner, cache: Mutex::new(HashMap::new()), capacity }
    }
}

impl<F: Field> Oracle<F> for Memo<F> {
    fn field(&self) -> &F {
        self.inner.field()
    }
    fn nvars(&self) -> usize {
        self.inner.nvars()
    }
    fn width(&self) -> usize {
        self.inner.width()
    }
    fn degree(&self) -> usize {
        self.inner.degree()
    }
    fn provenance(&self) -> Provenance {
        self.inner.provenance()
    }
    fn eval(&self, x: &[F::Elem]) -> Vec<F::Elem> {
        if let Some(v) = self.cache.lock().expect("memo poisoned").get(x) {
            return v.clone();
        }
        let v = self.inner.eval(x);
        let mut cache = self.cache.lock().expect("memo poisoned");
        if cache.len() >= self.capacity {
            cache.clear();
        }
        cache.insert(x.to_vec(), v.clone());
        v
    }
    fn line(&self, base: &[F::Elem], dir: &[F::Elem]) -> Vec<UniPoly<F>> {
        self.inner.line(base, dir)
    }
    fn jet(&self, base: &[F::Elem], dirs: &[Vec<F::Elem>], order: usize) -> Vec<Jet<F>> {
        self.inner.jet(base, dirs, order)
    }
}

// ---------------------------------------------------------------------------

/// Counts queries in evaluation units: a line costs `degree + 1`, and a jet
/// costs what polarization over lines would.
pub struct Metered<F: Field> {
    inner: BlackBox<F>,
    counter: QueryCounter,
}

impl<F: Field> Metered<F> {
    pub fn new(inner: BlackBox<F>, counter: QueryCounter) -> Self {
        Metered { inner, counter }
    }
}

impl<F: Field> Oracle<F> for Metered<F> {
    fn field(&self) -> &F {
        self.inner.field()
    }
    fn nvars(&self) -> usize {
        self.inner.nvars()
    }
    fn width(&self) -> usize {
        self.inner.width()
    }
    fn degree(&self) -> usize {
        self.inner.degree()
    }
    fn provenance(&self) -> Provenance {
        self.inner.provenance()
    }
    fn eval(&self, x: &[F::Elem]) -> Vec<F::Elem> {
        self.counter.add(1);
        self.inner.eval(x)
    }
    fn line(&self, base: &[F::Elem], dir: &[F::Elem]) -> Vec<UniPoly<F>> {
        self.counter.add(self.degree() as u64 + 1);
        self.inner.line(base, dir)
    }
    fn jet(&self, base: &[F::Elem], dirs: &[Vec<F::Elem>], order: usize) -> Vec<Jet<F>> {
        let k = order.min(self.degree());
        let lines = if dirs.is_empty() || k == 0 {
            0
        } else {
            crate::multipoly::binomial((dirs.len() + k - 1) as u64, k as u64) as u64
        };
        self.counter.add(if lines == 0 { 1 } else { lines * (self.degree() as u64 + 1) });
        self.inner.jet(base, dirs, order)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::PrimeField;
    use crate::blackbox::{eval1, random_point, PolyBox};
    use crate::multipoly::SparsePoly;
    use num_bigint::BigUint;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn fp() -> PrimeField<1> {
        PrimeField::new(&BigUint::from(1_000_000_007u64)).unwrap()
    }

    #[test]
    fn quotient_is_exact_on_and_off_the_hyperplane() {
        let f = fp();
        let mut rng = ChaCha20Rng::seed_from_u64(31);
        let g = SparsePoly::random_homogeneous(&f, 3, 3, &mut rng);
        let z0 = SparsePoly::var(&f, 3, 0);
        let num: BlackBox<_> = Arc::new(PolyBox::new(g.mul(&z0.pow(2)).unwrap()));
        let q = Quotient::new(num, 0, 2).unwrap();
        for _ in 0..20 {
            let mut x = random_point(&f, 3, &mut rng);
            assert_eq!(eval1(&q, &x), g.evaluate(&x).unwrap());
            x[0] = f.zero();
            assert_eq!(eval1(&q, &x), g.evaluate(&x).unwrap());
        }
        let base = random_point(&f, 3, &mut rng);
        let dirs: Vec<_> = (0..2).map(|_| random_point(&f, 3, &mut rng)).collect();
        let want = PolyBox::new(g).jet(&base, &dirs, 2);
        assert_eq!(q.jet(&base, &dirs, 2)[0].coeffs, want[0].coeffs);
    }

    #[test]
    fn directional_derivative_matches_partials() {
        let f = fp();
        let mut rng = ChaCha20Rng::seed_from_u64(32);
        let p = SparsePoly::random_homogeneous(&f, 3, 4, &mut rng);
        let pb: BlackBox<_> = Arc::new(PolyBox::new(p.clone()));
        let v = random_point(&f, 3, &mut rng);
        let d = DiffOps::new(pb, vec![DiffOp::Combination((0..3).map(|i| (Monomial::var(3, i), v[i])).collect())]);
        let x = random_point(&f, 3, &mut rng);
        let mut want = f.zero();
        for (i, vi) in v.iter().enumerate() {
            let di = p.partial_derivative(&Monomial::var(3, i)).unwrap().evaluate(&x).unwrap();
            want = f.add(&want, &f.mul(vi, &di));
        }
        assert_eq!(eval1(&d, &x), want);
    }

    #[test]
    fn memo_and_meter() {
        let f = fp();
        let mut rng = ChaCha20Rng::seed_from_u64(33);
        let p = SparsePoly::random_homogeneous(&f, 2, 3, &mut rng);
        let counter = QueryCounter::default();
        let metered: BlackBox<_> = Arc::new(Metered::new(Arc::new(PolyBox::new(p.clone())), counter.clone()));
        let memo = Memo::new(metered, 2);
        let x = random_point(&f, 2, &mut rng);
        let y = random_point(&f, 2, &mut rng);
        assert_eq!(eval1(&memo, &x), p.evaluate(&x).unwrap());
        assert_eq!(eval1(&memo, &x), p.evaluate(&x).unwrap());
        assert_eq!(counter.get(), 1);
        eval1(&memo, &y);
        eval1(&memo, &random_point(&f, 2, &mut rng));
        assert_eq!(counter.get(), 3);
        memo.line(&x, &y);
        assert_eq!(counter.get(), 7);
    }
}
