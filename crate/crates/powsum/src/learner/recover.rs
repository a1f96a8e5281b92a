//! Steps seven and eight: reading the `Q_i` off reruns with a modified
//! first column of `L`, and solving for the outer coefficients.

use rand::Rng;

use super::pipeline::{run_pipeline, PipelineState};
use crate::algebra::{series_eth_root, Field, Matrix, UniPoly};
use crate::blackbox::BlackBox;
use crate::decomp::Decomposition;
use crate::error::{Error, Result};
use crate::multipoly::{monomial_enumeration, Monomial, MonomialKind, SparsePoly};

/// Fresh point sets tried before a failed matching is reported.
const MATCH_ATTEMPTS: usize = 2;
const COEFF_ATTEMPTS: usize = 3;

/// Points on `z_1 = 0` with the reference components evaluated there.
#[derive(Clone, Debug)]
pub struct MatchPoints<F: Field> {
    pub points: Vec<Vec<F::Elem>>,
    /// `values[i][tau]` is reference component `i` at point `tau`.
    pub values: Vec<Vec<F::Elem>>,
}

impl<F: Field> MatchPoints<F> {
    pub fn draw<R: Rng + ?Sized>(reference: &Decomposition<F>, n0: usize, count: usize, rng: &mut R) -> Self {
        let f = reference.components[0].v.field().clone();
        let points: Vec<Vec<F::Elem>> = (0..count)
            .map(|_| {
                let mut z = f.random_vec(rng, n0);
                z[0] = f.zero();
                z
            })
            .collect();
        let values = component_values(reference, &points);
        MatchPoints { points, values }
    }
}

fn component_values<F: Field>(d: &Decomposition<F>, points: &[Vec<F::Elem>]) -> Vec<Vec<F::Elem>> {
    d.components.iter().map(|c| points.iter().map(|z| c.v.eval(z).swap_remove(0)).collect()).collect()
}

/// Pairs every reference component with the rerun component whose ratio to
/// it is constant on the match points. Returns, per reference component,
/// the rerun index and the constant `reference / rerun`.
pub fn match_runs<F: Field>(pts: &MatchPoints<F>, rerun: &Decomposition<F>) -> Result<(Vec<usize>, Vec<F::Elem>)> {
    let s = pts.values.len();
    let f = rerun.components[0].v.field().clone();
    let other = component_values(rerun, &pts.points);
    if other.len() != s {
        return Err(Error::degenerate(4, other.len(), s, "rerun produced a different number of components"));
    }
    let proportional = |a: &[F::Elem], b: &[F::Elem]| -> Option<F::Elem> {
        if f.is_zero(&a[0]) || f.is_zero(&b[0]) {
            return None;
        }
        let ok = a.iter().zip(b).all(|(x, y)| f.mul(x, &b[0]) == f.mul(y, &a[0]));
        ok.then(|| f.div(&a[0], &b[0]).expect("nonzero"))
    };
    let mut perm = Vec::with_capacity(s);
    let mut ratios = Vec::with_capacity(s);
    let mut used = vec![false; s];
    for a in &pts.values {
        let hits: Vec<(usize, F::Elem)> =
            other.iter().enumerate().filter_map(|(j, b)| proportional(a, b).map(|r| (j, r))).collect();
        if hits.len() != 1 || used[hits[0].0] {
            let matched = perm.len();
            return Err(Error::degenerate(4, matched, s, "ratio test did not give a bijection"));
        }
        used[hits[0].0] = true;
        perm.push(hits[0].0);
        ratios.push(hits[0].1.clone());
    }
    Ok((perm, ratios))
}

/// Shared state for the reruns of one reference run.
pub struct Recovery<'a, F: Field> {
    pub f: &'a BlackBox<F>,
    pub t: usize,
    pub m: usize,
    pub s: usize,
    pub reference: &'a PipelineState<F>,
    pub match_points: MatchPoints<F>,
    pub ratio_points: usize,
    pub checked: bool,
    /// Pipeline runs performed so far.
    pub reruns: usize,
}

impl<'a, F: Field> Recovery<'a, F> {
    #[allow(clippy::too_many_arguments)]
    pub fn new<R: Rng + ?Sized>(
        f: &'a BlackBox<F>,
        t: usize,
        m: usize,
        s: usize,
        reference: &'a PipelineState<F>,
        ratio_points: usize,
        checked: bool,
        rng: &mut R,
    ) -> Self {
        let match_points = MatchPoints::draw(&reference.components, reference.params.n0, ratio_points, rng);
        Recovery { f, t, m, s, reference, match_points, ratio_points, checked, reruns: 0 }
    }

    fn d(&self) -> usize {
        self.t * self.m
    }

    fn field(&self) -> &F {
        self.f.field()
    }

    /// Reruns with the first column of `L` replaced by `a + y (r - a)` for
    /// `y = 1..d` and returns, per reference component `i`, the univariate
    /// `p_i(y) = c_i' Q_i(a + y (r - a))^e` with `c_i'` the reference scaling.
    pub fn line_powers<R: Rng + ?Sized>(&mut self, a: &[F::Elem], r: &[F::Elem], rng: &mut R) -> Result<Vec<UniPoly<F>>> {
        let f = self.field().clone();
        let d = self.d();
        let st = self.reference;
        let n0 = st.params.n0;
        let mut e1 = vec![f.zero(); n0];
        e1[0] = f.one();
        let mut samples: Vec<Vec<(F::Elem, F::Elem)>> = vec![Vec::with_capacity(d); self.s];
        for y in 1..=d {
            let yv = f.from_u64(y as u64);
            let mut l = st.l.clone();
            for (row, (ai, ri)) in a.iter().zip(r).enumerate() {
                // a + y (r - a)
                let v = f.add(ai, &f.mul(&yv, &f.sub(ri, ai)));
                l.set(row, 0, v);
            }
            self.reruns += 1;
            let rerun = run_pipeline(self.f, self.t, self.m, self.s, &st.params, &l, &st.p, self.checked, rng)?;
            let (perm, ratios) = self.matched(&rerun.components, rng)?;
            for i in 0..self.s {
                let v = rerun.components.components[perm[i]].v.eval(&e1).swap_remove(0);
                samples[i].push((yv.clone(), f.mul(&ratios[i], &v)));
            }
        }
        let te = st.e * self.t;
        samples
            .iter()
            .map(|pts| {
                let p = UniPoly::interpolate(&f, pts)?;
                if p.degree().unwrap_or(0) > te {
                    return Err(Error::InvalidInput(format!(
                        "interpolated line power has degree {:?}, expected at most {te}",
                        p.degree()
                    )));
                }
                Ok(p)
            })
            .collect()
    }

    fn matched<R: Rng + ?Sized>(&mut self, rerun: &Decomposition<F>, rng: &mut R) -> Result<(Vec<usize>, Vec<F::Elem>)> {
        let mut last = None;
        for attempt in 0..MATCH_ATTEMPTS {
            if attempt > 0 {
                self.match_points =
                    MatchPoints::draw(&self.reference.components, self.reference.params.n0, self.ratio_points, rng);
            }
            match match_runs(&self.match_points, rerun) {
                Ok(m) => return Ok(m),
                Err(e) => last = Some(e),
            }
        }
        Err(last.expect("at least one attempt"))
    }

    /// `c_i' Q_i(a)^e` for reference component `i`, from one random line through `a`.
    pub fn query_power<R: Rng + ?Sized>(&mut self, i: usize, a: &[F::Elem], rng: &mut R) -> Result<F::Elem> {
        let r = self.field().random_vec(rng, a.len());
        let ps = self.line_powers(a, &r, rng)?;
        Ok(ps[i].coeff(0))
    }

    /// Dense reconstruction of every `Q_i`, normalized to `Q_i(anchor) = 1`.
    ///
    /// The line from `a` to `r` yields `h(y) = Q_i(a + y (r - a)) / Q_i(a)`,
    /// hence the `t` homogeneous equations `Q_i(a + y (r - a)) = h(y) Q_i(a)`
    /// for `y = 1..t`. Lines are added until each system has a unique solution.
    pub fn extract_all<R: Rng + ?Sized>(&mut self, extra_lines: usize, rng: &mut R) -> Result<ExtractReport<F>> {
        let f = self.field().clone();
        let n = self.f.nvars();
        let (t, s, e) = (self.t, self.s, self.reference.e);
        let monos = monomial_enumeration(n, t, MonomialKind::All);
        let unknowns = monos.len();
        let anchor = f.random_vec(rng, n);
        let anchor_row = monomial_values(&f, &monos, &anchor);
        let mut rows: Vec<Vec<Vec<F::Elem>>> = vec![vec![anchor_row]; s];
        let mut lines = 0;
        let mut failures = 0;
        let mut last_err = None;
        let mut target = (unknowns - 1).div_ceil(t) + extra_lines;
        let failure_cap = 8 + target / 4;
        loop {
            while lines < target {
                if failures > failure_cap {
                    return Err(last_err.unwrap_or_else(|| Error::RetryExhausted("line reruns".into())));
                }
                let a = f.random_vec(rng, n);
                let r = f.random_vec(rng, n);
                let hs = match self.line_powers(&a, &r, rng).and_then(|ps| {
                    ps.iter().map(|p| normalized_root(p, e as u32, t)).collect::<Result<Vec<_>>>()
                }) {
                    Ok(hs) => hs,
                    Err(err) => {
                        failures += 1;
                        last_err = Some(err);
                        continue;
                    }
                };
                let base = monomial_values(&f, &monos, &a);
                for y in 1..=t {
                    let yv = f.from_u64(y as u64);
                    let pt: Vec<F::Elem> = a.iter().zip(&r).map(|(ai, ri)| f.add(ai, &f.mul(&yv, &f.sub(ri, ai)))).collect();
                    let vals = monomial_values(&f, &monos, &pt);
                    for (i, h) in hs.iter().enumerate() {
                        let hy = h.eval(&yv);
                        rows[i].push(vals.iter().zip(&base).map(|(v, b)| f.sub(v, &f.mul(&hy, b))).collect());
                    }
                }
                lines += 1;
            }
            let mut qs = Vec::with_capacity(s);
            let mut deficit = 0;
            for sys in &rows {
                let a = Matrix::from_rows(&f, sys.clone())?;
                let mut b = vec![f.zero(); sys.len()];
                b[0] = f.one();
                let sol = a.solve(&Matrix::from_cols(&f, sys.len(), &[b])?)?;
                deficit = deficit.max(sol.kernel.len());
                qs.push(SparsePoly::from_coeff_vector(&f, n, &monos, &sol.particular.col(0)));
            }
            if deficit > 0 {
                target += deficit.div_ceil(t);
                continue;
            }
            return Ok(ExtractReport { qs, anchor, lines, failures });
        }
    }
}

/// Recovered forms together with how much work it took.
#[derive(Clone, Debug)]
pub struct ExtractReport<F: Field> {
    pub qs: Vec<SparsePoly<F>>,
    pub anchor: Vec<F::Elem>,
    pub lines: usize,
    pub failures: usize,
}

/// `h` with `h(0) = 1` and `h^e = p / p(0)`, checked exactly; `h` has degree `t`.
pub fn normalized_root<F: Field>(p: &UniPoly<F>, e: u32, t: usize) -> Result<UniPoly<F>> {
    let f = p.field();
    let c0 = f.inv(&p.coeff(0)).ok_or(Error::DivisionByZero)?;
    let normalized = p.scale(&c0);
    let h = series_eth_root(&normalized, e, t)?;
    if h.pow(e) != normalized {
        return Err(Error::InvalidInput("line power is not an exact e-th power".into()));
    }
    Ok(h)
}

/// Values of the given monomials at `x`.
pub fn monomial_values<F: Field>(f: &F, monos: &[Monomial], x: &[F::Elem]) -> Vec<F::Elem> {
    let maxdeg = monos.iter().map(|m| m.degree()).max().unwrap_or(0) as usize;
    let powers: Vec<Vec<F::Elem>> = x
        .iter()
        .map(|xi| {
            let mut p = vec![f.one()];
            for _ in 0..maxdeg {
                let next = f.mul(p.last().expect("nonempty"), xi);
                p.push(next);
            }
            p
        })
        .collect();
    monos
        .iter()
        .map(|m| {
            let mut acc = f.one();
            for (i, &e) in m.exps().iter().enumerate() {
                if e > 0 {
                    acc = f.mul(&acc, &powers[i][e as usize]);
                }
            }
            acc
        })
        .collect()
}

/// Solves `f(x) = sum_i u_i Q_i(x)^m` from `s` random points and checks the
/// answer on `s` more.
pub fn final_coefficients<F: Field, R: Rng + ?Sized>(
    f: &BlackBox<F>,
    qs: &[SparsePoly<F>],
    m: usize,
    rng: &mut R,
) -> Result<Vec<F::Elem>> {
    let field = f.field().clone();
    let s = qs.len();
    let n = f.nvars();
    let row = |x: &[F::Elem]| -> Result<Vec<F::Elem>> {
        qs.iter().map(|q| Ok(field.pow(&q.evaluate(x)?, m as u64))).collect()
    };
    let mut rank = 0;
    for _ in 0..COEFF_ATTEMPTS {
        let pts: Vec<Vec<F::Elem>> = (0..s).map(|_| field.random_vec(rng, n)).collect();
        let a = Matrix::from_rows(&field, pts.iter().map(|x| row(x)).collect::<Result<Vec<_>>>()?)?;
        let b: Vec<F::Elem> = pts.iter().map(|x| f.eval(x).swap_remove(0)).collect();
        rank = a.rank();
        let u = match a.solve_unique(&b) {
            Ok(u) => u,
            Err(_) => continue,
        };
        let ok = (0..s).all(|_| {
            let x = field.random_vec(rng, n);
            let pred = field.dot(&u, &row(&x).expect("arity"));
            pred == f.eval(&x).swap_remove(0)
        });
        if ok {
            return Ok(u);
        }
    }
    Err(Error::degenerate(1, rank, s, "powers of the recovered forms are dependent"))
}
