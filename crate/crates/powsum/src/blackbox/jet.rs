//! Truncated multivariate Taylor expansions.
//!
//! A jet of order `K` in `r` variables stores every coefficient of total
//! degree at most `K`, laid out densely in graded order. Index tables are
//! shared per `(r, K)` through a process-wide cache.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::algebra::Field;

#[derive(Debug)]
pub struct JetShape {
    pub r: usize,
    pub order: usize,
    monos: Vec<Vec<u8>>,
    degs: Vec<usize>,
    /// `deg_start[j]..deg_start[j+1]` are the monomials of degree `j`.
    deg_start: Vec<usize>,
    /// `up[i * r + v]` is the index of `monos[i] * u_v` (only for degree < order).
    up: Vec<u32>,
    /// Products `(i, j, k)` with `monos[i] * monos[j] = monos[k]`, grouped by
    /// the degrees of `i` and `j`.
    pairs: Vec<Vec<Vec<(u32, u32, u32)>>>,
    index: HashMap<Vec<u8>, usize>,
}

impl JetShape {
    /// The shared table for `r` variables and order `order`.
    pub fn get(r: usize, order: usize) -> Arc<JetShape> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<JetShape>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(s) = cache.lock().expect("jet cache poisoned").get(&(r, order)) {
            return s.clone();
        }
        let shape = Arc::new(Self::build(r, order));
        cache.lock().expect("jet cache poisoned").insert((r, order), shape.clone());
        shape
    }

    fn build(r: usize, order: usize) -> JetShape {
        let mut monos: Vec<Vec<u8>> = Vec::new();
        let mut deg_start = Vec::with_capacity(order + 2);
        for d in 0..=order {
            deg_start.push(monos.len());
            let mut cur = vec![0u8; r];
            graded(&mut cur, 0, d, &mut monos);
        }
        deg_start.push(monos.len());
        let degs: Vec<usize> = monos.iter().map(|m| m.iter().map(|&e| e as usize).sum()).collect();
        let index: HashMap<Vec<u8>, usize> = monos.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        let mut up = vec![u32::MAX; monos.len() * r];
        for (i, m) in monos.iter().enumerate() {
            if degs[i] < order {
                for v in 0..r {
                    let mut e = m.clone();
                    e[v] += 1;
                    up[i * r + v] = index[&e] as u32;
                }
            }
        }
        let mut pairs = vec![vec![Vec::new(); order + 1]; order + 1];
        for a in 0..=order {
            for b in 0..=order - a {
                let list = &mut pairs[a][b];
                for i in deg_start[a]..deg_start[a + 1] {
                    for j in deg_start[b]..deg_start[b + 1] {
                        let e: Vec<u8> = monos[i].iter().zip(&monos[j]).map(|(x, y)| x + y).collect();
                        list.push((i as u32, j as u32, index[&e] as u32));
                    }
                }
            }
        }
        JetShape { r, order, monos, degs, deg_start, up, pairs, index }
    }

    pub fn len(&self) -> usize {
        self.monos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monos.is_empty()
    }

    pub fn monomial(&self, i: usize) -> &[u8] {
        &self.monos[i]
    }

    pub fn degree_of(&self, i: usize) -> usize {
        self.degs[i]
    }

    pub fn index_of(&self, exps: &[u8]) -> Option<usize> {
        self.index.get(exps).copied()
    }

    /// Number of coefficients of degree at most `d`.
    pub fn prefix_len(&self, d: usize) -> usize {
        self.deg_start[d.min(self.order) + 1]
    }
}

fn graded(cur: &mut Vec<u8>, i: usize, left: usize, out: &mut Vec<Vec<u8>>) {
    if cur.is_empty() {
        if left == 0 {
            out.push(Vec::new());
        }
        return;
    }
    if i + 1 == cur.len() {
        cur[i] = left as u8;
        out.push(cur.clone());
        cur[i] = 0;
        return;
    }
    for e in (0..=left).rev() {
        cur[i] = e as u8;
        graded(cur, i + 1, left - e, out);
    }
    cur[i] = 0;
}

/// A truncated expansion; `maxdeg` bounds the degrees of nonzero coefficients.
#[derive(Clone, Debug)]
pub struct Jet<F: Field> {
    pub shape: Arc<JetShape>,
    pub coeffs: Vec<F::Elem>,
    pub maxdeg: usize,
}

impl<F: Field> PartialEq for Jet<F> {
    fn eq(&self, other: &Self) -> bool {
        self.shape.r == other.shape.r && self.shape.order == other.shape.order && self.coeffs == other.coeffs
    }
}

impl<F: Field> Jet<F> {
    pub fn zero(field: &F, shape: &Arc<JetShape>) -> Self {
        Jet { shape: shape.clone(), coeffs: vec![field.zero(); shape.len()], maxdeg: 0 }
    }

    pub fn constant(field: &F, shape: &Arc<JetShape>, c: F::Elem) -> Self {
        let mut j = Self::zero(field, shape);
        j.coeffs[0] = c;
        j
    }

    /// `c0 + sum_v lin[v] u_v`.
    pub fn affine(field: &F, shape: &Arc<JetShape>, c0: F::Elem, lin: &[F::Elem]) -> Self {
        let mut j = Self::constant(field, shape, c0);
        if shape.order >= 1 {
            for (v, c) in lin.iter().enumerate() {
                j.coeffs[1 + v] = c.clone();
            }
            j.maxdeg = 1;
        }
        j
    }

    pub fn constant_term(&self) -> &F::Elem {
        &self.coeffs[0]
    }

    pub fn coeff(&self, field: &F, exps: &[u8]) -> F::Elem {
        self.shape.index_of(exps).map(|i| self.coeffs[i].clone()).unwrap_or_else(|| field.zero())
    }

    pub fn add_assign(&mut self, field: &F, other: &Self) {
        let len = self.shape.prefix_len(other.maxdeg);
        for i in 0..len {
            self.coeffs[i] = field.add(&self.coeffs[i], &other.coeffs[i]);
        }
        self.maxdeg = self.maxdeg.max(other.maxdeg);
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, field: &F, c: &F::Elem, other: &Self) {
        if field.is_zero(c) {
            return;
        }
        let len = self.shape.prefix_len(other.maxdeg);
        for i in 0..len {
            field.mul_add_assign(&mut self.coeffs[i], c, &other.coeffs[i]);
        }
        self.maxdeg = self.maxdeg.max(other.maxdeg);
    }

    pub fn scale(&self, field: &F, c: &F::Elem) -> Self {
        let mut out = Self::zero(field, &self.shape);
        out.add_scaled(field, c, self);
        out
    }

    /// `self += other * (b + sum_v u_v * lin_v)` for a sparse linear part.
    pub fn add_mul_affine(&mut self, field: &F, other: &Self, b: &F::Elem, lin: &[(u32, F::Elem)]) {
        let shape = &self.shape;
        let r = shape.r;
        let len = shape.prefix_len(other.maxdeg);
        let zero_b = field.is_zero(b);
        for i in 0..len {
            let c = &other.coeffs[i];
            if field.is_zero(c) {
                continue;
            }
            if !zero_b {
                field.mul_add_assign(&mut self.coeffs[i], c, b);
            }
            if shape.degs[i] < shape.order {
                for (v, l) in lin {
                    let k = shape.up[i * r + *v as usize] as usize;
                    field.mul_add_assign(&mut self.coeffs[k], c, l);
                }
            }
        }
        let grow = if lin.is_empty() { 0 } else { 1 };
        self.maxdeg = self.maxdeg.max((other.maxdeg + grow).min(shape.order));
    }

    pub fn mul(&self, field: &F, other: &Self) -> Self {
        let shape = &self.shape;
        let mut out = Self::zero(field, shape);
        let (ma, mb) = (self.maxdeg, other.maxdeg);
        for a in 0..=ma {
            for b in 0..=mb.min(shape.order - a) {
                for &(i, j, k) in &shape.pairs[a][b] {
                    let x = &self.coeffs[i as usize];
                    if field.is_zero(x) {
                        continue;
                    }
                    field.mul_add_assign(&mut out.coeffs[k as usize], x, &other.coeffs[j as usize]);
                }
            }
        }
        out.maxdeg = (ma + mb).min(shape.order);
        out
    }

    pub fn pow(&self, field: &F, e: u32) -> Self {
        let mut acc = Self::constant(field, &self.shape, field.one());
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(field, &base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(field, &base);
            }
        }
        acc
    }

    /// Multiplicative inverse; `None` when the constant term vanishes.
    pub fn inverse(&self, field: &F) -> Option<Self> {
        let c0 = field.inv(&self.coeffs[0])?;
        // 1/(c0 + x) = c0^{-1} sum_j (-x/c0)^j, and x^(order+1) = 0.
        let mut y = self.scale(field, &field.neg(&c0));
        y.coeffs[0] = field.zero();
        let mut acc = Self::constant(field, &self.shape, field.one());
        let mut term = acc.clone();
        for _ in 0..self.shape.order {
            term = term.mul(field, &y);
            acc.add_assign(field, &term);
        }
        Some(acc.scale(field, &c0))
    }

    /// Reads off the coefficient of `u_extra^beta` as a jet in the first
    /// `target.r` variables, where the last `beta.len()` variables of `self`
    /// are the extra ones.
    pub fn extract(&self, field: &F, target: &Arc<JetShape>, beta: &[u8]) -> Jet<F> {
        let mut out = Jet::zero(field, target);
        let mut key = vec![0u8; target.r + beta.len()];
        key[target.r..].copy_from_slice(beta);
        let bdeg: usize = beta.iter().map(|&e| e as usize).sum();
        let top = target.order.min(self.maxdeg.saturating_sub(bdeg));
        if bdeg > self.maxdeg {
            return out;
        }
        for i in 0..target.prefix_len(top) {
            key[..target.r].copy_from_slice(&target.monos[i]);
            if let Some(k) = self.shape.index_of(&key) {
                out.coeffs[i] = self.coeffs[k].clone();
            }
        }
        out.maxdeg = top;
        out
    }

    /// Restriction to a lower order (same number of variables).
    pub fn truncate(&self, field: &F, target: &Arc<JetShape>) -> Jet<F> {
        debug_assert_eq!(target.r, self.shape.r);
        let mut out = Jet::zero(field, target);
        let len = target.len().min(self.coeffs.len());
        out.coeffs[..len].clone_from_slice(&self.coeffs[..len]);
        out.maxdeg = self.maxdeg.min(target.order);
        out
    }
}
