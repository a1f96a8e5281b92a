//! One pass of the span, gcd, projection and decomposition steps for a
//! fixed pair of linear maps `(L, P)`.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::params::Params;
use crate::algebra::{Field, Matrix, UniPoly};
use crate::blackbox::{
    span_basis, BlackBox, Combination, DiffOp, DiffOps, Jet, Memo, Oracle, Project, Provenance, Quotient, SpanBasis,
};
use crate::decomp::{decompose, operator_family, operator_matrices_from, Decomposition, OperatorSet};
use crate::error::{Error, Result};
use crate::multipoly::{monomial_enumeration, LinearTuple, Monomial, MonomialKind};

/// Points beyond the `2 s r` unknowns used for the gcd system.
const GCD_EXTRA_POINTS: usize = 6;

/// Outcome of one dimension check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub condition: u8,
    pub quantity: String,
    pub measured: usize,
    pub expected: usize,
    pub passed: bool,
}

/// A basis of `U` together with the derivatives its elements came from.
#[derive(Clone)]
pub struct UBasis<F: Field> {
    pub f: BlackBox<F>,
    pub l: LinearTuple<F>,
    /// All order-`k` multi-indices over the original variables.
    pub alphas: Vec<Monomial>,
    pub basis: SpanBasis<F>,
}

#[derive(Clone)]
pub struct PipelineState<F: Field> {
    pub params: Params,
    pub l: LinearTuple<F>,
    pub p: LinearTuple<F>,
    pub u: UBasis<F>,
    pub v_basis: SpanBasis<F>,
    pub g: BlackBox<F>,
    pub w_basis: SpanBasis<F>,
    pub ops: OperatorSet<F>,
    pub components: Decomposition<F>,
    pub e: usize,
    pub checks: Vec<ConditionCheck>,
}

fn check(checks: &mut Vec<ConditionCheck>, condition: u8, quantity: &str, measured: usize, expected: usize) {
    checks.push(ConditionCheck {
        condition,
        quantity: quantity.into(),
        measured,
        expected,
        passed: measured == expected,
    });
}

fn degenerate_from(c: &ConditionCheck) -> Error {
    Error::degenerate(c.condition, c.measured, c.expected, c.quantity.clone())
}

/// Basis of `<pi_L(d^alpha f) : |alpha| = k>`.
pub fn compute_u<F: Field, R: Rng + ?Sized>(f: BlackBox<F>, l: &LinearTuple<F>, k: usize, rng: &mut R) -> Result<UBasis<F>> {
    let alphas = monomial_enumeration(f.nvars(), k, MonomialKind::All);
    let ops = alphas.iter().cloned().map(DiffOp::Partial).collect();
    let family: BlackBox<F> = Arc::new(Project::new(Arc::new(DiffOps::new(f.clone(), ops)), l.clone())?);
    let basis = span_basis(family, rng)?;
    Ok(UBasis { f, l: l.clone(), alphas, basis })
}

/// `p / z_0^kappa` where `z_0 != 0` and `q / z_1^kappa` elsewhere, for two
/// families known to satisfy `z_1^kappa p = z_0^kappa q`.
struct GcdQuotient<F: Field> {
    over_z0: Quotient<F>,
    over_z1: Quotient<F>,
}

impl<F: Field> GcdQuotient<F> {
    fn pick(&self, base: &[F::Elem]) -> &Quotient<F> {
        if self.over_z0.field().is_zero(&base[0]) {
            &self.over_z1
        } else {
            &self.over_z0
        }
    }
}

impl<F: Field> Oracle<F> for GcdQuotient<F> {
    fn field(&self) -> &F {
        self.over_z0.field()
    }
    fn nvars(&self) -> usize {
        self.over_z0.nvars()
    }
    fn width(&self) -> usize {
        self.over_z0.width()
    }
    fn degree(&self) -> usize {
        self.over_z0.degree()
    }
    fn provenance(&self) -> Provenance {
        Provenance::Derived
    }
    fn eval(&self, x: &[F::Elem]) -> Vec<F::Elem> {
        self.pick(x).eval(x)
    }
    fn line(&self, base: &[F::Elem], dir: &[F::Elem]) -> Vec<UniPoly<F>> {
        let f = self.field();
        if f.is_zero(&base[0]) && f.is_zero(&dir[0]) {
            self.over_z1.line(base, dir)
        } else {
            self.over_z0.line(base, dir)
        }
    }
    fn jet(&self, base: &[F::Elem], dirs: &[Vec<F::Elem>], order: usize) -> Vec<Jet<F>> {
        self.pick(base).jet(base, dirs, order)
    }
}

/// Solves `z_1^kappa (a . u) = z_0^kappa (b . u)` and returns a basis of the
/// quotients `(a . u) / z_0^kappa`. The kernel must have dimension `s`.
pub fn multi_gcd<F: Field, R: Rng + ?Sized>(
    u: &UBasis<F>,
    kappa: usize,
    s: usize,
    rng: &mut R,
) -> Result<(SpanBasis<F>, ConditionCheck)> {
    let f = u.basis.field().clone();
    let dim = u.basis.dim();
    let n0 = u.l.cols();
    if n0 < 2 {
        return Err(Error::Infeasible("the gcd step needs at least two projected variables".into()));
    }
    // The points that found the basis are independent of it, so they count
    // as samples here too.
    let npts = 2 * dim + GCD_EXTRA_POINTS;
    let b = &u.basis;
    let mut samples: Vec<(Vec<F::Elem>, Vec<F::Elem>)> = b
        .sample_points
        .iter()
        .enumerate()
        .take(npts)
        .map(|(i, z)| (z.clone(), b.indices.iter().map(|&j| b.sample_values.get(i, j).clone()).collect()))
        .collect();
    while samples.len() < npts {
        let z = f.random_vec(rng, n0);
        let vals = b.elements.eval(&z);
        samples.push((z, vals));
    }
    let mut system = Matrix::zeros(&f, 0, 2 * dim);
    for (z, vals) in &samples {
        let w1 = f.pow(&z[1], kappa as u64);
        let w0 = f.neg(&f.pow(&z[0], kappa as u64));
        let row = vals.iter().map(|v| f.mul(v, &w1)).chain(vals.iter().map(|v| f.mul(v, &w0))).collect();
        system.push_row(row)?;
    }
    let kernel = system.kernel();
    let mut c = ConditionCheck {
        condition: 3,
        quantity: "dimension of the gcd kernel".into(),
        measured: kernel.len(),
        expected: s,
        passed: kernel.len() == s,
    };
    if !c.passed {
        return Err(degenerate_from(&c));
    }
    // Each half of a kernel vector is a derivative operator on f.
    let half_op = |coeffs: &[F::Elem]| -> DiffOp<F> {
        let terms = coeffs
            .iter()
            .zip(&u.basis.indices)
            .filter(|(c, _)| !f.is_zero(c))
            .map(|(c, &i)| (u.alphas[i].clone(), c.clone()))
            .collect();
        DiffOp::Combination(terms)
    };
    let a_ops: Vec<DiffOp<F>> = kernel.iter().map(|v| half_op(&v[..dim])).collect();
    let b_ops: Vec<DiffOp<F>> = kernel.iter().map(|v| half_op(&v[dim..])).collect();
    let num = |ops: Vec<DiffOp<F>>| -> Result<BlackBox<F>> {
        Ok(Arc::new(Project::new(Arc::new(DiffOps::new(u.f.clone(), ops)), u.l.clone())?))
    };
    let gens: BlackBox<F> = Arc::new(GcdQuotient {
        over_z0: Quotient::new(num(a_ops)?, 0, kappa)?,
        over_z1: Quotient::new(num(b_ops)?, 1, kappa)?,
    });
    let v = span_basis(gens, rng)?;
    if v.dim() != s {
        c.measured = v.dim();
        c.passed = false;
        return Err(degenerate_from(&c));
    }
    Ok((v, c))
}

/// `g` = random combination of the `V` basis and a basis of
/// `<pi_P(d^alpha g) : |alpha| = k>`.
pub fn compute_w<F: Field, R: Rng + ?Sized>(
    v: &SpanBasis<F>,
    p: &LinearTuple<F>,
    k: usize,
    rng: &mut R,
) -> Result<(BlackBox<F>, SpanBasis<F>)> {
    let (family, _) = operator_family(v, p, k)?;
    let (g, w, _) = compute_w_from(v, &family, rng)?;
    Ok((g, w))
}

/// As [`compute_w`], reading `pi_P(d^alpha g)` off the operator family
/// `pi_P(d^alpha g_j)`, whose evaluations are cached for reuse.
fn compute_w_from<F: Field, R: Rng + ?Sized>(
    v: &SpanBasis<F>,
    family: &BlackBox<F>,
    rng: &mut R,
) -> Result<(BlackBox<F>, SpanBasis<F>, BlackBox<F>)> {
    let f = v.field().clone();
    let s = v.dim();
    let gamma = f.random_vec(rng, s);
    let g: BlackBox<F> = Arc::new(Combination::new(v.elements.clone(), Matrix::from_rows(&f, vec![gamma.clone()])?)?);
    let nops = family.width() / s.max(1);
    let mut mix = Matrix::zeros(&f, nops, family.width());
    for o in 0..nops {
        for (j, c) in gamma.iter().enumerate() {
            mix.set(o, o * s + j, c.clone());
        }
    }
    let memo: BlackBox<F> = Arc::new(Memo::new(family.clone(), 256));
    let w_family: BlackBox<F> = Arc::new(Combination::new(memo.clone(), mix)?);
    Ok((g, span_basis(w_family, rng)?, memo))
}

/// Random `L` (`n x n0`) and `P` (`n0 x m0`).
pub fn draw_maps<F: Field, R: Rng + ?Sized>(f: &F, n: usize, params: &Params, rng: &mut R) -> (LinearTuple<F>, LinearTuple<F>) {
    (Matrix::random(f, n, params.n0, rng), Matrix::random(f, params.n0, params.m0, rng))
}

/// Steps one to six for the given maps. In checked mode every dimension is
/// compared with its closed form and a mismatch aborts with a report.
#[allow(clippy::too_many_arguments)]
pub fn run_pipeline<F: Field, R: Rng + ?Sized>(
    f: &BlackBox<F>,
    t: usize,
    m: usize,
    s: usize,
    params: &Params,
    l: &LinearTuple<F>,
    p: &LinearTuple<F>,
    checked: bool,
    rng: &mut R,
) -> Result<PipelineState<F>> {
    let kappa = params.kappa(t);
    let mut checks = Vec::new();
    let u = compute_u(f.clone(), l, params.k, rng)?;
    check(&mut checks, 1, "dimension of U", u.basis.dim(), params.expected_dim_u(t, s));
    if checked && !checks[0].passed {
        return Err(degenerate_from(&checks[0]));
    }
    let (v_basis, gcd) = multi_gcd(&u, kappa, s, rng)?;
    checks.push(gcd);
    let (family, alphas) = operator_family(&v_basis, p, params.k)?;
    let (g, w_basis, family) = compute_w_from(&v_basis, &family, rng)?;
    check(&mut checks, 2, "dimension of W", w_basis.dim(), params.expected_dim_w(t, s));
    if checked && !checks[2].passed {
        return Err(degenerate_from(&checks[2]));
    }
    let ops = operator_matrices_from(&family, alphas, s, &w_basis, rng)?;
    let components = decompose(&v_basis, &w_basis, &ops, rng)?;
    Ok(PipelineState {
        params: *params,
        l: l.clone(),
        p: p.clone(),
        u,
        v_basis,
        g,
        w_basis,
        ops,
        components,
        e: m - params.k,
        checks,
    })
}
