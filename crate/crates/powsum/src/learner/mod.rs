//! Reconstruction of `f = sum_i c_i Q_i^m` from an evaluation oracle.
//!
//! [`learn`] runs the span, gcd, projection and decomposition steps once for
//! a reference pair of maps `(L, P)`, then reruns them with the first
//! column of `L` moved along lines through a fixed anchor. Matching the
//! rerun components against the reference ones on `z_1 = 0` gives, for
//! every term, the restriction of `Q_i^e` to each line, from which `Q_i`
//! follows by an exact `e`-th root and a dense linear solve.

mod circuit;
mod params;
mod pipeline;
mod recover;

pub use circuit::{CircuitJson, PowerSumCircuit, TermJson};
pub use params::{escalate, integer_root, max_k, raw_parameters, select_parameters, ParamChoice, Params};
pub use pipeline::{compute_u, compute_w, draw_maps, multi_gcd, run_pipeline, ConditionCheck, PipelineState, UBasis};
pub use recover::{final_coefficients, match_runs, monomial_values, normalized_root, MatchPoints, Recovery};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::Field;
use crate::blackbox::BlackBox;
use crate::error::{Error, Result};
use crate::multipoly::SparsePoly;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamMode {
    /// Start from the formula values and escalate on failed checks.
    Auto,
    /// Use the given parameters; failed checks only redraw `(L, P)`.
    Explicit(Params),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub mode: ParamMode,
    pub seed: u64,
    /// Reference attempts (fresh maps or escalated parameters) before giving up.
    pub retries: usize,
    /// Points used by the ratio test; `2d + 1` when unset.
    pub ratio_points: Option<usize>,
    pub verify_points: usize,
    /// Compare every dimension with its closed form.
    pub checked: bool,
    /// Lines beyond the minimum needed for the dense solve.
    pub extra_lines: usize,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            mode: ParamMode::Auto,
            seed: 0,
            retries: 4,
            ratio_points: None,
            verify_points: 50,
            checked: true,
            extra_lines: 2,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AttemptReport {
    pub params: Params,
    pub outcome: String,
    pub checks: Vec<ConditionCheck>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LearnReport {
    pub n: usize,
    pub d: usize,
    pub t: usize,
    pub s: usize,
    pub seed: u64,
    pub choice: Option<ParamChoice>,
    pub params: Params,
    pub attempts: Vec<AttemptReport>,
    pub checks: Vec<ConditionCheck>,
    pub reruns: usize,
    pub lines: usize,
    pub failed_lines: usize,
    pub verification_points: usize,
}

#[derive(Clone, Debug)]
pub struct LearnedModel<F: Field> {
    /// Each form is determined up to a scalar; here `Q_i(anchor) = 1`.
    pub qs: Vec<SparsePoly<F>>,
    pub us: Vec<F::Elem>,
    pub report: LearnReport,
}

impl<F: Field> LearnedModel<F> {
    pub fn to_circuit(&self, n: usize, t: usize, m: usize) -> Result<PowerSumCircuit<F>> {
        let f = self.qs[0].field();
        PowerSumCircuit::new(f, n, t, m, self.us.iter().cloned().zip(self.qs.iter().cloned()).collect())
    }
}

fn validate_explicit(p: &Params, m: usize) -> Result<()> {
    if p.k < 1 || p.k >= m || p.n0 < 2 || p.m0 < 1 {
        return Err(Error::InvalidInput(format!(
            "parameters n0 = {}, m0 = {}, k = {} violate 1 <= k < m = {m}, n0 >= 2, m0 >= 1",
            p.n0, p.m0, p.k
        )));
    }
    Ok(())
}

/// Learns the `Q_i` and outer coefficients of a homogeneous degree-`d`
/// oracle known to be a sum of `s` `m`-th powers of degree-`t` forms.
pub fn learn<F: Field>(f: BlackBox<F>, d: usize, t: usize, s: usize, config: &LearnerConfig) -> Result<LearnedModel<F>> {
    let field = f.field().clone();
    let n = f.nvars();
    if s == 0 || t == 0 || d == 0 || !d.is_multiple_of(t) {
        return Err(Error::InvalidInput(format!("need s >= 1 and t | d, got s = {s}, t = {t}, d = {d}")));
    }
    if !field.char_exceeds(2 * d as u64) {
        return Err(Error::InvalidField(format!("characteristic must exceed 2d = {}", 2 * d)));
    }
    let m = d / t;
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    let (choice, mut params) = match config.mode {
        ParamMode::Auto => {
            let c = select_parameters(n, d, t, s)?;
            (Some(c), c.chosen)
        }
        ParamMode::Explicit(p) => {
            validate_explicit(&p, m)?;
            (None, p)
        }
    };
    let ratio_points = config.ratio_points.unwrap_or(2 * d + 1);
    let mut attempts = Vec::new();
    let mut last_err = None;
    for _ in 0..config.retries.max(1) {
        let (l, p) = draw_maps(&field, n, &params, &mut rng);
        let outcome = attempt(&f, t, m, s, &params, &l, &p, ratio_points, config, &mut rng);
        match outcome {
            Ok((qs, us, state_checks, rec)) => {
                attempts.push(AttemptReport { params, outcome: "ok".into(), checks: state_checks.clone() });
                let report = LearnReport {
                    n,
                    d,
                    t,
                    s,
                    seed: config.seed,
                    choice,
                    params,
                    attempts,
                    checks: state_checks,
                    reruns: rec.0,
                    lines: rec.1,
                    failed_lines: rec.2,
                    verification_points: config.verify_points,
                };
                return Ok(LearnedModel { qs, us, report });
            }
            Err(err) => {
                attempts.push(AttemptReport { params, outcome: err.to_string(), checks: Vec::new() });
                let degenerate = matches!(err, Error::Degenerate(_));
                last_err = Some(err);
                if degenerate {
                    if let ParamMode::Auto = config.mode {
                        if let Some(q) = escalate(&params, n, d, t, s) {
                            params = q;
                        }
                    }
                }
            }
        }
    }
    Err(last_err.expect("at least one attempt"))
}

type AttemptOutput<F> = (Vec<SparsePoly<F>>, Vec<<F as Field>::Elem>, Vec<ConditionCheck>, (usize, usize, usize));

#[allow(clippy::too_many_arguments)]
fn attempt<F: Field>(
    f: &BlackBox<F>,
    t: usize,
    m: usize,
    s: usize,
    params: &Params,
    l: &crate::multipoly::LinearTuple<F>,
    p: &crate::multipoly::LinearTuple<F>,
    ratio_points: usize,
    config: &LearnerConfig,
    rng: &mut ChaCha20Rng,
) -> Result<AttemptOutput<F>> {
    let reference = run_pipeline(f, t, m, s, params, l, p, config.checked, rng)?;
    let mut rec = Recovery::new(f, t, m, s, &reference, ratio_points, config.checked, rng);
    let ex = rec.extract_all(config.extra_lines, rng)?;
    let us = final_coefficients(f, &ex.qs, m, rng)?;
    let field = f.field();
    for _ in 0..config.verify_points {
        let x = field.random_vec(rng, f.nvars());
        let mut acc = field.zero();
        for (u, q) in us.iter().zip(&ex.qs) {
            field.mul_add_assign(&mut acc, u, &field.pow(&q.evaluate(&x)?, m as u64));
        }
        if acc != f.eval(&x).swap_remove(0) {
            return Err(Error::RetryExhausted("learned circuit failed the identity test".into()));
        }
    }
    Ok((ex.qs, us, reference.checks.clone(), (rec.reruns + 1, ex.lines, ex.failures)))
}

#[cfg(test)]
mod tests;
