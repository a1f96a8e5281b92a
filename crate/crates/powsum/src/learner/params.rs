//! Choice of the projection and derivative parameters `(n0, m0, k)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multipoly::binomial;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params {
    pub n0: usize,
    pub m0: usize,
    pub k: usize,
}

impl Params {
    /// `k (t - 1)`, the degree of the cofactors that derivatives produce.
    pub fn kappa(&self, t: usize) -> usize {
        self.k * (t - 1)
    }

    /// `m - k`, the power surviving `k` derivatives.
    pub fn e(&self, m: usize) -> usize {
        m - self.k
    }

    pub fn expected_dim_u(&self, t: usize, s: usize) -> usize {
        let kappa = self.kappa(t);
        s * binom(self.n0 + kappa - 1, kappa)
    }

    pub fn expected_dim_w(&self, t: usize, s: usize) -> usize {
        let kappa = self.kappa(t);
        s * binom(self.m0 + kappa - 1, kappa)
    }
}

fn binom(n: usize, k: usize) -> usize {
    binomial(n as u64, k as u64) as usize
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamChoice {
    /// The formula values before clamping.
    pub raw: Params,
    pub chosen: Params,
    pub clamped: bool,
}

/// Largest `x` with `x^r <= n`.
pub fn integer_root(n: u64, r: u32) -> u64 {
    if r == 0 {
        return n;
    }
    let mut x = (n as f64).powf(1.0 / r as f64).round() as u64;
    let fits = |x: u64| x.checked_pow(r).is_some_and(|v| v <= n);
    while x > 0 && !fits(x) {
        x -= 1;
    }
    while fits(x + 1) {
        x += 1;
    }
    x
}

/// The raw formula values `n0 = floor(n^(1/3t))`, `m0 = floor(n^(1/15t^2))`,
/// `k = ceil(130 t log s / log n)`.
pub fn raw_parameters(n: usize, t: usize, s: usize) -> Params {
    let n0 = integer_root(n as u64, 3 * t as u32) as usize;
    let m0 = integer_root(n as u64, 15 * (t * t) as u32) as usize;
    let k = if s <= 1 || n <= 1 {
        0
    } else {
        let x = 130.0 * t as f64 * (s as f64).ln() / (n as f64).ln();
        // Guard against ceil(12.000000001) on exact ratios.
        (x - 1e-9).ceil() as usize
    };
    Params { n0, m0, k }
}

/// Largest usable `k`. With several terms the decomposition step needs
/// `m - 2k >= 1`; a single term only needs `k < m`.
pub fn max_k(m: usize, s: usize) -> usize {
    if s >= 2 {
        m.saturating_sub(1) / 2
    } else {
        m.saturating_sub(1)
    }
}

/// True when the `W` family (one member per order-`k` partial in `n0`
/// variables) can be as large as the expected `W`.
pub fn w_fits(p: &Params, t: usize, s: usize) -> bool {
    binom(p.n0 + p.k - 1, p.k) >= p.expected_dim_w(t, s)
}

/// True when the `U` family (one member per order-`k` partial in `n`
/// variables) can be as large as the expected `U`.
pub fn u_fits(p: &Params, n: usize, t: usize, s: usize) -> bool {
    binom(n + p.k - 1, p.k) >= p.expected_dim_u(t, s)
}

/// Smallest `n0 >= floor` for which the `W` family fits, capped at `n`.
fn fit_n0(mut p: Params, floor: usize, n: usize, t: usize, s: usize) -> Params {
    p.n0 = p.n0.max(floor);
    while !w_fits(&p, t, s) && p.n0 < n {
        p.n0 += 1;
    }
    p
}

/// Formula values clamped to the feasibility box.
pub fn select_parameters(n: usize, d: usize, t: usize, s: usize) -> Result<ParamChoice> {
    if t == 0 || !d.is_multiple_of(t) {
        return Err(Error::InvalidInput(format!("t = {t} does not divide d = {d}")));
    }
    let m = d / t;
    let kmax = max_k(m, s);
    if kmax == 0 {
        return Err(Error::Infeasible(format!(
            "no derivative order k fits m = {m} with s = {s} (needs m >= {})",
            if s >= 2 { 3 } else { 2 }
        )));
    }
    let raw = raw_parameters(n, t, s);
    let mut p = raw;
    p.k = p.k.clamp(1, kmax);
    p.m0 = p.m0.max(if s >= 2 { 2 } else { 1 });
    p = fit_n0(p, 2, n, t, s);
    p.m0 = p.m0.min(p.n0);
    if n < 2 || !w_fits(&p, t, s) || !u_fits(&p, n, t, s) {
        return Err(Error::Infeasible(format!("no (n0, m0) fits n = {n}, t = {t}, s = {s}, k = {}", p.k)));
    }
    Ok(ParamChoice { raw, chosen: p, clamped: p != raw })
}

/// The next parameters to try after a failed dimension check: raise `k`
/// while it fits, otherwise double `n0` (capped at `n`) and `m0` (capped so
/// that `W` still fits). `None` once nothing changes.
pub fn escalate(p: &Params, n: usize, d: usize, t: usize, s: usize) -> Option<Params> {
    let m = d / t;
    let mut q = *p;
    if q.k < max_k(m, s) {
        q.k += 1;
        q = fit_n0(q, q.n0, n, t, s);
        if w_fits(&q, t, s) && u_fits(&q, n, t, s) {
            return Some(q);
        }
        q = *p;
    }
    q.n0 = (2 * q.n0).min(n);
    let target = (2 * q.m0).min(q.n0);
    while q.m0 < target {
        q.m0 += 1;
        if !w_fits(&q, t, s) {
            q.m0 -= 1;
            break;
        }
    }
    (q != *p && w_fits(&q, t, s) && u_fits(&q, n, t, s)).then_some(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formula_values() {
        let raw = raw_parameters(4096, 2, 4);
        assert_eq!(raw, Params { n0: 4, m0: 1, k: 44 });
        assert_eq!(raw_parameters(4096, 2, 1).k, 0);
        assert_eq!(integer_root(4096, 6), 4);
        assert_eq!(integer_root(4095, 6), 3);
        assert_eq!(integer_root(1 << 60, 60), 2);
    }

    #[test]
    fn single_term_clamps_k_to_one() {
        let c = select_parameters(4096, 8, 2, 1).unwrap();
        assert_eq!(c.chosen.k, 1);
        assert!(c.clamped);
    }

    #[test]
    fn desk_instance_parameters() {
        let c = select_parameters(30, 8, 2, 3).unwrap();
        assert_eq!(c.chosen, Params { n0: 6, m0: 2, k: 1 });
        assert_eq!(c.chosen.expected_dim_u(2, 3), 18);
        assert_eq!(c.chosen.expected_dim_w(2, 3), 6);
        assert_eq!(c.chosen.e(4), 3);
    }

    #[test]
    fn infeasible_when_m_is_too_small() {
        assert!(matches!(select_parameters(30, 4, 2, 2), Err(Error::Infeasible(_))));
        assert!(select_parameters(30, 4, 2, 1).is_ok());
        assert!(matches!(select_parameters(30, 5, 2, 1), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn escalation_moves_forward_until_stuck() {
        let start = select_parameters(30, 12, 2, 2).unwrap().chosen;
        let mut p = start;
        let mut steps = 0;
        while let Some(q) = escalate(&p, 30, 12, 2, 2) {
            assert!(q.k >= p.k && q.n0 >= p.n0);
            assert!(w_fits(&q, 2, 2));
            p = q;
            steps += 1;
            assert!(steps < 20);
        }
        assert!(steps >= 2);
        assert_eq!(p.k, 2);
        assert!(u_fits(&p, 30, 2, 2));
    }
}
