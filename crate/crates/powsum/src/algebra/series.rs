//! Truncated power series: inverse and e-th root by Newton iteration.

use super::field::Field;
use super::uni::UniPoly;
use crate::error::{Error, Result};

/// `1/h mod y^len`; needs `h(0) != 0`.
pub fn series_inverse<F: Field>(h: &UniPoly<F>, len: usize) -> Result<UniPoly<F>> {
    let f = h.field();
    let c0 = f.inv(&h.coeff(0)).ok_or(Error::SeriesConstantTerm)?;
    let mut g = UniPoly::constant(f, c0);
    let mut prec = 1;
    let two = UniPoly::constant(f, f.from_u64(2));
    while prec < len {
        prec = (2 * prec).min(len);
        // g <- g (2 - h g)
        let hg = h.truncate(prec).mul_trunc(&g, prec);
        g = g.mul_trunc(&two.sub(&hg), prec);
    }
    Ok(g.truncate(len))
}

/// The power series `g` with `g(0) = 1` and `g^e = h mod y^(trunc+1)`.
///
/// Newton's step for `G(g) = g^e - h` is `g <- g - (g^e - h) / (e g^(e-1))`,
/// which doubles the number of correct coefficients each round. The field
/// characteristic must be zero or exceed `e * trunc`.
pub fn series_eth_root<F: Field>(h: &UniPoly<F>, e: u32, trunc: usize) -> Result<UniPoly<F>> {
    let f = h.field();
    if !f.is_one(&h.coeff(0)) {
        return Err(Error::SeriesConstantTerm);
    }
    if e == 0 {
        return Err(Error::InvalidInput("zeroth root".into()));
    }
    let len = trunc + 1;
    let e_inv = f.inv(&f.from_u64(e as u64)).ok_or(Error::DivisionByZero)?;
    let mut g = UniPoly::constant(f, f.one());
    let mut prec = 1;
    while prec < len {
        prec = (2 * prec).min(len);
        let mut g_em1 = UniPoly::constant(f, f.one());
        for _ in 0..e - 1 {
            g_em1 = g_em1.mul_trunc(&g, prec);
        }
        let g_e = g_em1.mul_trunc(&g, prec);
        let resid = g_e.sub(&h.truncate(prec));
        let step = resid.mul_trunc(&series_inverse(&g_em1, prec)?, prec).scale(&e_inv);
        g = g.sub(&step);
    }
    Ok(g.truncate(len))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::field::{PrimeField, Rationals};
    use num_bigint::BigUint;
    use proptest::prelude::*;

    /// Coefficients of `h^(1/e)` from the classical recurrence
    /// `n g_n = sum_{k=1}^n ((1/e + 1) k - n) h_k g_{n-k}` for `h(0) = 1`,
    /// which comes from comparing coefficients in `e h g' = g h'`.
    fn root_by_recurrence(h: &[i64], e: i64, len: usize) -> Vec<num_rational::BigRational> {
        use num_rational::BigRational as Q;
        let hq: Vec<Q> = (0..len).map(|i| Q::from_integer(h.get(i).copied().unwrap_or(0).into())).collect();
        let alpha = Q::new(1.into(), e.into());
        let mut g = vec![Q::from_integer(1.into())];
        for n in 1..len {
            let mut acc = Q::from_integer(0.into());
            for k in 1..=n {
                let w = (&alpha + Q::from_integer(1.into())) * Q::from_integer((k as i64).into())
                    - Q::from_integer((n as i64).into());
                acc += w * &hq[k] * &g[n - k];
            }
            g.push(acc / Q::from_integer((n as i64).into()));
        }
        g
    }

    #[test]
    fn examples() {
        let q = Rationals;
        let h = UniPoly::from_i64s(&q, &[1, 2, 1]);
        assert_eq!(series_eth_root(&h, 2, 1).unwrap(), UniPoly::from_i64s(&q, &[1, 1]));
        let h = UniPoly::from_i64s(&q, &[1, 6, 11]);
        assert_eq!(series_eth_root(&h, 2, 2).unwrap(), UniPoly::from_i64s(&q, &[1, 3, 1]));
        let one = UniPoly::from_i64s(&q, &[1]);
        assert_eq!(series_eth_root(&one, 5, 7).unwrap(), one);
        assert!(matches!(series_eth_root(&UniPoly::from_i64s(&q, &[2, 1]), 2, 3), Err(Error::SeriesConstantTerm)));
    }

    #[test]
    fn agrees_with_coefficient_recurrence() {
        let q = Rationals;
        for (h, e) in [(vec![1i64, 3, -2, 5], 3i64), (vec![1, -1, 0, 0, 4], 2), (vec![1, 7], 5)] {
            let want = root_by_recurrence(&h, e, 9);
            let got = series_eth_root(&UniPoly::from_i64s(&q, &h), e as u32, 8).unwrap();
            assert_eq!(got, UniPoly::new(&q, want));
        }
    }

    #[test]
    fn inverse_round_trip() {
        let f = PrimeField::<1>::new(&BigUint::from(10007u32)).unwrap();
        let h = UniPoly::from_i64s(&f, &[3, 1, 4, 1, 5]);
        let inv = series_inverse(&h, 10).unwrap();
        assert_eq!(h.mul_trunc(&inv, 10), UniPoly::constant(&f, f.one()));
    }

    proptest! {
        #[test]
        fn root_of_power_recovers_base(tail in prop::collection::vec(-30i64..30, 0..8), e in 1u32..=6) {
            let f = PrimeField::<2>::new(&"170141183460469231731687303715884105727".parse().unwrap()).unwrap();
            let mut cs = vec![1i64];
            cs.extend(tail);
            let g = UniPoly::from_i64s(&f, &cs);
            let deg = cs.len() - 1;
            let trunc = deg.max(1);
            let h = g.pow(e).truncate(trunc + 1);
            prop_assert_eq!(series_eth_root(&h, e, trunc).unwrap(), g.truncate(trunc + 1));
        }
    }
}
