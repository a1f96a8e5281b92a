//! Rational reconstruction from a residue modulo a prime.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// The bound `floor(sqrt((p-1)/2))` on numerator and denominator.
pub fn reconstruction_bound(p: &BigUint) -> BigUint {
    let half: BigUint = (p - 1u32) >> 1;
    half.sqrt()
}

/// Finds `a/b` with `|a|, b <= floor(sqrt((p-1)/2))`, `gcd(b, p) = 1` and
/// `a = r b (mod p)`, or `None` when no such fraction exists.
///
/// Runs the extended Euclidean algorithm on `(p, r)` and stops at the first
/// remainder below the bound; the fraction found there is the only candidate.
pub fn rational_reconstruct(r: &BigUint, p: &BigUint) -> Option<BigRational> {
    let bound = BigInt::from(reconstruction_bound(p));
    let pi = BigInt::from(p.clone());
    let mut r0 = pi.clone();
    let mut r1 = BigInt::from(r % p);
    let mut t0 = BigInt::zero();
    let mut t1 = BigInt::one();
    while r1 > bound {
        let (q, rem) = r0.div_rem(&r1);
        r0 = std::mem::replace(&mut r1, rem);
        let t2 = &t0 - &q * &t1;
        t0 = std::mem::replace(&mut t1, t2);
    }
    if t1.is_zero() || t1.abs() > bound {
        return None;
    }
    if !t1.gcd(&pi).is_one() {
        return None;
    }
    Some(BigRational::new(r1, t1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rr(r: u64, p: u64) -> Option<String> {
        rational_reconstruct(&BigUint::from(r), &BigUint::from(p)).map(|q| crate::algebra::field::format_rational(&q))
    }

    /// Every fraction within the bound whose image is `r`.
    fn brute(r: i64, p: i64) -> Vec<(i64, i64)> {
        let b = (((p - 1) / 2) as f64).sqrt().floor() as i64;
        let mut out = Vec::new();
        for den in 1..=b {
            for num in -b..=b {
                if num.gcd(&den) == 1 && (num - r * den).rem_euclid(p) == 0 {
                    out.push((num, den));
                }
            }
        }
        out
    }

    #[test]
    fn examples() {
        assert_eq!(rr(0, 101).as_deref(), Some("0"));
        assert_eq!(rr(87, 101).as_deref(), Some("3/7"));
        // 50 = -1/2 (mod 101) since 2 * 50 = -1.
        assert_eq!(rr(50, 101).as_deref(), Some("-1/2"));
        assert_eq!(rr(8, 101), None);
        assert!(brute(8, 101).is_empty());
    }

    #[test]
    fn exhaustive_against_brute_force_mod_101() {
        for r in 0..101 {
            let want = brute(r, 101);
            let got = rr(r as u64, 101);
            match want.as_slice() {
                [] => assert_eq!(got, None, "r={r}"),
                [(a, b)] => {
                    let s = if *b == 1 { a.to_string() } else { format!("{a}/{b}") };
                    assert_eq!(got, Some(s), "r={r}");
                }
                many => panic!("bound should make fractions unique, got {many:?}"),
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn round_trip(a in -700_000i64..700_000, b in 1i64..700_000,
                      pick in 0usize..3) {
            let primes: [u64; 3] = [1_000_000_000_039, 2_305_843_009_213_693_951, 4_611_686_018_427_388_039];
            let p = BigUint::from(primes[pick]);
            let pi = BigInt::from(p.clone());
            let q = BigRational::new(a.into(), b.into());
            let den_inv = q.denom().clone().modpow(&(&pi - 2), &pi);
            let r = (q.numer() * den_inv).mod_floor(&pi);
            let r = r.to_biguint().unwrap();
            prop_assert_eq!(rational_reconstruct(&r, &p), Some(q));
        }
    }
}
