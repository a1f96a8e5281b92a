//! Roots of univariate polynomials lying in a prime field.

use num_bigint::BigUint;
use num_traits::Zero;
use rand::Rng;

use super::field::Field;
use super::uni::UniPoly;
use crate::error::{Error, Result};

/// All roots of `f` in the (odd prime) base field, repeated by multiplicity
/// and sorted by canonical residue.
///
/// The split part is isolated as `gcd(f, x^p - x)` and separated by random
/// equal-degree splitting with `(x + delta)^((p-1)/2) - 1`.
pub fn roots_in_field<F: Field, R: Rng + ?Sized>(f: &UniPoly<F>, rng: &mut R) -> Result<Vec<F::Elem>> {
    let field = f.field();
    let p = field.characteristic();
    if p.is_zero() {
        return Err(Error::InvalidField("root finding needs a prime field".into()));
    }
    if f.is_zero() {
        return Err(Error::InvalidInput("the zero polynomial has every element as a root".into()));
    }
    if p == BigUint::from(2u32) {
        let mut out = Vec::new();
        for v in [field.zero(), field.one()] {
            out.extend(std::iter::repeat_n(v.clone(), multiplicity(f, &v)));
        }
        return Ok(out);
    }
    let x = UniPoly::monomial(field, field.one(), 1);
    let xp = x.powmod(&p, f)?;
    let split = f.gcd(&xp.sub(&x));
    let mut distinct = Vec::new();
    equal_degree_split(&split, &p, rng, &mut distinct)?;
    let mut out = Vec::new();
    for r in distinct {
        let k = multiplicity(f, &r);
        out.extend(std::iter::repeat_n(r, k));
    }
    out.sort_by_cached_key(|v| field.format(v).parse::<BigUint>().unwrap_or_default());
    Ok(out)
}

fn multiplicity<F: Field>(f: &UniPoly<F>, r: &F::Elem) -> usize {
    let field = f.field();
    let lin = UniPoly::new(field, vec![field.neg(r), field.one()]);
    let mut g = f.clone();
    let mut k = 0;
    loop {
        let (q, rem) = g.divrem(&lin).expect("linear divisor");
        if !rem.is_zero() || g.is_zero() {
            return k;
        }
        g = q;
        k += 1;
    }
}

/// Splits a monic squarefree product of distinct linear factors.
fn equal_degree_split<F: Field, R: Rng + ?Sized>(
    g: &UniPoly<F>,
    p: &BigUint,
    rng: &mut R,
    out: &mut Vec<F::Elem>,
) -> Result<()> {
    let field = g.field();
    match g.degree() {
        None | Some(0) => return Ok(()),
        Some(1) => {
            let g = g.monic();
            out.push(field.neg(&g.coeff(0)));
            return Ok(());
        }
        _ => {}
    }
    let half = (p - 1u32) >> 1;
    loop {
        let delta = field.random(rng);
        let base = UniPoly::new(field, vec![delta, field.one()]);
        let w = base.powmod(&half, g)?.sub(&UniPoly::constant(field, field.one()));
        let h = g.gcd(&w);
        let dh = h.degree().unwrap_or(0);
        if dh > 0 && dh < g.degree().unwrap_or(0) {
            let rest = g.div_exact(&h)?;
            equal_degree_split(&h, p, rng, out)?;
            return equal_degree_split(&rest, p, rng, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::field::PrimeField;
    use crate::algebra::prime::is_probable_prime;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn fp(p: u64) -> PrimeField<1> {
        PrimeField::new(&BigUint::from(p)).unwrap()
    }

    fn fmt(f: &PrimeField<1>, v: &[crate::algebra::field::Fp<1>]) -> Vec<String> {
        v.iter().map(|x| f.format(x)).collect()
    }

    fn brute(f: &PrimeField<1>, poly: &UniPoly<PrimeField<1>>, p: u64) -> Vec<String> {
        (0..p).map(|v| f.from_u64(v)).filter(|v| f.is_zero(&poly.eval(v))).map(|v| f.format(&v)).collect()
    }

    #[test]
    fn examples() {
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        let f7 = fp(7);
        let r = roots_in_field(&UniPoly::from_i64s(&f7, &[-1, 0, 1]), &mut rng).unwrap();
        assert_eq!(fmt(&f7, &r), ["1", "6"]);
        let r = roots_in_field(&UniPoly::from_i64s(&f7, &[1, 0, 1]), &mut rng).unwrap();
        assert!(r.is_empty());
        let f5 = fp(5);
        let poly = UniPoly::from_i64s(&f5, &[1, 0, 1]);
        let r = roots_in_field(&poly, &mut rng).unwrap();
        assert_eq!(fmt(&f5, &r), brute(&f5, &poly, 5));
        assert_eq!(fmt(&f5, &r), ["2", "3"]);
    }

    #[test]
    fn multiplicities_are_reported() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let f = fp(101);
        // (x-3)^3 (x-5) (x^2+1)
        let lin = |r: i64| UniPoly::from_i64s(&f, &[-r, 1]);
        let poly = lin(3).pow(3).mul(&lin(5)).mul(&UniPoly::from_i64s(&f, &[1, 0, 1]));
        let r = roots_in_field(&poly, &mut rng).unwrap();
        // 101 = 1 mod 4, so x^2+1 splits: 10^2 = 100 = -1.
        assert_eq!(fmt(&f, &r), ["3", "3", "3", "5", "10", "91"]);
    }

    proptest! {
        #[test]
        fn agrees_with_brute_force(p in 3u64..=101, cs in prop::collection::vec(-200i64..200, 2..7), seed in any::<u64>()) {
            prop_assume!(is_probable_prime(&BigUint::from(p)));
            let f = fp(p);
            let poly = UniPoly::from_i64s(&f, &cs);
            prop_assume!(!poly.is_zero());
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let roots = roots_in_field(&poly, &mut rng).unwrap();
            for r in &roots {
                prop_assert!(f.is_zero(&poly.eval(r)));
            }
            let mut distinct = fmt(&f, &roots);
            distinct.dedup();
            prop_assert_eq!(distinct, brute(&f, &poly, p));
        }
    }
}
