//! Dense univariate polynomials over a field.

use num_bigint::BigUint;

use super::field::Field;
use crate::error::{Error, Result};

/// Coefficients in ascending degree with trailing zeros trimmed, so the zero
/// polynomial has no coefficients at all.
#[derive(Clone, Debug)]
pub struct UniPoly<F: Field> {
    field: F,
    coeffs: Vec<F::Elem>,
}

impl<F: Field> PartialEq for UniPoly<F> {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs
    }
}

impl<F: Field> Eq for UniPoly<F> {}

impl<F: Field> UniPoly<F> {
    pub fn new(field: &F, mut coeffs: Vec<F::Elem>) -> Self {
        while coeffs.last().is_some_and(|c| field.is_zero(c)) {
            coeffs.pop();
        }
        UniPoly { field: field.clone(), coeffs }
    }

    pub fn zero(field: &F) -> Self {
        UniPoly { field: field.clone(), coeffs: Vec::new() }
    }

    pub fn constant(field: &F, c: F::Elem) -> Self {
        Self::new(field, vec![c])
    }

    /// `c * y^k`.
    pub fn monomial(field: &F, c: F::Elem, k: usize) -> Self {
        let mut v = vec![field.zero(); k + 1];
        v[k] = c;
        Self::new(field, v)
    }

    /// Convenience constructor from small integers.
    pub fn from_i64s(field: &F, cs: &[i64]) -> Self {
        Self::new(field, cs.iter().map(|&c| field.from_i64(c)).collect())
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn coeffs(&self) -> &[F::Elem] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<F::Elem> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> F::Elem {
        self.coeffs.get(i).cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn leading(&self) -> Option<&F::Elem> {
        self.coeffs.last()
    }

    pub fn eval(&self, y: &F::Elem) -> F::Elem {
        let f = &self.field;
        let mut acc = f.zero();
        for c in self.coeffs.iter().rev() {
            acc = f.add(&f.mul(&acc, y), c);
        }
        acc
    }

    pub fn add(&self, other: &Self) -> Self {
        let f = &self.field;
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new(f, (0..n).map(|i| f.add(&self.coeff(i), &other.coeff(i))).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let f = &self.field;
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new(f, (0..n).map(|i| f.sub(&self.coeff(i), &other.coeff(i))).collect())
    }

    pub fn neg(&self) -> Self {
        let f = &self.field;
        Self::new(f, self.coeffs.iter().map(|c| f.neg(c)).collect())
    }

    pub fn scale(&self, c: &F::Elem) -> Self {
        let f = &self.field;
        Self::new(f, self.coeffs.iter().map(|a| f.mul(a, c)).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero(&self.field);
        }
        self.mul_trunc(other, self.coeffs.len() + other.coeffs.len() - 1)
    }

    /// Product modulo `y^len`.
    pub fn mul_trunc(&self, other: &Self, len: usize) -> Self {
        let f = &self.field;
        let mut out = vec![f.zero(); len];
        for (i, a) in self.coeffs.iter().enumerate().take(len) {
            if f.is_zero(a) {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(len - i) {
                f.mul_add_assign(&mut out[i + j], a, b);
            }
        }
        Self::new(f, out)
    }

    /// Remainder modulo `y^len`.
    pub fn truncate(&self, len: usize) -> Self {
        Self::new(&self.field, self.coeffs.iter().take(len).cloned().collect())
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::constant(&self.field, self.field.one());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        let f = &self.field;
        Self::new(
            f,
            self.coeffs.iter().enumerate().skip(1).map(|(i, c)| f.mul(c, &f.from_u64(i as u64))).collect(),
        )
    }

    /// Scales to a monic polynomial; the zero polynomial is returned as is.
    pub fn monic(&self) -> Self {
        match self.leading() {
            None => self.clone(),
            Some(lc) => {
                let inv = self.field.inv(lc).expect("leading coefficient is nonzero");
                self.scale(&inv)
            }
        }
    }

    /// Euclidean division `self = q * d + r` with `deg r < deg d`.
    pub fn divrem(&self, d: &Self) -> Result<(Self, Self)> {
        let f = &self.field;
        let dl = d.leading().ok_or(Error::DivisionByZero)?;
        let dinv = f.inv(dl).ok_or(Error::DivisionByZero)?;
        let dn = d.coeffs.len();
        if self.coeffs.len() < dn {
            return Ok((Self::zero(f), self.clone()));
        }
        let mut r = self.coeffs.clone();
        let mut q = vec![f.zero(); r.len() - dn + 1];
        for i in (0..q.len()).rev() {
            let c = f.mul(&r[i + dn - 1], &dinv);
            if !f.is_zero(&c) {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    let t = f.mul(&c, dc);
                    r[i + j] = f.sub(&r[i + j], &t);
                }
            }
            q[i] = c;
        }
        r.truncate(dn - 1);
        Ok((Self::new(f, q), Self::new(f, r)))
    }

    /// Exact quotient; errors when `d` does not divide `self`.
    pub fn div_exact(&self, d: &Self) -> Result<Self> {
        let (q, r) = self.divrem(d)?;
        if r.is_zero() {
            Ok(q)
        } else {
            Err(Error::InvalidInput("polynomial division is not exact".into()))
        }
    }

    pub fn rem(&self, d: &Self) -> Result<Self> {
        Ok(self.divrem(d)?.1)
    }

    /// Monic greatest common divisor (zero if both inputs are zero).
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b).expect("divisor is nonzero");
            a = b;
            b = r;
        }
        a.monic()
    }

    /// `self^e mod m`.
    pub fn powmod(&self, e: &BigUint, m: &Self) -> Result<Self> {
        if m.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let m = m.monic();
        let base = self.rem_monic(&m);
        let mut acc = Self::constant(&self.field, self.field.one()).rem_monic(&m);
        for i in (0..e.bits()).rev() {
            acc = acc.mul(&acc).rem_monic(&m);
            if e.bit(i) {
                acc = acc.mul(&base).rem_monic(&m);
            }
        }
        Ok(acc)
    }

    /// Remainder modulo a monic polynomial, without inversions.
    fn rem_monic(&self, m: &Self) -> Self {
        let f = &self.field;
        let dn = m.coeffs.len();
        if self.coeffs.len() < dn {
            return self.clone();
        }
        let mut r = self.coeffs.clone();
        for i in (0..=r.len() - dn).rev() {
            let c = r[i + dn - 1].clone();
            if !f.is_zero(&c) {
                for (j, mc) in m.coeffs.iter().enumerate() {
                    let t = f.mul(&c, mc);
                    r[i + j] = f.sub(&r[i + j], &t);
                }
            }
        }
        r.truncate(dn - 1);
        Self::new(f, r)
    }

    /// The unique polynomial of degree below `points.len()` through the
    /// given points, built in Newton form.
    pub fn interpolate(field: &F, points: &[(F::Elem, F::Elem)]) -> Result<Self> {
        let f = field;
        let n = points.len();
        // Divided differences, in place.
        let mut dd: Vec<F::Elem> = points.iter().map(|(_, y)| y.clone()).collect();
        for j in 1..n {
            for i in (j..n).rev() {
                let den = f.sub(&points[i].0, &points[i - j].0);
                let inv = f.inv(&den).ok_or(Error::DuplicateAbscissa)?;
                dd[i] = f.mul(&f.sub(&dd[i], &dd[i - 1]), &inv);
            }
        }
        // Horner-style expansion of the Newton form.
        let mut acc: Vec<F::Elem> = Vec::with_capacity(n);
        for i in (0..n).rev() {
            // acc = acc * (y - x_i) + dd[i]
            let xi = &points[i].0;
            let mut next = vec![f.zero(); acc.len() + 1];
            for (k, c) in acc.iter().enumerate() {
                next[k + 1] = f.add(&next[k + 1], c);
                let t = f.mul(c, xi);
                next[k] = f.sub(&next[k], &t);
            }
            next[0] = f.add(&next[0], &dd[i]);
            acc = next;
        }
        Ok(Self::new(f, acc))
    }

    /// Interpolation at the abscissae `0, 1, ..., values.len() - 1`.
    pub fn interpolate_range(field: &F, values: &[F::Elem]) -> Result<Self> {
        let pts: Vec<_> = values.iter().enumerate().map(|(i, v)| (field.from_u64(i as u64), v.clone())).collect();
        Self::interpolate(field, &pts)
    }

    pub fn format(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if self.field.is_zero(c) {
                continue;
            }
            let s = self.field.format(c);
            parts.push(match i {
                0 => s,
                1 => format!("{s}*y"),
                _ => format!("{s}*y^{i}"),
            });
        }
        parts.join(" + ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::field::{PrimeField, Rationals};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn fp(p: u64) -> PrimeField<1> {
        PrimeField::new(&BigUint::from(p)).unwrap()
    }

    #[test]
    fn interpolation_examples() {
        let q = Rationals;
        let pts = vec![(q.from_i64(0), q.from_i64(1)), (q.from_i64(1), q.from_i64(2))];
        assert_eq!(UniPoly::interpolate(&q, &pts).unwrap(), UniPoly::from_i64s(&q, &[1, 1]));
        let f = fp(7);
        let pts: Vec<_> = (0..3).map(|i| (f.from_i64(i), f.from_i64(i * i))).collect();
        assert_eq!(UniPoly::interpolate(&f, &pts).unwrap(), UniPoly::from_i64s(&f, &[0, 0, 1]));
        let dup = vec![(f.one(), f.one()), (f.one(), f.zero())];
        assert!(matches!(UniPoly::interpolate(&f, &dup), Err(Error::DuplicateAbscissa)));
    }

    #[test]
    fn interpolation_round_trip_degree_five() {
        let f = fp(1_000_000_007);
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let p = UniPoly::new(&f, f.random_vec(&mut rng, 6));
        let pts: Vec<_> = (0..6)
            .map(|_| {
                let x = f.random(&mut rng);
                (x, p.eval(&x))
            })
            .collect();
        assert_eq!(UniPoly::interpolate(&f, &pts).unwrap(), p);
    }

    #[test]
    fn divrem_and_gcd() {
        let q = Rationals;
        let a = UniPoly::from_i64s(&q, &[-1, 0, 1]); // y^2 - 1
        let b = UniPoly::from_i64s(&q, &[1, 1]);
        let (quo, r) = a.divrem(&b).unwrap();
        assert_eq!(quo, UniPoly::from_i64s(&q, &[-1, 1]));
        assert!(r.is_zero());
        let c = UniPoly::from_i64s(&q, &[2, 3, 1]); // (y+1)(y+2)
        assert_eq!(a.gcd(&c), b);
        assert!(a.divrem(&UniPoly::zero(&q)).is_err());
    }

    #[test]
    fn powmod_matches_repeated_multiplication() {
        let f = fp(101);
        let x = UniPoly::from_i64s(&f, &[3, 1]);
        let m = UniPoly::from_i64s(&f, &[5, 0, 7, 1]);
        let mut acc = UniPoly::constant(&f, f.one());
        for e in 0..40u32 {
            assert_eq!(x.powmod(&BigUint::from(e), &m).unwrap(), acc);
            acc = acc.mul(&x).rem(&m).unwrap();
        }
    }

    proptest! {
        #[test]
        fn product_evaluates_pointwise(a in prop::collection::vec(-50i64..50, 0..8),
                                       b in prop::collection::vec(-50i64..50, 0..8),
                                       y in -20i64..20) {
            let f = fp(10007);
            let (pa, pb) = (UniPoly::from_i64s(&f, &a), UniPoly::from_i64s(&f, &b));
            let yv = f.from_i64(y);
            prop_assert_eq!(pa.mul(&pb).eval(&yv), f.mul(&pa.eval(&yv), &pb.eval(&yv)));
            let (q, r) = pa.mul(&pb).add(&pa).divrem(&pb.add(&UniPoly::monomial(&f, f.one(), 8))).unwrap();
            prop_assert_eq!(q.mul(&pb.add(&UniPoly::monomial(&f, f.one(), 8))).add(&r), pa.mul(&pb).add(&pa));
        }
    }
}
