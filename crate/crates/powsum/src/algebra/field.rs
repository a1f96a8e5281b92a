//! Scalar fields.
//!
//! A field is a value (it carries its modulus), and elements are plain data
//! manipulated through the field. Prime fields keep elements in Montgomery
//! form over `L` 64-bit limbs, so a 128-bit prime uses `PrimeField<2>`.

use std::fmt;
use std::hash::Hash;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::prime::is_probable_prime;
use crate::error::{Error, Result};

/// Exact scalar arithmetic. Every operation is pure.
#[allow(clippy::wrong_self_convention)]
pub trait Field: Clone + fmt::Debug + Send + Sync + 'static {
    type Elem: Clone + fmt::Debug + PartialEq + Eq + Hash + Send + Sync + 'static;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    /// Multiplicative inverse, `None` for zero.
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn from_bigint(&self, v: &BigInt) -> Self::Elem;
    /// Image of a rational number; `None` when the denominator vanishes in
    /// the field.
    fn from_rational(&self, v: &BigRational) -> Option<Self::Elem>;
    /// A uniformly random element (for the rationals: a small random integer).
    fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Elem;
    /// Zero for the rationals.
    fn characteristic(&self) -> BigUint;
    /// Canonical text form: decimal residue, or `num/den`.
    fn format(&self, a: &Self::Elem) -> String;
    fn parse(&self, s: &str) -> Result<Self::Elem>;
    fn spec(&self) -> FieldSpec;

    fn from_i64(&self, v: i64) -> Self::Elem {
        self.from_bigint(&BigInt::from(v))
    }

    fn from_u64(&self, v: u64) -> Self::Elem {
        self.from_bigint(&BigInt::from(v))
    }

    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem> {
        let bi = self.inv(b).ok_or(Error::DivisionByZero)?;
        Ok(self.mul(a, &bi))
    }

    fn is_one(&self, a: &Self::Elem) -> bool {
        *a == self.one()
    }

    fn square(&self, a: &Self::Elem) -> Self::Elem {
        self.mul(a, a)
    }

    fn pow(&self, a: &Self::Elem, mut e: u64) -> Self::Elem {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.square(&base);
            }
        }
        acc
    }

    fn pow_big(&self, a: &Self::Elem, e: &BigUint) -> Self::Elem {
        let mut acc = self.one();
        for i in (0..e.bits()).rev() {
            acc = self.square(&acc);
            if e.bit(i) {
                acc = self.mul(&acc, a);
            }
        }
        acc
    }

    /// `acc += a * b`.
    fn mul_add_assign(&self, acc: &mut Self::Elem, a: &Self::Elem, b: &Self::Elem) {
        let p = self.mul(a, b);
        *acc = self.add(acc, &p);
    }

    fn dot(&self, a: &[Self::Elem], b: &[Self::Elem]) -> Self::Elem {
        let mut acc = self.zero();
        for (x, y) in a.iter().zip(b) {
            self.mul_add_assign(&mut acc, x, y);
        }
        acc
    }

    fn random_vec<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<Self::Elem> {
        (0..n).map(|_| self.random(rng)).collect()
    }

    /// True when the characteristic is zero or exceeds `bound`.
    fn char_exceeds(&self, bound: u64) -> bool {
        let c = self.characteristic();
        c.is_zero() || c > BigUint::from(bound)
    }
}

/// Serialized description of a field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FieldSpec {
    Prime(BigUint),
    Rational,
}

impl Serialize for FieldSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = s.serialize_map(Some(1))?;
        match self {
            FieldSpec::Prime(p) => map.serialize_entry("prime", &p.to_string())?,
            FieldSpec::Rational => map.serialize_entry("rational", &true)?,
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for FieldSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            prime: Option<String>,
            rational: Option<bool>,
        }
        let raw = Raw::deserialize(d)?;
        match (raw.prime, raw.rational) {
            (Some(p), None) => p
                .parse::<BigUint>()
                .map(FieldSpec::Prime)
                .map_err(|e| serde::de::Error::custom(format!("bad prime: {e}"))),
            (None, Some(true)) => Ok(FieldSpec::Rational),
            _ => Err(serde::de::Error::custom("field spec needs exactly one of \"prime\" or \"rational\": true")),
        }
    }
}

// ---------------------------------------------------------------------------
// Montgomery prime fields
// ---------------------------------------------------------------------------

/// An element of `PrimeField<L>` in Montgomery representation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fp<const L: usize>(pub(crate) [u64; L]);

/// The prime field F_p with `p < 2^(64 L)`, `p` odd.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeField<const L: usize> {
    p: [u64; L],
    /// `-p^{-1} mod 2^64`.
    pinv: u64,
    /// `R mod p` with `R = 2^(64 L)`; the Montgomery form of one.
    r1: [u64; L],
    /// `R^2 mod p`.
    r2: [u64; L],
    /// `p - 2`, the Fermat inversion exponent.
    pm2: [u64; L],
}

pub type Fp64 = PrimeField<1>;
pub type Fp128 = PrimeField<2>;
pub type Fp192 = PrimeField<3>;

fn limbs_of<const L: usize>(v: &BigUint) -> [u64; L] {
    let mut out = [0u64; L];
    for (i, d) in v.iter_u64_digits().enumerate().take(L) {
        out[i] = d;
    }
    out
}

fn biguint_of(limbs: &[u64]) -> BigUint {
    let mut bytes = Vec::with_capacity(limbs.len() * 8);
    for l in limbs {
        bytes.extend_from_slice(&l.to_le_bytes());
    }
    BigUint::from_bytes_le(&bytes)
}

#[inline(always)]
fn lt<const L: usize>(a: &[u64; L], b: &[u64; L]) -> bool {
    for i in (0..L).rev() {
        if a[i] != b[i] {
            return a[i] < b[i];
        }
    }
    false
}

#[inline(always)]
fn sub_assign<const L: usize>(a: &mut [u64; L], b: &[u64; L]) -> bool {
    let mut borrow = false;
    for i in 0..L {
        let (d1, b1) = a[i].overflowing_sub(b[i]);
        let (d2, b2) = d1.overflowing_sub(borrow as u64);
        a[i] = d2;
        borrow = b1 | b2;
    }
    borrow
}

#[inline(always)]
fn add_assign<const L: usize>(a: &mut [u64; L], b: &[u64; L]) -> bool {
    let mut carry = false;
    for i in 0..L {
        let (s1, c1) = a[i].overflowing_add(b[i]);
        let (s2, c2) = s1.overflowing_add(carry as u64);
        a[i] = s2;
        carry = c1 | c2;
    }
    carry
}

impl<const L: usize> PrimeField<L> {
    /// Builds F_p, checking that `p` is an odd probable prime that fits.
    pub fn new(p: &BigUint) -> Result<Self> {
        if L == 0 {
            return Err(Error::InvalidField("zero limbs".into()));
        }
        if p.bits() > 64 * L as u64 {
            return Err(Error::InvalidField(format!("{p} does not fit in {L} limbs")));
        }
        if p < &BigUint::from(3u32) || p.is_even() {
            return Err(Error::InvalidField(format!("{p} is not an odd prime")));
        }
        if !is_probable_prime(p) {
            return Err(Error::InvalidField(format!("{p} is composite")));
        }
        Ok(Self::new_unchecked(p))
    }

    /// Builds F_p without the primality test. `p` must be odd and fit.
    pub fn new_unchecked(p: &BigUint) -> Self {
        let limbs: [u64; L] = limbs_of(p);
        // Newton iteration for p^{-1} mod 2^64 (p odd).
        let mut inv: u64 = 1;
        for _ in 0..7 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(limbs[0].wrapping_mul(inv)));
        }
        let r = BigUint::one() << (64 * L);
        let r1 = limbs_of(&(&r % p));
        let r2 = limbs_of(&((&r * &r) % p));
        let pm2 = limbs_of(&(p - 2u32));
        PrimeField { p: limbs, pinv: inv.wrapping_neg(), r1, r2, pm2 }
    }

    pub fn modulus(&self) -> BigUint {
        biguint_of(&self.p)
    }

    #[inline(always)]
    #[allow(clippy::needless_range_loop)]
    fn mont_mul(&self, a: &[u64; L], b: &[u64; L]) -> [u64; L] {
        let p = &self.p;
        let mut t = [0u64; L];
        let mut t_hi: u64 = 0;
        for i in 0..L {
            let bi = b[i] as u128;
            let mut carry: u128 = 0;
            for j in 0..L {
                let s = t[j] as u128 + (a[j] as u128) * bi + carry;
                t[j] = s as u64;
                carry = s >> 64;
            }
            let s = t_hi as u128 + carry;
            t_hi = s as u64;
            let t_top = (s >> 64) as u64;

            let m = t[0].wrapping_mul(self.pinv) as u128;
            let s = t[0] as u128 + m * p[0] as u128;
            let mut carry = s >> 64;
            for j in 1..L {
                let s = t[j] as u128 + m * (p[j] as u128) + carry;
                t[j - 1] = s as u64;
                carry = s >> 64;
            }
            let s = t_hi as u128 + carry;
            t[L - 1] = s as u64;
            t_hi = t_top + (s >> 64) as u64;
        }
        if t_hi != 0 || !lt(&t, p) {
            sub_assign(&mut t, p);
        }
        t
    }

    /// Montgomery form of a canonical residue `v < R`.
    #[inline]
    fn to_mont(&self, v: &[u64; L]) -> Fp<L> {
        Fp(self.mont_mul(v, &self.r2))
    }

    /// Canonical residue as limbs.
    #[inline]
    pub fn canonical_limbs(&self, a: &Fp<L>) -> [u64; L] {
        let mut one = [0u64; L];
        one[0] = 1;
        self.mont_mul(&a.0, &one)
    }

    pub fn to_biguint(&self, a: &Fp<L>) -> BigUint {
        biguint_of(&self.canonical_limbs(a))
    }

    /// Element from a canonical residue already reduced below p.
    pub fn from_biguint(&self, v: &BigUint) -> Fp<L> {
        let reduced = v % self.modulus();
        self.to_mont(&limbs_of(&reduced))
    }

    /// Signed canonical lift in `(-p/2, p/2]`.
    pub fn to_signed(&self, a: &Fp<L>) -> BigInt {
        let v = self.to_biguint(a);
        let p = self.modulus();
        if v > (&p >> 1) {
            BigInt::from_biguint(Sign::Plus, v) - BigInt::from_biguint(Sign::Plus, p)
        } else {
            BigInt::from_biguint(Sign::Plus, v)
        }
    }
}

impl<const L: usize> Field for PrimeField<L> {
    type Elem = Fp<L>;

    #[inline]
    fn zero(&self) -> Fp<L> {
        Fp([0; L])
    }

    #[inline]
    fn one(&self) -> Fp<L> {
        Fp(self.r1)
    }

    #[inline]
    fn add(&self, a: &Fp<L>, b: &Fp<L>) -> Fp<L> {
        let mut r = a.0;
        let carry = add_assign(&mut r, &b.0);
        if carry || !lt(&r, &self.p) {
            sub_assign(&mut r, &self.p);
        }
        Fp(r)
    }

    #[inline]
    fn sub(&self, a: &Fp<L>, b: &Fp<L>) -> Fp<L> {
        let mut r = a.0;
        if sub_assign(&mut r, &b.0) {
            add_assign(&mut r, &self.p);
        }
        Fp(r)
    }

    #[inline]
    fn neg(&self, a: &Fp<L>) -> Fp<L> {
        if a.0 == [0; L] {
            *a
        } else {
            let mut r = self.p;
            sub_assign(&mut r, &a.0);
            Fp(r)
        }
    }

    #[inline]
    fn mul(&self, a: &Fp<L>, b: &Fp<L>) -> Fp<L> {
        Fp(self.mont_mul(&a.0, &b.0))
    }

    fn inv(&self, a: &Fp<L>) -> Option<Fp<L>> {
        if self.is_zero(a) {
            return None;
        }
        let mut acc = self.one();
        for i in (0..L).rev() {
            for bit in (0..64).rev() {
                acc = self.square(&acc);
                if (self.pm2[i] >> bit) & 1 == 1 {
                    acc = self.mul(&acc, a);
                }
            }
        }
        Some(acc)
    }

    #[inline]
    fn is_zero(&self, a: &Fp<L>) -> bool {
        a.0 == [0; L]
    }

    fn from_u64(&self, v: u64) -> Fp<L> {
        let mut limbs = [0u64; L];
        limbs[0] = v;
        // mont_mul tolerates inputs below R, so no prior reduction is needed.
        self.to_mont(&limbs)
    }

    fn from_i64(&self, v: i64) -> Fp<L> {
        let a = self.from_u64(v.unsigned_abs());
        if v < 0 {
            self.neg(&a)
        } else {
            a
        }
    }

    fn from_bigint(&self, v: &BigInt) -> Fp<L> {
        let a = self.from_biguint(v.magnitude());
        if v.is_negative() {
            self.neg(&a)
        } else {
            a
        }
    }

    fn from_rational(&self, v: &BigRational) -> Option<Fp<L>> {
        let den = self.from_bigint(v.denom());
        let inv = self.inv(&den)?;
        Some(self.mul(&self.from_bigint(v.numer()), &inv))
    }

    fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Fp<L> {
        // Draw only as many bits as p has, so the rejection rate stays below 1/2.
        let top = (0..L).rev().find(|&i| self.p[i] != 0).unwrap_or(0);
        let top_bits = 64 - self.p[top].leading_zeros();
        let mask = if top_bits == 64 { u64::MAX } else { (1u64 << top_bits) - 1 };
        loop {
            let mut limbs = [0u64; L];
            for l in limbs.iter_mut().take(top + 1) {
                *l = rng.gen();
            }
            limbs[top] &= mask;
            if lt(&limbs, &self.p) {
                // Any bijection of [0, p) preserves uniformity; reading the
                // draw as a Montgomery representative skips a multiplication.
                return Fp(limbs);
            }
        }
    }

    fn characteristic(&self) -> BigUint {
        self.modulus()
    }

    fn format(&self, a: &Fp<L>) -> String {
        self.to_biguint(a).to_string()
    }

    fn parse(&self, s: &str) -> Result<Fp<L>> {
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|e| Error::Parse(format!("{s}: {e}")))?;
            let d: BigInt = d.trim().parse().map_err(|e| Error::Parse(format!("{s}: {e}")))?;
            if d.is_zero() {
                return Err(Error::DivisionByZero);
            }
            return self.from_rational(&BigRational::new(n, d)).ok_or(Error::DivisionByZero);
        }
        let v: BigInt = s.parse().map_err(|e| Error::Parse(format!("{s}: {e}")))?;
        Ok(self.from_bigint(&v))
    }

    fn spec(&self) -> FieldSpec {
        FieldSpec::Prime(self.modulus())
    }

    fn char_exceeds(&self, bound: u64) -> bool {
        L > 1 || self.p[0] > bound
    }
}

// ---------------------------------------------------------------------------
// The rationals
// ---------------------------------------------------------------------------

/// The field Q with reduced-fraction elements.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Rationals;

impl Field for Rationals {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }

    fn one(&self) -> BigRational {
        BigRational::one()
    }

    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }

    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }

    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }

    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }

    fn inv(&self, a: &BigRational) -> Option<BigRational> {
        if a.is_zero() {
            None
        } else {
            Some(a.recip())
        }
    }

    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }

    fn from_bigint(&self, v: &BigInt) -> BigRational {
        BigRational::from_integer(v.clone())
    }

    fn from_rational(&self, v: &BigRational) -> Option<BigRational> {
        Some(v.clone())
    }

    fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> BigRational {
        BigRational::from_integer(BigInt::from(rng.gen_range(-1000i64..=1000)))
    }

    fn characteristic(&self) -> BigUint {
        BigUint::zero()
    }

    fn format(&self, a: &BigRational) -> String {
        format_rational(a)
    }

    fn parse(&self, s: &str) -> Result<BigRational> {
        parse_rational(s)
    }

    fn spec(&self) -> FieldSpec {
        FieldSpec::Rational
    }
}

/// `num/den` with a positive denominator, or a bare integer when den = 1.
pub fn format_rational(a: &BigRational) -> String {
    if a.denom().is_one() {
        a.numer().to_string()
    } else {
        format!("{}/{}", a.numer(), a.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|e| Error::Parse(format!("{s}: {e}")))?;
    let d: BigInt = d.parse().map_err(|e| Error::Parse(format!("{s}: {e}")))?;
    if d.is_zero() {
        return Err(Error::DivisionByZero);
    }
    Ok(BigRational::new(n, d))
}

/// Smallest `u64` view of a small field element, when it fits.
pub fn small_value<const L: usize>(f: &PrimeField<L>, a: &Fp<L>) -> Option<u64> {
    f.to_biguint(a).to_u64()
}
