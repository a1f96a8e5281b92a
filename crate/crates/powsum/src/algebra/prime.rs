//! Probable-prime testing and random prime generation.

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;

const SMALL_PRIMES: [u32; 25] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
];

/// Miller-Rabin with the first 25 primes as bases. Deterministic for
/// `n < 3.3e24` and a probable-prime test beyond that.
pub fn is_probable_prime(n: &BigUint) -> bool {
    if n < &BigUint::from(2u32) {
        return false;
    }
    for &q in &SMALL_PRIMES {
        let q = BigUint::from(q);
        if n == &q {
            return true;
        }
        if (n % &q).is_zero() {
            return false;
        }
    }
    let one = BigUint::one();
    let n1 = n - &one;
    let r = n1.trailing_zeros().unwrap_or(0);
    let d = &n1 >> r;
    'bases: for &a in &SMALL_PRIMES {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x == one || x == n1 {
            continue;
        }
        for _ in 1..r {
            x = (&x * &x) % n;
            if x == n1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

/// A random probable prime with exactly `bits` bits (`bits >= 3`).
pub fn random_prime<R: Rng + ?Sized>(bits: u64, rng: &mut R) -> BigUint {
    assert!(bits >= 3, "prime needs at least 3 bits");
    loop {
        let mut c = rng.gen_biguint(bits);
        c.set_bit(bits - 1, true);
        if c.is_even() {
            c += 1u32;
        }
        if c.bits() == bits && is_probable_prime(&c) {
            return c;
        }
    }
}
