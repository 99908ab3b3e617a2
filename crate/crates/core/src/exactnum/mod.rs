//! Exact arithmetic foundation.
//!
//! Everything downstream is computed over `Z`, `Q` or a cyclotomic field;
//! there is no floating point in this crate.

mod cyclotomic;
mod matrix;
mod symbols;

pub use cyclotomic::{additive_character, dft_matrix, root_of_unity, CyclotomicNumber};
pub use matrix::{determinant, inverse, solve, FieldElem};
pub use symbols::{hilbert_symbol, kronecker_symbol, Place};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational, always in lowest terms with positive denominator.
pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `num/den` formatting used in every report (integers print without `/1`).
pub fn fmt_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Rational::new(n, d))
        }
        None => Some(Rational::from_integer(s.parse().ok()?)),
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Prime factorization by trial division, primes in increasing order.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn prime_divisors(n: u64) -> Vec<u64> {
    factorize(n).into_iter().map(|(p, _)| p).collect()
}

pub fn is_squarefree(n: u64) -> bool {
    n >= 1 && factorize(n).iter().all(|&(_, e)| e == 1)
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .iter()
        .fold(n, |acc, &(p, _)| acc / p * (p - 1))
}

pub fn gcd_u64(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

/// p-adic valuation of a nonzero integer.
pub fn valuation(x: &BigInt, p: u64) -> u32 {
    assert!(!x.is_zero(), "valuation of zero");
    let p = BigInt::from(p);
    let mut x = x.abs();
    let mut v = 0;
    while (&x % &p).is_zero() {
        x /= &p;
        v += 1;
    }
    v
}

pub fn valuation_u64(mut x: u64, p: u64) -> u32 {
    assert!(x != 0);
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    v
}

/// Inverse of `a` modulo `m` (gcd must be 1).
pub fn inv_mod(a: i64, m: i64) -> Option<i64> {
    let g = Integer::extended_gcd(&a.rem_euclid(m), &m);
    if g.gcd != 1 {
        return None;
    }
    Some(g.x.rem_euclid(m))
}

/// Reduce a rational with denominator coprime to `m` into `Z/m`.
pub fn rational_mod(r: &Rational, m: i64) -> Option<i64> {
    let mb = BigInt::from(m);
    let n = r.numer().mod_floor(&mb).to_i64()?;
    let d = r.denom().mod_floor(&mb).to_i64()?;
    Some(n * inv_mod(d, m)? % m)
}

/// gcd of a list of rationals (the positive generator of the Z-module they span).
pub fn rational_gcd<'a>(values: impl IntoIterator<Item = &'a Rational>) -> Rational {
    let mut num = BigInt::zero();
    let mut den = BigInt::one();
    for v in values {
        if Zero::is_zero(v) {
            continue;
        }
        // gcd(a/b, c/d) = gcd(ad, cb) / bd
        let n2 = num.clone() * v.denom();
        let c = v.numer().abs() * &den;
        den *= v.denom();
        num = n2.gcd(&c);
    }
    Rational::new(num, den)
}

pub fn sigma(p: u64, k: u32) -> u64 {
    (0..=k).map(|i| p.pow(i)).sum()
}

pub fn is_integer(r: &Rational) -> bool {
    r.denom().is_one()
}
