use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::{factorize, Rational};
use crate::error::{Error, Result};

/// Element of `Q(zeta_n)` in the power basis `1, zeta, ..., zeta^(phi(n)-1)`.
///
/// Values with different conductors are lifted to the lcm on every binary
/// operation, so equality is value equality.
#[derive(Clone, Debug)]
pub struct CyclotomicNumber {
    conductor: u64,
    coeffs: Vec<Rational>,
}

fn cyclotomic_poly(n: u64) -> Arc<Vec<BigInt>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<Vec<BigInt>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = cache.lock().unwrap().get(&n) {
        return p.clone();
    }
    // x^n - 1 divided by Phi_d for every proper divisor d
    let mut num = vec![BigInt::zero(); n as usize + 1];
    num[0] = BigInt::from(-1);
    num[n as usize] = BigInt::one();
    for d in 1..n {
        if n % d == 0 {
            let phi_d = cyclotomic_poly(d);
            num = int_poly_exact_div(&num, &phi_d);
        }
    }
    let arc = Arc::new(num);
    cache.lock().unwrap().insert(n, arc.clone());
    arc
}

fn int_poly_exact_div(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let mut rem = num.to_vec();
    let dn = den.len() - 1;
    let lead = &den[dn];
    let mut quot = vec![BigInt::zero(); rem.len() - dn];
    for i in (0..quot.len()).rev() {
        let q = &rem[i + dn] / lead;
        for (j, c) in den.iter().enumerate() {
            rem[i + j] -= &q * c;
        }
        quot[i] = q;
    }
    debug_assert!(rem.iter().all(Zero::is_zero));
    quot
}

fn reduce(mut poly: Vec<Rational>, n: u64) -> Vec<Rational> {
    let phi = cyclotomic_poly(n);
    let deg = phi.len() - 1;
    if poly.len() > deg {
        for i in (deg..poly.len()).rev() {
            let c = std::mem::replace(&mut poly[i], Rational::zero());
            if c.is_zero() {
                continue;
            }
            for (j, pc) in phi.iter().enumerate().take(deg) {
                if !pc.is_zero() {
                    poly[i - deg + j] -= &c * Rational::from_integer(pc.clone());
                }
            }
        }
    }
    poly.resize(deg, Rational::zero());
    poly
}

fn lcm(a: u64, b: u64) -> u64 {
    a.lcm(&b)
}

impl CyclotomicNumber {
    pub fn from_rational(r: Rational) -> Self {
        CyclotomicNumber { conductor: 1, coeffs: vec![r] }
    }

    pub fn zero() -> Self {
        Self::from_rational(Rational::zero())
    }

    pub fn one() -> Self {
        Self::from_rational(Rational::one())
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    /// Canonical coefficient vector in the power basis of `Q(zeta_conductor)`.
    pub fn coefficients(&self) -> &[Rational] {
        &self.coeffs
    }

    fn from_poly(poly: Vec<Rational>, n: u64) -> Self {
        CyclotomicNumber { conductor: n, coeffs: reduce(poly, n) }
    }

    /// Re-express in `Q(zeta_m)`; requires `conductor | m`.
    pub fn lift(&self, m: u64) -> Self {
        assert_eq!(m % self.conductor, 0, "lift target must be a multiple of the conductor");
        if m == self.conductor {
            return self.clone();
        }
        let step = (m / self.conductor) as usize;
        let mut poly = vec![Rational::zero(); (self.coeffs.len() - 1) * step + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            poly[i * step] = c.clone();
        }
        Self::from_poly(poly, m)
    }

    fn aligned(&self, other: &Self) -> (Self, Self) {
        let m = lcm(self.conductor, other.conductor);
        (self.lift(m), other.lift(m))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_rational(&self) -> bool {
        self.coeffs.iter().skip(1).all(Zero::is_zero)
    }

    pub fn to_rational(&self) -> Option<Rational> {
        self.is_rational().then(|| self.coeffs[0].clone())
    }

    pub fn scale(&self, r: &Rational) -> Self {
        CyclotomicNumber {
            conductor: self.conductor,
            coeffs: self.coeffs.iter().map(|c| c * r).collect(),
        }
    }

    /// Complex conjugation, `zeta -> zeta^-1`.
    pub fn conj(&self) -> Self {
        let n = self.conductor as usize;
        if n <= 2 {
            return self.clone();
        }
        let mut poly = vec![Rational::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            poly[(n - i) % n] += c;
        }
        Self::from_poly(poly, self.conductor)
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one().lift(self.conductor);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via the extended Euclidean algorithm modulo Phi_n.
    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::Arithmetic("inverse of zero cyclotomic number".into()));
        }
        let phi: Vec<Rational> = cyclotomic_poly(self.conductor)
            .iter()
            .map(|c| Rational::from_integer(c.clone()))
            .collect();
        let (g, s) = poly_ext_gcd(trim(self.coeffs.clone()), phi);
        // g is a nonzero constant because Phi_n is irreducible
        assert_eq!(g.len(), 1);
        let inv_g = g[0].recip();
        let s: Vec<Rational> = s.into_iter().map(|c| c * &inv_g).collect();
        Ok(Self::from_poly(s, self.conductor))
    }
}

fn trim(mut p: Vec<Rational>) -> Vec<Rational> {
    while p.len() > 1 && p.last().map_or(false, Zero::is_zero) {
        p.pop();
    }
    if p.is_empty() {
        p.push(Rational::zero());
    }
    p
}

fn poly_is_zero(p: &[Rational]) -> bool {
    p.iter().all(Zero::is_zero)
}

fn poly_divrem(a: &[Rational], b: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let b = trim(b.to_vec());
    let mut rem = trim(a.to_vec());
    if rem.len() < b.len() {
        return (vec![Rational::zero()], rem);
    }
    let lead = b.last().unwrap().clone();
    let mut quot = vec![Rational::zero(); rem.len() - b.len() + 1];
    for i in (0..quot.len()).rev() {
        let q = &rem[i + b.len() - 1] / &lead;
        if !q.is_zero() {
            for (j, c) in b.iter().enumerate() {
                rem[i + j] -= &q * c;
            }
        }
        quot[i] = q;
    }
    (trim(quot), trim(rem))
}

fn poly_mul(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if !y.is_zero() {
                out[i + j] += x * y;
            }
        }
    }
    out
}

fn poly_sub(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let n = a.len().max(b.len());
    let mut out = vec![Rational::zero(); n];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] -= y;
    }
    trim(out)
}

/// Returns (g, s) with s*a = g (mod b).
fn poly_ext_gcd(a: Vec<Rational>, b: Vec<Rational>) -> (Vec<Rational>, Vec<Rational>) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (vec![Rational::one()], vec![Rational::zero()]);
    while !poly_is_zero(&r1) {
        let (q, r) = poly_divrem(&r0, &r1);
        let s2 = poly_sub(&s0, &poly_mul(&q, &s1));
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s2);
    }
    (r0, s0)
}

impl PartialEq for CyclotomicNumber {
    fn eq(&self, other: &Self) -> bool {
        let (a, b) = self.aligned(other);
        a.coeffs == b.coeffs
    }
}

impl Eq for CyclotomicNumber {}

impl<'a> Add<&'a CyclotomicNumber> for &'a CyclotomicNumber {
    type Output = CyclotomicNumber;
    fn add(self, rhs: &CyclotomicNumber) -> CyclotomicNumber {
        let (mut a, b) = self.aligned(rhs);
        for (x, y) in a.coeffs.iter_mut().zip(&b.coeffs) {
            *x += y;
        }
        a
    }
}

impl<'a> Sub<&'a CyclotomicNumber> for &'a CyclotomicNumber {
    type Output = CyclotomicNumber;
    fn sub(self, rhs: &CyclotomicNumber) -> CyclotomicNumber {
        let (mut a, b) = self.aligned(rhs);
        for (x, y) in a.coeffs.iter_mut().zip(&b.coeffs) {
            *x -= y;
        }
        a
    }
}

impl<'a> Mul<&'a CyclotomicNumber> for &'a CyclotomicNumber {
    type Output = CyclotomicNumber;
    fn mul(self, rhs: &CyclotomicNumber) -> CyclotomicNumber {
        let (a, b) = self.aligned(rhs);
        let n = a.conductor;
        CyclotomicNumber::from_poly(poly_mul(&a.coeffs, &b.coeffs), n)
    }
}

impl Neg for &CyclotomicNumber {
    type Output = CyclotomicNumber;
    fn neg(self) -> CyclotomicNumber {
        CyclotomicNumber {
            conductor: self.conductor,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Add for CyclotomicNumber {
    type Output = CyclotomicNumber;
    fn add(self, rhs: Self) -> Self {
        &self + &rhs
    }
}

impl Sub for CyclotomicNumber {
    type Output = CyclotomicNumber;
    fn sub(self, rhs: Self) -> Self {
        &self - &rhs
    }
}

impl Mul for CyclotomicNumber {
    type Output = CyclotomicNumber;
    fn mul(self, rhs: Self) -> Self {
        &self * &rhs
    }
}

impl fmt::Display for CyclotomicNumber {
    /// Prints as a polynomial in `z` where `z = e(1/conductor)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let c_str = super::fmt_rational(c);
            terms.push(match i {
                0 => c_str,
                1 => format!("{c_str}*z"),
                _ => format!("{c_str}*z^{i}"),
            });
        }
        if terms.is_empty() {
            write!(f, "0")
        } else if self.conductor > 2 && self.coeffs.iter().skip(1).any(|c| !c.is_zero()) {
            write!(f, "{} [z=e(1/{})]", terms.join(" + "), self.conductor)
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

/// `e(k/n) = exp(2 pi i k/n)` as an element of `Q(zeta_n)`.
pub fn root_of_unity(n: u64, k: i64) -> CyclotomicNumber {
    assert!(n >= 1);
    let e = k.rem_euclid(n as i64) as usize;
    let mut poly = vec![Rational::zero(); e + 1];
    poly[e] = Rational::one();
    CyclotomicNumber::from_poly(poly, n)
}

/// The local component `psi_p(x) = e(-{x}_p)` of the standard additive character.
///
/// `x` must have a power of `p` as denominator.
pub fn additive_character(p: u64, x: &Rational) -> Result<CyclotomicNumber> {
    let den = x.denom().to_u64().ok_or_else(|| Error::Domain("denominator too large".into()))?;
    let fac = factorize(den);
    if fac.iter().any(|&(q, _)| q != p) {
        return Err(Error::Domain(format!(
            "additive character at {p}: denominator {den} is not a power of {p}"
        )));
    }
    let num = x.numer().mod_floor(&BigInt::from(den));
    let num = num.to_i64().expect("reduced numerator fits");
    Ok(root_of_unity(den, -num))
}

/// `(e(ij/p))_{0 <= i,j < p}`.
pub fn dft_matrix(p: u64) -> Vec<Vec<CyclotomicNumber>> {
    (0..p)
        .map(|i| (0..p).map(|j| root_of_unity(p, (i * j % p) as i64)).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{int, rat};

    #[test]
    fn cyclotomic_polynomials() {
        let p12: Vec<i64> = cyclotomic_poly(12).iter().map(|c| c.to_i64().unwrap()).collect();
        assert_eq!(p12, vec![1, 0, -1, 0, 1]);
        let p6: Vec<i64> = cyclotomic_poly(6).iter().map(|c| c.to_i64().unwrap()).collect();
        assert_eq!(p6, vec![1, -1, 1]);
    }

    #[test]
    fn character_examples() {
        assert_eq!(additive_character(3, &int(0)).unwrap(), CyclotomicNumber::one());
        let w = additive_character(3, &rat(1, 3)).unwrap();
        assert_eq!(w, root_of_unity(3, -1));
        assert_eq!(w.pow(3), CyclotomicNumber::one());
        assert!(!w.is_rational());
        let v = additive_character(2, &rat(7, 4)).unwrap();
        assert_eq!(v.pow(4), CyclotomicNumber::one());
        assert_eq!(v.pow(2), CyclotomicNumber::from_rational(int(-1)));
        assert!(additive_character(3, &rat(1, 6)).is_err());
        assert_eq!(additive_character(5, &int(7)).unwrap(), CyclotomicNumber::one());
    }

    #[test]
    fn sum_of_roots_vanishes_and_inverse() {
        let mut s = CyclotomicNumber::zero();
        for k in 0..7 {
            s = &s + &root_of_unity(7, k);
        }
        assert!(s.is_zero());
        let x = &root_of_unity(5, 1) + &CyclotomicNumber::from_rational(int(2));
        let y = x.inv().unwrap();
        assert_eq!(&x * &y, CyclotomicNumber::one());
        assert!(CyclotomicNumber::zero().inv().is_err());
    }

    #[test]
    fn mixed_conductors() {
        // e(1/4) * e(1/6) = e(5/12)
        let a = root_of_unity(4, 1);
        let b = root_of_unity(6, 1);
        assert_eq!(&a * &b, root_of_unity(12, 5));
        assert_eq!(root_of_unity(2, 1), CyclotomicNumber::from_rational(int(-1)));
        assert_eq!(root_of_unity(6, 2), root_of_unity(3, 1));
        assert_eq!(root_of_unity(8, 3).conj(), root_of_unity(8, 5));
    }

    #[test]
    fn dft_examples() {
        let a2 = dft_matrix(2);
        assert_eq!(a2[1][1], CyclotomicNumber::from_rational(int(-1)));
        let a3 = dft_matrix(3);
        assert!(a3[0].iter().all(|x| *x == CyclotomicNumber::one()));
        // A * conj(A)^T = p I, exactly
        for p in [2u64, 3, 5, 7] {
            let a = dft_matrix(p);
            for i in 0..p as usize {
                for j in 0..p as usize {
                    let mut s = CyclotomicNumber::zero();
                    for k in 0..p as usize {
                        s = &s + &(&a[i][k] * &a[j][k].conj());
                    }
                    let expect = if i == j { int(p as i64) } else { int(0) };
                    assert_eq!(s, CyclotomicNumber::from_rational(expect));
                }
            }
        }
    }
}
