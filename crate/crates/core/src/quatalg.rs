//! Rational quaternion algebras `(a, b)`: `i^2 = a`, `j^2 = b`, `k = ij = -ji`.

use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::{hilbert_symbol, int, is_squarefree, prime_divisors, Place, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuaternionAlgebra {
    pub a: i64,
    pub b: i64,
    pub discriminant: u64,
    pub ramified_places: Vec<Place>,
}

/// Element `x0 + x1 i + x2 j + x3 k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuatElement {
    pub coords: [Rational; 4],
}

impl QuatElement {
    pub fn new(coords: [Rational; 4]) -> Self {
        QuatElement { coords }
    }

    pub fn from_ints(c: [i64; 4]) -> Self {
        QuatElement { coords: c.map(int) }
    }

    pub fn scalar(r: Rational) -> Self {
        QuatElement { coords: [r, Rational::zero(), Rational::zero(), Rational::zero()] }
    }

    pub fn zero() -> Self {
        Self::from_ints([0, 0, 0, 0])
    }

    pub fn one() -> Self {
        Self::from_ints([1, 0, 0, 0])
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    pub fn add(&self, o: &Self) -> Self {
        QuatElement { coords: std::array::from_fn(|t| &self.coords[t] + &o.coords[t]) }
    }

    pub fn sub(&self, o: &Self) -> Self {
        QuatElement { coords: std::array::from_fn(|t| &self.coords[t] - &o.coords[t]) }
    }

    pub fn neg(&self) -> Self {
        QuatElement { coords: std::array::from_fn(|t| -&self.coords[t]) }
    }

    pub fn scale(&self, r: &Rational) -> Self {
        QuatElement { coords: std::array::from_fn(|t| &self.coords[t] * r) }
    }

    /// Main involution.
    pub fn conjugate(&self) -> Self {
        let c = &self.coords;
        QuatElement { coords: [c[0].clone(), -&c[1], -&c[2], -&c[3]] }
    }

    pub fn reduced_trace(&self) -> Rational {
        &self.coords[0] * int(2)
    }
}

impl fmt::Display for QuatElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c: Vec<String> = self.coords.iter().map(crate::exactnum::fmt_rational).collect();
        write!(f, "[{}, {}, {}, {}]", c[0], c[1], c[2], c[3])
    }
}

fn finite_ramification(a: i64, b: i64) -> Vec<u64> {
    let mut primes = prime_divisors(2 * a.unsigned_abs() * b.unsigned_abs());
    primes.sort_unstable();
    primes.dedup();
    primes
        .into_iter()
        .filter(|&p| hilbert_symbol(&int(a), &int(b), Place::Finite(p)) == -1)
        .collect()
}

/// Candidate structure constants in search order: -1, then 2, -2, 3, -3, 5, -5, 6, -6, ...
/// over squarefree integers.
fn candidates(limit: usize) -> Vec<i64> {
    let mut out = vec![-1];
    let mut n = 2u64;
    while out.len() < limit {
        if is_squarefree(n) {
            out.push(n as i64);
            out.push(-(n as i64));
        }
        n += 1;
    }
    out
}

impl QuaternionAlgebra {
    /// Algebra with given structure constants; ramification is computed from Hilbert symbols.
    pub fn from_constants(a: i64, b: i64) -> Result<Self> {
        if a == 0 || b == 0 {
            return Err(Error::Domain("structure constants must be nonzero".into()));
        }
        let finite = finite_ramification(a, b);
        let mut ramified_places: Vec<Place> = finite.iter().map(|&p| Place::Finite(p)).collect();
        if a < 0 && b < 0 {
            ramified_places.push(Place::Infinite);
        }
        Ok(QuaternionAlgebra { a, b, discriminant: finite.iter().product(), ramified_places })
    }

    pub fn is_definite(&self) -> bool {
        self.ramified_places.contains(&Place::Infinite)
    }

    pub fn ramified_primes(&self) -> Vec<u64> {
        self.ramified_places
            .iter()
            .filter_map(|v| match v {
                Place::Finite(p) => Some(*p),
                Place::Infinite => None,
            })
            .collect()
    }

    pub fn mul(&self, x: &QuatElement, y: &QuatElement) -> QuatElement {
        let a = int(self.a);
        let b = int(self.b);
        let ab = &a * &b;
        let [x0, x1, x2, x3] = &x.coords;
        let [y0, y1, y2, y3] = &y.coords;
        QuatElement {
            coords: [
                x0 * y0 + &a * x1 * y1 + &b * x2 * y2 - &ab * x3 * y3,
                x0 * y1 + x1 * y0 - &b * x2 * y3 + &b * x3 * y2,
                x0 * y2 + x2 * y0 + &a * x1 * y3 - &a * x3 * y1,
                x0 * y3 + x3 * y0 + x1 * y2 - x2 * y1,
            ],
        }
    }

    pub fn reduced_norm(&self, x: &QuatElement) -> Rational {
        let a = int(self.a);
        let b = int(self.b);
        let [x0, x1, x2, x3] = &x.coords;
        x0 * x0 - &a * x1 * x1 - &b * x2 * x2 + &a * &b * x3 * x3
    }

    pub fn reduced_trace(&self, x: &QuatElement) -> Rational {
        x.reduced_trace()
    }

    pub fn conjugate(&self, x: &QuatElement) -> QuatElement {
        x.conjugate()
    }

    /// `(x, y) = trd(x conj(y))`, so `(x, x) = 2 nrd(x)`.
    pub fn bilinear(&self, x: &QuatElement, y: &QuatElement) -> Rational {
        let a = int(self.a);
        let b = int(self.b);
        let [x0, x1, x2, x3] = &x.coords;
        let [y0, y1, y2, y3] = &y.coords;
        (x0 * y0 - &a * x1 * y1 - &b * x2 * y2 + &a * &b * x3 * y3) * int(2)
    }

    pub fn inverse(&self, x: &QuatElement) -> Result<QuatElement> {
        let n = self.reduced_norm(x);
        if n.is_zero() {
            return Err(Error::Arithmetic(format!("element {x} is not invertible")));
        }
        Ok(x.conjugate().scale(&n.recip()))
    }

    /// Local model of the division algebra at a ramified prime.
    pub fn local_ramified_model(&self, p: u64) -> Result<LocalRamifiedModel> {
        if !self.ramified_primes().contains(&p) {
            return Err(Error::Domain(format!("{p} does not divide the discriminant {}", self.discriminant)));
        }
        Ok(LocalRamifiedModel::new(p))
    }
}

/// The quaternion algebra of discriminant `d`.
///
/// Search order: pairs `(a, b)` from the candidate list ordered by the larger
/// index, then by the index of `a`, then of `b`; in the definite case both
/// constants must be negative.
pub fn construct_algebra(d: u64) -> Result<QuaternionAlgebra> {
    if d == 0 || !is_squarefree(d) {
        return Err(Error::Domain(format!("discriminant {d} is not a positive squarefree integer")));
    }
    if d == 1 {
        return QuaternionAlgebra::from_constants(1, 1);
    }
    let target = prime_divisors(d);
    let definite = target.len() % 2 == 1;
    let cands = candidates(400);
    for hi in 0..cands.len() {
        for ai in 0..=hi {
            for bi in 0..=hi {
                if ai.max(bi) != hi {
                    continue;
                }
                let (a, b) = (cands[ai], cands[bi]);
                if definite && (a > 0 || b > 0) {
                    continue;
                }
                if finite_ramification(a, b) == target {
                    return QuaternionAlgebra::from_constants(a, b);
                }
            }
        }
    }
    Err(Error::Construction(format!("no structure constants found for discriminant {d}")))
}

/// `B_p = K + K pi` with `K = Q_p(u)` unramified, `u^2 - t u + n = 0`,
/// `pi r = conj(r) pi`, `pi^2 = p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalRamifiedModel {
    pub p: u64,
    pub t: u64,
    pub n: u64,
}

impl LocalRamifiedModel {
    /// Lexicographically least `(t, n)` with `x^2 - t x + n` irreducible mod `p`.
    pub fn new(p: u64) -> Self {
        for t in 0..p {
            for n in 0..p {
                let has_root = (0..p).any(|x| (x * x + n + p * p - (t * x) % p) % p == 0);
                if !has_root {
                    return LocalRamifiedModel { p, t, n };
                }
            }
        }
        unreachable!("an irreducible quadratic exists mod every prime")
    }

    /// `N(k + l u) = k^2 + k l t + l^2 n`.
    pub fn d(&self, k: i64, l: i64) -> i64 {
        k * k + k * l * self.t as i64 + l * l * self.n as i64
    }

    /// Norm form of `k + l u` reduced mod `p`.
    pub fn norm_mod_p(&self, k: u64, l: u64) -> u64 {
        let p = self.p;
        (k * k + k * l % p * self.t + l * l % p * self.n) % p
    }

    /// Trace of `(k1 + l1 u) conj(k2 + l2 u)` mod `p`.
    pub fn trace_pairing_mod_p(&self, (k1, l1): (u64, u64), (k2, l2): (u64, u64)) -> u64 {
        // N(x + y) - N(x) - N(y)
        let p = self.p;
        let s = self.norm_mod_p((k1 + k2) % p, (l1 + l2) % p);
        (s + 2 * p - self.norm_mod_p(k1, l1) - self.norm_mod_p(k2, l2)) % p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::strategy::Strategy;

    #[test]
    fn small_discriminants() {
        let b1 = construct_algebra(1).unwrap();
        assert_eq!((b1.a, b1.b), (1, 1));
        assert!(b1.ramified_places.is_empty());
        let b2 = construct_algebra(2).unwrap();
        assert_eq!((b2.a, b2.b), (-1, -1));
        assert_eq!(b2.ramified_places, vec![Place::Finite(2), Place::Infinite]);
        let b6 = construct_algebra(6).unwrap();
        assert_eq!((b6.a, b6.b), (-1, 3));
        assert_eq!(b6.ramified_places, vec![Place::Finite(2), Place::Finite(3)]);
        assert!(construct_algebra(12).is_err());
    }

    #[test]
    fn norm_and_trace_examples() {
        let b = construct_algebra(2).unwrap();
        let x = QuatElement::from_ints([0, 1, 1, 1]);
        assert_eq!(b.reduced_norm(&x), int(3));
        assert_eq!(b.reduced_trace(&x), int(0));
        assert_eq!(b.reduced_norm(&QuatElement::one()), int(1));
        assert_eq!(b.reduced_trace(&QuatElement::one()), int(2));
        let prod = b.mul(&x, &x.conjugate());
        assert_eq!(prod, QuatElement::scalar(int(3)));
    }

    #[test]
    fn ramified_models() {
        let m3 = LocalRamifiedModel::new(3);
        assert_eq!((m3.t, m3.n), (0, 1));
        assert_eq!((m3.d(1, 0), m3.d(0, 1), m3.d(1, 1)), (1, 1, 2));
        let m2 = LocalRamifiedModel::new(2);
        assert_eq!((m2.t, m2.n), (1, 1));
        assert_eq!(m2.d(1, 1), 3);
        assert_eq!(m2.d(0, 0), 0);
        let b6 = construct_algebra(6).unwrap();
        assert!(b6.local_ramified_model(5).is_err());
        assert_eq!(b6.local_ramified_model(3).unwrap(), m3);
    }

    fn small_quat() -> impl proptest::strategy::Strategy<Value = QuatElement> {
        proptest::array::uniform4(-20i64..20).prop_map(QuatElement::from_ints)
    }

    proptest::proptest! {
        #[test]
        fn norm_is_multiplicative(d in proptest::sample::select(vec![2u64, 3, 5, 6, 7, 10, 30]), x in small_quat(), y in small_quat()) {
            let alg = construct_algebra(d).unwrap();
            let xy = alg.mul(&x, &y);
            proptest::prop_assert_eq!(alg.reduced_norm(&xy), alg.reduced_norm(&x) * alg.reduced_norm(&y));
            // x conj(x) = nrd(x), trd(xy) = trd(yx)
            let n = alg.mul(&x, &alg.conjugate(&x));
            proptest::prop_assert_eq!(n, QuatElement::scalar(alg.reduced_norm(&x)));
            proptest::prop_assert_eq!(alg.reduced_trace(&xy), alg.reduced_trace(&alg.mul(&y, &x)));
        }

        #[test]
        fn multiplication_is_associative(x in small_quat(), y in small_quat(), z in small_quat()) {
            let alg = construct_algebra(6).unwrap();
            proptest::prop_assert_eq!(alg.mul(&alg.mul(&x, &y), &z), alg.mul(&x, &alg.mul(&y, &z)));
        }
    }
}
