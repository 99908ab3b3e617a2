use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::Rational;

/// A place of Q.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Place {
    Finite(u64),
    Infinite,
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Finite(p) => write!(f, "{p}"),
            Place::Infinite => write!(f, "inf"),
        }
    }
}

/// Kronecker symbol `(a/n)`.
pub fn kronecker_symbol(a: &BigInt, n: &BigInt) -> i32 {
    assert!(!n.is_zero(), "kronecker symbol with n = 0");
    let mut a = a.clone();
    let mut n = n.clone();
    let mut result = 1;
    if n.is_negative() {
        n = -n;
        if a.is_negative() {
            result = -result;
        }
    }
    let two = BigInt::from(2);
    let mut twos = 0u32;
    while n.is_even() {
        n /= &two;
        twos += 1;
    }
    if twos > 0 {
        if a.is_even() {
            return 0;
        }
        let r8 = a.mod_floor(&BigInt::from(8)).to_u32().unwrap();
        if twos % 2 == 1 && (r8 == 3 || r8 == 5) {
            result = -result;
        }
    }
    // n is now odd and positive: Jacobi symbol
    a = a.mod_floor(&n);
    while !a.is_zero() {
        while a.is_even() {
            a /= &two;
            let r8 = n.mod_floor(&BigInt::from(8)).to_u32().unwrap();
            if r8 == 3 || r8 == 5 {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        let four = BigInt::from(4);
        if a.mod_floor(&four) == BigInt::from(3) && n.mod_floor(&four) == BigInt::from(3) {
            result = -result;
        }
        a = a.mod_floor(&n);
    }
    if n.is_one() {
        result
    } else {
        0
    }
}

fn split_off(x: &BigInt, p: &BigInt) -> (u32, BigInt) {
    let mut x = x.clone();
    let mut v = 0;
    while (&x % p).is_zero() {
        x /= p;
        v += 1;
    }
    (v, x)
}

/// Integer in the same square class as `r`.
fn square_class_rep(r: &Rational) -> BigInt {
    r.numer() * r.denom()
}

/// Hilbert symbol `(a, b)_v`.
pub fn hilbert_symbol(a: &Rational, b: &Rational, place: Place) -> i32 {
    assert!(!a.is_zero() && !b.is_zero(), "hilbert symbol of zero");
    let a = square_class_rep(a);
    let b = square_class_rep(b);
    match place {
        Place::Infinite => {
            if a.is_negative() && b.is_negative() {
                -1
            } else {
                1
            }
        }
        Place::Finite(2) => {
            let two = BigInt::from(2);
            let (alpha, u) = split_off(&a, &two);
            let (beta, v) = split_off(&b, &two);
            let eps = |x: &BigInt| -> u32 { ((x - 1i32) / 2i32).mod_floor(&two).to_u32().unwrap() };
            let omega = |x: &BigInt| -> u32 {
                ((x * x - 1i32) / 8i32).mod_floor(&two).to_u32().unwrap()
            };
            let e = eps(&u) * eps(&v) + alpha * omega(&v) + beta * omega(&u);
            if e % 2 == 0 {
                1
            } else {
                -1
            }
        }
        Place::Finite(p) => {
            let pb = BigInt::from(p);
            let (alpha, u) = split_off(&a, &pb);
            let (beta, v) = split_off(&b, &pb);
            let mut s = 1;
            if (alpha * beta) % 2 == 1 && p % 4 == 3 {
                s = -s;
            }
            if beta % 2 == 1 {
                s *= kronecker_symbol(&u, &pb);
            }
            if alpha % 2 == 1 {
                s *= kronecker_symbol(&v, &pb);
            }
            s
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{int, is_prime, rat};

    fn k(a: i64, n: i64) -> i32 {
        kronecker_symbol(&BigInt::from(a), &BigInt::from(n))
    }

    #[test]
    fn kronecker_examples() {
        assert_eq!(k(2, 7), 1);
        assert_eq!(k(3, 5), -1);
        assert_eq!(k(5, 1), 1);
        assert_eq!(k(6, 9), 0);
        assert_eq!(k(-1, 8), 1);
        assert_eq!(k(3, 8), -1);
    }

    #[test]
    fn kronecker_matches_square_search() {
        for p in (3..60).filter(|&p| is_prime(p)) {
            for a in 1..p {
                let is_sq = (1..p).any(|x| (x * x) % p == a);
                assert_eq!(k(a as i64, p as i64), if is_sq { 1 } else { -1 }, "a={a} p={p}");
            }
        }
    }

    #[test]
    fn hilbert_examples() {
        assert_eq!(hilbert_symbol(&int(-1), &int(-1), Place::Finite(2)), -1);
        assert_eq!(hilbert_symbol(&int(-1), &int(-1), Place::Infinite), -1);
        assert_eq!(hilbert_symbol(&int(-1), &int(-1), Place::Finite(3)), 1);
        assert_eq!(hilbert_symbol(&int(1), &int(7), Place::Finite(7)), 1);
        assert_eq!(hilbert_symbol(&int(-1), &int(3), Place::Finite(3)), -1);
        assert_eq!(hilbert_symbol(&int(-1), &int(3), Place::Finite(2)), -1);
        // square classes of rationals
        assert_eq!(
            hilbert_symbol(&rat(-1, 4), &rat(-9, 2), Place::Finite(2)),
            hilbert_symbol(&int(-1), &int(-2), Place::Finite(2))
        );
    }

    /// `(a, b)_p = 1` iff `a x^2 + b y^2 = z^2` has a primitive solution that
    /// lifts by Hensel: some partial derivative has valuation `v` with the
    /// form vanishing mod `p^(2v+1)`. For `v_p(a), v_p(b) <= 1` the partials
    /// have valuation at most 1 (odd `p`) or 2 (`p = 2`), so working mod `p^3`
    /// or `2^5` decides it.
    fn hilbert_oracle(a: i64, b: i64, p: i64) -> i32 {
        let strip = |mut x: i64| {
            while x % (p * p) == 0 {
                x /= p * p;
            }
            x
        };
        let (a, b) = (strip(a), strip(b));
        let e = if p == 2 { 5 } else { 3 };
        let q = p.pow(e);
        let val = |x: i64| {
            let mut x = x.rem_euclid(q);
            if x == 0 {
                return e;
            }
            let mut v = 0;
            while x % p == 0 {
                x /= p;
                v += 1;
            }
            v
        };
        // a primitive vector can be scaled so its first unit coordinate is 1
        let mut candidates = Vec::new();
        for s in 0..q {
            for t in 0..q {
                candidates.push((1, s, t));
                if s % p == 0 {
                    candidates.push((s, 1, t));
                    if t % p == 0 {
                        candidates.push((s, t, 1));
                    }
                }
            }
        }
        for (x, y, z) in candidates {
            let f = (a * x * x + b * y * y - z * z).rem_euclid(q);
            let v = val(2 * a * x).min(val(2 * b * y)).min(val(2 * z));
            if 2 * v + 1 <= e && f % p.pow(2 * v + 1) == 0 {
                return 1;
            }
        }
        -1
    }

    #[test]
    fn hilbert_against_solubility_oracle() {
        let reps = [-1i64, 1, -2, 2, -3, 3, -5, 5, -6, 6, -7, 7, -10, 10, -15, 15];
        for p in [2i64, 3, 5] {
            for &a in &reps {
                for &b in &reps {
                    assert_eq!(
                        hilbert_symbol(&int(a), &int(b), Place::Finite(p as u64)),
                        hilbert_oracle(a, b, p),
                        "({a}, {b})_{p}"
                    );
                }
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn hilbert_reciprocity(a in -200i64..200, b in -200i64..200) {
            proptest::prop_assume!(a != 0 && b != 0);
            let mut places = vec![Place::Infinite];
            places.extend(crate::exactnum::prime_divisors((2 * a * b).unsigned_abs()).into_iter().map(Place::Finite));
            let prod: i32 = places.iter().map(|&v| hilbert_symbol(&int(a), &int(b), v)).product();
            proptest::prop_assert_eq!(prod, 1);
        }

        #[test]
        fn hilbert_bimultiplicative(a in 1i64..60, b in 1i64..60, c in 1i64..60, sa in proptest::bool::ANY) {
            let a = if sa { -a } else { a };
            for p in [2u64, 3, 5, 7] {
                let v = Place::Finite(p);
                let lhs = hilbert_symbol(&int(a), &int(b * c), v);
                let rhs = hilbert_symbol(&int(a), &int(b), v) * hilbert_symbol(&int(a), &int(c), v);
                proptest::prop_assert_eq!(lhs, rhs);
            }
        }
    }
}
