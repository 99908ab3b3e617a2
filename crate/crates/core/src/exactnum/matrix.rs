use num_traits::{One, Zero};

use super::{CyclotomicNumber, Rational};

/// Minimal exact field interface for Gaussian elimination.
pub trait FieldElem: Clone + PartialEq {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    /// Caller guarantees `self` is nonzero.
    fn inv(&self) -> Self;
}

impl FieldElem for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn inv(&self) -> Self {
        self.recip()
    }
}

impl FieldElem for CyclotomicNumber {
    fn zero() -> Self {
        CyclotomicNumber::zero()
    }
    fn one() -> Self {
        CyclotomicNumber::one()
    }
    fn is_zero(&self) -> bool {
        CyclotomicNumber::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn inv(&self) -> Self {
        CyclotomicNumber::inv(self).expect("nonzero pivot")
    }
}

pub fn determinant<F: FieldElem>(m: &[Vec<F>]) -> F {
    let n = m.len();
    let mut a: Vec<Vec<F>> = m.to_vec();
    let mut det = F::one();
    for c in 0..n {
        let Some(piv) = (c..n).find(|&r| !a[r][c].is_zero()) else {
            return F::zero();
        };
        if piv != c {
            a.swap(piv, c);
            det = F::zero().sub(&det);
        }
        det = det.mul(&a[c][c]);
        let inv = a[c][c].inv();
        for r in c + 1..n {
            if a[r][c].is_zero() {
                continue;
            }
            let f = a[r][c].mul(&inv);
            for k in c..n {
                let t = f.mul(&a[c][k]);
                a[r][k] = a[r][k].sub(&t);
            }
        }
    }
    det
}

/// Solves `m x = rhs`; `None` when `m` is singular.
pub fn solve<F: FieldElem>(m: &[Vec<F>], rhs: &[F]) -> Option<Vec<F>> {
    let n = m.len();
    let mut a: Vec<Vec<F>> = m
        .iter()
        .zip(rhs)
        .map(|(row, b)| {
            let mut r = row.clone();
            r.push(b.clone());
            r
        })
        .collect();
    for c in 0..n {
        let piv = (c..n).find(|&r| !a[r][c].is_zero())?;
        a.swap(piv, c);
        let inv = a[c][c].inv();
        for k in c..=n {
            a[c][k] = a[c][k].mul(&inv);
        }
        for r in 0..n {
            if r == c || a[r][c].is_zero() {
                continue;
            }
            let f = a[r][c].clone();
            for k in c..=n {
                let t = f.mul(&a[c][k]);
                a[r][k] = a[r][k].sub(&t);
            }
        }
    }
    Some(a.into_iter().map(|mut r| r.pop().unwrap()).collect())
}

pub fn inverse<F: FieldElem>(m: &[Vec<F>]) -> Option<Vec<Vec<F>>> {
    let n = m.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let e: Vec<F> = (0..n).map(|i| if i == j { F::one() } else { F::zero() }).collect();
        cols.push(solve(m, &e)?);
    }
    Some((0..n).map(|i| (0..n).map(|j| cols[j][i].clone()).collect()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{int, rat};

    #[test]
    fn rational_det_and_inverse() {
        let m = vec![vec![int(2), int(1)], vec![int(1), int(3)]];
        assert_eq!(determinant(&m), int(5));
        let inv = inverse(&m).unwrap();
        assert_eq!(inv[0][0], rat(3, 5));
        assert_eq!(inv[0][1], rat(-1, 5));
        let sing = vec![vec![int(1), int(2)], vec![int(2), int(4)]];
        assert!(inverse(&sing).is_none());
        assert_eq!(determinant(&sing), int(0));
    }
}
