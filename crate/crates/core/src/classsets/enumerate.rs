//! Exact Fincke–Pohst enumeration for positive definite integral quadratic forms.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exactnum::Rational;
use crate::orders::Lattice;
use crate::quatalg::QuaternionAlgebra;

type Q = Ratio<i128>;

/// Positive definite quadratic form `Q(x) = x^T G x / 2` with `G` integral and
/// even on the diagonal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadForm {
    gram: Vec<Vec<i64>>,
    // reduced Gram used for enumeration; same isometry class as `gram`
    reduced: Vec<Vec<i64>>,
    diag: Vec<Q>,
    mu: Vec<Vec<Q>>,
}

/// Greedy pairwise size reduction of a Gram matrix (basis change only).
fn size_reduce(mut g: Vec<Vec<i64>>) -> Vec<Vec<i64>> {
    let n = g.len();
    loop {
        let mut changed = false;
        for i in 0..n {
            for j in 0..n {
                if i == j || g[j][j] == 0 {
                    continue;
                }
                // b_i <- b_i - q b_j with q the nearest integer to g_ij / g_jj
                let q = Integer::div_floor(&(2 * g[i][j] + g[j][j]), &(2 * g[j][j]));
                if q == 0 {
                    continue;
                }
                let new_ii = g[i][i] - 2 * q * g[i][j] + q * q * g[j][j];
                if new_ii >= g[i][i] {
                    continue;
                }
                for k in 0..n {
                    if k != i {
                        let v = g[i][k] - q * g[j][k];
                        g[i][k] = v;
                        g[k][i] = v;
                    }
                }
                g[i][i] = new_ii;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    // put short vectors last so the outer loops of the enumeration are narrow
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(g[i][i]));
    (0..n).map(|r| (0..n).map(|s| g[order[r]][order[s]]).collect()).collect()
}

impl QuadForm {
    pub fn new(gram: Vec<Vec<i64>>) -> Result<Self> {
        let n = gram.len();
        if gram.iter().any(|r| r.len() != n) {
            return Err(Error::Domain("Gram matrix is not square".into()));
        }
        for i in 0..n {
            if gram[i][i] % 2 != 0 {
                return Err(Error::Domain("Gram matrix has an odd diagonal entry".into()));
            }
            for j in 0..n {
                if gram[i][j] != gram[j][i] {
                    return Err(Error::Domain("Gram matrix is not symmetric".into()));
                }
            }
        }
        let reduced = size_reduce(gram.clone());
        // rational Cholesky of A = G/2: Q(x) = sum_i d_i (x_i + sum_{j>i} mu_ij x_j)^2
        let mut a: Vec<Vec<Q>> = reduced.iter().map(|r| r.iter().map(|&v| Q::new(v as i128, 2)).collect()).collect();
        let mut diag = vec![Q::zero(); n];
        let mut mu = vec![vec![Q::zero(); n]; n];
        for i in 0..n {
            if a[i][i] <= Q::zero() {
                return Err(Error::Domain("quadratic form is not positive definite".into()));
            }
            diag[i] = a[i][i];
            for j in i + 1..n {
                mu[i][j] = a[i][j] / a[i][i];
            }
            for k in i + 1..n {
                for l in k..n {
                    let v = a[k][l] - mu[i][k] * a[i][l];
                    a[k][l] = v;
                    a[l][k] = v;
                }
            }
        }
        Ok(QuadForm { gram, reduced, diag, mu })
    }

    /// Form `x |-> trd(x conj(x)) / (2 scale) = nrd(x) / scale` on a lattice.
    pub fn from_lattice(alg: &QuaternionAlgebra, lattice: &Lattice, scale: &Rational) -> Result<Self> {
        let g = lattice.gram(alg);
        let mut out = vec![vec![0i64; 4]; 4];
        for r in 0..4 {
            for s in 0..4 {
                let v = &g[r][s] / scale;
                if !v.is_integer() {
                    return Err(Error::Domain(format!("normalized Gram entry {v} is not integral")));
                }
                out[r][s] = v.to_integer().to_i64().ok_or_else(|| Error::Domain("Gram entry too large".into()))?;
            }
        }
        QuadForm::new(out)
    }

    pub fn gram(&self) -> &[Vec<i64>] {
        &self.gram
    }

    pub fn rank(&self) -> usize {
        self.gram.len()
    }

    pub fn determinant(&self) -> Rational {
        let m: Vec<Vec<Rational>> =
            self.gram.iter().map(|r| r.iter().map(|&v| Rational::from_integer(v.into())).collect()).collect();
        crate::exactnum::determinant(&m)
    }

    pub fn value(&self, x: &[i64]) -> i64 {
        let n = self.rank();
        let mut s = 0;
        for i in 0..n {
            for j in 0..n {
                s += x[i] * self.gram[i][j] * x[j];
            }
        }
        s / 2
    }

    /// `theta[m]` = number of vectors with `Q(x) = m`, for `0 <= m <= bound`.
    pub fn theta(&self, bound: u64) -> Vec<u64> {
        let n = self.rank();
        let mut counts = vec![0u64; bound as usize + 1];
        let mut x = vec![0i128; n];
        self.descend(n, Q::from_integer(bound as i128), &mut x, &mut counts, bound);
        counts
    }

    fn descend(&self, level: usize, budget: Q, x: &mut [i128], counts: &mut [u64], bound: u64) {
        if level == 0 {
            let used = Q::from_integer(bound as i128) - budget;
            debug_assert!(used.is_integer());
            counts[used.to_integer() as usize] += 1;
            return;
        }
        let i = level - 1;
        let n = self.rank();
        let mut c = Q::zero();
        for j in i + 1..n {
            c += self.mu[i][j] * Q::from_integer(x[j]);
        }
        let d = self.diag[i];
        // integers t with d (t + c)^2 <= budget, walking out from floor(-c)
        let start = (-c).floor().to_integer();
        let mut t = start;
        loop {
            let y = Q::from_integer(t) + c;
            let cost = d * y * y;
            if cost > budget {
                break;
            }
            x[i] = t;
            self.descend(i, budget - cost, x, counts, bound);
            t -= 1;
        }
        let mut t = start + 1;
        loop {
            let y = Q::from_integer(t) + c;
            let cost = d * y * y;
            if cost > budget {
                break;
            }
            x[i] = t;
            self.descend(i, budget - cost, x, counts, bound);
            t += 1;
        }
        x[i] = 0;
    }

    /// `r_L(m)`.
    pub fn count_vectors(&self, m: u64) -> u64 {
        self.theta(m)[m as usize]
    }

    /// Gram matrix after the internal size reduction (isometric to `gram`).
    pub fn reduced_gram(&self) -> &[Vec<i64>] {
        &self.reduced
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_of_four_squares() {
        let g: Vec<Vec<i64>> = (0..4).map(|i| (0..4).map(|j| if i == j { 2 } else { 0 }).collect()).collect();
        let f = QuadForm::new(g).unwrap();
        // r_4(n) = 8 sigma(n) - 32 sigma(n/4)
        assert_eq!(f.theta(5), vec![1, 8, 24, 32, 24, 48]);
    }

    #[test]
    fn rejects_bad_forms() {
        assert!(QuadForm::new(vec![vec![2, 3], vec![3, 2]]).is_err());
        assert!(QuadForm::new(vec![vec![1, 0], vec![0, 2]]).is_err());
        assert!(QuadForm::new(vec![vec![2, 1], vec![0, 2]]).is_err());
    }

    #[test]
    fn reduction_preserves_counts() {
        // the A2 form and a skewed basis of it
        let a = QuadForm::new(vec![vec![2, 1], vec![1, 2]]).unwrap();
        let b = QuadForm::new(vec![vec![2, 5], vec![5, 14]]).unwrap();
        assert_eq!(a.theta(12), b.theta(12));
        assert_eq!(a.count_vectors(1), 6);
    }

    fn box_count(g: &[Vec<i64>], bound: i64) -> Vec<u64> {
        let n = g.len();
        let r = 4i64;
        let mut counts = vec![0u64; bound as usize + 1];
        let total = (2 * r + 1).pow(n as u32);
        for mut code in 0..total {
            let x: Vec<i64> = (0..n)
                .map(|_| {
                    let c = code % (2 * r + 1) - r;
                    code /= 2 * r + 1;
                    c
                })
                .collect();
            let mut s = 0;
            for i in 0..n {
                for j in 0..n {
                    s += x[i] * g[i][j] * x[j];
                }
            }
            if s / 2 <= bound {
                counts[(s / 2) as usize] += 1;
            }
        }
        counts
    }

    proptest::proptest! {
        #![proptest_config(proptest::test_runner::Config::with_cases(40))]
        #[test]
        fn enumeration_matches_box_search(
            diag in proptest::collection::vec(2i64..5, 3..5),
            off in proptest::collection::vec(-1i64..2, 6),
        ) {
            // diagonally dominant, so every vector with Q <= 8 has entries in [-4, 4]
            let n = diag.len();
            let mut g = vec![vec![0i64; n]; n];
            let mut k = 0;
            for i in 0..n {
                g[i][i] = 2 * diag[i];
                for j in i + 1..n {
                    g[i][j] = off[k % off.len()];
                    g[j][i] = g[i][j];
                    k += 1;
                }
            }
            let f = QuadForm::new(g.clone()).unwrap();
            proptest::prop_assert_eq!(f.theta(8), box_count(&g, 8));
        }
    }
}
