use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exactnum::{determinant, inverse, Rational};
use crate::quatalg::{QuatElement, QuaternionAlgebra};

/// Row-style Hermite normal form of an integer matrix; zero rows are dropped.
///
/// Pivots are positive and entries above a pivot are reduced into `[0, pivot)`.
pub fn hermite_normal_form(mut rows: Vec<Vec<BigInt>>) -> Vec<Vec<BigInt>> {
    rows.retain(|r| r.iter().any(|x| !x.is_zero()));
    let ncols = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        loop {
            // smallest nonzero entry in column c among rows r..
            let best = (r..rows.len())
                .filter(|&i| !rows[i][c].is_zero())
                .min_by(|&i, &j| rows[i][c].abs().cmp(&rows[j][c].abs()));
            let Some(best) = best else { break };
            rows.swap(r, best);
            let mut done = true;
            for i in r + 1..rows.len() {
                if rows[i][c].is_zero() {
                    continue;
                }
                let q = rows[i][c].div_floor(&rows[r][c]);
                let pivot_row = rows[r].clone();
                for (x, y) in rows[i].iter_mut().zip(&pivot_row) {
                    *x -= &q * y;
                }
                if !rows[i][c].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if rows[r][c].is_zero() {
            continue;
        }
        if rows[r][c].is_negative() {
            for x in rows[r].iter_mut() {
                *x = -&*x;
            }
        }
        let pivot_row = rows[r].clone();
        for i in 0..r {
            let q = rows[i][c].div_floor(&pivot_row[c]);
            if !q.is_zero() {
                for (x, y) in rows[i].iter_mut().zip(&pivot_row) {
                    *x -= &q * y;
                }
            }
        }
        r += 1;
    }
    rows.retain(|row| row.iter().any(|x| !x.is_zero()));
    rows
}

/// Full-rank Z-lattice in the algebra, stored as `rows / den` with `rows` in
/// Hermite normal form relative to the basis `1, i, j, k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lattice {
    den: BigInt,
    rows: Vec<Vec<BigInt>>,
}

impl Lattice {
    pub fn from_generators(gens: &[QuatElement]) -> Result<Self> {
        let den = gens
            .iter()
            .flat_map(|g| g.coords.iter())
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let rows: Vec<Vec<BigInt>> = gens
            .iter()
            .map(|g| g.coords.iter().map(|c| (c * Rational::from_integer(den.clone())).to_integer()).collect())
            .collect();
        let h = hermite_normal_form(rows);
        if h.len() != 4 {
            return Err(Error::Domain(format!("generators span a rank-{} lattice, need rank 4", h.len())));
        }
        Ok(Self::normalized(den, h))
    }

    fn normalized(den: BigInt, rows: Vec<Vec<BigInt>>) -> Self {
        let g = rows.iter().flatten().fold(den.clone(), |acc, x| acc.gcd(x));
        if g.is_one() {
            Lattice { den, rows }
        } else {
            Lattice { den: &den / &g, rows: rows.into_iter().map(|r| r.into_iter().map(|x| x / &g).collect()).collect() }
        }
    }

    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    pub fn hnf_rows(&self) -> &[Vec<BigInt>] {
        &self.rows
    }

    pub fn basis(&self) -> Vec<QuatElement> {
        self.rows
            .iter()
            .map(|r| QuatElement::new(std::array::from_fn(|t| Rational::new(r[t].clone(), self.den.clone()))))
            .collect()
    }

    /// Coordinates of `x` in the HNF basis (rational in general).
    pub fn rational_coords(&self, x: &QuatElement) -> [Rational; 4] {
        let mut v: Vec<Rational> = x.coords.iter().map(|c| c * Rational::from_integer(self.den.clone())).collect();
        let mut out: [Rational; 4] = std::array::from_fn(|_| Rational::zero());
        for r in 0..4 {
            let c = &v[r] / Rational::from_integer(self.rows[r][r].clone());
            for t in r..4 {
                v[t] -= &c * Rational::from_integer(self.rows[r][t].clone());
            }
            out[r] = c;
        }
        out
    }

    /// Integer coordinates of `x`, or `None` if `x` is not in the lattice.
    pub fn coords(&self, x: &QuatElement) -> Option<[BigInt; 4]> {
        let c = self.rational_coords(x);
        if c.iter().all(|t| t.is_integer()) {
            Some(c.map(|t| t.to_integer()))
        } else {
            None
        }
    }

    pub fn contains(&self, x: &QuatElement) -> bool {
        self.coords(x).is_some()
    }

    pub fn element(&self, coords: &[BigInt]) -> QuatElement {
        let mut acc: [BigInt; 4] = std::array::from_fn(|_| BigInt::zero());
        for (c, row) in coords.iter().zip(&self.rows) {
            for t in 0..4 {
                acc[t] += c * &row[t];
            }
        }
        QuatElement::new(acc.map(|a| Rational::new(a, self.den.clone())))
    }

    pub fn contains_lattice(&self, other: &Lattice) -> bool {
        other.basis().iter().all(|b| self.contains(b))
    }

    pub fn sum(&self, other: &Lattice) -> Lattice {
        let mut gens = self.basis();
        gens.extend(other.basis());
        Lattice::from_generators(&gens).expect("sum of full-rank lattices")
    }

    pub fn scale(&self, r: &Rational) -> Lattice {
        assert!(!r.is_zero());
        let gens: Vec<QuatElement> = self.basis().iter().map(|b| b.scale(r)).collect();
        Lattice::from_generators(&gens).expect("nonzero scaling keeps rank")
    }

    pub fn conjugate(&self) -> Lattice {
        let gens: Vec<QuatElement> = self.basis().iter().map(QuatElement::conjugate).collect();
        Lattice::from_generators(&gens).expect("conjugation keeps rank")
    }

    /// The Z-span of all products `x y` with `x` in `self` and `y` in `other`.
    pub fn product(&self, alg: &QuaternionAlgebra, other: &Lattice) -> Lattice {
        let a = self.basis();
        let b = other.basis();
        let gens: Vec<QuatElement> = a.iter().flat_map(|x| b.iter().map(move |y| alg.mul(x, y))).collect();
        Lattice::from_generators(&gens).expect("product of full-rank lattices in a division or matrix algebra")
    }

    /// `gram[r][s] = trd(e_r conj(e_s))`.
    pub fn gram(&self, alg: &QuaternionAlgebra) -> Vec<Vec<Rational>> {
        let b = self.basis();
        (0..4).map(|r| (0..4).map(|s| alg.bilinear(&b[r], &b[s])).collect()).collect()
    }

    pub fn gram_determinant(&self, alg: &QuaternionAlgebra) -> Rational {
        determinant(&self.gram(alg))
    }

    /// Covolume relative to `Z^4` in the `1, i, j, k` coordinates.
    pub fn covolume(&self) -> Rational {
        let d: BigInt = (0..4).map(|r| self.rows[r][r].clone()).product();
        Rational::new(d, self.den.pow(4))
    }

    /// `[other : self]` for `self` contained in `other` (a rational in general).
    pub fn index_in(&self, other: &Lattice) -> Rational {
        self.covolume() / other.covolume()
    }

    /// `{x : trd(x conj(y)) in Z for all y in self}`.
    pub fn dual(&self, alg: &QuaternionAlgebra) -> Result<Lattice> {
        let g = self.gram(alg);
        let ginv = inverse(&g).ok_or_else(|| Error::Domain("degenerate Gram matrix".into()))?;
        let b = self.basis();
        let gens: Vec<QuatElement> = (0..4)
            .map(|r| {
                (0..4).fold(QuatElement::zero(), |acc, s| acc.add(&b[s].scale(&ginv[r][s])))
            })
            .collect();
        Lattice::from_generators(&gens)
    }

    /// Canonical text form: denominator, then the four HNF rows.
    pub fn to_canonical_string(&self) -> String {
        let mut s = format!("{}", self.den);
        for r in &self.rows {
            let row: Vec<String> = r.iter().map(ToString::to_string).collect();
            s.push_str(&format!(";{}", row.join(" ")));
        }
        s
    }

    pub fn from_canonical_string(s: &str) -> Result<Lattice> {
        let bad = || Error::Domain(format!("malformed lattice string: {s}"));
        let mut parts = s.trim().split(';');
        let den: BigInt = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
        if !den.is_positive() {
            return Err(bad());
        }
        let mut gens = Vec::new();
        for p in parts {
            let row: Vec<BigInt> = p.split_whitespace().map(|t| t.parse().map_err(|_| bad())).collect::<Result<_>>()?;
            if row.len() != 4 {
                return Err(bad());
            }
            gens.push(QuatElement::new(std::array::from_fn(|t| Rational::new(row[t].clone(), den.clone()))));
        }
        if gens.len() != 4 {
            return Err(bad());
        }
        let l = Lattice::from_generators(&gens)?;
        if l.to_canonical_string() != s.trim() {
            return Err(bad());
        }
        Ok(l)
    }
}

impl fmt::Display for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b: Vec<String> = self.basis().iter().map(ToString::to_string).collect();
        write!(f, "<{}>", b.join(", "))
    }
}

/// `{c in Z^n : c M = 0 mod m}` for an integer `n x k` matrix `M`, as HNF rows.
pub fn kernel_mod(mat: &[Vec<BigInt>], m: &BigInt) -> Vec<Vec<BigInt>> {
    let n = mat.len();
    let k = mat.first().map_or(0, Vec::len);
    let mut rows = Vec::new();
    for (i, r) in mat.iter().enumerate() {
        let mut row: Vec<BigInt> = r.iter().map(|x| x.mod_floor(m)).collect();
        row.extend((0..n).map(|t| if t == i { BigInt::one() } else { BigInt::zero() }));
        rows.push(row);
    }
    for j in 0..k {
        let mut row = vec![BigInt::zero(); k + n];
        row[j] = m.clone();
        rows.push(row);
    }
    hermite_normal_form(rows)
        .into_iter()
        .filter(|r| r[..k].iter().all(Zero::is_zero))
        .map(|r| r[k..].to_vec())
        .collect()
}
