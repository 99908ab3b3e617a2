//! Finite orbit counts `#{x : v_p(det x) = k} / R^x` for the three local patterns.
//!
//! Two independent routes: explicit union-find over `R / p^M R` (small rings
//! only), and orbit–stabilizer counting. Every orbit has stabilizer of size
//! `p^(2k)` in `(R / p^M R)^x`, so the orbit count is `|X_M(k)| p^(2k) / |G_M|`,
//! and both cardinalities come from value histograms of the norm form.

use crate::error::{Error, Result};
use crate::quatalg::LocalRamifiedModel;

/// Local order at `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LocalPattern {
    /// `M_2(Z_p)`.
    Split,
    /// Matrices with lower-left entry in `p Z_p`.
    Level,
    /// Maximal order of the local division algebra.
    Ramified,
}

impl std::fmt::Display for LocalPattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LocalPattern::Split => "split",
            LocalPattern::Level => "level",
            LocalPattern::Ramified => "ramified",
        })
    }
}

impl std::str::FromStr for LocalPattern {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "split" => Ok(LocalPattern::Split),
            "level" => Ok(LocalPattern::Level),
            "ramified" => Ok(LocalPattern::Ramified),
            _ => Err(Error::InvalidParameters(format!("unknown local pattern '{s}'"))),
        }
    }
}

/// Arithmetic of `R / p^M R` on 4 coordinates mod `q = p^M`.
///
/// Coordinates: split `(a, b, c, d)`; level `(a, b, c', d)` for `[[a, b], [p c', d]]`;
/// ramified `(x0, x1, y0, y1)` for `(x0 + x1 u) + (y0 + y1 u) pi`.
#[derive(Clone, Copy, Debug)]
struct Ring {
    pattern: LocalPattern,
    p: u64,
    q: u64,
    t: u64,
    n: u64,
}

type El = [u64; 4];

impl Ring {
    fn new(pattern: LocalPattern, p: u64, m: u32) -> Self {
        let model = LocalRamifiedModel::new(p);
        Ring { pattern, p, q: p.pow(m), t: model.t, n: model.n }
    }

    fn one(&self) -> El {
        match self.pattern {
            LocalPattern::Ramified => [1, 0, 0, 0],
            _ => [1, 0, 0, 1],
        }
    }

    fn ok_mul(&self, x: u64, y: u64) -> u64 {
        ((x as u128 * y as u128) % self.q as u128) as u64
    }

    fn kmul(&self, x: (u64, u64), y: (u64, u64)) -> (u64, u64) {
        let q = self.q;
        let m = |a, b| self.ok_mul(a, b);
        let r0 = (m(x.0, y.0) + q - m(self.n, m(x.1, y.1))) % q;
        let r1 = (m(x.0, y.1) + m(x.1, y.0) + m(self.t, m(x.1, y.1))) % q;
        (r0, r1)
    }

    fn kconj(&self, x: (u64, u64)) -> (u64, u64) {
        let q = self.q;
        ((x.0 + self.ok_mul(self.t, x.1)) % q, (q - x.1) % q)
    }

    fn knorm(&self, x: (u64, u64)) -> u64 {
        let m = |a, b| self.ok_mul(a, b);
        (m(x.0, x.0) + m(self.t, m(x.0, x.1)) + m(self.n, m(x.1, x.1))) % self.q
    }

    fn mul(&self, x: &El, y: &El) -> El {
        let q = self.q;
        let p = self.p % q;
        let m = |a, b| self.ok_mul(a, b);
        match self.pattern {
            LocalPattern::Split => [
                (m(x[0], y[0]) + m(x[1], y[2])) % q,
                (m(x[0], y[1]) + m(x[1], y[3])) % q,
                (m(x[2], y[0]) + m(x[3], y[2])) % q,
                (m(x[2], y[1]) + m(x[3], y[3])) % q,
            ],
            LocalPattern::Level => [
                (m(x[0], y[0]) + m(p, m(x[1], y[2]))) % q,
                (m(x[0], y[1]) + m(x[1], y[3])) % q,
                (m(x[2], y[0]) + m(x[3], y[2])) % q,
                (m(p, m(x[2], y[1])) + m(x[3], y[3])) % q,
            ],
            LocalPattern::Ramified => {
                let (a, b) = ((x[0], x[1]), (x[2], x[3]));
                let (c, d) = ((y[0], y[1]), (y[2], y[3]));
                let ac = self.kmul(a, c);
                let bdbar = self.kmul(b, self.kconj(d));
                let ad = self.kmul(a, d);
                let bcbar = self.kmul(b, self.kconj(c));
                [
                    (ac.0 + m(p, bdbar.0)) % q,
                    (ac.1 + m(p, bdbar.1)) % q,
                    (ad.0 + bcbar.0) % q,
                    (ad.1 + bcbar.1) % q,
                ]
            }
        }
    }

    fn det(&self, x: &El) -> u64 {
        let q = self.q;
        let p = self.p % q;
        let m = |a, b| self.ok_mul(a, b);
        match self.pattern {
            LocalPattern::Split => (m(x[0], x[3]) + q - m(x[1], x[2])) % q,
            LocalPattern::Level => (m(x[0], x[3]) + q - m(p, m(x[1], x[2]))) % q,
            LocalPattern::Ramified => {
                (self.knorm((x[0], x[1])) + q - m(p, self.knorm((x[2], x[3])))) % q
            }
        }
    }

    fn valuation(&self, v: u64) -> u32 {
        if v == 0 {
            return u32::MAX;
        }
        let mut v = v;
        let mut k = 0;
        while v % self.p == 0 {
            v /= self.p;
            k += 1;
        }
        k
    }

    fn encode(&self, x: &El) -> usize {
        let q = self.q as usize;
        x[0] as usize + q * (x[1] as usize + q * (x[2] as usize + q * x[3] as usize))
    }

    fn decode(&self, mut i: usize) -> El {
        let q = self.q as usize;
        std::array::from_fn(|_| {
            let c = i % q;
            i /= q;
            c as u64
        })
    }
}

fn find(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        let up = parent[parent[x as usize] as usize];
        parent[x as usize] = up;
        x = up;
    }
    x
}

/// Largest ring size handled by explicit enumeration.
pub const EXPLICIT_LIMIT: u64 = 1 << 16;

pub fn explicit_feasible(p: u64, m: u32) -> bool {
    p.checked_pow(4 * m).is_some_and(|s| s <= EXPLICIT_LIMIT)
}

/// Orbit count by union-find over `R / p^M R`.
pub fn explicit_orbits(pattern: LocalPattern, p: u64, k: u32, m: u32) -> Result<u64> {
    if m < k + 1 {
        return Err(Error::InvalidParameters(format!("modulus exponent {m} must exceed k = {k}")));
    }
    if !explicit_feasible(p, m) {
        return Err(Error::InvalidParameters(format!("ring of size {p}^{} too large for explicit orbits", 4 * m)));
    }
    let ring = Ring::new(pattern, p, m);
    let size = ring.q.pow(4) as usize;
    // generators: every unit with coordinates below p, and 1 + p^j e_t
    let mut gens: Vec<El> = Vec::new();
    for i in 0..p.pow(4) as usize {
        let mut t = i;
        let x: El = std::array::from_fn(|_| {
            let c = (t % p as usize) as u64;
            t /= p as usize;
            c
        });
        if ring.valuation(ring.det(&x)) == 0 {
            gens.push(x);
        }
    }
    let one = ring.one();
    let mut pj = p;
    while pj < ring.q {
        for t in 0..4 {
            let mut g = one;
            g[t] = (g[t] + pj) % ring.q;
            gens.push(g);
        }
        pj *= p;
    }
    // the generators must produce the whole unit group
    let unit_count = (0..size).filter(|&i| ring.valuation(ring.det(&ring.decode(i))) == 0).count();
    let mut seen = vec![false; size];
    let mut stack = vec![one];
    seen[ring.encode(&one)] = true;
    let mut reached = 1usize;
    while let Some(x) = stack.pop() {
        for g in &gens {
            let y = ring.mul(&x, g);
            let idx = ring.encode(&y);
            if !seen[idx] {
                seen[idx] = true;
                reached += 1;
                stack.push(y);
            }
        }
    }
    if reached != unit_count {
        return Err(Error::Construction(format!(
            "unit generators reach {reached} of {unit_count} units for {pattern} at {p}^{m}"
        )));
    }
    let mut parent: Vec<u32> = (0..size as u32).collect();
    let mut members = 0u64;
    for i in 0..size {
        let x = ring.decode(i);
        if ring.valuation(ring.det(&x)) != k {
            continue;
        }
        members += 1;
        for g in &gens {
            let j = ring.encode(&ring.mul(&x, g)) as u32;
            let (a, b) = (find(&mut parent, i as u32), find(&mut parent, j));
            if a != b {
                parent[a.max(b) as usize] = a.min(b);
            }
        }
    }
    if members == 0 {
        return Ok(0);
    }
    let mut roots = std::collections::HashSet::new();
    for i in 0..size {
        if ring.valuation(ring.det(&ring.decode(i))) == k {
            roots.insert(find(&mut parent, i as u32));
        }
    }
    Ok(roots.len() as u64)
}

/// Histogram of a binary form's values over `(Z / q)^2`.
fn binary_histogram(q: u64, f: impl Fn(u64, u64) -> u64) -> Vec<u64> {
    let mut h = vec![0u64; q as usize];
    for x in 0..q {
        for y in 0..q {
            h[f(x, y) as usize] += 1;
        }
    }
    h
}

/// Histogram of `f(x) - c g(y)` from histograms of `f` and `g`.
fn combine(hf: &[u64], hg: &[u64], c: u64) -> Vec<u64> {
    let q = hf.len() as u64;
    let mut out = vec![0u64; q as usize];
    for (s, &a) in hf.iter().enumerate() {
        if a == 0 {
            continue;
        }
        for (t, &b) in hg.iter().enumerate() {
            if b == 0 {
                continue;
            }
            let v = (s as u64 + q - (c % q) * t as u64 % q) % q;
            out[v as usize] += a * b;
        }
    }
    out
}

/// Number of elements of `R / p^e R` with each determinant value mod `p^e`.
fn det_histogram(pattern: LocalPattern, p: u64, e: u32) -> Vec<u64> {
    let ring = Ring::new(pattern, p, e);
    let q = ring.q;
    let prod = binary_histogram(q, |x, y| ring.ok_mul(x, y));
    match pattern {
        LocalPattern::Split => combine(&prod, &prod, 1),
        LocalPattern::Level => combine(&prod, &prod, p),
        LocalPattern::Ramified => {
            let norm = binary_histogram(q, |x, y| ring.knorm((x, y)));
            combine(&norm, &norm, p)
        }
    }
}

fn count_valuation(hist: &[u64], p: u64, k: u32) -> u64 {
    let pk = p.pow(k);
    hist.iter()
        .enumerate()
        .filter(|&(v, _)| {
            let v = v as u64;
            v != 0 && v % pk == 0 && (v / pk) % p != 0
        })
        .map(|(_, &c)| c)
        .sum()
}

/// Orbit count by orbit–stabilizer: `|X_M(k)| p^(2k) / |G_M|`.
///
/// Whether `v_p(det x) = k` depends only on `x mod p^(k+1)`, so
/// `|X_M(k)| = |X_{k+1}(k)| p^(4(M-k-1))` and `|G_M| = |G_1| p^(4(M-1))`.
pub fn counted_orbits(pattern: LocalPattern, p: u64, k: u32, m: u32) -> Result<u64> {
    if m < k + 1 {
        return Err(Error::InvalidParameters(format!("modulus exponent {m} must exceed k = {k}")));
    }
    let xk = count_valuation(&det_histogram(pattern, p, k + 1), p, k) as u128;
    let g1 = count_valuation(&det_histogram(pattern, p, 1), p, 0) as u128;
    let p = p as u128;
    let xm = xk * p.pow(4 * (m - k - 1));
    let gm = g1 * p.pow(4 * (m - 1));
    let num = xm * p.pow(2 * k);
    if num % gm != 0 {
        return Err(Error::Construction(format!("orbit count {num}/{gm} is not an integer")));
    }
    Ok((num / gm) as u64)
}

/// Orbit count at modulus exponent `m`: explicit when the ring is small,
/// otherwise by counting.
pub fn oracle_local_orbits(pattern: LocalPattern, p: u64, k: u32, m: u32) -> Result<u64> {
    if m < k + 2 {
        return Err(Error::InvalidParameters(format!("modulus exponent {m} must be at least k + 2 = {}", k + 2)));
    }
    if explicit_feasible(p, m) {
        explicit_orbits(pattern, p, k, m)
    } else {
        counted_orbits(pattern, p, k, m)
    }
}

/// Oracle value with the stability check at `m` and `m + 1`.
pub fn stable_local_orbits(pattern: LocalPattern, p: u64, k: u32) -> Result<u64> {
    let m = k + 2;
    let a = oracle_local_orbits(pattern, p, k, m)?;
    let b = oracle_local_orbits(pattern, p, k, m + 1)?;
    if a != b {
        return Err(Error::Unstable(format!("{pattern} at p={p}, k={k}: {a} at M={m}, {b} at M={}", m + 1)));
    }
    Ok(a)
}

/// Index-`n` subgroups of `Z^2`, by enumerating Hermite forms `[[a, b], [0, d]]`.
pub fn sublattice_count(n: u64) -> u64 {
    let mut count = 0;
    for a in 1..=n {
        if n % a == 0 {
            let d = n / a;
            count += d; // 0 <= b < d
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn explicit_small_cases() {
        assert_eq!(explicit_orbits(LocalPattern::Split, 2, 1, 3).unwrap(), 3);
        assert_eq!(explicit_orbits(LocalPattern::Ramified, 2, 1, 3).unwrap(), 1);
        assert_eq!(explicit_orbits(LocalPattern::Level, 2, 1, 3).unwrap(), 5);
    }

    #[test]
    fn routes_agree_on_small_rings() {
        for pattern in [LocalPattern::Split, LocalPattern::Level, LocalPattern::Ramified] {
            for (k, m) in [(0, 2), (1, 3), (1, 4), (2, 4)] {
                assert_eq!(
                    explicit_orbits(pattern, 2, k, m).unwrap(),
                    counted_orbits(pattern, 2, k, m).unwrap(),
                    "{pattern} k={k} m={m}"
                );
            }
        }
    }

    #[test]
    fn sublattices() {
        assert_eq!(sublattice_count(5), 6);
        assert_eq!(sublattice_count(8), 15);
        assert_eq!(sublattice_count(1), 1);
    }
}
