//! Indefinite side: degrees of Hecke correspondences on Shimura curves and the
//! normalized coefficients `r'_{D,N}(m) = deg T_{D,N}(m) / vol`.

mod oracle;

pub use oracle::{
    counted_orbits, explicit_feasible, explicit_orbits, oracle_local_orbits, stable_local_orbits,
    sublattice_count, LocalPattern, EXPLICIT_LIMIT,
};

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::exactnum::{factorize, gcd_u64, int, is_squarefree, prime_divisors, rat, sigma, Rational};

fn check_indefinite(d: u64, n: u64) -> Result<()> {
    if d <= 1 || !is_squarefree(d) || prime_divisors(d).len() % 2 != 0 {
        return Err(Error::InvalidParameters(format!(
            "D = {d} must be a squarefree integer > 1 with an even number of prime factors"
        )));
    }
    if n == 0 || gcd_u64(n, d) != 1 {
        return Err(Error::InvalidParameters(format!("N = {n} must be positive and coprime to D = {d}")));
    }
    Ok(())
}

/// `vol(X_0^D(N)) = -(DN/12) prod_{p|N} (1 + 1/p) prod_{p|D} (1 - 1/p)`.
pub fn volume(d: u64, n: u64) -> Result<Rational> {
    check_indefinite(d, n)?;
    let mut v = rat(-((d * n) as i64), 12);
    for p in prime_divisors(n) {
        v *= rat(p as i64 + 1, p as i64);
    }
    for p in prime_divisors(d) {
        v *= rat(p as i64 - 1, p as i64);
    }
    Ok(v)
}

/// `sigma(p^k)`.
pub fn local_degree_split(p: u64, k: u32) -> u64 {
    sigma(p, k)
}

/// `2 sigma(p^k) - 1` for `p` exactly dividing the level.
pub fn local_degree_level(p: u64, k: u32) -> u64 {
    2 * sigma(p, k) - 1
}

/// One orbit of norm-`p^k` elements: they form `pi^k O^x`.
pub fn local_degree_ramified(_p: u64, _k: u32) -> u64 {
    1
}

pub fn local_degree(pattern: LocalPattern, p: u64, k: u32) -> u64 {
    match pattern {
        LocalPattern::Split => local_degree_split(p, k),
        LocalPattern::Level => local_degree_level(p, k),
        LocalPattern::Ramified => local_degree_ramified(p, k),
    }
}

pub fn pattern_at(d: u64, n: u64, p: u64) -> LocalPattern {
    if d % p == 0 {
        LocalPattern::Ramified
    } else if n % p == 0 {
        LocalPattern::Level
    } else {
        LocalPattern::Split
    }
}

/// Local factors of `deg T_{D,N}` at the primes of `m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeckeDegreeProfile {
    pub d: u64,
    pub n: u64,
    pub local_factors: BTreeMap<u64, Vec<u64>>,
}

impl HeckeDegreeProfile {
    /// Table of local factors for every prime up to `m_max` and exponent with `p^k <= m_max`.
    pub fn new(d: u64, n: u64, m_max: u64) -> Result<Self> {
        check_indefinite(d, n)?;
        let mut local_factors = BTreeMap::new();
        for p in (2..=m_max.max(2)).filter(|&p| crate::exactnum::is_prime(p)) {
            let pattern = pattern_at(d, n, p);
            let mut row = vec![1];
            let mut pk = p;
            let mut k = 1;
            while pk <= m_max {
                row.push(local_degree(pattern, p, k));
                pk *= p;
                k += 1;
            }
            local_factors.insert(p, row);
        }
        Ok(HeckeDegreeProfile { d, n, local_factors })
    }

    pub fn degree(&self, m: u64) -> Option<u64> {
        factorize(m)
            .iter()
            .map(|&(p, k)| self.local_factors.get(&p).and_then(|r| r.get(k as usize)).copied())
            .product()
    }
}

/// `deg T_{D,N}(m)` as the product of local factors.
pub fn deg_t(d: u64, n: u64, m: u64) -> Result<u64> {
    check_indefinite(d, n)?;
    if m == 0 {
        return Err(Error::InvalidParameters("deg T(m) needs m >= 1".into()));
    }
    Ok(factorize(m).iter().map(|&(p, k)| local_degree(pattern_at(d, n, p), p, k)).product())
}

/// `r'_{D,N}(m)`: 1 at `m = 0`, else `deg T_{D,N}(m) / vol(X_0^D(N))`.
pub fn r_prime(d: u64, n: u64, m: u64) -> Result<Rational> {
    if m == 0 {
        check_indefinite(d, n)?;
        return Ok(int(1));
    }
    Ok(int(deg_t(d, n, m)? as i64) / volume(d, n)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn volumes() {
        assert_eq!(volume(6, 1).unwrap(), rat(-1, 6));
        assert_eq!(volume(10, 1).unwrap(), rat(-1, 3));
        assert_eq!(volume(6, 5).unwrap(), int(-1));
        assert!(volume(1, 1).is_err());
        assert!(volume(2, 1).is_err());
        assert!(volume(6, 3).is_err());
    }

    #[test]
    fn degrees() {
        assert_eq!(deg_t(6, 1, 1).unwrap(), 1);
        assert_eq!(deg_t(6, 1, 5).unwrap(), 6);
        assert_eq!(deg_t(6, 1, 2).unwrap(), 1);
        assert_eq!(local_degree_split(2, 3), 15);
        assert_eq!(r_prime(6, 1, 0).unwrap(), int(1));
        assert_eq!(r_prime(6, 1, 1).unwrap(), int(-6));
        assert_eq!(r_prime(6, 1, 5).unwrap(), int(-36));
        let prof = HeckeDegreeProfile::new(6, 5, 30).unwrap();
        for m in 1..=30 {
            assert_eq!(prof.degree(m), Some(deg_t(6, 5, m).unwrap()));
        }
    }

    #[test]
    fn split_degrees_count_sublattices() {
        for m in (1..=80).filter(|m| gcd_u64(*m, 10) == 1) {
            assert_eq!(deg_t(10, 1, m).unwrap(), sublattice_count(m), "m = {m}");
        }
    }

    #[test]
    fn mixed_degrees_match_local_oracles() {
        // D = 6, N = 5: 2 and 3 ramified, 5 at the level, 7 split
        for (a, b, c) in [(1u32, 1u32, 1u32), (2, 0, 1), (0, 2, 0), (1, 1, 0), (3, 1, 1)] {
            let m = 2u64.pow(a) * 5u64.pow(b) * 7u64.pow(c);
            let oracle = stable_local_orbits(LocalPattern::Ramified, 2, a).unwrap()
                * stable_local_orbits(LocalPattern::Level, 5, b).unwrap()
                * sublattice_count(7u64.pow(c));
            assert_eq!(deg_t(6, 5, m).unwrap(), oracle, "m = {m}");
        }
        // multiplicativity on coprime pairs
        for m1 in 1..=20u64 {
            for m2 in 1..=20u64 {
                if gcd_u64(m1, m2) == 1 {
                    assert_eq!(deg_t(6, 5, m1 * m2).unwrap(), deg_t(6, 5, m1).unwrap() * deg_t(6, 5, m2).unwrap());
                }
            }
        }
    }
}
