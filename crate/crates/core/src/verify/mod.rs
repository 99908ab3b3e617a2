//! Verification harness: both sides of each identity computed exactly over a
//! range of `m`, compared row by row.

mod config;
mod report;

pub use config::{default_grid, parse_config, theorem_1_3_grid, ConfigValues, SuiteConfig};
pub use report::{render_report, render_summary, ReportFormat};

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::classsets::{genus_average_series, standard_eichler_order, CacheStatus, ClassSetCache, IdealClassSet};
use crate::error::{Error, Result};
use crate::exactnum::{gcd_u64, is_prime, is_squarefree, prime_divisors, rat, Rational};
use crate::heckedeg::r_prime;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TheoremId {
    /// definite–definite: `r` on `B(Dp)` against `r` on `B(Dq)`
    T1_1,
    /// indefinite–indefinite: `r'` on `B(Dp)` against `r'` on `B(Dq)`
    T1_3,
    /// `r'` on `B(Dp)` from `r` on `B(D)`
    T1_4,
    /// `r` on `B(Dp)` from `r'` on `B(D)`
    T1_5,
}

impl TheoremId {
    pub const ALL: [TheoremId; 4] = [TheoremId::T1_1, TheoremId::T1_3, TheoremId::T1_4, TheoremId::T1_5];
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TheoremId::T1_1 => "1.1",
            TheoremId::T1_3 => "1.3",
            TheoremId::T1_4 => "1.4",
            TheoremId::T1_5 => "1.5",
        })
    }
}

impl FromStr for TheoremId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1.1" => Ok(TheoremId::T1_1),
            "1.3" => Ok(TheoremId::T1_3),
            "1.4" => Ok(TheoremId::T1_4),
            "1.5" => Ok(TheoremId::T1_5),
            _ => Err(Error::Config(format!("theorem: unknown identity {s:?} (expected 1.1, 1.3, 1.4 or 1.5)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TheoremCase {
    pub theorem: TheoremId,
    pub d: u64,
    pub n: u64,
    pub p: u64,
    /// only used by the two-prime identities
    pub q: Option<u64>,
    pub m_min: u64,
    pub m_max: u64,
}

fn prime_count(d: u64) -> usize {
    prime_divisors(d).len()
}

impl TheoremCase {
    pub fn new(theorem: TheoremId, d: u64, n: u64, p: u64, q: Option<u64>, m_max: u64) -> Result<Self> {
        let c = TheoremCase { theorem, d, n, p, q, m_min: 1, m_max };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |why: String| Err(Error::InvalidParameters(format!("theorem {}: {why}", self.theorem)));
        let (d, n, p) = (self.d, self.n, self.p);
        if d == 0 || !is_squarefree(d) {
            return bad(format!("D = {d} must be a positive squarefree integer"));
        }
        if n == 0 {
            return bad("N must be positive".into());
        }
        if self.m_min == 0 || self.m_min > self.m_max {
            return bad(format!("m range {}..={} must be a nonempty range of positive integers", self.m_min, self.m_max));
        }
        if !is_prime(p) || d % p == 0 {
            return bad(format!("p = {p} must be a prime not dividing D = {d}"));
        }
        let two_primes = matches!(self.theorem, TheoremId::T1_1 | TheoremId::T1_3);
        let mut dpq = d * p;
        match (two_primes, self.q) {
            (true, Some(q)) => {
                if !is_prime(q) || q == p || d % q == 0 {
                    return bad(format!("q = {q} must be a prime different from p and not dividing D"));
                }
                dpq *= q;
            }
            (true, None) => return bad("q is required".into()),
            (false, Some(_)) => return bad("q is not used by this identity".into()),
            (false, None) => {}
        }
        if gcd_u64(n, dpq) != 1 {
            return bad(format!("N = {n} must be coprime to {dpq}"));
        }
        let even = prime_count(d) % 2 == 0;
        match self.theorem {
            TheoremId::T1_1 if !even => bad(format!("D = {d} must have an even number of prime factors")),
            TheoremId::T1_3 | TheoremId::T1_4 if even => {
                bad(format!("D = {d} must have an odd number of prime factors"))
            }
            TheoremId::T1_5 if !even || d == 1 => {
                bad(format!("D = {d} must be > 1 with an even number of prime factors"))
            }
            _ => Ok(()),
        }
    }

    /// File-name friendly identifier, e.g. `thm1.4_D2_N1_p3`.
    pub fn key(&self) -> String {
        let mut s = format!("thm{}_D{}_N{}_p{}", self.theorem, self.d, self.n, self.p);
        if let Some(q) = self.q {
            s.push_str(&format!("_q{q}"));
        }
        s
    }
}

impl fmt::Display for TheoremCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "theorem {} (D={}, N={}, p={}", self.theorem, self.d, self.n, self.p)?;
        if let Some(q) = self.q {
            write!(f, ", q={q}")?;
        }
        write!(f, "), m = {}..={}", self.m_min, self.m_max)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReportRow {
    pub m: u64,
    pub lhs: Rational,
    pub rhs: Rational,
    pub pass: bool,
}

/// Rows plus run metadata; only `case` and `rows` go into report files.
#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub case: TheoremCase,
    pub rows: Vec<ReportRow>,
    pub elapsed: Duration,
    /// class sets touched by this case and where they came from
    pub cache_provenance: Vec<((u64, u64), CacheStatus)>,
}

impl VerificationReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn first_failure(&self) -> Option<&ReportRow> {
        self.rows.iter().find(|r| !r.pass)
    }
}

/// `-2/(p-1) x + (p+1)/(p-1) y`.
fn combo(p: u64, x: &Rational, y: &Rational) -> Rational {
    let pm1 = p as i64 - 1;
    rat(-2, pm1) * x + rat(p as i64 + 1, pm1) * y
}

/// Shared state for a run: the class-set cache and memoized genus averages.
pub struct Harness {
    /// Multiplies `r'(m)` for `m >= 1`; 1 is the plain `deg T(m) / vol`.
    pub indefinite_scale: Rational,
    cache: Option<ClassSetCache>,
    class_sets: Mutex<BTreeMap<(u64, u64), (Arc<IdealClassSet>, CacheStatus)>>,
    series: Mutex<BTreeMap<(u64, u64), Arc<Vec<Rational>>>>,
}

impl Default for Harness {
    fn default() -> Self {
        Harness::new(None)
    }
}

impl Harness {
    pub fn new(cache: Option<ClassSetCache>) -> Self {
        Harness {
            indefinite_scale: Rational::one(),
            cache,
            class_sets: Mutex::new(BTreeMap::new()),
            series: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn with_indefinite_scale(mut self, s: Rational) -> Self {
        self.indefinite_scale = s;
        self
    }

    pub fn class_set(&self, d: u64, n: u64) -> Result<(Arc<IdealClassSet>, CacheStatus)> {
        if let Some(hit) = self.class_sets.lock().unwrap().get(&(d, n)) {
            return Ok(hit.clone());
        }
        let o = standard_eichler_order(d, n)?;
        let (cs, status) = match &self.cache {
            Some(c) => c.get_or_compute_with_status(&o)?,
            None => (crate::classsets::ideal_class_set(&o, None)?, CacheStatus::Miss),
        };
        let entry = (Arc::new(cs), status);
        // another thread may have raced us; keep the first entry
        Ok(self.class_sets.lock().unwrap().entry((d, n)).or_insert(entry).clone())
    }

    /// `r_{D,N}(0..=m_max)` for a definite `B(D)`.
    pub fn genus_series(&self, d: u64, n: u64, m_max: u64) -> Result<Arc<Vec<Rational>>> {
        if let Some(s) = self.series.lock().unwrap().get(&(d, n)) {
            if s.len() as u64 > m_max {
                return Ok(s.clone());
            }
        }
        let (cs, _) = self.class_set(d, n)?;
        let s = Arc::new(genus_average_series(&cs, m_max)?);
        let mut map = self.series.lock().unwrap();
        let e = map.entry((d, n)).or_insert_with(|| s.clone());
        if e.len() < s.len() {
            *e = s.clone();
        }
        Ok(e.clone())
    }

    pub fn definite(&self, d: u64, n: u64, m: u64) -> Result<Rational> {
        Ok(self.genus_series(d, n, m)?[m as usize].clone())
    }

    pub fn indefinite(&self, d: u64, n: u64, m: u64) -> Result<Rational> {
        let r = r_prime(d, n, m)?;
        Ok(if m == 0 { r } else { r * &self.indefinite_scale })
    }

    fn provenance(&self, keys: &[(u64, u64)]) -> Vec<((u64, u64), CacheStatus)> {
        let map = self.class_sets.lock().unwrap();
        keys.iter().filter_map(|k| map.get(k).map(|(_, s)| (*k, *s))).collect()
    }

    /// Rows for one case.
    pub fn check(&self, case: &TheoremCase) -> Result<VerificationReport> {
        case.validate()?;
        let start = Instant::now();
        let (d, n, p) = (case.d, case.n, case.p);
        let ms = case.m_min..=case.m_max;
        let mut rows = Vec::new();
        let mut definite_keys = Vec::new();
        match case.theorem {
            TheoremId::T1_1 => {
                let q = case.q.unwrap();
                definite_keys = vec![(d * p, n), (d * p, n * q), (d * q, n), (d * q, n * p)];
                for m in ms {
                    let lhs = combo(q, &self.definite(d * p, n, m)?, &self.definite(d * p, n * q, m)?);
                    let rhs = combo(p, &self.definite(d * q, n, m)?, &self.definite(d * q, n * p, m)?);
                    rows.push(row(m, lhs, rhs));
                }
            }
            TheoremId::T1_3 => {
                let q = case.q.unwrap();
                for m in ms {
                    let lhs = combo(q, &self.indefinite(d * p, n, m)?, &self.indefinite(d * p, n * q, m)?);
                    let rhs = combo(p, &self.indefinite(d * q, n, m)?, &self.indefinite(d * q, n * p, m)?);
                    rows.push(row(m, lhs, rhs));
                }
            }
            TheoremId::T1_4 => {
                definite_keys = vec![(d, n), (d, n * p)];
                for m in ms {
                    let lhs = self.indefinite(d * p, n, m)?;
                    let rhs = combo(p, &self.definite(d, n, m)?, &self.definite(d, n * p, m)?);
                    rows.push(row(m, lhs, rhs));
                }
            }
            TheoremId::T1_5 => {
                definite_keys = vec![(d * p, n)];
                for m in ms {
                    let lhs = self.definite(d * p, n, m)?;
                    let rhs = combo(p, &self.indefinite(d, n, m)?, &self.indefinite(d, n * p, m)?);
                    rows.push(row(m, lhs, rhs));
                }
            }
        }
        Ok(VerificationReport {
            case: case.clone(),
            rows,
            elapsed: start.elapsed(),
            cache_provenance: self.provenance(&definite_keys),
        })
    }

    /// Cases in parallel; reports come back sorted by case key.
    pub fn check_all(&self, cases: &[TheoremCase]) -> Result<Vec<VerificationReport>> {
        let workers = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(cases.len().max(1));
        let next = AtomicUsize::new(0);
        let results: Mutex<Vec<(usize, Result<VerificationReport>)>> = Mutex::new(Vec::new());
        std::thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    if i >= cases.len() {
                        break;
                    }
                    let r = self.check(&cases[i]).map_err(|e| match e {
                        Error::Io(_) | Error::Json(_) => e,
                        other => Error::Construction(format!("{}: {other}", cases[i])),
                    });
                    results.lock().unwrap().push((i, r));
                });
            }
        });
        let mut results = results.into_inner().unwrap();
        results.sort_by_key(|(i, _)| *i);
        let mut reports = results.into_iter().map(|(_, r)| r).collect::<Result<Vec<_>>>()?;
        reports.sort_by(|a, b| a.case.key().cmp(&b.case.key()).then(a.case.cmp(&b.case)));
        Ok(reports)
    }
}

fn row(m: u64, lhs: Rational, rhs: Rational) -> ReportRow {
    let pass = lhs == rhs;
    ReportRow { m, lhs, rhs, pass }
}

fn range_case(theorem: TheoremId, d: u64, n: u64, p: u64, q: Option<u64>, m: std::ops::RangeInclusive<u64>) -> Result<TheoremCase> {
    let c = TheoremCase { theorem, d, n, p, q, m_min: *m.start(), m_max: *m.end() };
    c.validate()?;
    Ok(c)
}

pub fn check_theorem_1_1(d: u64, p: u64, q: u64, n: u64, m: std::ops::RangeInclusive<u64>) -> Result<VerificationReport> {
    Harness::default().check(&range_case(TheoremId::T1_1, d, n, p, Some(q), m)?)
}

pub fn check_theorem_1_3(d: u64, p: u64, q: u64, n: u64, m: std::ops::RangeInclusive<u64>) -> Result<VerificationReport> {
    Harness::default().check(&range_case(TheoremId::T1_3, d, n, p, Some(q), m)?)
}

pub fn check_theorem_1_4(d: u64, p: u64, n: u64, m: std::ops::RangeInclusive<u64>) -> Result<VerificationReport> {
    Harness::default().check(&range_case(TheoremId::T1_4, d, n, p, None, m)?)
}

pub fn check_theorem_1_5(d: u64, p: u64, n: u64, m: std::ops::RangeInclusive<u64>) -> Result<VerificationReport> {
    Harness::default().check(&range_case(TheoremId::T1_5, d, n, p, None, m)?)
}

/// The `m = 1` row of the indefinite–indefinite identity is a relation
/// between volumes; checks it for every admissible `(D, p, q, N)` with
/// `DNpq <= bound`. Returns the number of tuples checked.
pub fn volume_identity_sweep(bound: u64) -> Result<usize> {
    let mut checked = 0;
    for d in 1..=bound {
        if !is_squarefree(d) || prime_count(d) % 2 == 0 {
            continue;
        }
        for p in (2..=bound / d).filter(|&p| is_prime(p) && d % p != 0) {
            for q in (2..=bound / (d * p)).filter(|&q| is_prime(q) && q != p && d % q != 0) {
                for n in (1..=bound / (d * p * q)).filter(|&n| gcd_u64(n, d * p * q) == 1) {
                    let inv = |dd: u64, nn: u64| -> Result<Rational> { Ok(crate::heckedeg::volume(dd, nn)?.recip()) };
                    let lhs = combo(q, &inv(d * p, n)?, &inv(d * p, n * q)?);
                    let rhs = combo(p, &inv(d * q, n)?, &inv(d * q, n * p)?);
                    if lhs != rhs {
                        return Err(Error::Arithmetic(format!(
                            "volume identity fails at D={d}, p={p}, q={q}, N={n}: {lhs} vs {rhs}"
                        )));
                    }
                    checked += 1;
                }
            }
        }
    }
    Ok(checked)
}

/// Result of a suite run.
pub struct SuiteOutcome {
    pub reports: Vec<VerificationReport>,
    pub warnings: Vec<String>,
    /// files written, in write order
    pub written: Vec<PathBuf>,
}

impl SuiteOutcome {
    /// 0 iff every row of every report passes.
    pub fn exit_code(&self) -> i32 {
        if self.reports.iter().all(|r| r.all_pass()) {
            0
        } else {
            1
        }
    }
}

/// Runs every configured case and writes one report per case plus
/// `summary.json` when an output directory is configured.
pub fn run_suite(config: &SuiteConfig) -> Result<SuiteOutcome> {
    let cache = config.cache_dir.as_ref().map(ClassSetCache::new);
    let harness = Harness::new(cache).with_indefinite_scale(config.indefinite_scale.clone());
    let mut warnings = Vec::new();
    if config.cases.is_empty() {
        warnings.push("no cases configured; nothing to verify".to_string());
    }
    let reports = harness.check_all(&config.cases)?;
    let mut written = Vec::new();
    if let Some(dir) = &config.out_dir {
        std::fs::create_dir_all(dir)?;
        for r in &reports {
            let path = dir.join(format!("{}.{}", r.case.key(), config.format.extension()));
            std::fs::write(&path, render_report(r, config.format)?)?;
            written.push(path);
        }
        let path = dir.join("summary.json");
        std::fs::write(&path, render_summary(&reports)?)?;
        written.push(path);
    }
    Ok(SuiteOutcome { reports, warnings, written })
}

/// Smallest prime not dividing `x`.
pub fn smallest_coprime_prime(x: u64) -> u64 {
    (2u64..).find(|&p| is_prime(p) && x % p != 0).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::int;

    #[test]
    fn case_validation() {
        assert!(TheoremCase::new(TheoremId::T1_1, 1, 1, 2, Some(3), 5).is_ok());
        assert!(TheoremCase::new(TheoremId::T1_1, 2, 1, 3, Some(5), 5).is_err());
        assert!(TheoremCase::new(TheoremId::T1_1, 1, 1, 2, Some(2), 5).is_err());
        assert!(TheoremCase::new(TheoremId::T1_1, 1, 3, 2, Some(3), 5).is_err());
        assert!(TheoremCase::new(TheoremId::T1_1, 1, 5, 2, Some(5), 5).is_err());
        assert!(TheoremCase::new(TheoremId::T1_3, 2, 1, 3, Some(5), 5).is_ok());
        assert!(TheoremCase::new(TheoremId::T1_4, 6, 1, 5, None, 5).is_err());
        assert!(TheoremCase::new(TheoremId::T1_4, 2, 1, 3, Some(5), 5).is_err());
        assert!(TheoremCase::new(TheoremId::T1_5, 1, 1, 5, None, 5).is_err());
        assert!(TheoremCase::new(TheoremId::T1_5, 6, 1, 5, None, 5).is_ok());
        assert!(TheoremCase::new(TheoremId::T1_5, 6, 1, 5, None, 0).is_err());
    }

    #[test]
    fn two_prime_definite_identity_small_m() {
        let r = check_theorem_1_1(1, 2, 3, 1, 1..=6).unwrap();
        assert!(r.all_pass(), "{:?}", r.first_failure());
        assert_eq!(r.rows[0].lhs, int(-12));
    }

    #[test]
    fn two_prime_indefinite_identity() {
        let r = check_theorem_1_3(2, 3, 5, 1, 1..=40).unwrap();
        assert!(r.all_pass(), "{:?}", r.first_failure());
        // -(1/2)(-6) + (3/2)(-1) = 3/2
        assert_eq!(r.rows[0].lhs, rat(3, 2));
    }

    #[test]
    fn volume_identity() {
        assert!(volume_identity_sweep(1000).unwrap() > 50);
    }

    #[test]
    fn scale_enters_only_positive_m() {
        let h = Harness::default().with_indefinite_scale(int(2));
        assert_eq!(h.indefinite(6, 1, 0).unwrap(), int(1));
        assert_eq!(h.indefinite(6, 1, 1).unwrap(), int(-12));
    }

    // With r' doubled the cross-algebra identities close; see the README.
    #[test]
    fn cross_algebra_identities_at_scale_two() {
        let h = Harness::default().with_indefinite_scale(int(2));
        let cases: Vec<TheoremCase> = default_grid()
            .into_iter()
            .filter(|c| matches!(c.theorem, TheoremId::T1_4 | TheoremId::T1_5))
            .map(|mut c| {
                c.m_max = c.m_max.min(20);
                c
            })
            .collect();
        for r in h.check_all(&cases).unwrap() {
            assert!(r.all_pass(), "{:?}", r.first_failure().map(|f| f.m));
        }
    }

    #[test]
    fn empty_suite_warns() {
        let cfg = SuiteConfig { cases: vec![], ..SuiteConfig::default() };
        let out = run_suite(&cfg).unwrap();
        assert_eq!(out.warnings.len(), 1);
        assert_eq!(out.exit_code(), 0);
    }
}
