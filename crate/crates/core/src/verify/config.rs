use std::path::PathBuf;

use num_traits::One;

use crate::error::{Error, Result};
use crate::exactnum::{parse_rational, Rational};

use super::{smallest_coprime_prime, ReportFormat, TheoremCase, TheoremId};

/// What to run and where to put the results.
#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub cases: Vec<TheoremCase>,
    pub cache_dir: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub format: ReportFormat,
    pub indefinite_scale: Rational,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            cases: default_grid(),
            cache_dir: None,
            out_dir: None,
            format: ReportFormat::Table,
            indefinite_scale: Rational::one(),
        }
    }
}

/// Key-value settings mirroring the command-line flags. Every field is optional.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConfigValues {
    /// `1.1`, `1.3`, `1.4`, `1.5` or `all`
    pub theorem: Option<String>,
    pub d: Option<u64>,
    pub n: Option<u64>,
    pub p: Option<u64>,
    pub q: Option<u64>,
    pub m_max: Option<u64>,
    pub cache_dir: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub format: Option<ReportFormat>,
    pub indefinite_scale: Option<Rational>,
}

impl ConfigValues {
    /// Fields set in `other` win.
    pub fn overridden_by(mut self, other: ConfigValues) -> ConfigValues {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(theorem, d, n, p, q, m_max, cache_dir, out_dir, format, indefinite_scale);
        self
    }
}

/// Parses `key = value` lines; `#` starts a comment. Keys are the long flag
/// names: `theorem`, `D`, `N`, `p`, `q`, `m-max`, `cache-dir`, `out-dir`,
/// `format`, `indefinite-scale`.
pub fn parse_config(text: &str) -> Result<ConfigValues> {
    let mut v = ConfigValues::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        let int = |what: &str| -> Result<u64> {
            value.parse::<u64>().map_err(|_| {
                Error::Config(format!("line {}: field `{what}`: expected a nonnegative integer, got {value:?}", lineno + 1))
            })
        };
        match key {
            "theorem" => v.theorem = Some(value.to_string()),
            "D" => v.d = Some(int("D")?),
            "N" => v.n = Some(int("N")?),
            "p" => v.p = Some(int("p")?),
            "q" => v.q = Some(int("q")?),
            "m-max" => v.m_max = Some(int("m-max")?),
            "cache-dir" => v.cache_dir = Some(PathBuf::from(value)),
            "out-dir" => v.out_dir = Some(PathBuf::from(value)),
            "format" => {
                v.format = Some(value.parse().map_err(|e: Error| Error::Config(format!("line {}: {e}", lineno + 1)))?)
            }
            "indefinite-scale" => {
                v.indefinite_scale = Some(parse_rational(value).ok_or_else(|| {
                    Error::Config(format!("line {}: field `indefinite-scale`: expected a rational, got {value:?}", lineno + 1))
                })?)
            }
            other => return Err(Error::Config(format!("line {}: unknown field `{other}`", lineno + 1))),
        }
    }
    Ok(v)
}

impl SuiteConfig {
    /// Cases from the settings: a single case when `D` is given, otherwise
    /// the default grid for the chosen identity (or all of them).
    pub fn from_values(v: &ConfigValues) -> Result<SuiteConfig> {
        let theorem = v.theorem.as_deref().unwrap_or("all");
        let cases = if theorem == "all" {
            if v.d.is_some() {
                return Err(Error::Config("field `D` needs a single theorem, not `all`".into()));
            }
            default_grid()
        } else {
            let id: TheoremId = theorem.parse()?;
            match v.d {
                Some(d) => {
                    let p = v.p.ok_or_else(|| Error::Config("field `p` is required with `D`".into()))?;
                    let n = v.n.unwrap_or(1);
                    let m_max = v.m_max.unwrap_or(default_m_max(id));
                    vec![TheoremCase::new(id, d, n, p, v.q, m_max).map_err(|e| Error::Config(e.to_string()))?]
                }
                None => default_grid().into_iter().filter(|c| c.theorem == id).collect(),
            }
        };
        let cases = match (v.m_max, v.d) {
            // a global m-max caps the grid
            (Some(m), None) => cases
                .into_iter()
                .map(|mut c| {
                    c.m_max = m;
                    c
                })
                .collect(),
            _ => cases,
        };
        for c in &cases {
            c.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        let scale = v.indefinite_scale.clone().unwrap_or_else(Rational::one);
        if scale == Rational::from_integer(0.into()) {
            return Err(Error::Config("field `indefinite-scale` must be nonzero".into()));
        }
        Ok(SuiteConfig {
            cases,
            cache_dir: v.cache_dir.clone(),
            out_dir: v.out_dir.clone(),
            format: v.format.unwrap_or_default(),
            indefinite_scale: scale,
        })
    }
}

fn default_m_max(id: TheoremId) -> u64 {
    match id {
        TheoremId::T1_1 | TheoremId::T1_4 => 50,
        TheoremId::T1_3 => 100,
        TheoremId::T1_5 => 30,
    }
}

/// `D in {2, 3, 5}`, `{p, q}` from `{2, 3, 5, 7}` avoiding `D`,
/// `N in {1, smallest prime coprime to Dpq}`.
pub fn theorem_1_3_grid(m_max: u64) -> Vec<TheoremCase> {
    let mut out = Vec::new();
    for d in [2u64, 3, 5] {
        let primes: Vec<u64> = [2u64, 3, 5, 7].into_iter().filter(|&x| x != d).collect();
        for (i, &p) in primes.iter().enumerate() {
            for &q in &primes[i + 1..] {
                for n in [1, smallest_coprime_prime(d * p * q)] {
                    out.push(TheoremCase { theorem: TheoremId::T1_3, d, n, p, q: Some(q), m_min: 1, m_max });
                }
            }
        }
    }
    out
}

/// The acceptance grid.
pub fn default_grid() -> Vec<TheoremCase> {
    let mut cases = vec![TheoremCase {
        theorem: TheoremId::T1_1,
        d: 1,
        n: 1,
        p: 2,
        q: Some(3),
        m_min: 1,
        m_max: default_m_max(TheoremId::T1_1),
    }];
    cases.extend(theorem_1_3_grid(default_m_max(TheoremId::T1_3)));
    for (d, p) in [(2, 3), (3, 2)] {
        cases.push(TheoremCase { theorem: TheoremId::T1_4, d, n: 1, p, q: None, m_min: 1, m_max: default_m_max(TheoremId::T1_4) });
    }
    cases.push(TheoremCase { theorem: TheoremId::T1_5, d: 6, n: 1, p: 5, q: None, m_min: 1, m_max: default_m_max(TheoremId::T1_5) });
    cases
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_override() {
        let v = parse_config("# comment\ntheorem = 1.4\nD = 2\np = 3  # inline\nm-max = 7\nformat = csv\nindefinite-scale = 2\n")
            .unwrap();
        assert_eq!(v.d, Some(2));
        assert_eq!(v.format, Some(ReportFormat::Csv));
        let cli = ConfigValues { m_max: Some(3), ..Default::default() };
        let merged = v.overridden_by(cli);
        let cfg = SuiteConfig::from_values(&merged).unwrap();
        assert_eq!(cfg.cases.len(), 1);
        assert_eq!(cfg.cases[0].m_max, 3);
        assert_eq!(cfg.indefinite_scale, Rational::from_integer(2.into()));
    }

    #[test]
    fn errors_name_the_field() {
        let e = parse_config("m-max = ten").unwrap_err().to_string();
        assert!(e.contains("m-max"), "{e}");
        let e = parse_config("colour = red").unwrap_err().to_string();
        assert!(e.contains("colour"), "{e}");
        let e = parse_config("format = xml").unwrap_err().to_string();
        assert!(e.contains("format"), "{e}");
        let v = ConfigValues { theorem: Some("1.4".into()), d: Some(2), ..Default::default() };
        assert!(SuiteConfig::from_values(&v).unwrap_err().to_string().contains("`p`"));
    }

    #[test]
    fn grid_shape() {
        let g = theorem_1_3_grid(100);
        // three pairs from the three allowed primes, two levels each
        assert_eq!(g.len(), 3 * 3 * 2);
        assert!(g.iter().all(|c| c.validate().is_ok()));
        assert!(default_grid().iter().all(|c| c.validate().is_ok()));
    }
}
