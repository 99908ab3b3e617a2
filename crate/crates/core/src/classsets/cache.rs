use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::exactnum::{fmt_rational, parse_rational};
use crate::orders::{Lattice, OrderLattice};

use super::{compute_class_set, traversal_primes, IdealClassSet, RightIdeal};

/// Overrides the cache directory when set.
pub const CACHE_ENV_VAR: &str = "QUATMATCH_CACHE_DIR";

const HEADER: &str = "quatmatch-classset v1";

static WRITER: Mutex<()> = Mutex::new(());

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CacheStatus {
    Hit,
    Miss,
    /// An entry existed but failed validation and was rebuilt.
    Rebuilt,
}

/// Directory of class sets keyed by `(D, N)`; entries are validated on load.
#[derive(Clone, Debug)]
pub struct ClassSetCache {
    dir: PathBuf,
}

impl ClassSetCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        ClassSetCache { dir: dir.into() }
    }

    /// `QUATMATCH_CACHE_DIR` if set, else `fallback`.
    pub fn from_env_or(fallback: impl Into<PathBuf>) -> Self {
        match std::env::var_os(CACHE_ENV_VAR) {
            Some(d) if !d.is_empty() => Self::new(PathBuf::from(d)),
            _ => Self::new(fallback),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn entry_path(&self, d: u64, n: u64) -> PathBuf {
        self.dir.join(format!("classset_D{d}_N{n}.txt"))
    }

    pub fn get_or_compute(&self, o: &OrderLattice) -> Result<IdealClassSet> {
        Ok(self.get_or_compute_with_status(o)?.0)
    }

    pub fn get_or_compute_with_status(&self, o: &OrderLattice) -> Result<(IdealClassSet, CacheStatus)> {
        let d = o.algebra.discriminant;
        let n = o.level;
        let path = self.entry_path(d, n);
        let status = match fs::read_to_string(&path) {
            Ok(text) => match parse_entry(&text, o) {
                Ok(cs) => return Ok((cs, CacheStatus::Hit)),
                Err(_) => CacheStatus::Rebuilt,
            },
            Err(_) => CacheStatus::Miss,
        };
        let p = traversal_primes(d, n).next().unwrap();
        let cs = compute_class_set(o, p)?;
        self.store(&cs)?;
        Ok((cs, status))
    }

    /// Atomic write: temp file in the cache directory, then rename.
    pub fn store(&self, cs: &IdealClassSet) -> Result<()> {
        let _guard = WRITER.lock().unwrap_or_else(|e| e.into_inner());
        fs::create_dir_all(&self.dir)?;
        let path = self.entry_path(cs.discriminant(), cs.level());
        let tmp = self.dir.join(format!(
            ".classset_D{}_N{}.{}.tmp",
            cs.discriminant(),
            cs.level(),
            std::process::id()
        ));
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(render_entry(cs).as_bytes())?;
            f.sync_all()?;
        }
        fs::rename(&tmp, &path)?;
        Ok(())
    }
}

pub fn render_entry(cs: &IdealClassSet) -> String {
    let mut s = String::new();
    s.push_str(HEADER);
    s.push('\n');
    s.push_str(&format!("D {}\nN {}\n", cs.discriminant(), cs.level()));
    s.push_str(&format!("order {}\n", cs.order.to_canonical_string()));
    for (r, w) in cs.representatives.iter().zip(&cs.unit_weights) {
        s.push_str(&format!("class {} {} {}\n", fmt_rational(&r.norm), w, r.lattice.to_canonical_string()));
    }
    s.push_str(&format!("mass {}\n", fmt_rational(&cs.mass)));
    s
}

fn parse_entry(text: &str, o: &OrderLattice) -> Result<IdealClassSet> {
    let bad = |why: &str| Error::Cache(why.to_string());
    let mut lines = text.lines();
    if lines.next() != Some(HEADER) {
        return Err(bad("missing or unknown header"));
    }
    let mut representatives = Vec::new();
    let mut unit_weights = Vec::new();
    let mut mass = None;
    let mut order = None;
    let (mut d, mut n) = (None, None);
    for line in lines {
        let (key, rest) = line.split_once(' ').ok_or_else(|| bad("malformed line"))?;
        match key {
            "D" => d = rest.parse::<u64>().ok(),
            "N" => n = rest.parse::<u64>().ok(),
            "order" => order = Some(OrderLattice::from_canonical_string(rest)?),
            "class" => {
                let mut parts = rest.splitn(3, ' ');
                let norm = parts.next().and_then(parse_rational).ok_or_else(|| bad("bad norm"))?;
                let w: u64 = parts.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad("bad weight"))?;
                let lat = Lattice::from_canonical_string(parts.next().ok_or_else(|| bad("missing lattice"))?)?;
                representatives.push(RightIdeal { lattice: lat, norm });
                unit_weights.push(w);
            }
            "mass" => mass = parse_rational(rest),
            _ => return Err(bad("unknown key")),
        }
    }
    if d != Some(o.algebra.discriminant) || n != Some(o.level) || order.as_ref() != Some(o) {
        return Err(bad("entry does not match the requested order"));
    }
    let cs = IdealClassSet {
        order: o.clone(),
        representatives,
        unit_weights,
        mass: mass.ok_or_else(|| bad("missing mass"))?,
    };
    cs.validate()?;
    Ok(cs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classsets::standard_eichler_order;

    #[test]
    fn round_trip_and_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let cache = ClassSetCache::new(dir.path());
        let o = standard_eichler_order(2, 1).unwrap();
        let (a, s1) = cache.get_or_compute_with_status(&o).unwrap();
        assert_eq!(s1, CacheStatus::Miss);
        let (b, s2) = cache.get_or_compute_with_status(&o).unwrap();
        assert_eq!(s2, CacheStatus::Hit);
        assert_eq!(a, b);
        let path = cache.entry_path(2, 1);
        let text = fs::read_to_string(&path).unwrap().replace("class 1 12", "class 1 6");
        fs::write(&path, text).unwrap();
        let (c, s3) = cache.get_or_compute_with_status(&o).unwrap();
        assert_eq!(s3, CacheStatus::Rebuilt);
        assert_eq!(a, c);
    }
}
