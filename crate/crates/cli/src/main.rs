use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use quatmatch_core::classsets::{ideal_class_set, standard_eichler_order, ClassSetCache, CACHE_ENV_VAR};
use quatmatch_core::exactnum::{fmt_rational, parse_rational, Rational};
use quatmatch_core::heckedeg::{self, LocalPattern};
use quatmatch_core::quatalg::LocalRamifiedModel;
use quatmatch_core::verify::{parse_config, render_report, run_suite, ConfigValues, SuiteConfig};
use quatmatch_core::weilmatch::{
    lambda_section, lattice_matchings, match_coefficients, section_match_coefficients, verify_basis_lemma,
    verify_prop_3_1, InvarianceLevel, LocalQuadSpace,
};

#[derive(Parser)]
#[command(name = "quatmatch", version, about = "Exact checks of matching identities between definite and indefinite quaternion algebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check identities over a range of m and write reports
    Verify(VerifyArgs),
    /// Right ideal classes, unit weights and mass of a definite Eichler order
    Classset {
        #[arg(long = "D")]
        d: u64,
        #[arg(long = "N", default_value_t = 1)]
        n: u64,
        #[arg(long)]
        cache_dir: Option<PathBuf>,
    },
    /// Local λ-values and matching coefficients at a prime
    Local {
        #[arg(long)]
        p: u64,
    },
    /// deg T(m), the volume and r'(m) on an indefinite algebra
    Degree {
        #[arg(long = "D")]
        d: u64,
        #[arg(long = "N", default_value_t = 1)]
        n: u64,
        #[arg(long)]
        m: u64,
    },
    /// Certify a local degree rule against the finite orbit count
    Oracle {
        /// split, level or ramified
        #[arg(long)]
        pattern: LocalPattern,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        k: u32,
    },
}

#[derive(Args)]
struct VerifyArgs {
    /// 1.1, 1.3, 1.4, 1.5 or all
    #[arg(long)]
    theorem: Option<String>,
    #[arg(long = "D")]
    d: Option<u64>,
    #[arg(long = "N")]
    n: Option<u64>,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    q: Option<u64>,
    #[arg(long)]
    m_max: Option<u64>,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Directory for per-case reports and summary.json
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// table, json or csv
    #[arg(long)]
    format: Option<String>,
    /// Factor applied to r'(m) for m >= 1
    #[arg(long)]
    indefinite_scale: Option<String>,
    /// key = value file with the same fields; flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
}

impl VerifyArgs {
    fn values(&self) -> Result<ConfigValues> {
        let scale = match &self.indefinite_scale {
            Some(s) => Some(parse_rational(s).with_context(|| format!("--indefinite-scale: not a rational: {s:?}"))?),
            None => None,
        };
        Ok(ConfigValues {
            theorem: self.theorem.clone(),
            d: self.d,
            n: self.n,
            p: self.p,
            q: self.q,
            m_max: self.m_max,
            cache_dir: self.cache_dir.clone(),
            out_dir: self.out_dir.clone(),
            format: self.format.as_deref().map(str::parse).transpose()?,
            indefinite_scale: scale,
        })
    }
}

fn verify(args: &VerifyArgs) -> Result<ExitCode> {
    let mut values = ConfigValues::default();
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        values = parse_config(&text).with_context(|| format!("in {}", path.display()))?;
    }
    let mut values = values.overridden_by(args.values()?);
    if values.cache_dir.is_none() {
        values.cache_dir = std::env::var_os(CACHE_ENV_VAR).filter(|v| !v.is_empty()).map(PathBuf::from);
    }
    let config = SuiteConfig::from_values(&values)?;
    let outcome = run_suite(&config)?;
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    for r in &outcome.reports {
        if config.out_dir.is_none() {
            print!("{}", render_report(r, config.format)?);
        }
        let cache: Vec<String> = r.cache_provenance.iter().map(|((d, n), s)| format!("({d},{n}):{s:?}")).collect();
        eprintln!(
            "{}: {} ({} rows, {:.2?}) {}",
            r.case.key(),
            if r.all_pass() { "pass" } else { "FAIL" },
            r.rows.len(),
            r.elapsed,
            cache.join(" ")
        );
        if let Some(f) = r.first_failure() {
            eprintln!("  first failing row: m = {}, lhs = {}, rhs = {}", f.m, fmt_rational(&f.lhs), fmt_rational(&f.rhs));
        }
    }
    for path in &outcome.written {
        eprintln!("wrote {}", path.display());
    }
    Ok(ExitCode::from(outcome.exit_code() as u8))
}

fn classset(d: u64, n: u64, cache_dir: Option<PathBuf>) -> Result<()> {
    let o = standard_eichler_order(d, n)?;
    let cache = match cache_dir {
        Some(dir) => Some(ClassSetCache::new(dir)),
        None => std::env::var_os(CACHE_ENV_VAR).filter(|v| !v.is_empty()).map(ClassSetCache::new),
    };
    let cs = ideal_class_set(&o, cache.as_ref())?;
    println!("algebra ({}, {}) discriminant {} level {}", o.algebra.a, o.algebra.b, d, n);
    println!("order {}", o.lattice);
    println!("class number {}", cs.class_number());
    for (i, (r, w)) in cs.representatives.iter().zip(&cs.unit_weights).enumerate() {
        println!("class {i}: norm {} weight {} lattice {}", fmt_rational(&r.norm), w, r.lattice);
    }
    println!("mass {} (sum of 1/w: {})", fmt_rational(&cs.mass), fmt_rational(&cs.weight_sum()));
    Ok(())
}

fn local(p: u64) -> Result<()> {
    let model = LocalRamifiedModel::new(p);
    println!("p = {p}, unramified model u^2 - {} u + {} = 0", model.t, model.n);
    let names = ["char(L^ra) vs (-2 phi_0 + (p+1) phi_1)/(p-1)", "char(L^ra#) vs (2p phi_0 - (p+1) phi_2)/(p-1)"];
    for ((ra, sp, level), name) in lattice_matchings(p)?.iter().zip(names) {
        println!("{name}  [{level:?}]");
        let a = lambda_section(ra, *level)?;
        let b = lambda_section(sp, *level)?;
        for ((g, x), y) in a.values.iter().zip(b.values.values()) {
            println!("  {g:<8} {x:<20} {y}");
        }
    }
    println!("lattice matchings hold: {}", verify_prop_3_1(p)?);
    println!("basis lemma holds: {}", verify_basis_lemma(p)?);
    let sp = LocalQuadSpace::split(p)?;
    println!("split coset values λ(φ_(1,j))(w n(i)), rows i:");
    for i in 0..p as i64 {
        let row: Vec<String> = (0..p as i64)
            .map(|j| {
                let sec = lambda_section(&sp.char_coset(1, j), InvarianceLevel::K).unwrap();
                sec.values[&quatmatch_core::weilmatch::CosetRep::WN(i)].to_string()
            })
            .collect();
        println!("  i={i}: {}", row.join(", "));
    }
    println!("coset matchings (k, l): d, stated-system coefficients | from computed sections");
    for k in 0..p as i64 {
        for l in 0..p as i64 {
            if (k, l) == (0, 0) {
                continue;
            }
            let lit = match_coefficients(p, k, l, &model)?;
            let sec = section_match_coefficients(p, k, l, &model)?;
            println!(
                "  ({k},{l}): d={} [{}] | b={} [{}]",
                model.norm_mod_p(k as u64, l as u64),
                join(&lit),
                fmt_rational(&sec.b),
                join(&sec.c)
            );
        }
    }
    Ok(())
}

fn join(v: &[Rational]) -> String {
    v.iter().map(fmt_rational).collect::<Vec<_>>().join(", ")
}

fn degree(d: u64, n: u64, m: u64) -> Result<()> {
    if m == 0 {
        bail!("--m must be positive");
    }
    println!("deg T({m}) = {}", heckedeg::deg_t(d, n, m)?);
    println!("vol = {}", fmt_rational(&heckedeg::volume(d, n)?));
    println!("r'({m}) = {}", fmt_rational(&heckedeg::r_prime(d, n, m)?));
    Ok(())
}

fn oracle(pattern: LocalPattern, p: u64, k: u32) -> Result<()> {
    let closed = heckedeg::local_degree(pattern, p, k);
    for m in [k + 2, k + 3] {
        let route = if heckedeg::explicit_feasible(p, m) { "explicit" } else { "counted" };
        println!("M = {m}: {} orbits ({route})", heckedeg::oracle_local_orbits(pattern, p, k, m)?);
    }
    let stable = heckedeg::stable_local_orbits(pattern, p, k)?;
    println!("closed form {closed}, oracle {stable}: {}", if closed == stable { "agree" } else { "DISAGREE" });
    if closed != stable {
        bail!("closed form disagrees with the orbit count");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify(args) => verify(&args),
        Command::Classset { d, n, cache_dir } => classset(d, n, cache_dir).map(|_| ExitCode::SUCCESS),
        Command::Local { p } => local(p).map(|_| ExitCode::SUCCESS),
        Command::Degree { d, n, m } => degree(d, n, m).map(|_| ExitCode::SUCCESS),
        Command::Oracle { pattern, p, k } => oracle(pattern, p, k).map(|_| ExitCode::SUCCESS),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
