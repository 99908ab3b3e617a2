use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactnum::Rational;

use super::VerificationReport;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ReportFormat {
    #[default]
    Table,
    Json,
    Csv,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Table => "txt",
            ReportFormat::Json => "json",
            ReportFormat::Csv => "csv",
        }
    }
}

impl FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table" => Ok(ReportFormat::Table),
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            _ => Err(Error::Config(format!("format: expected table, json or csv, got {s:?}"))),
        }
    }
}

/// Always `num/den`, also for integers.
pub fn ratio_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

#[derive(Serialize)]
struct JsonRow {
    m: u64,
    lhs: String,
    rhs: String,
    pass: bool,
}

#[derive(Serialize)]
struct JsonCase {
    key: String,
    theorem: String,
    #[serde(rename = "D")]
    d: u64,
    #[serde(rename = "N")]
    n: u64,
    p: u64,
    q: Option<u64>,
    m_min: u64,
    m_max: u64,
}

#[derive(Serialize)]
struct JsonReport {
    case: JsonCase,
    rows: Vec<JsonRow>,
    all_pass: bool,
}

fn json_case(r: &VerificationReport) -> JsonCase {
    let c = &r.case;
    JsonCase {
        key: c.key(),
        theorem: c.theorem.to_string(),
        d: c.d,
        n: c.n,
        p: c.p,
        q: c.q,
        m_min: c.m_min,
        m_max: c.m_max,
    }
}

/// Case header and `(m, lhs, rhs, pass)` rows; no timing, so reruns are byte-identical.
pub fn render_report(r: &VerificationReport, format: ReportFormat) -> Result<String> {
    let cells: Vec<[String; 4]> = r
        .rows
        .iter()
        .map(|row| [row.m.to_string(), ratio_string(&row.lhs), ratio_string(&row.rhs), row.pass.to_string()])
        .collect();
    Ok(match format {
        ReportFormat::Csv => {
            let mut s = String::from("m,lhs,rhs,pass\n");
            for c in &cells {
                s.push_str(&c.join(","));
                s.push('\n');
            }
            s
        }
        ReportFormat::Json => {
            let rep = JsonReport {
                case: json_case(r),
                rows: r
                    .rows
                    .iter()
                    .map(|row| JsonRow { m: row.m, lhs: ratio_string(&row.lhs), rhs: ratio_string(&row.rhs), pass: row.pass })
                    .collect(),
                all_pass: r.all_pass(),
            };
            serde_json::to_string_pretty(&rep)? + "\n"
        }
        ReportFormat::Table => {
            let header = ["m".to_string(), "lhs".into(), "rhs".into(), "pass".into()];
            let mut width = [0usize; 4];
            for c in std::iter::once(&header).chain(&cells) {
                for (w, v) in width.iter_mut().zip(c) {
                    *w = (*w).max(v.len());
                }
            }
            let mut s = String::new();
            writeln!(s, "# {}", r.case).unwrap();
            for c in std::iter::once(&header).chain(&cells) {
                let line: Vec<String> = c.iter().zip(&width).map(|(v, w)| format!("{v:>w$}")).collect();
                writeln!(s, "{}", line.join("  ").trim_end()).unwrap();
            }
            let failed = r.rows.iter().filter(|x| !x.pass).count();
            writeln!(s, "# {} rows, {} failed", r.rows.len(), failed).unwrap();
            s
        }
    })
}

#[derive(Serialize)]
struct SummaryEntry {
    case: JsonCase,
    rows: usize,
    failed: usize,
    first_failure_m: Option<u64>,
}

#[derive(Serialize)]
struct Summary {
    cases: Vec<SummaryEntry>,
    all_pass: bool,
}

pub fn render_summary(reports: &[VerificationReport]) -> Result<String> {
    let summary = Summary {
        cases: reports
            .iter()
            .map(|r| SummaryEntry {
                case: json_case(r),
                rows: r.rows.len(),
                failed: r.rows.iter().filter(|x| !x.pass).count(),
                first_failure_m: r.first_failure().map(|x| x.m),
            })
            .collect(),
        all_pass: reports.iter().all(|r| r.all_pass()),
    };
    Ok(serde_json::to_string_pretty(&summary)? + "\n")
}
