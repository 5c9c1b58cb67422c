use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{AuditReport, AuditStatus, EnsembleStats};
use crate::error::{Error, Result};

pub const CURVES_FILE: &str = "curves.csv";
pub const AUDIT_FILE: &str = "audit.json";
pub const META_FILE: &str = "meta.json";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Meta {
    paths: u64,
    horizon: u64,
    seed: u64,
    epsilons: Vec<f64>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.to_path_buf(), source }
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(io_err(path))
}

/// Columns: `n, mean_dist, mean_sq_dist, mean_gap, tail_eps_<ε>…`, then the
/// second moments and pointwise tails used for standard errors.
pub fn curves_csv(stats: &EnsembleStats) -> String {
    let mut out = String::from("n,mean_dist,mean_sq_dist,mean_gap");
    for e in &stats.epsilons {
        let _ = write!(out, ",tail_eps_{e}");
    }
    out.push_str(",mean_quartic_dist,mean_sq_gap");
    for e in &stats.epsilons {
        let _ = write!(out, ",point_tail_eps_{e}");
    }
    out.push('\n');
    for n in 0..=stats.horizon as usize {
        let _ = write!(
            out,
            "{n},{:.16e},{:.16e},{:.16e}",
            stats.mean_dist[n], stats.mean_sq_dist[n], stats.mean_gap[n]
        );
        for t in &stats.tail {
            let _ = write!(out, ",{:.16e}", t[n]);
        }
        let _ = write!(out, ",{:.16e},{:.16e}", stats.mean_quartic_dist[n], stats.mean_sq_gap[n]);
        for t in &stats.point_tail {
            let _ = write!(out, ",{:.16e}", t[n]);
        }
        out.push('\n');
    }
    out
}

/// Writes `curves.csv`, `meta.json` and, when given, `audit.json` into `dir`.
pub fn export_results(stats: &EnsembleStats, report: Option<&AuditReport>, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    write(&dir.join(CURVES_FILE), &curves_csv(stats))?;
    let meta = Meta { paths: stats.paths, horizon: stats.horizon, seed: stats.seed, epsilons: stats.epsilons.clone() };
    write(&dir.join(META_FILE), &(serde_json::to_string_pretty(&meta)? + "\n"))?;
    if let Some(r) = report {
        write(&dir.join(AUDIT_FILE), &(serde_json::to_string_pretty(r)? + "\n"))?;
    }
    Ok(())
}

fn bad(path: &Path, msg: impl std::fmt::Display) -> Error {
    Error::Invalid(format!("{}: {msg}", path.display()))
}

/// Parses a `curves.csv` written by [`export_results`], with its sibling
/// `meta.json`.
pub fn read_curves(csv: &Path) -> Result<EnsembleStats> {
    let meta_path: PathBuf = csv.with_file_name(META_FILE);
    let meta_text = fs::read_to_string(&meta_path).map_err(io_err(&meta_path))?;
    let meta: Meta = serde_json::from_str(&meta_text).map_err(|e| bad(&meta_path, e))?;
    let text = fs::read_to_string(csv).map_err(io_err(csv))?;
    let mut lines = text.lines();
    let k = meta.epsilons.len();
    let mut expected = String::from("n,mean_dist,mean_sq_dist,mean_gap");
    for e in &meta.epsilons {
        let _ = write!(expected, ",tail_eps_{e}");
    }
    expected.push_str(",mean_quartic_dist,mean_sq_gap");
    for e in &meta.epsilons {
        let _ = write!(expected, ",point_tail_eps_{e}");
    }
    if lines.next() != Some(expected.as_str()) {
        return Err(bad(csv, "unexpected header"));
    }
    let len = meta.horizon as usize + 1;
    let mut stats = EnsembleStats {
        paths: meta.paths,
        horizon: meta.horizon,
        seed: meta.seed,
        epsilons: meta.epsilons.clone(),
        mean_dist: Vec::with_capacity(len),
        mean_sq_dist: Vec::with_capacity(len),
        mean_gap: Vec::with_capacity(len),
        mean_quartic_dist: Vec::with_capacity(len),
        mean_sq_gap: Vec::with_capacity(len),
        tail: vec![Vec::with_capacity(len); k],
        point_tail: vec![Vec::with_capacity(len); k],
    };
    for (row, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 + 2 * k {
            return Err(bad(csv, format!("row {} has {} fields", row + 1, fields.len())));
        }
        if fields[0].parse::<usize>().ok() != Some(row) {
            return Err(bad(csv, format!("row {} has index {:?}", row + 1, fields[0])));
        }
        let mut vals = Vec::with_capacity(fields.len() - 1);
        for f in &fields[1..] {
            vals.push(f.parse::<f64>().map_err(|e| bad(csv, format!("row {}: {e}", row + 1)))?);
        }
        stats.mean_dist.push(vals[0]);
        stats.mean_sq_dist.push(vals[1]);
        stats.mean_gap.push(vals[2]);
        for j in 0..k {
            stats.tail[j].push(vals[3 + j]);
        }
        stats.mean_quartic_dist.push(vals[3 + k]);
        stats.mean_sq_gap.push(vals[4 + k]);
        for j in 0..k {
            stats.point_tail[j].push(vals[5 + k + j]);
        }
    }
    if stats.mean_dist.len() != len {
        return Err(bad(csv, format!("expected {len} rows, found {}", stats.mean_dist.len())));
    }
    Ok(stats)
}

pub fn read_audit(path: &Path) -> Result<AuditReport> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| bad(path, e))
}

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "-".to_string(), |x| x.to_string())
}

/// Plain-text report setting predicted indices against the observed curves.
pub fn render_report(report: &AuditReport, stats: &EnsembleStats) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "fejerlab audit report");
    let _ = writeln!(
        s,
        "algorithm {} | paths {} | horizon {} | seed {} | lambda {}",
        report.algorithm, report.paths, report.horizon, report.seed, report.lambda
    );
    let last = stats.horizon as usize;
    let _ = writeln!(
        s,
        "final mean distance {:.6e} | final mean gap {:.6e}",
        stats.mean_dist[last], stats.mean_gap[last]
    );
    for r in &report.records {
        let _ = writeln!(s);
        let _ = writeln!(s, "[{}] {}", status_word(r.status), r.kind.label());
        let _ = writeln!(
            s,
            "  epsilon {} | predicted index {} | observed {} | bound {}",
            opt(r.epsilon),
            opt(r.predicted_index),
            opt(r.observed_value_at_index.map(|v| format!("{v:.6e}"))),
            opt(r.bound.map(|v| format!("{v:.6e}")))
        );
        if let Some(n) = r.predicted_index.filter(|&n| n <= stats.horizon) {
            let _ = writeln!(
                s,
                "  curve at index: mean_dist {:.6e}, mean_gap {:.6e}",
                stats.mean_dist[n as usize], stats.mean_gap[n as usize]
            );
        }
        let _ = writeln!(s, "  {}", r.note);
    }
    if !report.records.is_empty() && !report.caveats.is_empty() {
        let _ = writeln!(s);
        let _ = writeln!(s, "caveats:");
        for c in &report.caveats {
            let _ = writeln!(s, "  - {c}");
        }
    }
    s
}

fn status_word(s: AuditStatus) -> &'static str {
    match s {
        AuditStatus::Pass => "PASS",
        AuditStatus::Fail => "FAIL",
        AuditStatus::Unchecked => "UNCHECKED",
    }
}
