use serde::{Deserialize, Serialize};

use super::EnsembleStats;
use crate::error::Result;
use crate::moduli::{AlgorithmTag, FastCertificate, RateCertificate};

pub const TRUNCATION_CAVEAT: &str =
    "almost-sure events are observed only up to the horizon; the infinite tail is not sampled";

const LARGE_INDEX_CAVEAT: &str = "full rate indices for small epsilon are astronomically large; they are \
certified only through the geometry, recursion-bound, one-step inequality and regularity checks";

/// Standard errors allowed before a bound counts as violated.
pub const SIGMA_RULE: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordKind {
    /// `E[d(x_n, x)] < ε` from the mean rate at `θ(ε/2)`.
    Mean,
    /// `E[dist(x_n)] < ε` from the mean rate at `θ(ε)`.
    DistMean,
    /// `P(∃n ≥ N: d(x_n, x) ≥ ε) < λ` from the rate at `λθ(ε/2)`.
    AlmostSure,
    /// `P(∃n ≥ N: dist(x_n) ≥ ε) < λ` from the rate at `λθ(ε)`.
    DistAlmostSure,
    Liminf,
    FastMean,
    FastTail,
}

impl RecordKind {
    pub fn label(self) -> &'static str {
        match self {
            RecordKind::Mean => "mean rate (limit form)",
            RecordKind::DistMean => "mean rate (distance form)",
            RecordKind::AlmostSure => "almost-sure rate (limit form)",
            RecordKind::DistAlmostSure => "almost-sure rate (distance form)",
            RecordKind::Liminf => "liminf bound in mean",
            RecordKind::FastMean => "fast mean envelope",
            RecordKind::FastTail => "fast tail bound",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditStatus {
    Pass,
    Fail,
    Unchecked,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditRecord {
    pub epsilon: Option<f64>,
    pub kind: RecordKind,
    pub predicted_index: Option<u64>,
    pub observed_value_at_index: Option<f64>,
    pub bound: Option<f64>,
    pub bound_satisfied: Option<bool>,
    pub mc_margin: Option<f64>,
    pub status: AuditStatus,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditReport {
    pub algorithm: AlgorithmTag,
    pub paths: u64,
    pub horizon: u64,
    pub seed: u64,
    pub lambda: f64,
    pub records: Vec<AuditRecord>,
    pub caveats: Vec<String>,
    pub certificate: Option<RateCertificate>,
    pub fast_certificate: Option<FastCertificate>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.status != AuditStatus::Fail)
    }
}

fn unchecked(eps: f64, kind: RecordKind, index: u64, horizon: u64) -> AuditRecord {
    AuditRecord {
        epsilon: Some(eps),
        kind,
        predicted_index: Some(index),
        observed_value_at_index: None,
        bound: None,
        bound_satisfied: None,
        mc_margin: None,
        status: AuditStatus::Unchecked,
        note: if index == u64::MAX {
            format!("unchecked: index saturated at u64::MAX, beyond horizon {horizon}")
        } else {
            format!("unchecked: index beyond horizon {horizon}")
        },
    }
}

fn status(ok: bool) -> AuditStatus {
    if ok {
        AuditStatus::Pass
    } else {
        AuditStatus::Fail
    }
}

fn mean_record(stats: &EnsembleStats, eps: f64, kind: RecordKind, index: u64) -> AuditRecord {
    if index > stats.horizon {
        return unchecked(eps, kind, index, stats.horizon);
    }
    let mut worst: Option<(u64, f64)> = None;
    for n in index..=stats.horizon {
        let i = n as usize;
        let excess = stats.mean_dist[i] - (eps + SIGMA_RULE * stats.stderr_dist(i));
        if excess >= 0.0 && worst.is_none_or(|w| excess > w.1) {
            worst = Some((n, excess));
        }
    }
    let i = index as usize;
    let note = match worst {
        None => format!("mean distance below bound at every n in [{index}, {}]", stats.horizon),
        Some((n, e)) => format!("bound exceeded by {e:.3e} at n = {n}"),
    };
    AuditRecord {
        epsilon: Some(eps),
        kind,
        predicted_index: Some(index),
        observed_value_at_index: Some(stats.mean_dist[i]),
        bound: Some(eps),
        bound_satisfied: Some(worst.is_none()),
        mc_margin: Some(SIGMA_RULE * stats.stderr_dist(i)),
        status: status(worst.is_none()),
        note,
    }
}

fn as_record(stats: &EnsembleStats, eps: f64, lam: f64, kind: RecordKind, index: u64) -> Result<AuditRecord> {
    if index > stats.horizon {
        let mut r = unchecked(eps, kind, index, stats.horizon);
        r.note = format!("{}; {TRUNCATION_CAVEAT}", r.note);
        return Ok(r);
    }
    let freq = stats.tail_probability(index, eps)?;
    let margin = SIGMA_RULE * stats.binomial_sigma(lam);
    let ok = freq <= lam + margin;
    Ok(AuditRecord {
        epsilon: Some(eps),
        kind,
        predicted_index: Some(index),
        observed_value_at_index: Some(freq),
        bound: Some(lam),
        bound_satisfied: Some(ok),
        mc_margin: Some(margin),
        status: status(ok),
        note: format!("tail frequency over [{index}, {}]; {TRUNCATION_CAVEAT}", stats.horizon),
    })
}

/// Audits the four metric rates of `cert` at each `ε`.
pub fn certificate_audit(stats: &EnsembleStats, cert: &RateCertificate, epsilons: &[f64], lam: f64) -> Result<AuditReport> {
    let mut records = Vec::new();
    for &eps in epsilons {
        let r = cert.metric_rates(eps, lam)?;
        records.push(mean_record(stats, eps, RecordKind::Mean, r.n_mean));
        records.push(mean_record(stats, eps, RecordKind::DistMean, r.n_dist_mean));
        records.push(as_record(stats, eps, lam, RecordKind::AlmostSure, r.n_as)?);
        records.push(as_record(stats, eps, lam, RecordKind::DistAlmostSure, r.n_dist_as)?);
    }
    let mut caveats = vec![TRUNCATION_CAVEAT.to_string()];
    if cert.algorithm != AlgorithmTag::Skm {
        caveats.push(LARGE_INDEX_CAVEAT.to_string());
    }
    Ok(AuditReport {
        algorithm: cert.algorithm,
        paths: stats.paths,
        horizon: stats.horizon,
        seed: stats.seed,
        lambda: lam,
        records,
        caveats,
        certificate: Some(cert.clone()),
        fast_certificate: None,
    })
}

/// Looks for an iterate with mean gap below `eps` inside the liminf window.
pub fn liminf_audit(stats: &EnsembleStats, cert: &RateCertificate, eps: f64, start: u64) -> Result<AuditRecord> {
    let bound = cert.liminf_bound(eps, start)?;
    let witness = super::liminf_witness_check(stats, eps, start, bound);
    let (status, note) = match witness {
        Some(n) => (AuditStatus::Pass, format!("witness n = {n} in window [{start}, {bound}]")),
        None if bound <= stats.horizon => (AuditStatus::Fail, format!("no witness in window [{start}, {bound}]")),
        None => (AuditStatus::Unchecked, format!("no witness up to horizon {}; window ends at {bound}", stats.horizon)),
    };
    Ok(AuditRecord {
        epsilon: Some(eps),
        kind: RecordKind::Liminf,
        predicted_index: Some(bound),
        observed_value_at_index: witness.map(|n| stats.mean_gap[n as usize]),
        bound: Some(eps),
        bound_satisfied: witness.map(|_| true),
        mc_margin: None,
        status,
        note,
    })
}

/// Number of evenly spaced indices at which the fast tail bound is checked.
pub const FAST_TAIL_POINTS: u64 = 5;

/// Audits `E[dist²(x_n)] ≤ u/(n+r)` at every `n` and the tail bound
/// `P(dist(x_n) ≥ ε) ≤ K(u+2d)/(ε²(n+r))` at evenly spaced indices.
pub fn fast_audit(stats: &EnsembleStats, cert: &FastCertificate, epsilons: &[f64]) -> Result<Vec<AuditRecord>> {
    let mut worst: Option<(u64, f64)> = None;
    for n in 0..=stats.horizon {
        let i = n as usize;
        let env = cert.bounds(n, 1.0).0;
        let excess = stats.mean_sq_dist[i] - env - SIGMA_RULE * stats.stderr_sq_dist(i);
        if excess > 0.0 && worst.is_none_or(|w| excess > w.1) {
            worst = Some((n, excess));
        }
    }
    let mut out = vec![AuditRecord {
        epsilon: None,
        kind: RecordKind::FastMean,
        predicted_index: None,
        observed_value_at_index: Some(stats.mean_sq_dist[stats.horizon as usize]),
        bound: Some(cert.bounds(stats.horizon, 1.0).0),
        bound_satisfied: Some(worst.is_none()),
        mc_margin: Some(SIGMA_RULE * stats.stderr_sq_dist(stats.horizon as usize)),
        status: status(worst.is_none()),
        note: match worst {
            None => format!("mean squared distance within u/(n+r) for all n <= {}", stats.horizon),
            Some((n, e)) => format!("envelope exceeded by {e:.3e} at n = {n}"),
        },
    }];
    for &eps in epsilons {
        let mut ok = true;
        let mut parts = Vec::new();
        let mut last = (0.0, 0.0, 0.0);
        for k in 0..FAST_TAIL_POINTS {
            let n = stats.horizon * k / (FAST_TAIL_POINTS - 1);
            let freq = stats.point_tail_probability(n, eps)?;
            let b = cert.bounds(n, eps * eps).1;
            let margin = SIGMA_RULE * (b * (1.0 - b) / stats.paths as f64).sqrt();
            ok &= freq <= b + margin;
            parts.push(format!("n={n}: {freq:.4} <= {b:.4}"));
            last = (freq, b, margin);
        }
        out.push(AuditRecord {
            epsilon: Some(eps),
            kind: RecordKind::FastTail,
            predicted_index: None,
            observed_value_at_index: Some(last.0),
            bound: Some(last.1),
            bound_satisfied: Some(ok),
            mc_margin: Some(last.2),
            status: status(ok),
            note: parts.join(", "),
        });
    }
    Ok(out)
}
