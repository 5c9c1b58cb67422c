//! Moduli of regularity and consistency, step-schedule witnesses and rate
//! certificates.
//!
//! A [`Modulus`] is a symbolic monotone function `(0,∞) → (0,∞)`. Keeping
//! the representation symbolic lets convexity and monotonicity be checked
//! and lets certificates be serialised.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

mod certificate;
mod schedule;

pub use certificate::{
    assemble_rho, fast_bounds, recursion_bound_u, AlgorithmTag, ChiSpec, DivergenceSpec, FastCertificate,
    MetricRates, RateCertificate,
};
pub use schedule::{divergence_witness_theta, square_sum_bound, tail_rate_chi, Harmonic, StepSchedule, Transform};

/// Slack allowed in convexity and monotonicity checks.
pub const SHAPE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Modulus {
    /// `ε ↦ cε`
    Linear { c: f64 },
    /// `ε ↦ cε^p`
    Power { c: f64, p: f64 },
    /// Piecewise-linear through `(0,0)` and the breakpoints, extended past the
    /// last breakpoint with the last chord slope.
    Table { points: Vec<(f64, f64)> },
    Scaled { inner: Box<Modulus>, factor: f64 },
    Min { parts: Vec<Modulus> },
    Product { parts: Vec<Modulus> },
    /// `ε ↦ value`
    Constant { value: f64 },
}

impl Modulus {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64, what: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                domain(format!("{what} must be finite and > 0, got {v}"))
            }
        };
        match self {
            Modulus::Linear { c } => pos(*c, "linear coefficient"),
            Modulus::Power { c, p } => {
                pos(*c, "power coefficient")?;
                if !(*p >= 1.0) || !p.is_finite() {
                    return domain(format!("power exponent must be >= 1, got {p}"));
                }
                Ok(())
            }
            Modulus::Table { points } => {
                if points.is_empty() {
                    return domain("table modulus needs at least one breakpoint");
                }
                for (i, (e, v)) in points.iter().enumerate() {
                    pos(*e, "table breakpoint")?;
                    pos(*v, "table value")?;
                    if i > 0 {
                        let (pe, pv) = points[i - 1];
                        if !(*e > pe) {
                            return domain("table breakpoints must be strictly increasing");
                        }
                        if *v < pv {
                            return domain("table values must be nondecreasing");
                        }
                    }
                }
                Ok(())
            }
            Modulus::Scaled { inner, factor } => {
                pos(*factor, "scale factor")?;
                inner.validate()
            }
            Modulus::Min { parts } | Modulus::Product { parts } => {
                if parts.is_empty() {
                    return domain("composite modulus needs at least one part");
                }
                parts.iter().try_for_each(Modulus::validate)
            }
            Modulus::Constant { value } => pos(*value, "constant modulus"),
        }
    }

    /// Value at `eps > 0`.
    pub fn eval(&self, eps: f64) -> Result<f64> {
        if !(eps > 0.0) || eps.is_nan() {
            return domain(format!("modulus argument must be > 0, got {eps}"));
        }
        Ok(self.eval_unchecked(eps))
    }

    fn eval_unchecked(&self, eps: f64) -> f64 {
        match self {
            Modulus::Linear { c } => c * eps,
            Modulus::Power { c, p } => c * eps.powf(*p),
            Modulus::Table { points } => table_eval(points, eps),
            Modulus::Scaled { inner, factor } => factor * inner.eval_unchecked(eps),
            Modulus::Min { parts } => parts.iter().map(|m| m.eval_unchecked(eps)).fold(f64::INFINITY, f64::min),
            Modulus::Product { parts } => parts.iter().map(|m| m.eval_unchecked(eps)).product(),
            Modulus::Constant { value } => *value,
        }
    }

    /// Whether the represented function is known to be convex.
    pub fn is_convex(&self) -> bool {
        match self {
            Modulus::Linear { .. } | Modulus::Power { .. } => true,
            Modulus::Table { points } => {
                let s = slopes(points);
                s.windows(2).all(|w| w[1] - w[0] >= -SHAPE_TOL)
            }
            Modulus::Scaled { inner, .. } => inner.is_convex(),
            Modulus::Min { parts } => parts.len() == 1 && parts[0].is_convex(),
            Modulus::Product { parts } => parts.iter().all(Modulus::is_convex),
            Modulus::Constant { .. } => false,
        }
    }
}

/// Chord slopes of a table, starting with the chord from the origin.
fn slopes(points: &[(f64, f64)]) -> Vec<f64> {
    let mut prev = (0.0, 0.0);
    points
        .iter()
        .map(|&(e, v)| {
            let s = (v - prev.1) / (e - prev.0);
            prev = (e, v);
            s
        })
        .collect()
}

fn table_eval(points: &[(f64, f64)], eps: f64) -> f64 {
    let mut prev = (0.0, 0.0);
    for &(e, v) in points {
        if eps <= e {
            return prev.1 + (v - prev.1) * (eps - prev.0) / (e - prev.0);
        }
        prev = (e, v);
    }
    let s = *slopes(points).last().expect("non-empty table");
    prev.1 + s * (eps - prev.0)
}

/// Greatest convex minorant of a table modulus on its own breakpoint grid.
///
/// The table is extended past its last breakpoint with slope `s` (its last
/// chord slope), so every convex minorant has slopes at most `s`; the hull of
/// `{(0,0)} ∪ points` is followed until its slope would exceed `s`, after
/// which the envelope continues with slope `s`.
pub fn convex_envelope(m: &Modulus) -> Result<Modulus> {
    let Modulus::Table { points } = m else {
        return domain("convex_envelope applies to table moduli only");
    };
    m.validate()?;
    if points.windows(2).any(|w| !(w[1].1 > w[0].1)) {
        return domain("convex_envelope needs a strictly increasing table");
    }
    let s_in = *slopes(points).last().expect("non-empty");
    let mut all = vec![(0.0, 0.0)];
    all.extend_from_slice(points);
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for &p in &all {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut cut = hull.len() - 1;
    for i in 0..hull.len() - 1 {
        let slope = (hull[i + 1].1 - hull[i].1) / (hull[i + 1].0 - hull[i].0);
        if slope > s_in {
            cut = i;
            break;
        }
    }
    let eval = |e: f64| -> f64 {
        if e >= hull[cut].0 {
            return hull[cut].1 + s_in * (e - hull[cut].0);
        }
        let j = hull.partition_point(|h| h.0 < e).max(1);
        let (a, b) = (hull[j - 1], hull[j]);
        a.1 + (b.1 - a.1) * (e - a.0) / (b.0 - a.0)
    };
    let out: Vec<(f64, f64)> = points.iter().map(|&(e, v)| (e, eval(e).min(v))).collect();
    Ok(Modulus::Table { points: out })
}

/// A modulus certified as valid in mean, with the region bound it holds on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanModulus {
    pub modulus: Modulus,
    pub region_bound: Option<f64>,
}

/// Lifts a convex nondecreasing pointwise modulus to a modulus in mean.
pub fn pointwise_to_mean(tau: &Modulus, region_bound: Option<f64>) -> Result<MeanModulus> {
    tau.validate()?;
    if !tau.is_convex() {
        return Err(Error::Precondition(
            "modulus is not convex; apply convex_envelope first".into(),
        ));
    }
    Ok(MeanModulus { modulus: tau.clone(), region_bound })
}

/// Pointwise product `σ·τ`.
pub fn probabilistic_combine(sigma: &Modulus, tau: &Modulus) -> Modulus {
    match sigma {
        Modulus::Constant { value } if *value == 1.0 => tau.clone(),
        Modulus::Constant { value } => Modulus::Scaled { inner: Box::new(tau.clone()), factor: *value },
        _ => Modulus::Product { parts: vec![sigma.clone(), tau.clone()] },
    }
}
