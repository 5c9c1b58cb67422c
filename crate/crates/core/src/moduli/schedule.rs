use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// `λ_n = a/(n+shift)`
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Harmonic {
    pub a: f64,
    pub shift: f64,
}

impl Harmonic {
    fn value(&self, n: u64) -> f64 {
        self.a / (n as f64 + self.shift)
    }
}

/// Deterministic step-size sequence indexed from `n = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StepSchedule {
    Harmonic { a: f64, shift: f64 },
    Constant { value: f64 },
    /// Explicit leading values, then the harmonic tail at the absolute index.
    Table { values: Vec<f64>, tail: Harmonic },
    /// Smaller root of `λ(1−λ) = vc/(n+r)`.
    Tailored { vc: f64, r: f64 },
}

/// Series transform applied before summing a schedule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    Identity,
    MeanLambdaOneMinusLambda,
}

impl Transform {
    fn apply(self, v: f64) -> f64 {
        match self {
            Transform::Identity => v,
            Transform::MeanLambdaOneMinusLambda => v * (1.0 - v),
        }
    }
}

const DIRECT_LIMIT: u64 = 10_000_000;

impl StepSchedule {
    pub fn validate(&self) -> Result<()> {
        let harmonic = |h: &Harmonic| {
            if !(h.a > 0.0) || !h.a.is_finite() || !(h.shift >= 1.0) || !h.shift.is_finite() {
                return domain(format!("harmonic schedule needs a > 0 and shift >= 1, got {h:?}"));
            }
            Ok(())
        };
        match self {
            StepSchedule::Harmonic { a, shift } => harmonic(&Harmonic { a: *a, shift: *shift }),
            StepSchedule::Constant { value } => {
                if !(*value > 0.0 && *value <= 1.0) {
                    return domain(format!("constant schedule value must lie in (0,1], got {value}"));
                }
                Ok(())
            }
            StepSchedule::Table { values, tail } => {
                harmonic(tail)?;
                if values.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
                    return domain("table schedule values must be finite and > 0");
                }
                Ok(())
            }
            StepSchedule::Tailored { vc, r } => {
                if !(*vc > 0.0) || !(*r >= 1.0) || !r.is_finite() {
                    return domain("tailored schedule needs vc > 0 and r >= 1");
                }
                if 4.0 * vc > *r {
                    return domain(format!("tailored schedule infeasible: vc = {vc} > r/4 = {}", r / 4.0));
                }
                Ok(())
            }
        }
    }

    pub fn value(&self, n: u64) -> f64 {
        match self {
            StepSchedule::Harmonic { a, shift } => a / (n as f64 + shift),
            StepSchedule::Constant { value } => *value,
            StepSchedule::Table { values, tail } => match values.get(n as usize) {
                Some(v) => *v,
                None => tail.value(n),
            },
            StepSchedule::Tailored { vc, r } => {
                let q = vc / (n as f64 + r);
                2.0 * q / (1.0 + (1.0 - 4.0 * q).max(0.0).sqrt())
            }
        }
    }

    /// Checks every value lies in `(0, 1]`.
    pub fn check_unit_interval(&self) -> Result<()> {
        let bad = match self {
            StepSchedule::Harmonic { a, shift } => a / shift > 1.0,
            StepSchedule::Constant { value } => !(*value > 0.0 && *value <= 1.0),
            StepSchedule::Table { values, tail } => {
                values.iter().any(|v| *v > 1.0) || tail.value(values.len() as u64) > 1.0
            }
            StepSchedule::Tailored { .. } => false,
        };
        if bad {
            return domain("schedule has values outside (0,1]");
        }
        Ok(())
    }

    /// Whether `Σλ = ∞` and `Σλ² < ∞`.
    pub fn is_square_summable_divergent(&self) -> bool {
        !matches!(self, StepSchedule::Constant { .. })
    }

    /// A harmonic `a/(n+s)` dominating `λ_n` for large `n`, if any.
    fn upper_harmonic(&self) -> Option<Harmonic> {
        match self {
            StepSchedule::Harmonic { a, shift } => Some(Harmonic { a: *a, shift: *shift }),
            StepSchedule::Table { tail, .. } => Some(*tail),
            StepSchedule::Tailored { vc, r } => Some(Harmonic { a: 2.0 * vc, shift: *r }),
            StepSchedule::Constant { .. } => None,
        }
    }
}

/// Smallest `N` certified by the bound `Σ_{n≥N} a²c/(n+s)² < a²c/(N+s−1)`
/// to have tail sum below `eps`.
fn harmonic_chi(h: Harmonic, factor: f64, eps: f64) -> u64 {
    let need = h.a * h.a * factor / eps;
    let raw = (need - h.shift + 1.0).ceil().max(0.0);
    if raw >= u64::MAX as f64 {
        return u64::MAX;
    }
    let mut n = raw as u64;
    while n < u64::MAX && (n as f64 + h.shift - 1.0) < need {
        n += 1;
    }
    while n == 0 && h.shift - 1.0 <= 0.0 {
        n += 1;
    }
    n
}

/// Index `N` with `Σ_{n≥N} factor·λ_n² < eps`.
pub fn tail_rate_chi(sched: &StepSchedule, factor: f64, eps: f64) -> Result<u64> {
    sched.validate()?;
    if !(eps > 0.0) {
        return domain(format!("tail rate needs eps > 0, got {eps}"));
    }
    if !(factor >= 0.0) || !factor.is_finite() {
        return domain(format!("tail rate factor must be finite and >= 0, got {factor}"));
    }
    if factor == 0.0 {
        return Ok(0);
    }
    match sched {
        StepSchedule::Constant { .. } => domain("constant schedule is not square summable"),
        StepSchedule::Harmonic { a, shift } => Ok(harmonic_chi(Harmonic { a: *a, shift: *shift }, factor, eps)),
        StepSchedule::Tailored { .. } => Ok(harmonic_chi(sched.upper_harmonic().expect("tailored"), factor, eps)),
        StepSchedule::Table { values, tail } => {
            let len = values.len();
            if len == 0 {
                return Ok(harmonic_chi(*tail, factor, eps));
            }
            let tail_bound = tail.a * tail.a * factor / (len as f64 + tail.shift - 1.0);
            let mut suffix = tail_bound;
            let mut best = None;
            for n in (0..len).rev() {
                if suffix <= eps {
                    best = Some(n + 1);
                }
                suffix += factor * values[n] * values[n];
            }
            if suffix <= eps {
                best = Some(0);
            }
            match best {
                Some(n) if n < len || tail_bound <= eps => Ok(n as u64),
                _ => Ok(harmonic_chi(*tail, factor, eps).max(len as u64)),
            }
        }
    }
}

/// Strict upper bound on `Σ λ_n²`: 1000 exact terms plus an analytic tail.
pub fn square_sum_bound(sched: &StepSchedule) -> Result<f64> {
    sched.validate()?;
    let h = sched
        .upper_harmonic()
        .ok_or_else(|| Error::Domain("constant schedule is not square summable".into()))?;
    let head = match sched {
        StepSchedule::Table { values, .. } => values.len().max(1000) as u64,
        _ => 1000,
    };
    let partial: f64 = (0..head).map(|n| sched.value(n).powi(2)).sum();
    let tail = h.a * h.a / (head as f64 + h.shift - 1.0);
    Ok(partial + tail)
}

/// A lower bound `term_n >= a/(n+s)` valid for `n >= start`.
fn lower_harmonic(sched: &StepSchedule, transform: Transform, k: u64) -> Option<(Harmonic, u64)> {
    match (sched, transform) {
        (StepSchedule::Harmonic { a, shift }, Transform::Identity) => Some((Harmonic { a: *a, shift: *shift }, k)),
        (StepSchedule::Tailored { vc, r }, _) => Some((Harmonic { a: *vc, shift: *r }, k)),
        (StepSchedule::Table { values, tail }, t) => {
            let start = k.max(values.len() as u64);
            lower_harmonic(&StepSchedule::Harmonic { a: tail.a, shift: tail.shift }, t, start)
        }
        (StepSchedule::Harmonic { a, shift }, Transform::MeanLambdaOneMinusLambda) => {
            // λ_n <= λ_start for n >= start, so λ(1−λ) >= (1−λ_start)·λ_n
            let mut start = k;
            while a / (start as f64 + shift) >= 1.0 {
                start += 1;
            }
            let top = a / (start as f64 + shift);
            Some((Harmonic { a: a * (1.0 - top), shift: *shift }, start))
        }
        (StepSchedule::Constant { .. }, _) => None,
    }
}

/// First `m >= start` with `Σ_{n=start}^{m} a/(n+s) >= b` by the bound
/// `Σ_{n=k}^{m} a/(n+s) >= a ln((m+s+1)/(k+s))`.
fn harmonic_upper_index(h: Harmonic, start: u64, b: f64) -> u64 {
    let k = start as f64 + h.shift;
    let m = k * (b / h.a).exp() - h.shift - 1.0;
    let m = m.ceil().max(start as f64);
    if !m.is_finite() || m >= u64::MAX as f64 {
        u64::MAX
    } else {
        m as u64
    }
}

/// Smallest `m >= k` with `Σ_{n=k}^{m} transform(λ_n) >= b`.
///
/// Windows longer than ten million terms are not summed; the analytic
/// harmonic bound is returned instead, which is sound but may exceed the
/// minimal index.
pub fn divergence_witness_theta(sched: &StepSchedule, transform: Transform, k: u64, b: f64) -> Result<u64> {
    sched.validate()?;
    if !(b > 0.0) || b.is_nan() {
        return domain(format!("divergence budget must be > 0, got {b}"));
    }
    if b == f64::INFINITY {
        return Ok(u64::MAX);
    }
    if let StepSchedule::Constant { value } = sched {
        let term = transform.apply(*value);
        if !(term > 0.0) {
            return domain("series does not diverge: constant transformed term is 0");
        }
        let mut cnt = (b / term).ceil().max(1.0);
        if cnt >= (u64::MAX - k) as f64 {
            return Ok(u64::MAX);
        }
        while cnt * term < b {
            cnt += 1.0;
        }
        while cnt > 1.0 && (cnt - 1.0) * term >= b {
            cnt -= 1.0;
        }
        return Ok(k + cnt as u64 - 1);
    }
    let (h, start) = lower_harmonic(sched, transform, k).expect("non-constant schedule");
    // the table part (if any) before `start` is summed directly below
    let bound = harmonic_upper_index(h, start, b);
    if bound.saturating_sub(k) > DIRECT_LIMIT {
        let head: f64 = (k..start).map(|n| transform.apply(sched.value(n))).sum();
        if head >= b {
            let mut acc = 0.0;
            for n in k..start {
                acc += transform.apply(sched.value(n));
                if acc >= b {
                    return Ok(n);
                }
            }
        }
        return Ok(harmonic_upper_index(h, start, b - head).max(start));
    }
    let mut acc = 0.0;
    let mut n = k;
    loop {
        acc += transform.apply(sched.value(n));
        if acc >= b || n >= bound {
            return Ok(n);
        }
        n += 1;
    }
}
