use serde::{Deserialize, Serialize};

use super::schedule::{divergence_witness_theta, tail_rate_chi, StepSchedule, Transform};
use super::Modulus;
use crate::error::{domain, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmTag {
    Sppa,
    Skm,
    Sb,
}

impl std::fmt::Display for AlgorithmTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AlgorithmTag::Sppa => "sppa",
            AlgorithmTag::Skm => "skm",
            AlgorithmTag::Sb => "sb",
        })
    }
}

/// Rate `χ` for the tail of `Σ λ_n²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChiSpec {
    Zero,
    SquareTail { schedule: StepSchedule },
}

impl ChiSpec {
    pub fn eval(&self, eps: f64) -> Result<u64> {
        match self {
            ChiSpec::Zero => Ok(0),
            ChiSpec::SquareTail { schedule } => {
                if eps == f64::INFINITY {
                    return Ok(0);
                }
                tail_rate_chi(schedule, 1.0, eps)
            }
        }
    }
}

/// Divergence witness `θ(k, b)` of the transformed schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DivergenceSpec {
    pub schedule: StepSchedule,
    pub transform: Transform,
}

impl DivergenceSpec {
    pub fn eval(&self, k: u64, b: f64) -> Result<u64> {
        divergence_witness_theta(&self.schedule, self.transform, k, b)
    }
}

/// The ingredients of a convergence-rate certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateCertificate {
    pub algorithm: AlgorithmTag,
    pub tau: Modulus,
    pub consistency: Modulus,
    pub chi: ChiSpec,
    pub divergence: DivergenceSpec,
    #[serde(rename = "K")]
    pub k: f64,
    pub b: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "L_bar")]
    pub l_bar: f64,
    #[serde(rename = "T")]
    pub t: f64,
}

/// Iteration indices for the metric `d` derived from a certificate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricRates {
    pub n_mean: u64,
    pub n_as: u64,
    pub n_dist_mean: u64,
    pub n_dist_as: u64,
}

impl RateCertificate {
    pub fn validate(&self) -> Result<()> {
        self.tau.validate()?;
        self.consistency.validate()?;
        if !(self.k >= 1.0) {
            return domain(format!("K must be >= 1, got {}", self.k));
        }
        for (v, what) in [(self.b, "b"), (self.l, "L"), (self.l_bar, "L_bar"), (self.t, "T")] {
            if !(v >= 0.0) || !v.is_finite() {
                return domain(format!("{what} must be finite and >= 0, got {v}"));
            }
        }
        if !(self.b > 0.0) {
            return domain("b must be > 0");
        }
        Ok(())
    }

    /// Numerator of the liminf bound `φ(ε, N) = θ(N, budget/ε)`.
    pub fn liminf_budget(&self) -> f64 {
        let l2 = self.l * self.l;
        match self.algorithm {
            AlgorithmTag::Sppa => self.b + 4.0 * l2 * self.t,
            AlgorithmTag::Skm => self.b,
            AlgorithmTag::Sb => self.b + l2 * self.t,
        }
    }

    pub fn liminf_bound(&self, eps: f64, n: u64) -> Result<u64> {
        if !(eps > 0.0) {
            return domain(format!("liminf bound needs eps > 0, got {eps}"));
        }
        self.divergence.eval(n, self.liminf_budget() / eps)
    }

    fn chi_at(&self, eps: f64) -> Result<u64> {
        self.chi.eval(eps)
    }

    /// `ρ(ε)` in the specialised form for the algorithm:
    /// SPPA `θ(χ(ε/24L̄), (b+4L²T)/τ(ε/6))`, SKM `θ(0, b/τ(ε/6))`,
    /// SB `θ(χ(ε/6L²), (b+L²T)/τ(ε/6))`.
    pub fn rho(&self, eps: f64) -> Result<u64> {
        if !(eps > 0.0) {
            return domain(format!("rho needs eps > 0, got {eps}"));
        }
        let tau = self.tau.eval(eps / 6.0)?;
        let budget = self.liminf_budget() / tau;
        let start = match self.algorithm {
            AlgorithmTag::Sppa => self.chi_at(eps / (24.0 * self.l_bar))?,
            AlgorithmTag::Skm => 0,
            AlgorithmTag::Sb => self.chi_at(eps / (6.0 * self.l * self.l))?,
        };
        self.divergence.eval(start, budget)
    }

    /// Rate for `Σ E[ξ_n]` where `ξ_n` is the additive Fejér error.
    pub fn xi_rate(&self, eps: f64) -> Result<u64> {
        match self.algorithm {
            AlgorithmTag::Sppa => self.chi_at(eps / (4.0 * self.l_bar)),
            AlgorithmTag::Skm => Ok(0),
            AlgorithmTag::Sb => self.chi_at(eps / (self.l * self.l)),
        }
    }

    /// `ρ(ε) = φ(τ(ε/3K), χ(ε/3K))` built from the generic assembly.
    pub fn rho_generic(&self, eps: f64) -> Result<u64> {
        assemble_rho(|e, n| self.liminf_bound(e, n), &self.tau, |e| self.xi_rate(e), self.k, eps)
    }

    /// `(ρ(θ(ε/2)), ρ(λθ(ε/2)), ρ(θ(ε)), ρ(λθ(ε)))` with `θ` the consistency modulus.
    pub fn metric_rates(&self, eps: f64, lam: f64) -> Result<MetricRates> {
        metric_rates(|e| self.rho(e), &self.consistency, eps, lam)
    }
}

pub fn metric_rates(rho: impl Fn(f64) -> Result<u64>, consistency: &Modulus, eps: f64, lam: f64) -> Result<MetricRates> {
    if !(lam > 0.0 && lam <= 1.0) {
        return domain(format!("lambda must lie in (0,1], got {lam}"));
    }
    let half = consistency.eval(eps / 2.0)?;
    let full = consistency.eval(eps)?;
    Ok(MetricRates {
        n_mean: rho(half)?,
        n_as: rho(lam * half)?,
        n_dist_mean: rho(full)?,
        n_dist_as: rho(lam * full)?,
    })
}

/// `φ(τ(ε/3K), χ(ε/3K))`.
pub fn assemble_rho(
    phi: impl Fn(f64, u64) -> Result<u64>,
    tau: &Modulus,
    chi: impl Fn(f64) -> Result<u64>,
    k: f64,
    eps: f64,
) -> Result<u64> {
    if !(k >= 1.0) {
        return domain(format!("K must be >= 1, got {k}"));
    }
    if !(eps > 0.0) {
        return domain(format!("rho needs eps > 0, got {eps}"));
    }
    let arg = eps / (3.0 * k);
    phi(tau.eval(arg)?, chi(arg)?)
}

/// `u = max{d/(c−1), r·x0}`.
pub fn recursion_bound_u(c: f64, d: f64, r: u64, x0: f64) -> Result<f64> {
    if !(c > 1.0) {
        return domain(format!("recursion bound needs c > 1, got {c}"));
    }
    if r == 0 {
        return domain("recursion bound needs r >= 1");
    }
    if !(d >= 0.0) || !(x0 >= 0.0) {
        return domain("recursion bound needs d >= 0 and x0 >= 0");
    }
    Ok((d / (c - 1.0)).max(r as f64 * x0))
}

/// Parameters of the linear non-asymptotic guarantee.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FastCertificate {
    #[serde(rename = "K")]
    pub k: f64,
    pub u: f64,
    pub d: f64,
    pub r: u64,
    pub c: f64,
    pub v: f64,
    pub schedule: StepSchedule,
}

impl FastCertificate {
    pub fn bounds(&self, n: u64, eps: f64) -> (f64, f64) {
        fast_bounds(self.k, self.u, self.d, self.r, n, eps)
    }
}

/// `(u/(n+r), min(1, K(u+2d)/(ε(n+r))))`.
pub fn fast_bounds(k: f64, u: f64, d: f64, r: u64, n: u64, eps: f64) -> (f64, f64) {
    let m = (n + r) as f64;
    let tail = if eps > 0.0 { (k * (u + 2.0 * d) / (eps * m)).clamp(0.0, 1.0) } else { 1.0 };
    (u / m, tail)
}
