//! Seeded Monte-Carlo ensembles, one-step inequality margins, certificate
//! audits and result files.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithms::{Iteration, RngState};
use crate::error::{domain, Error, Result};
use crate::moduli::AlgorithmTag;
use crate::problems::Problem;
use crate::spaces::{distance, Point};

mod audit;
mod export;

pub use audit::{
    certificate_audit, fast_audit, liminf_audit, AuditRecord, AuditReport, AuditStatus, RecordKind, TRUNCATION_CAVEAT,
};
pub use export::{curves_csv, export_results, read_audit, read_curves, render_report, AUDIT_FILE, CURVES_FILE, META_FILE};

/// Paths summed sequentially inside one block.
const BLOCK: u64 = 32;
/// Blocks evaluated concurrently before folding into the totals.
const WAVE: usize = 16;
/// Upper limit on `(horizon + 1)·(columns)` per block buffer.
const MAX_BLOCK_CELLS: u64 = 1 << 28;

/// Per-iteration ensemble averages; every array has length `horizon + 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub paths: u64,
    pub horizon: u64,
    pub seed: u64,
    pub epsilons: Vec<f64>,
    pub mean_dist: Vec<f64>,
    pub mean_sq_dist: Vec<f64>,
    pub mean_gap: Vec<f64>,
    pub mean_quartic_dist: Vec<f64>,
    pub mean_sq_gap: Vec<f64>,
    /// `tail[j][n]`: fraction of paths with `max_{k∈[n,horizon]} dist ≥ ε_j`.
    pub tail: Vec<Vec<f64>>,
    /// `point_tail[j][n]`: fraction of paths with `dist(x_n) ≥ ε_j`.
    pub point_tail: Vec<Vec<f64>>,
}

#[derive(Clone)]
struct Sums {
    d: Vec<f64>,
    d2: Vec<f64>,
    g: Vec<f64>,
    d4: Vec<f64>,
    g2: Vec<f64>,
    tail: Vec<Vec<u64>>,
    point: Vec<Vec<u64>>,
}

impl Sums {
    fn zero(len: usize, k: usize) -> Self {
        Sums {
            d: vec![0.0; len],
            d2: vec![0.0; len],
            g: vec![0.0; len],
            d4: vec![0.0; len],
            g2: vec![0.0; len],
            tail: vec![vec![0; len]; k],
            point: vec![vec![0; len]; k],
        }
    }

    fn add(&mut self, o: &Sums) {
        for (a, b) in [
            (&mut self.d, &o.d),
            (&mut self.d2, &o.d2),
            (&mut self.g, &o.g),
            (&mut self.d4, &o.d4),
            (&mut self.g2, &o.g2),
        ] {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
        for (a, b) in self.tail.iter_mut().zip(&o.tail).chain(self.point.iter_mut().zip(&o.point)) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
    }
}

fn run_block(it: &Iteration, x0: &Point, horizon: u64, seed: u64, eps: &[f64], paths: std::ops::Range<u64>) -> Result<Sums> {
    let len = horizon as usize + 1;
    let mut s = Sums::zero(len, eps.len());
    let mut dist = vec![0.0; len];
    for path in paths {
        let mut rng = RngState::for_path(seed, path);
        let mut x = x0.clone();
        for n in 0..len {
            if n > 0 {
                x = it.step(n as u64 - 1, &x, &mut rng)?.0;
            }
            let d = it.problem.dist_to_solutions(&x, 1)?;
            let g = it.problem.gap(&x)?;
            if !d.is_finite() || !g.is_finite() {
                return Err(Error::Domain(format!("non-finite state on path {path} at n = {n}")));
            }
            dist[n] = d;
            let d2 = d * d;
            s.d[n] += d;
            s.d2[n] += d2;
            s.d4[n] += d2 * d2;
            s.g[n] += g;
            s.g2[n] += g * g;
        }
        for (j, &e) in eps.iter().enumerate() {
            let mut running = f64::NEG_INFINITY;
            for n in (0..len).rev() {
                running = running.max(dist[n]);
                if running >= e {
                    s.tail[j][n] += 1;
                }
                if dist[n] >= e {
                    s.point[j][n] += 1;
                }
            }
        }
    }
    Ok(s)
}

/// Runs `paths` independent trajectories from `x0` and averages them.
///
/// Paths are grouped in fixed blocks whose sums are folded in ascending
/// order, so the result does not depend on the number of threads.
pub fn run_ensemble(
    it: &Iteration,
    x0: &Point,
    paths: u64,
    horizon: u64,
    seed: u64,
    epsilons: &[f64],
) -> Result<EnsembleStats> {
    if paths == 0 {
        return domain("an ensemble needs at least one path");
    }
    let cols = 5 + 2 * epsilons.len() as u64;
    if (horizon + 1).saturating_mul(cols) > MAX_BLOCK_CELLS {
        return Err(Error::Invalid(format!("horizon {horizon} exceeds the ensemble memory limit")));
    }
    let len = horizon as usize + 1;
    let blocks: Vec<std::ops::Range<u64>> =
        (0..paths.div_ceil(BLOCK)).map(|b| b * BLOCK..((b + 1) * BLOCK).min(paths)).collect();
    let mut total = Sums::zero(len, epsilons.len());
    for wave in blocks.chunks(WAVE) {
        let parts: Vec<Result<Sums>> =
            wave.par_iter().map(|r| run_block(it, x0, horizon, seed, epsilons, r.clone())).collect();
        for p in parts {
            total.add(&p?);
        }
    }
    let p = paths as f64;
    let scale = |v: Vec<f64>| v.into_iter().map(|x| x / p).collect::<Vec<f64>>();
    let frac = |v: Vec<Vec<u64>>| {
        v.into_iter().map(|c| c.into_iter().map(|k| k as f64 / p).collect()).collect::<Vec<Vec<f64>>>()
    };
    Ok(EnsembleStats {
        paths,
        horizon,
        seed,
        epsilons: epsilons.to_vec(),
        mean_dist: scale(total.d),
        mean_sq_dist: scale(total.d2),
        mean_gap: scale(total.g),
        mean_quartic_dist: scale(total.d4),
        mean_sq_gap: scale(total.g2),
        tail: frac(total.tail),
        point_tail: frac(total.point),
    })
}

fn stderr(mean: f64, mean_sq: f64, paths: u64) -> f64 {
    ((mean_sq - mean * mean).max(0.0) / paths as f64).sqrt()
}

impl EnsembleStats {
    pub fn stderr_dist(&self, n: usize) -> f64 {
        stderr(self.mean_dist[n], self.mean_sq_dist[n], self.paths)
    }

    pub fn stderr_sq_dist(&self, n: usize) -> f64 {
        stderr(self.mean_sq_dist[n], self.mean_quartic_dist[n], self.paths)
    }

    pub fn stderr_gap(&self, n: usize) -> f64 {
        stderr(self.mean_gap[n], self.mean_sq_gap[n], self.paths)
    }

    pub fn binomial_sigma(&self, lam: f64) -> f64 {
        (lam * (1.0 - lam) / self.paths as f64).sqrt()
    }

    fn eps_index(&self, eps: f64) -> Result<usize> {
        self.epsilons
            .iter()
            .position(|&e| e == eps)
            .ok_or_else(|| Error::Invalid(format!("epsilon {eps} was not tracked by the ensemble")))
    }

    /// Fraction of paths with `dist(x_k) ≥ eps` for some `k ∈ [n, horizon]`.
    pub fn tail_probability(&self, n: u64, eps: f64) -> Result<f64> {
        if n > self.horizon {
            return domain(format!("index {n} beyond horizon {}", self.horizon));
        }
        if eps <= 0.0 {
            return Ok(1.0);
        }
        Ok(self.tail[self.eps_index(eps)?][n as usize])
    }

    /// Fraction of paths with `dist(x_n) ≥ eps`.
    pub fn point_tail_probability(&self, n: u64, eps: f64) -> Result<f64> {
        if n > self.horizon {
            return domain(format!("index {n} beyond horizon {}", self.horizon));
        }
        if eps <= 0.0 {
            return Ok(1.0);
        }
        Ok(self.point_tail[self.eps_index(eps)?][n as usize])
    }
}

/// First `n ∈ [start, min(bound_index, horizon)]` with `mean_gap[n] < eps`.
pub fn liminf_witness_check(stats: &EnsembleStats, eps: f64, start: u64, bound_index: u64) -> Option<u64> {
    let end = bound_index.min(stats.horizon);
    (start..=end).find(|&n| stats.mean_gap[n as usize] < eps)
}

/// One-step conditional mean of `d²(x⁺, z)` against the Fejér right-hand side.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FejerMargin {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub stderr: f64,
}

/// Exact weighted sums are used unless `m > 0` and the iteration is the
/// proximal point method, in which case `m` fresh draws are averaged.
pub fn fejer_margin(it: &Iteration, x: &Point, z: &Point, n: u64, m: u64, rng: &mut RngState) -> Result<FejerMargin> {
    let lam = it.schedule.value(n);
    let f = it.problem.gap(x)?;
    let d0 = distance(x, z)?.powi(2);
    let rhs = match (it.algorithm, it.problem) {
        (AlgorithmTag::Sppa, Problem::MeanMin(p)) => d0 - 2.0 * lam * f + 4.0 * lam * lam * p.lipschitz_data()?.1,
        (AlgorithmTag::Skm, _) => d0 - lam * (1.0 - lam) * f,
        (AlgorithmTag::Sb, Problem::Busemann(p)) => d0 - 2.0 * lam * f + p.lipschitz().powi(2) * lam * lam,
        _ => unreachable!("iteration validated at construction"),
    };
    let (lhs, se) = if it.algorithm == AlgorithmTag::Sppa && m > 0 {
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..m {
            let v = distance(&it.step(n, x, rng)?.0, z)?.powi(2);
            s1 += v;
            s2 += v * v;
        }
        let mean = s1 / m as f64;
        (mean, stderr(mean, s2 / m as f64, m))
    } else {
        let mut s = 0.0;
        for (e, w) in it.problem.weights().into_iter().enumerate() {
            s += w * distance(&it.step_with(n, x, e)?, z)?.powi(2);
        }
        (s, 0.0)
    };
    Ok(FejerMargin { lhs, rhs, slack: rhs - lhs, stderr: se })
}

#[cfg(test)]
mod tests;
