//! The three stochastic iterations as seed-deterministic trajectory
//! generators, and builders for their rate certificates.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::moduli::{
    recursion_bound_u, square_sum_bound, AlgorithmTag, ChiSpec, DivergenceSpec, FastCertificate, Modulus,
    RateCertificate, StepSchedule, Transform,
};
use crate::problems::{FixedPointProblem, Problem};
use crate::spaces::{distance, geodesic_point, ray_point, Point};

/// Per-path random stream: a ChaCha8 generator keyed by the base seed with
/// the path index as stream id.
#[derive(Clone, Debug)]
pub struct RngState(ChaCha8Rng);

impl RngState {
    pub fn new(seed: u64) -> Self {
        RngState(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn for_path(seed: u64, path: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(path);
        RngState(rng)
    }
}

impl RngCore for RngState {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.fill_bytes(dst)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub points: Vec<Point>,
    pub indices: Vec<usize>,
    pub steps: Vec<f64>,
    pub seed: u64,
}

/// A validated iteration `x_{n+1} = step(n, x_n, e_{n+1})`.
#[derive(Clone, Copy, Debug)]
pub struct Iteration<'a> {
    pub algorithm: AlgorithmTag,
    pub problem: &'a Problem,
    pub schedule: &'a StepSchedule,
}

impl<'a> Iteration<'a> {
    pub fn new(algorithm: AlgorithmTag, problem: &'a Problem, schedule: &'a StepSchedule, x0: &Point) -> Result<Self> {
        schedule.validate()?;
        if x0.space() != problem.space() {
            return Err(Error::SpaceMismatch(problem.space(), x0.space()));
        }
        match (algorithm, problem) {
            (AlgorithmTag::Sppa, Problem::MeanMin(_)) => {
                if !matches!(schedule, StepSchedule::Harmonic { .. } | StepSchedule::Table { .. }) {
                    return Err(Error::Precondition(
                        "the proximal point iteration needs a harmonic or table schedule (Σλ = ∞, Σλ² < ∞)".into(),
                    ));
                }
            }
            (AlgorithmTag::Skm, Problem::FixedPoint(_)) => schedule.check_unit_interval()?,
            (AlgorithmTag::Sb, Problem::Busemann(p)) => {
                if !schedule.is_square_summable_divergent() {
                    return Err(Error::Precondition(
                        "the Busemann subgradient iteration needs Σt = ∞ and Σt² < ∞".into(),
                    ));
                }
                if !p.constraint().contains(x0)? {
                    return domain("the starting point must lie in the constraint set");
                }
            }
            _ => {
                return Err(Error::Invalid(format!("algorithm {algorithm} does not apply to this problem kind")));
            }
        }
        Ok(Iteration { algorithm, problem, schedule })
    }

    /// One step from `x` at iteration `n`; returns the new point and the drawn index.
    pub fn step<R: RngCore + ?Sized>(&self, n: u64, x: &Point, rng: &mut R) -> Result<(Point, usize)> {
        let e = self.problem.sample_index(rng);
        Ok((self.step_with(n, x, e)?, e))
    }

    /// The step for a fixed drawn index.
    pub fn step_with(&self, n: u64, x: &Point, e: usize) -> Result<Point> {
        let lam = self.schedule.value(n);
        match self.problem {
            Problem::MeanMin(p) => p.prox_step(e, lam, x),
            Problem::FixedPoint(p) => geodesic_point(x, &p.operator_apply(e, x)?, lam),
            Problem::Busemann(p) => match p.busemann_subgradient(e, x)? {
                (Some(dir), s) if s > 0.0 => p.constraint().project(&ray_point(x, &dir, s * lam)?),
                _ => Ok(x.clone()),
            },
        }
    }

    pub fn run(&self, x0: &Point, horizon: u64, seed: u64) -> Result<Trajectory> {
        let mut rng = RngState::for_path(seed, 0);
        let mut points = Vec::with_capacity(horizon as usize + 1);
        let mut indices = Vec::with_capacity(horizon as usize);
        let mut steps = Vec::with_capacity(horizon as usize);
        points.push(x0.clone());
        for n in 0..horizon {
            let (next, e) = self.step(n, &points[n as usize], &mut rng)?;
            points.push(next);
            indices.push(e);
            steps.push(self.schedule.value(n));
        }
        Ok(Trajectory { points, indices, steps, seed })
    }
}

fn run(
    tag: AlgorithmTag,
    problem: &Problem,
    sched: &StepSchedule,
    x0: &Point,
    horizon: u64,
    seed: u64,
) -> Result<Trajectory> {
    Iteration::new(tag, problem, sched, x0)?.run(x0, horizon, seed)
}

pub fn run_sppa(problem: &Problem, sched: &StepSchedule, x0: &Point, horizon: u64, seed: u64) -> Result<Trajectory> {
    run(AlgorithmTag::Sppa, problem, sched, x0, horizon, seed)
}

pub fn run_skm(problem: &Problem, sched: &StepSchedule, x0: &Point, horizon: u64, seed: u64) -> Result<Trajectory> {
    run(AlgorithmTag::Skm, problem, sched, x0, horizon, seed)
}

pub fn run_sb(problem: &Problem, sched: &StepSchedule, x0: &Point, horizon: u64, seed: u64) -> Result<Trajectory> {
    run(AlgorithmTag::Sb, problem, sched, x0, horizon, seed)
}

/// Optional overrides for the certificate constants.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateInputs {
    /// Reference solution; defaults to the projection of the start.
    pub reference: Option<Point>,
    pub b: Option<f64>,
    #[serde(rename = "T")]
    pub t: Option<f64>,
}

/// Amount added to the distance bound when `b` is not given.
pub const B_CUSHION: f64 = 0.1;

struct Constants {
    tau: Modulus,
    b: f64,
}

fn constants(problem: &Problem, x0: &Point, inputs: &CertificateInputs, squared_only: bool) -> Result<Constants> {
    let z = match &inputs.reference {
        Some(z) => {
            if problem.dist_to_solutions(z, 1)? > 1e-9 {
                return Err(Error::Precondition("reference point is not a solution".into()));
            }
            z.clone()
        }
        None => problem.solution().project(x0)?,
    };
    let d = distance(x0, &z)?;
    let need = if squared_only { d * d } else { d.max(d * d) };
    let b = inputs.b.unwrap_or(need + B_CUSHION);
    if !(b > need) || !b.is_finite() {
        return Err(Error::Precondition(format!("b = {b} must exceed {need}")));
    }
    let tau = problem.regularity_modulus_for(2)?.modulus;
    Ok(Constants { tau, b })
}

fn square_bound(sched: &StepSchedule, inputs: &CertificateInputs) -> Result<f64> {
    let bound = square_sum_bound(sched)?;
    match inputs.t {
        Some(t) if t >= bound => Ok(t),
        Some(t) => Err(Error::Precondition(format!("T = {t} is below the square-sum bound {bound}"))),
        None => Ok(bound),
    }
}

const CONSISTENCY: Modulus = Modulus::Power { c: 1.0, p: 2.0 };

pub fn certificate_sppa(
    problem: &Problem,
    sched: &StepSchedule,
    x0: &Point,
    inputs: &CertificateInputs,
) -> Result<RateCertificate> {
    Iteration::new(AlgorithmTag::Sppa, problem, sched, x0)?;
    let Problem::MeanMin(p) = problem else { unreachable!() };
    let c = constants(problem, x0, inputs, false)?;
    let (l, l_bar) = p.lipschitz_data()?;
    let cert = RateCertificate {
        algorithm: AlgorithmTag::Sppa,
        tau: c.tau,
        consistency: CONSISTENCY,
        chi: ChiSpec::SquareTail { schedule: sched.clone() },
        divergence: DivergenceSpec { schedule: sched.clone(), transform: Transform::Identity },
        k: 1.0,
        b: c.b,
        l,
        l_bar,
        t: square_bound(sched, inputs)?,
    };
    cert.validate()?;
    Ok(cert)
}

pub fn certificate_skm(
    problem: &Problem,
    sched: &StepSchedule,
    x0: &Point,
    inputs: &CertificateInputs,
) -> Result<RateCertificate> {
    Iteration::new(AlgorithmTag::Skm, problem, sched, x0)?;
    let c = constants(problem, x0, inputs, true)?;
    let cert = RateCertificate {
        algorithm: AlgorithmTag::Skm,
        tau: c.tau,
        consistency: CONSISTENCY,
        chi: ChiSpec::Zero,
        divergence: DivergenceSpec { schedule: sched.clone(), transform: Transform::MeanLambdaOneMinusLambda },
        k: 1.0,
        b: c.b,
        l: 0.0,
        l_bar: 0.0,
        t: 0.0,
    };
    cert.validate()?;
    Ok(cert)
}

pub fn certificate_sb(
    problem: &Problem,
    sched: &StepSchedule,
    x0: &Point,
    inputs: &CertificateInputs,
) -> Result<RateCertificate> {
    Iteration::new(AlgorithmTag::Sb, problem, sched, x0)?;
    let Problem::Busemann(p) = problem else { unreachable!() };
    let c = constants(problem, x0, inputs, false)?;
    let l = p.lipschitz();
    let cert = RateCertificate {
        algorithm: AlgorithmTag::Sb,
        tau: c.tau,
        consistency: CONSISTENCY,
        chi: ChiSpec::SquareTail { schedule: sched.clone() },
        divergence: DivergenceSpec { schedule: sched.clone(), transform: Transform::Identity },
        k: 1.0,
        b: c.b,
        l,
        l_bar: l * l,
        t: square_bound(sched, inputs)?,
    };
    cert.validate()?;
    Ok(cert)
}

pub fn certificate(
    tag: AlgorithmTag,
    problem: &Problem,
    sched: &StepSchedule,
    x0: &Point,
    inputs: &CertificateInputs,
) -> Result<RateCertificate> {
    match tag {
        AlgorithmTag::Sppa => certificate_sppa(problem, sched, x0, inputs),
        AlgorithmTag::Skm => certificate_skm(problem, sched, x0, inputs),
        AlgorithmTag::Sb => certificate_sb(problem, sched, x0, inputs),
    }
}

/// Linear-rate parameters with the tailored schedule `λ(1−λ) = vc/(n+r)`.
pub fn fast_certificate_skm(problem: &FixedPointProblem, c: f64, r: u64, x0: &Point) -> Result<FastCertificate> {
    if !(c > 1.0) || !c.is_finite() {
        return domain(format!("fast rate needs c > 1, got {c}"));
    }
    if r == 0 {
        return domain("fast rate needs r >= 1");
    }
    let vc = problem.v() * c;
    if 4.0 * vc > r as f64 {
        return domain(format!("tailored schedule infeasible: v·c = {vc} exceeds r/4 = {}", r as f64 / 4.0));
    }
    let wrapped = Problem::FixedPoint(problem.clone());
    let l0 = wrapped.dist_to_solutions(x0, 2)?;
    let u = recursion_bound_u(c, 0.0, r, l0)?;
    Ok(FastCertificate {
        k: 1.0,
        u,
        d: 0.0,
        r,
        c,
        v: problem.v(),
        schedule: StepSchedule::Tailored { vc, r: r as f64 },
    })
}
