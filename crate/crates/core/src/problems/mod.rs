//! Stochastic problem instances with finite sample spaces: mean
//! minimisation, common fixed points of projections and constrained
//! Busemann minimisation.
//!
//! All expectations over the sample space are exact weighted sums.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::moduli::{pointwise_to_mean, MeanModulus, Modulus};
use crate::spaces::{
    busemann_function, distance, extension_direction, geodesic_point, ray_point, ConvexSet, Direction, Point,
    SpaceKind,
};

mod solve;

pub use solve::SolutionSet;

const WEIGHT_SUM_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostKind {
    /// `f(e, x) = d²(x, a_e) / 2`
    HalfSquaredDistance,
    /// `f(e, x) = d(x, a_e)`
    Distance,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub point: Point,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Operator {
    pub set: ConvexSet,
    pub prob: f64,
}

fn check_weights(ws: impl Iterator<Item = f64>) -> Result<Vec<f64>> {
    let mut cdf = Vec::new();
    let mut total = 0.0;
    for w in ws {
        if !(w > 0.0) || !w.is_finite() {
            return domain(format!("weights must be positive, got {w}"));
        }
        total += w;
        cdf.push(total);
    }
    if cdf.is_empty() {
        return domain("at least one atom or operator is required");
    }
    if (total - 1.0).abs() > WEIGHT_SUM_TOL {
        return domain(format!("weights must sum to 1, got {total}"));
    }
    Ok(cdf)
}

fn check_region(b: f64) -> Result<()> {
    if b > 0.0 && b.is_finite() {
        Ok(())
    } else {
        domain(format!("region bound must be finite and > 0, got {b}"))
    }
}

fn check_atoms(space: SpaceKind, atoms: &[Atom]) -> Result<()> {
    for a in atoms {
        if a.point.space() != space {
            return Err(Error::SpaceMismatch(space, a.point.space()));
        }
    }
    Ok(())
}

fn draw<R: Rng + ?Sized>(cdf: &[f64], rng: &mut R) -> usize {
    let u = rng.random::<f64>() * cdf[cdf.len() - 1];
    cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1)
}

pub(crate) fn shape_name(space: SpaceKind, atoms: &[Atom], cost: CostKind) -> String {
    let cost = match cost {
        CostKind::HalfSquaredDistance => "half_squared_distance",
        CostKind::Distance => "distance",
    };
    format!("{cost} mean of {} atoms in {space}", atoms.len())
}

fn cost_at(cost: CostKind, a: &Point, x: &Point) -> Result<f64> {
    let d = distance(x, a)?;
    Ok(match cost {
        CostKind::HalfSquaredDistance => 0.5 * d * d,
        CostKind::Distance => d,
    })
}

fn mean_of(atoms: &[Atom], cost: CostKind, x: &Point) -> Result<f64> {
    let mut s = 0.0;
    for a in atoms {
        s += a.weight * cost_at(cost, &a.point, x)?;
    }
    Ok(s)
}

fn dist_pow(d: f64, q: u32) -> Result<f64> {
    match q {
        1 => Ok(d),
        2 => Ok(d * d),
        _ => domain(format!("distance power must be 1 or 2, got {q}")),
    }
}

/// Minimise `x ↦ Σ wᵢ f(i, x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeanMinProblem {
    space: SpaceKind,
    atoms: Vec<Atom>,
    cost: CostKind,
    region_bound: f64,
    solution: ConvexSet,
    min_value: f64,
    center: Point,
    cdf: Vec<f64>,
}

impl MeanMinProblem {
    pub fn new(space: SpaceKind, atoms: Vec<Atom>, cost: CostKind, region_bound: f64) -> Result<Self> {
        let cdf = check_weights(atoms.iter().map(|a| a.weight))?;
        check_region(region_bound)?;
        check_atoms(space, &atoms)?;
        let solution = solve::mean_min_solution(space, &atoms, cost)?;
        let center = solution.project(&Point::base_of(space))?;
        let min_value = mean_of(&atoms, cost, &center)?;
        Ok(MeanMinProblem { space, atoms, cost, region_bound, solution, min_value, center, cdf })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn cost_kind(&self) -> CostKind {
        self.cost
    }

    pub fn min_value(&self) -> f64 {
        self.min_value
    }

    pub fn cost(&self, e: usize, x: &Point) -> Result<f64> {
        cost_at(self.cost, &self.atoms[e].point, x)
    }

    pub fn mean_cost_exact(&self, x: &Point) -> Result<f64> {
        mean_of(&self.atoms, self.cost, x)
    }

    /// Closed-form `argmin_y { f(e, y) + d²(x, y) / (2λ) }`.
    pub fn prox_step(&self, e: usize, lam: f64, x: &Point) -> Result<Point> {
        if !(lam > 0.0) || !lam.is_finite() {
            return domain(format!("prox parameter must be > 0, got {lam}"));
        }
        let a = &self.atoms[e].point;
        match self.cost {
            CostKind::HalfSquaredDistance => geodesic_point(x, a, lam / (1.0 + lam)),
            CostKind::Distance => {
                let d = distance(x, a)?;
                if d == 0.0 {
                    return Ok(x.clone());
                }
                geodesic_point(x, a, lam.min(d) / d)
            }
        }
    }

    /// Per-sample Lipschitz bounds on the region ball: `(max L(e), Σ w L(e)²)`.
    pub fn lipschitz_data(&self) -> Result<(f64, f64)> {
        let mut l: f64 = 0.0;
        let mut l_bar = 0.0;
        for a in &self.atoms {
            let le = match self.cost {
                CostKind::Distance => 1.0,
                CostKind::HalfSquaredDistance => self.region_bound + distance(&a.point, &self.center)?,
            };
            l = l.max(le);
            l_bar += a.weight * le * le;
        }
        Ok((l, l_bar))
    }
}

/// Common fixed points of metric projections onto convex sets.
#[derive(Clone, Debug, PartialEq)]
pub struct FixedPointProblem {
    space: SpaceKind,
    operators: Vec<Operator>,
    v: f64,
    region_bound: f64,
    solution: SolutionSet,
    center: Point,
    cdf: Vec<f64>,
}

impl FixedPointProblem {
    /// Builds the instance and checks `dist² ≤ v·F` on the region ball.
    pub fn new(space: SpaceKind, operators: Vec<Operator>, v: f64, region_bound: f64) -> Result<Self> {
        let cdf = check_weights(operators.iter().map(|o| o.prob))?;
        check_region(region_bound)?;
        if !(v >= 1.0) || !v.is_finite() {
            return domain(format!("linear-regularity constant must be >= 1, got {v}"));
        }
        for o in &operators {
            o.set.validate(space)?;
        }
        let sets: Vec<ConvexSet> = operators.iter().map(|o| o.set.clone()).collect();
        let solution = solve::intersect(space, &sets)?;
        let center = solution.project(&Point::base_of(space))?;
        let p = FixedPointProblem { space, operators, v, region_bound, solution, center, cdf };
        p.validate_v()?;
        Ok(p)
    }

    pub fn operators(&self) -> &[Operator] {
        &self.operators
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn operator_apply(&self, k: usize, x: &Point) -> Result<Point> {
        self.operators[k].set.project(x)
    }

    /// Worst value of `dist²(x) − v·F(x)` over a grid (low dimensions) and
    /// random points of the region ball.
    pub fn regularity_excess(&self, samples: usize, seed: u64) -> Result<f64> {
        use rand::SeedableRng;
        let mut worst = f64::NEG_INFINITY;
        let mut check = |x: &Point| -> Result<()> {
            let d = self.solution.distance(x)?;
            worst = worst.max(d * d - self.v * self.gap(x)?);
            Ok(())
        };
        if let (SpaceKind::Euclidean(d), Point::Euclidean(c)) = (self.space, &self.center) {
            if d <= 2 {
                let n = 41i64;
                let b = self.region_bound;
                let steps = |i: i64| -b + 2.0 * b * i as f64 / (n - 1) as f64;
                for i in 0..n {
                    for j in 0..if d == 2 { n } else { 1 } {
                        let mut x = c.to_vec();
                        x[0] += steps(i);
                        if d == 2 {
                            x[1] += steps(j);
                        }
                        check(&Point::euclidean(&x))?;
                    }
                }
            }
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let x = sample_in_ball(self.space, &self.center, self.region_bound, &mut rng)?;
            check(&x)?;
        }
        Ok(worst)
    }

    fn validate_v(&self) -> Result<()> {
        let excess = self.regularity_excess(2000, 0x5eed)?;
        if excess > 1e-9 {
            return Err(Error::Invalid(format!(
                "linear-regularity constant v = {} fails on the region ball (excess {excess:.3e})",
                self.v
            )));
        }
        Ok(())
    }
}

/// Minimise the mean of distance costs over a convex constraint set.
#[derive(Clone, Debug, PartialEq)]
pub struct BusemannProblem {
    space: SpaceKind,
    atoms: Vec<Atom>,
    constraint: ConvexSet,
    lipschitz: f64,
    region_bound: f64,
    solution: ConvexSet,
    min_value: f64,
    center: Point,
    cdf: Vec<f64>,
}

impl BusemannProblem {
    pub fn new(
        space: SpaceKind,
        atoms: Vec<Atom>,
        constraint: ConvexSet,
        lipschitz: f64,
        region_bound: f64,
    ) -> Result<Self> {
        if !matches!(space, SpaceKind::Euclidean(_) | SpaceKind::Tripod) {
            return Err(Error::Unsupported(format!("Busemann problems in {space}")));
        }
        let cdf = check_weights(atoms.iter().map(|a| a.weight))?;
        check_region(region_bound)?;
        check_atoms(space, &atoms)?;
        constraint.validate(space)?;
        if !(lipschitz >= 1.0) || !lipschitz.is_finite() {
            return domain(format!("Lipschitz cap must be >= 1, got {lipschitz}"));
        }
        let solution = solve::mean_min_solution(space, &atoms, CostKind::Distance)?;
        if !solve::contained_in(&solution, &constraint)? {
            return domain("the unconstrained minimisers must lie inside the constraint set");
        }
        let center = solution.project(&Point::base_of(space))?;
        let min_value = mean_of(&atoms, CostKind::Distance, &center)?;
        Ok(BusemannProblem { space, atoms, constraint, lipschitz, region_bound, solution, min_value, center, cdf })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn constraint(&self) -> &ConvexSet {
        &self.constraint
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn cost(&self, e: usize, x: &Point) -> Result<f64> {
        cost_at(CostKind::Distance, &self.atoms[e].point, x)
    }

    pub fn mean_cost_exact(&self, x: &Point) -> Result<f64> {
        mean_of(&self.atoms, CostKind::Distance, x)
    }

    /// Subgradient `[ξ, s]` of `d(·, a_e)` at `x`: the end of the ray from `x`
    /// through `a_e` with `s = 1`, or `s = 0` at the atom.
    pub fn busemann_subgradient(&self, e: usize, x: &Point) -> Result<(Option<Direction>, f64)> {
        let a = &self.atoms[e].point;
        if distance(x, a)? == 0.0 {
            return Ok((None, 0.0));
        }
        Ok((Some(extension_direction(x, a)?), 1.0))
    }
}

/// `s · b_ξ(x)`, zero when `s = 0`.
pub fn busemann_pairing(x: &Point, dir: &Direction, s: f64, basepoint: &Point) -> Result<f64> {
    if !(s >= 0.0) {
        return domain(format!("subgradient magnitude must be >= 0, got {s}"));
    }
    if s == 0.0 {
        return Ok(0.0);
    }
    Ok(s * busemann_function(dir, basepoint, x)?)
}

/// Draws a point of the closed ball of radius `radius` around `center`.
pub fn sample_in_ball<R: Rng + ?Sized>(space: SpaceKind, center: &Point, radius: f64, rng: &mut R) -> Result<Point> {
    let s = radius * rng.random::<f64>();
    loop {
        let y = crate::spaces::suite::sample_point(space, rng);
        let d = distance(center, &y)?;
        if d < 1e-9 {
            continue;
        }
        return if d >= s {
            geodesic_point(center, &y, s / d)
        } else {
            ray_point(center, &extension_direction(center, &y)?, s)
        };
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Problem {
    MeanMin(MeanMinProblem),
    FixedPoint(FixedPointProblem),
    Busemann(BusemannProblem),
}

impl Problem {
    pub fn space(&self) -> SpaceKind {
        match self {
            Problem::MeanMin(p) => p.space,
            Problem::FixedPoint(p) => p.space,
            Problem::Busemann(p) => p.space,
        }
    }

    pub fn region_bound(&self) -> f64 {
        match self {
            Problem::MeanMin(p) => p.region_bound,
            Problem::FixedPoint(p) => p.region_bound,
            Problem::Busemann(p) => p.region_bound,
        }
    }

    /// Solution closest to the space's base point.
    pub fn center(&self) -> &Point {
        match self {
            Problem::MeanMin(p) => &p.center,
            Problem::FixedPoint(p) => &p.center,
            Problem::Busemann(p) => &p.center,
        }
    }

    pub fn solution(&self) -> SolutionSet {
        match self {
            Problem::MeanMin(p) => SolutionSet::Exact(p.solution.clone()),
            Problem::FixedPoint(p) => p.solution.clone(),
            Problem::Busemann(p) => SolutionSet::Exact(p.solution.clone()),
        }
    }

    pub fn len(&self) -> usize {
        self.cdf().len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn cdf(&self) -> &[f64] {
        match self {
            Problem::MeanMin(p) => &p.cdf,
            Problem::FixedPoint(p) => &p.cdf,
            Problem::Busemann(p) => &p.cdf,
        }
    }

    /// Index probabilities in order.
    pub fn weights(&self) -> Vec<f64> {
        match self {
            Problem::MeanMin(p) => p.atoms.iter().map(|a| a.weight).collect(),
            Problem::FixedPoint(p) => p.operators.iter().map(|o| o.prob).collect(),
            Problem::Busemann(p) => p.atoms.iter().map(|a| a.weight).collect(),
        }
    }

    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        draw(self.cdf(), rng)
    }

    pub fn gap(&self, x: &Point) -> Result<f64> {
        match self {
            Problem::MeanMin(p) => p.gap(x),
            Problem::FixedPoint(p) => p.gap(x),
            Problem::Busemann(p) => p.gap(x),
        }
    }

    pub fn dist_to_solutions(&self, x: &Point, q: u32) -> Result<f64> {
        let d = match self {
            Problem::MeanMin(p) => p.solution.project(x).and_then(|y| distance(&y, x))?,
            Problem::FixedPoint(p) => p.solution.distance(x)?,
            Problem::Busemann(p) => p.solution.project(x).and_then(|y| distance(&y, x))?,
        };
        dist_pow(d, q)
    }

    pub fn regularity_modulus_for(&self, q: u32) -> Result<MeanModulus> {
        dist_pow(1.0, q)?;
        let b = self.region_bound();
        let tau = match self {
            Problem::MeanMin(p) => distance_family_modulus(p.space, &p.atoms, p.cost, &p.solution, q, b)?,
            Problem::Busemann(p) => {
                distance_family_modulus(p.space, &p.atoms, CostKind::Distance, &p.solution, q, b)?
            }
            Problem::FixedPoint(p) => match q {
                2 => Modulus::Linear { c: 1.0 / p.v },
                _ => Modulus::Power { c: 1.0 / p.v, p: 2.0 },
            },
        };
        pointwise_to_mean(&tau, Some(b))
    }
}

impl MeanMinProblem {
    pub fn gap(&self, x: &Point) -> Result<f64> {
        Ok((self.mean_cost_exact(x)? - self.min_value).max(0.0))
    }
}

impl BusemannProblem {
    pub fn gap(&self, x: &Point) -> Result<f64> {
        Ok((self.mean_cost_exact(x)? - self.min_value).max(0.0))
    }
}

impl FixedPointProblem {
    pub fn gap(&self, x: &Point) -> Result<f64> {
        let mut s = 0.0;
        for o in &self.operators {
            let d = distance(&o.set.project(x)?, x)?;
            s += o.prob * d * d;
        }
        Ok(s)
    }
}

/// Catalogue of exact growth moduli for the supported mean shapes.
fn distance_family_modulus(
    space: SpaceKind,
    atoms: &[Atom],
    cost: CostKind,
    solution: &ConvexSet,
    q: u32,
    b: f64,
) -> Result<Modulus> {
    let unsupported = || Error::NoModulus(shape_name(space, atoms, cost));
    let sharp = |kappa: f64| match q {
        1 => Modulus::Linear { c: kappa },
        _ => Modulus::Linear { c: kappa / b },
    };
    match cost {
        CostKind::HalfSquaredDistance => Ok(match q {
            2 => Modulus::Linear { c: 0.5 },
            _ => Modulus::Power { c: 0.125, p: 2.0 },
        }),
        CostKind::Distance => {
            let single = matches!(solution, ConvexSet::Ball { radius, .. } if *radius == 0.0);
            let all_same = atoms.iter().all(|a| a.point == atoms[0].point);
            if all_same {
                return Ok(sharp(1.0));
            }
            if atoms.len() == 2 {
                let (w0, w1) = (atoms[0].weight, atoms[1].weight);
                if single {
                    return Ok(sharp((w0 - w1).abs()));
                }
                if let SpaceKind::Euclidean(_) = space {
                    let h = 0.5 * distance(&atoms[0].point, &atoms[1].point)?;
                    let c = 1.0 / (2.0 * h + b);
                    return Ok(match q {
                        2 => Modulus::Linear { c },
                        _ => Modulus::Power { c, p: 2.0 },
                    });
                }
            }
            if space == SpaceKind::Tripod && single && solution.contains(&Point::tripod_origin())? {
                let mut kappa: f64 = 1.0;
                for ray in 0..3u8 {
                    let w: f64 = atoms
                        .iter()
                        .filter(|a| matches!(a.point, Point::Tripod { ray: r, coord } if r == ray && coord > 0.0))
                        .map(|a| a.weight)
                        .sum();
                    kappa = kappa.min(1.0 - 2.0 * w);
                }
                if kappa > 0.0 {
                    return Ok(sharp(kappa));
                }
            }
            Err(unsupported())
        }
    }
}
