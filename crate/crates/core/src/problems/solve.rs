use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::spaces::{distance, geodesic_point, ConvexSet, Point, SpaceKind};

use super::{Atom, CostKind};

/// The exact solution set of a problem instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionSet {
    Exact(ConvexSet),
    /// Intersection of Euclidean sets, projected onto by Dykstra's algorithm.
    EuclideanIntersection(Vec<ConvexSet>),
}

impl SolutionSet {
    pub fn project(&self, x: &Point) -> Result<Point> {
        match self {
            SolutionSet::Exact(s) => s.project(x),
            SolutionSet::EuclideanIntersection(sets) => dykstra(sets, x),
        }
    }

    pub fn distance(&self, x: &Point) -> Result<f64> {
        distance(&self.project(x)?, x)
    }
}

fn dykstra(sets: &[ConvexSet], x: &Point) -> Result<Point> {
    let Point::Euclidean(start) = x else {
        return Err(Error::Unsupported("Dykstra projection outside Euclidean space".into()));
    };
    let d = start.len();
    let mut y: Vec<f64> = start.to_vec();
    let mut incr = vec![vec![0.0; d]; sets.len()];
    for _ in 0..100_000 {
        let before = y.clone();
        for (set, p) in sets.iter().zip(incr.iter_mut()) {
            let shifted: Vec<f64> = y.iter().zip(p.iter()).map(|(a, b)| a + b).collect();
            let proj = set.project(&Point::euclidean(&shifted))?;
            let proj = proj.as_euclidean().expect("euclidean").to_vec();
            for i in 0..d {
                p[i] = shifted[i] - proj[i];
            }
            y = proj;
        }
        let moved = y.iter().zip(&before).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if moved < 1e-15 {
            break;
        }
    }
    Ok(Point::euclidean(&y))
}

/// Intersection of the operator sets, exact where a closed form exists.
pub(super) fn intersect(space: SpaceKind, sets: &[ConvexSet]) -> Result<SolutionSet> {
    let nontrivial: Vec<&ConvexSet> = sets.iter().filter(|s| **s != ConvexSet::WholeSpace).collect();
    if nontrivial.is_empty() {
        return Ok(SolutionSet::Exact(ConvexSet::WholeSpace));
    }
    if nontrivial.iter().all(|s| *s == nontrivial[0]) {
        return Ok(SolutionSet::Exact(nontrivial[0].clone()));
    }
    match space {
        SpaceKind::Euclidean(d) => {
            if let Some((lo, hi)) = as_box(d, &nontrivial) {
                if lo.iter().zip(&hi).any(|(l, h)| l > h) {
                    return domain("operator sets have empty intersection");
                }
                return Ok(SolutionSet::Exact(ConvexSet::Box { lo, hi }));
            }
            let owned: Vec<ConvexSet> = nontrivial.into_iter().cloned().collect();
            let sol = SolutionSet::EuclideanIntersection(owned.clone());
            let p = sol.project(&Point::base_of(space))?;
            for s in &owned {
                if distance(&s.project(&p)?, &p)? > 1e-8 {
                    return domain("operator sets appear to have empty intersection");
                }
            }
            Ok(sol)
        }
        SpaceKind::Tripod => {
            let mut max = [f64::INFINITY; 3];
            for s in &nontrivial {
                match s {
                    ConvexSet::TripodSegment { max: m } => {
                        for i in 0..3 {
                            max[i] = max[i].min(m[i]);
                        }
                    }
                    _ => return Err(Error::Unsupported("tripod intersections beyond tripod segments".into())),
                }
            }
            Ok(SolutionSet::Exact(ConvexSet::TripodSegment { max }))
        }
        SpaceKind::HalfPlane => Err(Error::Unsupported("intersections of distinct half-plane sets".into())),
    }
}

fn as_box(d: usize, sets: &[&ConvexSet]) -> Option<(Vec<f64>, Vec<f64>)> {
    let mut lo = vec![f64::NEG_INFINITY; d];
    let mut hi = vec![f64::INFINITY; d];
    for s in sets {
        match s {
            ConvexSet::Box { lo: l, hi: h } => {
                for i in 0..d {
                    lo[i] = lo[i].max(l[i]);
                    hi[i] = hi[i].min(h[i]);
                }
            }
            ConvexSet::Halfspace { normal, offset } => {
                let axis: Vec<usize> = (0..d).filter(|&i| normal[i] != 0.0).collect();
                if axis.len() != 1 || normal[axis[0]].abs() != 1.0 {
                    return None;
                }
                let i = axis[0];
                if normal[i] > 0.0 {
                    hi[i] = hi[i].min(*offset);
                } else {
                    lo[i] = lo[i].max(-offset);
                }
            }
            _ => return None,
        }
    }
    Some((lo, hi))
}

const WEIGHT_TOL: f64 = 1e-12;

/// Minimisers of `t ↦ Σ w|t − u|` over the real line.
fn weighted_median(mut pts: Vec<(f64, f64)>) -> (f64, f64) {
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut cum = 0.0;
    for (i, &(u, w)) in pts.iter().enumerate() {
        cum += w;
        if cum >= 0.5 - WEIGHT_TOL {
            if (cum - 0.5).abs() <= WEIGHT_TOL {
                let hi = pts.get(i + 1).map_or(u, |p| p.0);
                return (u, hi);
            }
            return (u, u);
        }
    }
    let last = pts.last().expect("non-empty").0;
    (last, last)
}

fn coincident(atoms: &[Atom]) -> Result<bool> {
    for a in &atoms[1..] {
        if distance(&a.point, &atoms[0].point)? > 0.0 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Closed-form argmin of `Σ w_e f(e, ·)` for the supported shapes.
pub(super) fn mean_min_solution(space: SpaceKind, atoms: &[Atom], cost: CostKind) -> Result<ConvexSet> {
    if coincident(atoms)? {
        return Ok(ConvexSet::point(atoms[0].point.clone()));
    }
    let shape = || Error::NoClosedForm(super::shape_name(space, atoms, cost));
    match (cost, space) {
        (CostKind::HalfSquaredDistance, SpaceKind::Euclidean(d)) => {
            let mut m = vec![0.0; d];
            for a in atoms {
                let c = a.point.as_euclidean().expect("euclidean");
                for i in 0..d {
                    m[i] += a.weight * c[i];
                }
            }
            Ok(ConvexSet::point(Point::euclidean(&m)))
        }
        (CostKind::HalfSquaredDistance, SpaceKind::Tripod) => {
            for ray in 0..3u8 {
                let m: f64 = atoms
                    .iter()
                    .map(|a| match a.point {
                        Point::Tripod { ray: r, coord } if r == ray => a.weight * coord,
                        Point::Tripod { coord, .. } => -a.weight * coord,
                        _ => unreachable!(),
                    })
                    .sum();
                if m > 0.0 {
                    return Ok(ConvexSet::point(Point::tripod(ray, m)?));
                }
            }
            Ok(ConvexSet::point(Point::tripod_origin()))
        }
        (CostKind::HalfSquaredDistance, SpaceKind::HalfPlane) => {
            if atoms.len() == 2 {
                let p = geodesic_point(&atoms[0].point, &atoms[1].point, atoms[1].weight)?;
                return Ok(ConvexSet::point(p));
            }
            Err(shape())
        }
        (CostKind::Distance, SpaceKind::Tripod) => tripod_median(atoms),
        (CostKind::Distance, SpaceKind::Euclidean(1)) => {
            let (lo, hi) = weighted_median(
                atoms.iter().map(|a| (a.point.as_euclidean().expect("euclidean")[0], a.weight)).collect(),
            );
            Ok(segment_or_point(Point::euclidean(&[lo]), Point::euclidean(&[hi])))
        }
        (CostKind::Distance, _) => {
            if atoms.len() != 2 {
                return Err(shape());
            }
            let (a, b) = (&atoms[0], &atoms[1]);
            if (a.weight - b.weight).abs() <= WEIGHT_TOL {
                Ok(ConvexSet::Segment { a: a.point.clone(), b: b.point.clone() })
            } else if a.weight > b.weight {
                Ok(ConvexSet::point(a.point.clone()))
            } else {
                Ok(ConvexSet::point(b.point.clone()))
            }
        }
    }
}

fn segment_or_point(a: Point, b: Point) -> ConvexSet {
    if a == b {
        ConvexSet::point(a)
    } else {
        ConvexSet::Segment { a, b }
    }
}

fn tripod_median(atoms: &[Atom]) -> Result<ConvexSet> {
    // on ray i the mean cost is the 1-D median objective of the unfolded atoms
    let mut best = f64::INFINITY;
    let mut per_ray = Vec::new();
    for ray in 0..3u8 {
        let unfolded: Vec<(f64, f64)> = atoms
            .iter()
            .map(|a| match a.point {
                Point::Tripod { ray: r, coord } if r == ray => (coord, a.weight),
                Point::Tripod { coord, .. } => (-coord, a.weight),
                _ => unreachable!(),
            })
            .collect();
        let (lo, hi) = weighted_median(unfolded.clone());
        let (lo, hi) = (lo.max(0.0), hi.max(0.0));
        let value: f64 = unfolded.iter().map(|(u, w)| w * (lo - u).abs()).sum();
        best = best.min(value);
        per_ray.push((lo, hi, value));
    }
    let tol = 1e-12 * (1.0 + best.abs());
    let winners: Vec<(u8, f64, f64)> = per_ray
        .iter()
        .enumerate()
        .filter(|(_, p)| p.2 <= best + tol)
        .map(|(i, p)| (i as u8, p.0, p.1))
        .collect();
    if winners.iter().any(|w| w.1 == 0.0) {
        let mut max = [0.0; 3];
        for (ray, lo, hi) in winners {
            if lo == 0.0 {
                max[ray as usize] = hi;
            }
        }
        if max.iter().all(|m| *m == 0.0) {
            return Ok(ConvexSet::point(Point::tripod_origin()));
        }
        return Ok(ConvexSet::TripodSegment { max });
    }
    let (ray, lo, hi) = winners[0];
    Ok(segment_or_point(Point::tripod(ray, lo)?, Point::tripod(ray, hi)?))
}

/// Checks that a solution set lies inside `c`.
pub(super) fn contained_in(sol: &ConvexSet, c: &ConvexSet) -> Result<bool> {
    let pts: Vec<Point> = match sol {
        ConvexSet::Ball { center, radius } if *radius == 0.0 => vec![center.clone()],
        ConvexSet::Segment { a, b } => vec![a.clone(), b.clone()],
        ConvexSet::TripodSegment { max } => (0..3u8)
            .map(|i| Point::tripod(i, max[i as usize]))
            .collect::<Result<_>>()?,
        _ => return Ok(false),
    };
    for p in pts {
        if !c.contains(&p)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn medians() {
        assert_eq!(weighted_median(vec![(1.0, 0.5), (-1.0, 0.5)]), (-1.0, 1.0));
        assert_eq!(weighted_median(vec![(1.0, 0.7), (-1.0, 0.3)]), (1.0, 1.0));
        assert_eq!(weighted_median(vec![(0.0, 1.0 / 3.0), (1.0, 1.0 / 3.0), (2.0, 1.0 / 3.0)]), (1.0, 1.0));
    }

    #[test]
    fn intersection_of_axis_halfspaces_is_box() {
        let sets = vec![
            ConvexSet::Halfspace { normal: vec![1.0, 0.0], offset: 0.0 },
            ConvexSet::Halfspace { normal: vec![0.0, 1.0], offset: 0.0 },
        ];
        let s = intersect(SpaceKind::Euclidean(2), &sets).unwrap();
        assert_eq!(
            s,
            SolutionSet::Exact(ConvexSet::Box { lo: vec![f64::NEG_INFINITY; 2], hi: vec![0.0, 0.0] })
        );
    }

    #[test]
    fn dykstra_matches_exact_projection() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let sets = vec![
            ConvexSet::Halfspace { normal: vec![r, r], offset: 0.0 },
            ConvexSet::Ball { center: Point::euclidean(&[0.0, 0.0]), radius: 1.0 },
        ];
        let s = intersect(SpaceKind::Euclidean(2), &sets).unwrap();
        let p = s.project(&Point::euclidean(&[2.0, 2.0])).unwrap();
        assert!(distance(&p, &Point::euclidean(&[0.0, 0.0])).unwrap() < 1e-9);
        let q = s.project(&Point::euclidean(&[-3.0, 1.0])).unwrap();
        let nq = q.as_euclidean().unwrap();
        assert!(((nq[0] * nq[0] + nq[1] * nq[1]).sqrt() - 1.0).abs() < 1e-9);
        let empty = vec![
            ConvexSet::Ball { center: Point::euclidean(&[0.0, 0.0]), radius: 1.0 },
            ConvexSet::Ball { center: Point::euclidean(&[5.0, 0.0]), radius: 1.0 },
        ];
        assert!(intersect(SpaceKind::Euclidean(2), &empty).is_err());
    }
}
