//! Geodesic metric-space kernel.
//!
//! Three concrete Hadamard spaces are supported: Euclidean space of any
//! dimension, the tripod (three half-lines glued at a common origin, the
//! smallest branching R-tree) and the hyperbolic upper half-plane. Every
//! operation dispatches on the [`Point`] variant and rejects mixed-space
//! arguments with [`Error::SpaceMismatch`].

use std::fmt;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{domain, Error, Result};

mod convex;
mod euclidean;
mod half_plane;
mod residuals;
pub mod suite;
mod tripod;

pub use convex::ConvexSet;
pub use residuals::{cn_residual, quasi_triangle_residual};

/// Absolute tolerance used by every geometric check in the crate.
pub const GEOM_TOL: f64 = 1e-10;

/// Coordinate storage for Euclidean points.
pub type Coords = SmallVec<[f64; 4]>;

/// Number of rays of the tripod.
pub const TRIPOD_RAYS: u8 = 3;

/// The space a point lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpaceKind {
    Euclidean(usize),
    Tripod,
    HalfPlane,
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceKind::Euclidean(d) => write!(f, "euclidean(d={d})"),
            SpaceKind::Tripod => f.write_str("tripod"),
            SpaceKind::HalfPlane => f.write_str("half_plane"),
        }
    }
}

/// Space tag as written in configuration files (dimension-free).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceTag {
    Euclidean,
    Tripod,
    HalfPlane,
}

impl SpaceKind {
    pub fn tag(self) -> SpaceTag {
        match self {
            SpaceKind::Euclidean(_) => SpaceTag::Euclidean,
            SpaceKind::Tripod => SpaceTag::Tripod,
            SpaceKind::HalfPlane => SpaceTag::HalfPlane,
        }
    }
}

/// A point of one of the supported spaces.
///
/// Construct tripod and half-plane points through [`Point::tripod`] and
/// [`Point::half_plane`], which enforce the canonical form (the tripod origin
/// always carries ray 0) and `y > 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PointRepr", into = "PointRepr")]
pub enum Point {
    Euclidean(Coords),
    Tripod { ray: u8, coord: f64 },
    HalfPlane { x: f64, y: f64 },
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum PointRepr {
    Euclidean(Vec<f64>),
    Tripod { ray: u8, coord: f64 },
    HalfPlane { x: f64, y: f64 },
}

impl TryFrom<PointRepr> for Point {
    type Error = Error;

    fn try_from(repr: PointRepr) -> Result<Self> {
        match repr {
            PointRepr::Euclidean(v) => {
                if v.is_empty() || v.iter().any(|c| !c.is_finite()) {
                    return domain("euclidean point needs at least one finite coordinate");
                }
                Ok(Point::Euclidean(v.into_iter().collect()))
            }
            PointRepr::Tripod { ray, coord } => Point::tripod(ray, coord),
            PointRepr::HalfPlane { x, y } => Point::half_plane(x, y),
        }
    }
}

impl From<Point> for PointRepr {
    fn from(p: Point) -> Self {
        match p {
            Point::Euclidean(c) => PointRepr::Euclidean(c.to_vec()),
            Point::Tripod { ray, coord } => PointRepr::Tripod { ray, coord },
            Point::HalfPlane { x, y } => PointRepr::HalfPlane { x, y },
        }
    }
}

impl Point {
    pub fn euclidean(coords: &[f64]) -> Point {
        assert!(!coords.is_empty(), "euclidean point needs dimension >= 1");
        Point::Euclidean(coords.iter().copied().collect())
    }

    pub fn tripod(ray: u8, coord: f64) -> Result<Point> {
        if ray >= TRIPOD_RAYS {
            return domain(format!("tripod ray {ray} out of range 0..3"));
        }
        if !(coord >= 0.0) || !coord.is_finite() {
            return domain(format!("tripod coordinate must be finite and >= 0, got {coord}"));
        }
        Ok(tripod::canonical(ray, coord))
    }

    pub fn tripod_origin() -> Point {
        Point::Tripod { ray: 0, coord: 0.0 }
    }

    pub fn half_plane(x: f64, y: f64) -> Result<Point> {
        if !x.is_finite() || !y.is_finite() || !(y > 0.0) {
            return domain(format!("half-plane point needs finite x and y > 0, got ({x}, {y})"));
        }
        Ok(Point::HalfPlane { x, y })
    }

    pub fn space(&self) -> SpaceKind {
        match self {
            Point::Euclidean(c) => SpaceKind::Euclidean(c.len()),
            Point::Tripod { .. } => SpaceKind::Tripod,
            Point::HalfPlane { .. } => SpaceKind::HalfPlane,
        }
    }

    /// A fixed reference point of the space (origin, tripod origin, `i`).
    pub fn base_of(space: SpaceKind) -> Point {
        match space {
            SpaceKind::Euclidean(d) => Point::Euclidean(SmallVec::from_elem(0.0, d)),
            SpaceKind::Tripod => Point::tripod_origin(),
            SpaceKind::HalfPlane => Point::HalfPlane { x: 0.0, y: 1.0 },
        }
    }

    pub fn as_euclidean(&self) -> Option<&[f64]> {
        match self {
            Point::Euclidean(c) => Some(c),
            _ => None,
        }
    }
}

/// A point at infinity: the class of geodesic rays asymptotic to a given one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Direction {
    /// Unit vector in Euclidean space.
    EuclideanDir(Vec<f64>),
    /// The end of a tripod ray.
    TripodEnd(u8),
    /// A point of the ideal boundary of the half-plane; `None` is `∞`.
    HalfPlaneIdeal(Option<f64>),
}

impl Direction {
    /// Normalises `v`; fails on the zero vector.
    pub fn euclidean(v: &[f64]) -> Result<Direction> {
        let n = euclidean::norm(v);
        if !(n > 0.0) || !n.is_finite() {
            return domain("euclidean direction must be a nonzero finite vector");
        }
        Ok(Direction::EuclideanDir(v.iter().map(|c| c / n).collect()))
    }

    pub fn validate_for(&self, space: SpaceKind) -> Result<()> {
        match (self, space) {
            (Direction::EuclideanDir(u), SpaceKind::Euclidean(d)) => {
                if u.len() != d {
                    return domain(format!("direction has dimension {}, space has {d}", u.len()));
                }
                if (euclidean::norm(u) - 1.0).abs() > 1e-12 {
                    return domain("euclidean direction must have unit norm");
                }
                Ok(())
            }
            (Direction::TripodEnd(r), SpaceKind::Tripod) if *r < TRIPOD_RAYS => Ok(()),
            (Direction::HalfPlaneIdeal(xi), SpaceKind::HalfPlane) => match xi {
                Some(v) if !v.is_finite() => domain("ideal boundary point must be finite or null"),
                _ => Ok(()),
            },
            _ => domain(format!("direction {self:?} is not valid in {space}")),
        }
    }
}

fn same_space(x: &Point, y: &Point) -> Result<()> {
    if x.space() == y.space() {
        Ok(())
    } else {
        Err(Error::SpaceMismatch(x.space(), y.space()))
    }
}

/// Geodesic distance.
pub fn distance(x: &Point, y: &Point) -> Result<f64> {
    match (x, y) {
        (Point::Euclidean(a), Point::Euclidean(b)) if a.len() == b.len() => {
            Ok(euclidean::dist(a, b))
        }
        (Point::Tripod { ray: r1, coord: s }, Point::Tripod { ray: r2, coord: t }) => {
            Ok(tripod::dist(*r1, *s, *r2, *t))
        }
        (Point::HalfPlane { x: x1, y: y1 }, Point::HalfPlane { x: x2, y: y2 }) => {
            Ok(half_plane::dist(*x1, *y1, *x2, *y2))
        }
        _ => Err(Error::SpaceMismatch(x.space(), y.space())),
    }
}

/// The point `(1-t)x ⊕ ty` at fraction `t` along the geodesic from `x` to `y`.
pub fn geodesic_point(x: &Point, y: &Point, t: f64) -> Result<Point> {
    if !(0.0..=1.0).contains(&t) {
        return domain(format!("geodesic parameter must lie in [0,1], got {t}"));
    }
    same_space(x, y)?;
    if t == 0.0 {
        return Ok(x.clone());
    }
    if t == 1.0 {
        return Ok(y.clone());
    }
    Ok(match (x, y) {
        (Point::Euclidean(a), Point::Euclidean(b)) => {
            Point::Euclidean(a.iter().zip(b).map(|(p, q)| p + t * (q - p)).collect())
        }
        (Point::Tripod { ray: r1, coord: s }, Point::Tripod { ray: r2, coord: u }) => {
            tripod::geodesic(*r1, *s, *r2, *u, t)
        }
        (Point::HalfPlane { x: x1, y: y1 }, Point::HalfPlane { x: x2, y: y2 }) => {
            half_plane::geodesic(*x1, *y1, *x2, *y2, t)
        }
        _ => unreachable!("checked by same_space"),
    })
}

/// The point at distance `s` from `x` along the unique ray from `x` toward `dir`.
pub fn ray_point(x: &Point, dir: &Direction, s: f64) -> Result<Point> {
    if !(s >= 0.0) || !s.is_finite() {
        return domain(format!("ray parameter must be finite and >= 0, got {s}"));
    }
    dir.validate_for(x.space())?;
    Ok(match (x, dir) {
        (Point::Euclidean(a), Direction::EuclideanDir(u)) => {
            Point::Euclidean(a.iter().zip(u).map(|(p, v)| p + s * v).collect())
        }
        (Point::Tripod { ray, coord }, Direction::TripodEnd(end)) => {
            tripod::ray(*ray, *coord, *end, s)
        }
        (Point::HalfPlane { x: x1, y: y1 }, Direction::HalfPlaneIdeal(xi)) => {
            half_plane::ray(*x1, *y1, *xi, s)
        }
        _ => unreachable!("checked by validate_for"),
    })
}

/// Direction of the geodesic ray issuing from `from` and passing through
/// `through` (geodesic extension). At the tripod origin a geodesic arriving
/// along ray `i` continues along the lowest-index ray other than `i`.
pub fn extension_direction(from: &Point, through: &Point) -> Result<Direction> {
    same_space(from, through)?;
    if distance(from, through)? == 0.0 {
        return domain("extension direction needs two distinct points");
    }
    Ok(match (from, through) {
        (Point::Euclidean(a), Point::Euclidean(b)) => {
            let v: Vec<f64> = b.iter().zip(a).map(|(q, p)| q - p).collect();
            Direction::euclidean(&v)?
        }
        (Point::Tripod { ray: r1, coord: s }, Point::Tripod { ray: r2, coord: t }) => {
            Direction::TripodEnd(tripod::extension_end(*r1, *s, *r2, *t))
        }
        (Point::HalfPlane { x: x1, y: y1 }, Point::HalfPlane { x: x2, y: y2 }) => {
            Direction::HalfPlaneIdeal(half_plane::extension_ideal(*x1, *y1, *x2, *y2))
        }
        _ => unreachable!(),
    })
}

/// Busemann function `b_ξ(x) = lim_t d(x, r(t)) - t` for the ray `r` from
/// `basepoint` toward `dir`, so that `b_ξ(basepoint) = 0`.
pub fn busemann_function(dir: &Direction, basepoint: &Point, x: &Point) -> Result<f64> {
    same_space(basepoint, x)?;
    dir.validate_for(x.space())?;
    Ok(match (dir, basepoint, x) {
        (Direction::EuclideanDir(u), Point::Euclidean(p), Point::Euclidean(q)) => {
            p.iter().zip(q).zip(u).map(|((a, b), c)| (a - b) * c).sum()
        }
        (Direction::TripodEnd(end), Point::Tripod { ray: rb, coord: cb }, Point::Tripod { ray, coord }) => {
            tripod::busemann(*end, *ray, *coord) - tripod::busemann(*end, *rb, *cb)
        }
        (Direction::HalfPlaneIdeal(xi), Point::HalfPlane { x: xb, y: yb }, Point::HalfPlane { x: xq, y: yq }) => {
            half_plane::busemann(*xi, *xq, *yq) - half_plane::busemann(*xi, *xb, *yb)
        }
        _ => unreachable!(),
    })
}

/// Metric projection onto a non-empty closed convex set.
pub fn project_convex(set: &ConvexSet, x: &Point) -> Result<Point> {
    set.project(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(c: &[f64]) -> Point {
        Point::euclidean(c)
    }

    fn tp(r: u8, c: f64) -> Point {
        Point::tripod(r, c).unwrap()
    }

    #[test]
    fn distance_examples() {
        assert_eq!(distance(&e(&[0.0, 0.0]), &e(&[3.0, 4.0])).unwrap(), 5.0);
        assert_eq!(distance(&tp(0, 2.0), &tp(1, 3.0)).unwrap(), 5.0);
        assert_eq!(distance(&tp(1, 2.0), &tp(1, 3.0)).unwrap(), 1.0);
    }

    #[test]
    fn mixed_spaces_rejected() {
        let err = distance(&e(&[0.0]), &tp(0, 1.0)).unwrap_err();
        assert!(matches!(err, Error::SpaceMismatch(..)));
        assert!(distance(&e(&[0.0]), &e(&[0.0, 1.0])).is_err());
    }

    #[test]
    fn tripod_origin_is_canonical() {
        assert_eq!(tp(2, 0.0), Point::tripod_origin());
        assert!(Point::tripod(3, 1.0).is_err());
        assert!(Point::tripod(0, -1.0).is_err());
        assert!(Point::half_plane(0.0, 0.0).is_err());
    }

    #[test]
    fn geodesic_examples() {
        let m = geodesic_point(&e(&[0.0, 0.0]), &e(&[3.0, 4.0]), 0.5).unwrap();
        assert_eq!(m, e(&[1.5, 2.0]));
        let o = geodesic_point(&tp(0, 2.0), &tp(1, 3.0), 0.4).unwrap();
        assert_eq!(o, Point::tripod_origin());
        let x = Point::half_plane(0.3, 2.0).unwrap();
        let y = Point::half_plane(-1.0, 0.5).unwrap();
        assert_eq!(geodesic_point(&x, &y, 0.0).unwrap(), x);
        assert!(geodesic_point(&x, &y, 1.5).is_err());
        assert!(geodesic_point(&x, &y, -0.1).is_err());
    }

    #[test]
    fn ray_examples() {
        let r = ray_point(&e(&[0.0, 0.0]), &Direction::euclidean(&[1.0, 0.0]).unwrap(), 2.0).unwrap();
        assert_eq!(r, e(&[2.0, 0.0]));
        assert_eq!(ray_point(&tp(0, 1.0), &Direction::TripodEnd(1), 3.0).unwrap(), tp(1, 2.0));
        assert_eq!(ray_point(&tp(0, 1.0), &Direction::TripodEnd(0), 3.0).unwrap(), tp(0, 4.0));
        assert!(ray_point(&tp(0, 1.0), &Direction::TripodEnd(0), -1.0).is_err());
        assert!(ray_point(&tp(0, 1.0), &Direction::TripodEnd(5), 1.0).is_err());
    }

    #[test]
    fn half_plane_vertical_ray_is_exponential() {
        let x = Point::half_plane(0.5, 1.0).unwrap();
        let r = ray_point(&x, &Direction::HalfPlaneIdeal(None), 2.0).unwrap();
        match r {
            Point::HalfPlane { x, y } => {
                assert!((x - 0.5).abs() < 1e-12);
                assert!((y - 2f64.exp()).abs() < 1e-10);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn tripod_extension_follows_lowest_index_rule() {
        // arriving at the origin along ray 0 continues on ray 1
        assert_eq!(extension_direction(&tp(0, 2.0), &Point::tripod_origin()).unwrap(), Direction::TripodEnd(1));
        // arriving along ray 1 continues on ray 0
        assert_eq!(extension_direction(&tp(1, 2.0), &tp(1, 1.0)).unwrap(), Direction::TripodEnd(0));
        assert_eq!(extension_direction(&tp(1, 2.0), &tp(2, 1.0)).unwrap(), Direction::TripodEnd(2));
        assert_eq!(extension_direction(&tp(1, 1.0), &tp(1, 2.0)).unwrap(), Direction::TripodEnd(1));
    }

    #[test]
    fn euclidean_busemann_closed_form() {
        let u = Direction::euclidean(&[1.0, 0.0]).unwrap();
        let b = busemann_function(&u, &e(&[0.0, 0.0]), &e(&[2.0, 0.0])).unwrap();
        assert_eq!(b, -2.0);
    }

    #[test]
    fn point_json_roundtrip_and_validation() {
        let p: Point = serde_json::from_str(r#"{"tripod":{"ray":2,"coord":0.0}}"#).unwrap();
        assert_eq!(p, Point::tripod_origin());
        assert!(serde_json::from_str::<Point>(r#"{"half_plane":{"x":0.0,"y":-1.0}}"#).is_err());
        let q = e(&[1.0, -2.5]);
        let s = serde_json::to_string(&q).unwrap();
        assert_eq!(serde_json::from_str::<Point>(&s).unwrap(), q);
    }
}
