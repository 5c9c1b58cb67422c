use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{distance, euclidean, geodesic_point, half_plane, tripod, Point, SpaceKind, GEOM_TOL};
use crate::error::{domain, Error, Result};

/// A non-empty closed convex subset of one of the spaces.
///
/// `Halfspace` is `{y : <normal, y> <= offset}`. `Box` bounds may be
/// infinite; in JSON an infinite bound is written as `null`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ConvexSet {
    WholeSpace,
    Ball { center: Point, radius: f64 },
    Halfspace { normal: Vec<f64>, offset: f64 },
    Box {
        #[serde(serialize_with = "ser_bounds", deserialize_with = "de_lo")]
        lo: Vec<f64>,
        #[serde(serialize_with = "ser_bounds", deserialize_with = "de_hi")]
        hi: Vec<f64>,
    },
    TripodSegment { max: [f64; 3] },
    Segment { a: Point, b: Point },
}

fn ser_bounds<S: Serializer>(v: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    let opt: Vec<Option<f64>> = v.iter().map(|x| x.is_finite().then_some(*x)).collect();
    opt.serialize(s)
}

fn de_bounds<'de, D: Deserializer<'de>>(d: D, fill: f64) -> std::result::Result<Vec<f64>, D::Error> {
    let opt: Vec<Option<f64>> = Vec::deserialize(d)?;
    Ok(opt.into_iter().map(|x| x.unwrap_or(fill)).collect())
}

fn de_lo<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
    de_bounds(d, f64::NEG_INFINITY)
}

fn de_hi<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
    de_bounds(d, f64::INFINITY)
}

impl ConvexSet {
    pub fn point(p: Point) -> ConvexSet {
        ConvexSet::Ball { center: p, radius: 0.0 }
    }

    /// Checks that the set is well formed and lives in `space`.
    pub fn validate(&self, space: SpaceKind) -> Result<()> {
        let euclid_dim = |what: &str, n: usize| match space {
            SpaceKind::Euclidean(d) if d == n => Ok(()),
            SpaceKind::Euclidean(d) => domain(format!("{what} has dimension {n}, space has {d}")),
            other => Err(Error::Unsupported(format!("{what} in {other}"))),
        };
        match self {
            ConvexSet::WholeSpace => Ok(()),
            ConvexSet::Ball { center, radius } => {
                if center.space() != space {
                    return Err(Error::SpaceMismatch(center.space(), space));
                }
                if !(*radius >= 0.0) || !radius.is_finite() {
                    return domain(format!("ball radius must be finite and >= 0, got {radius}"));
                }
                Ok(())
            }
            ConvexSet::Halfspace { normal, offset } => {
                euclid_dim("halfspace normal", normal.len())?;
                if (euclidean::norm(normal) - 1.0).abs() > 1e-12 || !offset.is_finite() {
                    return domain("halfspace needs a unit normal and a finite offset");
                }
                Ok(())
            }
            ConvexSet::Box { lo, hi } => {
                euclid_dim("box", lo.len())?;
                if lo.len() != hi.len() {
                    return domain("box bounds have different lengths");
                }
                if lo.iter().zip(hi).any(|(l, h)| !(l <= h) || *l == f64::INFINITY || *h == f64::NEG_INFINITY) {
                    return domain("box needs lo <= hi in every coordinate");
                }
                Ok(())
            }
            ConvexSet::TripodSegment { max } => {
                if space != SpaceKind::Tripod {
                    return Err(Error::Unsupported(format!("tripod segment in {space}")));
                }
                if max.iter().any(|m| !(*m >= 0.0)) {
                    return domain("tripod segment bounds must be >= 0");
                }
                Ok(())
            }
            ConvexSet::Segment { a, b } => {
                if a.space() != space {
                    return Err(Error::SpaceMismatch(a.space(), space));
                }
                if b.space() != space {
                    return Err(Error::SpaceMismatch(b.space(), space));
                }
                Ok(())
            }
        }
    }

    /// Metric projection of `x` onto the set.
    pub fn project(&self, x: &Point) -> Result<Point> {
        self.validate(x.space())?;
        match (self, x) {
            (ConvexSet::WholeSpace, _) => Ok(x.clone()),
            (ConvexSet::Ball { center, radius }, _) => {
                let d = distance(center, x)?;
                if d <= *radius {
                    Ok(x.clone())
                } else {
                    geodesic_point(center, x, radius / d)
                }
            }
            (ConvexSet::Halfspace { normal, offset }, Point::Euclidean(c)) => {
                Ok(Point::euclidean(&euclidean::project_halfspace(normal, *offset, c)))
            }
            (ConvexSet::Box { lo, hi }, Point::Euclidean(c)) => {
                Ok(Point::euclidean(&euclidean::project_box(lo, hi, c)))
            }
            (ConvexSet::TripodSegment { max }, Point::Tripod { ray, coord }) => {
                Ok(tripod::canonical(*ray, coord.min(max[*ray as usize])))
            }
            (ConvexSet::Segment { a, b }, _) => match (a, b, x) {
                (Point::Euclidean(p), Point::Euclidean(q), Point::Euclidean(c)) => {
                    Ok(Point::euclidean(&euclidean::project_segment(p, q, c)))
                }
                (Point::Tripod { .. }, Point::Tripod { .. }, Point::Tripod { .. }) => {
                    Ok(tripod::project_segment(a, b, x))
                }
                (
                    Point::HalfPlane { x: ax, y: ay },
                    Point::HalfPlane { x: bx, y: by },
                    Point::HalfPlane { x: cx, y: cy },
                ) => Ok(half_plane::project_segment((*ax, *ay), (*bx, *by), (*cx, *cy))),
                _ => unreachable!("validated"),
            },
            _ => unreachable!("validated"),
        }
    }

    /// Whether `x` lies in the set up to the geometric tolerance.
    pub fn contains(&self, x: &Point) -> Result<bool> {
        Ok(distance(&self.project(x)?, x)? <= GEOM_TOL)
    }

    /// A point of the set (used as a default reference point).
    pub fn some_point(&self, space: SpaceKind) -> Result<Point> {
        self.project(&Point::base_of(space))
    }
}
