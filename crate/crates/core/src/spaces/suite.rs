//! Randomised geometry certification: metric axioms, geodesic parameter
//! identity, CN inequality, quasi-triangle inequality, projection and ray
//! checks on sampled configurations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{
    cn_residual, distance, euclidean, geodesic_point, quasi_triangle_residual, ray_point, ConvexSet,
    Direction, Point, SpaceKind, GEOM_TOL, TRIPOD_RAYS,
};
use crate::error::Result;

/// Draws a point from the sampling region of `space`.
///
/// Euclidean coordinates are uniform in `[-5, 5]`; tripod coordinates are
/// uniform in `[0, 5]` on a uniform ray; half-plane points have `x` uniform
/// in `[-3, 3]` and `ln y` uniform in `[-1.5, 1.5]`.
pub fn sample_point<R: Rng + ?Sized>(space: SpaceKind, rng: &mut R) -> Point {
    match space {
        SpaceKind::Euclidean(d) => {
            Point::Euclidean((0..d).map(|_| rng.random_range(-5.0..=5.0)).collect())
        }
        SpaceKind::Tripod => {
            let ray = rng.random_range(0..TRIPOD_RAYS);
            Point::tripod(ray, rng.random_range(0.0..=5.0)).expect("valid tripod sample")
        }
        SpaceKind::HalfPlane => Point::HalfPlane {
            x: rng.random_range(-3.0..=3.0),
            y: rng.random_range(-1.5f64..=1.5).exp(),
        },
    }
}

pub fn sample_direction<R: Rng + ?Sized>(space: SpaceKind, rng: &mut R) -> Direction {
    match space {
        SpaceKind::Euclidean(d) => loop {
            let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..=1.0)).collect();
            if euclidean::norm(&v) > 1e-3 {
                break Direction::euclidean(&v).expect("nonzero");
            }
        },
        SpaceKind::Tripod => Direction::TripodEnd(rng.random_range(0..TRIPOD_RAYS)),
        SpaceKind::HalfPlane => {
            if rng.random_bool(0.25) {
                Direction::HalfPlaneIdeal(None)
            } else {
                Direction::HalfPlaneIdeal(Some(rng.random_range(-3.0..=3.0)))
            }
        }
    }
}

/// Convex sets exercised when the caller supplies none.
pub fn default_sets(space: SpaceKind) -> Vec<ConvexSet> {
    match space {
        SpaceKind::Euclidean(d) => {
            let mut normal = vec![0.0; d];
            normal[0] = 1.0;
            let mut b = vec![0.0; d];
            b[0] = 2.0;
            let mut a = vec![-1.0; d];
            a[0] = -2.0;
            vec![
                ConvexSet::Halfspace { normal, offset: 0.5 },
                ConvexSet::Box { lo: vec![-1.0; d], hi: vec![1.0; d] },
                ConvexSet::Ball { center: Point::euclidean(&vec![1.0; d]), radius: 2.0 },
                ConvexSet::Segment { a: Point::euclidean(&a), b: Point::euclidean(&b) },
            ]
        }
        SpaceKind::Tripod => vec![
            ConvexSet::TripodSegment { max: [1.0, 2.0, 0.5] },
            ConvexSet::Ball { center: Point::tripod(1, 1.0).expect("valid"), radius: 2.0 },
            ConvexSet::Segment { a: Point::tripod(0, 2.0).expect("valid"), b: Point::tripod(2, 1.0).expect("valid") },
        ],
        SpaceKind::HalfPlane => vec![
            ConvexSet::Ball { center: Point::HalfPlane { x: 0.0, y: 1.0 }, radius: 1.0 },
            ConvexSet::Segment { a: Point::HalfPlane { x: -1.0, y: 0.5 }, b: Point::HalfPlane { x: 2.0, y: 2.0 } },
        ],
    }
}

/// Worst residual observed for every checked property; all are `<= 0`
/// up to [`GEOM_TOL`] when the geometry is correct.
#[derive(Clone, Debug, Serialize)]
pub struct GeometryReport {
    pub space: String,
    pub samples: usize,
    pub seed: u64,
    pub symmetry: f64,
    pub identity: f64,
    pub triangle: f64,
    pub geodesic_parameter: f64,
    pub cn: f64,
    pub quasi_triangle: [f64; 3],
    pub projection_nonexpansive: f64,
    pub projection_idempotent: f64,
    pub projection_variational: Option<f64>,
    pub ray_length: f64,
    pub ray_additivity: f64,
    pub passed: bool,
}

impl GeometryReport {
    fn worst(&self) -> f64 {
        let mut all = vec![
            self.symmetry,
            self.identity,
            self.triangle,
            self.geodesic_parameter,
            self.cn,
            self.projection_nonexpansive,
            self.projection_idempotent,
            self.ray_length,
            self.ray_additivity,
        ];
        all.extend(self.quasi_triangle);
        all.extend(self.projection_variational);
        all.into_iter().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Runs every geometry check on `samples` random configurations.
pub fn run_geometry_suite(space: SpaceKind, samples: usize, seed: u64, sets: &[ConvexSet]) -> Result<GeometryReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let owned;
    let sets = if sets.is_empty() {
        owned = default_sets(space);
        &owned[..]
    } else {
        sets
    };
    for s in sets {
        s.validate(space)?;
    }
    let mut rep = GeometryReport {
        space: space.to_string(),
        samples,
        seed,
        symmetry: 0.0,
        identity: 0.0,
        triangle: f64::NEG_INFINITY,
        geodesic_parameter: 0.0,
        cn: f64::NEG_INFINITY,
        quasi_triangle: [f64::NEG_INFINITY; 3],
        projection_nonexpansive: f64::NEG_INFINITY,
        projection_idempotent: 0.0,
        projection_variational: None,
        ray_length: 0.0,
        ray_additivity: 0.0,
        passed: false,
    };
    let euclid = matches!(space, SpaceKind::Euclidean(_));
    if euclid {
        rep.projection_variational = Some(f64::NEG_INFINITY);
    }
    for i in 0..samples {
        let x = sample_point(space, &mut rng);
        let y = sample_point(space, &mut rng);
        let z = sample_point(space, &mut rng);
        let w = sample_point(space, &mut rng);
        let t: f64 = rng.random_range(0.0..=1.0);

        let dxy = distance(&x, &y)?;
        rep.symmetry = rep.symmetry.max((dxy - distance(&y, &x)?).abs());
        rep.identity = rep.identity.max(distance(&x, &x)?);
        rep.triangle = rep.triangle.max(distance(&x, &z)? - dxy - distance(&y, &z)?);

        let g = geodesic_point(&x, &y, t)?;
        let err = (distance(&x, &g)? - t * dxy).abs().max((distance(&g, &y)? - (1.0 - t) * dxy).abs());
        rep.geodesic_parameter = rep.geodesic_parameter.max(err);

        rep.cn = rep.cn.max(cn_residual(&w, &x, &y, t)?);
        for (k, q) in [1.0, 2.0, 3.0].into_iter().enumerate() {
            rep.quasi_triangle[k] = rep.quasi_triangle[k].max(quasi_triangle_residual(q, &x, &y, &z)?);
        }

        let set = &sets[i % sets.len()];
        let px = set.project(&x)?;
        let py = set.project(&y)?;
        rep.projection_nonexpansive = rep.projection_nonexpansive.max(distance(&px, &py)? - dxy);
        rep.projection_idempotent = rep.projection_idempotent.max(distance(&set.project(&px)?, &px)?);
        if let (Some(v), Point::Euclidean(xc), Point::Euclidean(pc), Point::Euclidean(cc)) =
            (rep.projection_variational.as_mut(), &x, &px, &set.project(&z)?)
        {
            let u: Vec<f64> = xc.iter().zip(pc.iter()).map(|(a, b)| a - b).collect();
            let c: Vec<f64> = cc.iter().zip(pc.iter()).map(|(a, b)| a - b).collect();
            *v = v.max(euclidean::dot(&u, &c));
        }

        let dir = sample_direction(space, &mut rng);
        let s1: f64 = rng.random_range(0.0..=3.0);
        let s2: f64 = rng.random_range(0.0..=3.0);
        let r1 = ray_point(&x, &dir, s1)?;
        rep.ray_length = rep.ray_length.max((distance(&x, &r1)? - s1).abs());
        let r12 = ray_point(&r1, &dir, s2)?;
        let direct = ray_point(&x, &dir, s1 + s2)?;
        rep.ray_additivity = rep.ray_additivity.max(distance(&r12, &direct)?);
    }
    rep.passed = rep.symmetry == 0.0 && rep.worst() <= GEOM_TOL;
    Ok(rep)
}
