use super::Point;

pub(crate) fn canonical(ray: u8, coord: f64) -> Point {
    if coord <= 0.0 {
        Point::Tripod { ray: 0, coord: 0.0 }
    } else {
        Point::Tripod { ray, coord }
    }
}

pub(crate) fn dist(r1: u8, s: f64, r2: u8, t: f64) -> f64 {
    if r1 == r2 {
        (s - t).abs()
    } else {
        s + t
    }
}

pub(crate) fn geodesic(r1: u8, s: f64, r2: u8, u: f64, t: f64) -> Point {
    if r1 == r2 || s == 0.0 || u == 0.0 {
        // both points on one closed ray (the origin belongs to every ray)
        let ray = if s == 0.0 { r2 } else { r1 };
        return canonical(ray, s + t * (u - s));
    }
    let pos = t * (s + u);
    if pos <= s {
        canonical(r1, s - pos)
    } else {
        canonical(r2, pos - s)
    }
}

pub(crate) fn ray(ray: u8, coord: f64, end: u8, s: f64) -> Point {
    if coord == 0.0 || ray == end {
        canonical(end, coord + s)
    } else if s <= coord {
        canonical(ray, coord - s)
    } else {
        canonical(end, s - coord)
    }
}

/// Lowest-index ray different from `r`.
pub(crate) fn continuation(r: u8) -> u8 {
    if r == 0 {
        1
    } else {
        0
    }
}

pub(crate) fn extension_end(r1: u8, s: f64, r2: u8, t: f64) -> u8 {
    if t == 0.0 {
        return continuation(r1);
    }
    if s == 0.0 || r1 != r2 {
        return r2;
    }
    if t > s {
        r2
    } else {
        continuation(r1)
    }
}

/// Busemann function toward the end of ray `end`, normalised at the origin.
pub(crate) fn busemann(end: u8, ray: u8, coord: f64) -> f64 {
    if ray == end {
        -coord
    } else {
        coord
    }
}

pub(crate) fn project_segment(a: &Point, b: &Point, x: &Point) -> Point {
    let d = |p: &Point, q: &Point| match (p, q) {
        (Point::Tripod { ray: r1, coord: s }, Point::Tripod { ray: r2, coord: t }) => {
            dist(*r1, *s, *r2, *t)
        }
        _ => unreachable!("tripod points"),
    };
    let ab = d(a, b);
    if ab == 0.0 {
        return a.clone();
    }
    let along = ((d(a, x) + ab - d(b, x)) / 2.0).clamp(0.0, ab);
    match (a, b) {
        (Point::Tripod { ray: r1, coord: s }, Point::Tripod { ray: r2, coord: u }) => {
            geodesic(*r1, *s, *r2, *u, along / ab)
        }
        _ => unreachable!(),
    }
}
