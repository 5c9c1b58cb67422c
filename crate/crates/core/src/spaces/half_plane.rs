use num_complex::Complex64;

use super::Point;

pub(crate) fn dist(x1: f64, y1: f64, x2: f64, y2: f64) -> f64 {
    let chord = (x1 - x2).hypot(y1 - y2);
    2.0 * (chord / (2.0 * (y1 * y2).sqrt())).asinh()
}

/// Disk coordinate of `(x, y)` in the Poincaré disk centred at `(bx, by)`.
fn to_disk(bx: f64, by: f64, x: f64, y: f64) -> Complex64 {
    let w = Complex64::new((x - bx) / by, y / by);
    let i = Complex64::i();
    (w - i) / (w + i)
}

fn from_disk(bx: f64, by: f64, zeta: Complex64) -> Point {
    let i = Complex64::i();
    let w = i * (Complex64::new(1.0, 0.0) + zeta) / (Complex64::new(1.0, 0.0) - zeta);
    Point::HalfPlane {
        x: bx + by * w.re,
        y: (by * w.im).max(f64::MIN_POSITIVE),
    }
}

pub(crate) fn geodesic(x1: f64, y1: f64, x2: f64, y2: f64, t: f64) -> Point {
    let d = dist(x1, y1, x2, y2);
    if d == 0.0 {
        return Point::HalfPlane { x: x1, y: y1 };
    }
    let zeta = to_disk(x1, y1, x2, y2);
    let unit = zeta / zeta.norm();
    from_disk(x1, y1, unit * (t * d / 2.0).tanh())
}

/// Ray toward the ideal point `xi` (`None` is `∞`), computed by moving `xi`
/// to `∞` with the isometry `z ↦ -1/(z - xi)`.
pub(crate) fn ray(x: f64, y: f64, xi: Option<f64>, s: f64) -> Point {
    match xi {
        None => Point::HalfPlane { x, y: y * s.exp() },
        Some(xi) => {
            let z = Complex64::new(x - xi, y);
            let w = -z.inv();
            let moved = Complex64::new(w.re, w.im * s.exp());
            let back = -moved.inv();
            Point::HalfPlane {
                x: xi + back.re,
                y: back.im.max(f64::MIN_POSITIVE),
            }
        }
    }
}

pub(crate) fn extension_ideal(x1: f64, y1: f64, x2: f64, y2: f64) -> Option<f64> {
    let zeta = to_disk(x1, y1, x2, y2);
    let u = zeta / zeta.norm();
    let one = Complex64::new(1.0, 0.0);
    if (one - u).norm() < 1e-14 {
        return None;
    }
    let w = Complex64::i() * (one + u) / (one - u);
    Some(x1 + y1 * w.re)
}

/// Busemann function toward `xi`, up to an additive constant.
pub(crate) fn busemann(xi: Option<f64>, x: f64, y: f64) -> f64 {
    match xi {
        None => -y.ln(),
        Some(xi) => -(y / ((x - xi) * (x - xi) + y * y)).ln(),
    }
}

/// Projection onto the geodesic segment `[a, b]`: the foot of the
/// perpendicular on the full geodesic, found in the Klein model centred at
/// `a` where perpendiculars to a diameter are Euclidean perpendiculars, then
/// clamped to the segment.
pub(crate) fn project_segment(a: (f64, f64), b: (f64, f64), x: (f64, f64)) -> Point {
    let dab = dist(a.0, a.1, b.0, b.1);
    if dab == 0.0 {
        return Point::HalfPlane { x: a.0, y: a.1 };
    }
    let zb = to_disk(a.0, a.1, b.0, b.1);
    let u = zb / zb.norm();
    let zx = to_disk(a.0, a.1, x.0, x.1);
    let klein = zx * (2.0 / (1.0 + zx.norm_sqr()));
    let along = (klein * u.conj()).re.clamp(-1.0, 1.0);
    let t = (along.atanh() / dab).clamp(0.0, 1.0);
    geodesic(a.0, a.1, b.0, b.1, t)
}
