use super::{distance, geodesic_point, Point};
use crate::error::{domain, Result};

/// `d²(γ(t), x) − [(1−t)d²(a,x) + t d²(b,x) − t(1−t)d²(a,b)]` with `γ`
/// the geodesic from `a` to `b`. Non-positive in every Hadamard space.
pub fn cn_residual(x: &Point, a: &Point, b: &Point, t: f64) -> Result<f64> {
    let m = geodesic_point(a, b, t)?;
    let sq = |p: &Point, q: &Point| distance(p, q).map(|d| d * d);
    Ok(sq(&m, x)? - ((1.0 - t) * sq(a, x)? + t * sq(b, x)? - t * (1.0 - t) * sq(a, b)?))
}

/// `d^q(x,y) − 2^{q−1}(d^q(x,o) + d^q(y,o))`, non-positive for `q >= 1`.
pub fn quasi_triangle_residual(q: f64, x: &Point, y: &Point, o: &Point) -> Result<f64> {
    if !(q >= 1.0) {
        return domain(format!("quasi-triangle exponent must be >= 1, got {q}"));
    }
    let pw = |p: &Point, r: &Point| distance(p, r).map(|d| d.powf(q));
    Ok(pw(x, y)? - 2f64.powf(q - 1.0) * (pw(x, o)? + pw(y, o)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cn_examples() {
        let e = |c: f64| Point::euclidean(&[c, 0.0]);
        assert_eq!(cn_residual(&e(0.0), &e(1.0), &e(-1.0), 0.5).unwrap(), 0.0);
        let x = Point::tripod(2, 1.0).unwrap();
        let a = Point::tripod(0, 1.0).unwrap();
        let b = Point::tripod(1, 1.0).unwrap();
        let r = cn_residual(&x, &a, &b, 0.5).unwrap();
        // midpoint is the origin: 1 - (0.5*4 + 0.5*4 - 0.25*4)
        assert_eq!(r, -2.0);
        assert_eq!(cn_residual(&x, &a, &b, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn quasi_triangle_examples() {
        let e = |c: f64| Point::euclidean(&[c, 0.0]);
        assert_eq!(quasi_triangle_residual(2.0, &e(1.0), &e(-1.0), &e(0.0)).unwrap(), 0.0);
        assert_eq!(quasi_triangle_residual(1.0, &e(3.0), &e(3.0), &e(3.0)).unwrap(), 0.0);
        assert!(quasi_triangle_residual(1.0, &e(0.0), &e(2.0), &e(5.0)).unwrap() <= 0.0);
        assert!(quasi_triangle_residual(0.5, &e(0.0), &e(1.0), &e(2.0)).is_err());
    }
}
