pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
}

/// Projection onto `{y : <n, y> <= offset}` for unit `n`.
pub(crate) fn project_halfspace(normal: &[f64], offset: f64, x: &[f64]) -> Vec<f64> {
    let excess = dot(normal, x) - offset;
    if excess <= 0.0 {
        return x.to_vec();
    }
    x.iter().zip(normal).map(|(p, n)| p - excess * n).collect()
}

pub(crate) fn project_box(lo: &[f64], hi: &[f64], x: &[f64]) -> Vec<f64> {
    x.iter()
        .zip(lo.iter().zip(hi))
        .map(|(p, (l, h))| p.max(*l).min(*h))
        .collect()
}

pub(crate) fn project_segment(a: &[f64], b: &[f64], x: &[f64]) -> Vec<f64> {
    let ab: Vec<f64> = b.iter().zip(a).map(|(q, p)| q - p).collect();
    let len2 = dot(&ab, &ab);
    if len2 == 0.0 {
        return a.to_vec();
    }
    let ax: Vec<f64> = x.iter().zip(a).map(|(q, p)| q - p).collect();
    let t = (dot(&ax, &ab) / len2).clamp(0.0, 1.0);
    a.iter().zip(&ab).map(|(p, v)| p + t * v).collect()
}
