use super::sort::dominates_values;
use crate::error::{Error, Result};

/// Exact hypervolume dominated by `points` and bounded by `reference`
/// (minimization). Points not strictly better than the reference in every
/// component contribute nothing. Supports 1 to 3 objectives.
pub fn hypervolume(points: &[Vec<f64>], reference: &[f64]) -> Result<f64> {
    let m = reference.len();
    let inside: Vec<&[f64]> = points
        .iter()
        .filter(|p| p.len() == m && p.iter().zip(reference).all(|(a, r)| a < r))
        .map(|p| p.as_slice())
        .collect();
    if points.iter().any(|p| p.len() != m) {
        return Err(Error::ObjectiveMismatch(format!("reference has {m} objectives")));
    }
    match m {
        1 => Ok(inside.iter().map(|p| reference[0] - p[0]).fold(0.0, f64::max)),
        2 => Ok(hv2(inside.iter().map(|p| (p[0], p[1])).collect(), reference[0], reference[1])),
        3 => Ok(hv3(&inside, reference)),
        _ => Err(Error::ObjectiveMismatch(format!("hypervolume for {m} objectives"))),
    }
}

fn hv2(mut pts: Vec<(f64, f64)>, r0: f64, r1: f64) -> f64 {
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut area = 0.0;
    let mut ceiling = r1;
    for (x, y) in pts {
        if y < ceiling {
            area += (r0 - x) * (ceiling - y);
            ceiling = y;
        }
    }
    area
}

fn hv3(pts: &[&[f64]], r: &[f64]) -> f64 {
    // slice along the third objective
    let mut order: Vec<&[f64]> = pts.iter().copied().filter(|p| !pts.iter().any(|q| dominates_values(q, p))).collect();
    order.sort_by(|a, b| a[2].total_cmp(&b[2]));
    let mut volume = 0.0;
    for k in 0..order.len() {
        let z_hi = if k + 1 < order.len() { order[k + 1][2] } else { r[2] };
        let depth = z_hi - order[k][2];
        if depth <= 0.0 {
            continue;
        }
        let slice: Vec<(f64, f64)> = order[..=k].iter().map(|p| (p[0], p[1])).collect();
        volume += depth * hv2(slice, r[0], r[1]);
    }
    volume
}
