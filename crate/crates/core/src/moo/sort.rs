use crate::cost::ObjectiveVector;
use crate::error::{Error, Result};

/// `u` dominates `v` under minimization.
pub fn dominates_values(u: &[f64], v: &[f64]) -> bool {
    let mut strict = false;
    for (a, b) in u.iter().zip(v) {
        if a > b {
            return false;
        }
        if a < b {
            strict = true;
        }
    }
    strict
}

/// `u` dominates `v`; the vectors must share names and order.
pub fn dominates(u: &ObjectiveVector, v: &ObjectiveVector) -> Result<bool> {
    if !u.same_layout(v) || u.len() != v.len() {
        return Err(Error::ObjectiveMismatch(format!("{:?} vs {:?}", u.names, v.names)));
    }
    Ok(dominates_values(&u.values, &v.values))
}

/// Fast non-dominated sorting. Fronts are returned best first, indices
/// ascending within each front.
pub fn non_dominated_sort(points: &[Vec<f64>]) -> Result<Vec<Vec<usize>>> {
    let n = points.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let m = points[0].len();
    if let Some(bad) = points.iter().find(|p| p.len() != m) {
        return Err(Error::ObjectiveMismatch(format!("{} vs {} objectives", bad.len(), m)));
    }
    let mut dominated_by = vec![0usize; n];
    let mut dominates_list: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            if dominates_values(&points[i], &points[j]) {
                dominates_list[i].push(j);
                dominated_by[j] += 1;
            } else if dominates_values(&points[j], &points[i]) {
                dominates_list[j].push(i);
                dominated_by[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominates_list[i] {
                dominated_by[j] -= 1;
                if dominated_by[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    Ok(fronts)
}

/// Crowding distance of each member of one front. Extremes of every
/// objective get `+inf`; fronts of at most two points are all `+inf`.
pub fn crowding_distance(front: &[Vec<f64>]) -> Vec<f64> {
    let n = front.len();
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let m = front[0].len();
    let mut dist = vec![0.0; n];
    let mut order: Vec<usize> = (0..n).collect();
    for k in 0..m {
        order.sort_by(|&a, &b| front[a][k].total_cmp(&front[b][k]).then(a.cmp(&b)));
        let lo = front[order[0]][k];
        let hi = front[order[n - 1]][k];
        dist[order[0]] = f64::INFINITY;
        dist[order[n - 1]] = f64::INFINITY;
        let span = hi - lo;
        if !(span > 0.0 && span.is_finite()) {
            continue;
        }
        for w in 1..n - 1 {
            let gap = front[order[w + 1]][k] - front[order[w - 1]][k];
            dist[order[w]] += gap / span;
        }
    }
    dist
}
