//! Greedy ball-cover partition of a point set.
//!
//! Processing points in stream order, every still-unassigned point seeds a
//! new group and absorbs all unassigned points within `alpha` of it. The
//! group count is a lower bound on the minimum number of diameter-`alpha`
//! groups, and within a constant factor of it in fixed dimension.

use l0sketch::Point;

/// Groups as index lists into `points`, in creation order.
pub fn greedy_partition(points: &[Point], alpha: f64) -> Vec<Vec<usize>> {
    let alpha_sq = alpha * alpha;
    let mut assigned = vec![false; points.len()];
    let mut groups = Vec::new();
    for i in 0..points.len() {
        if assigned[i] {
            continue;
        }
        let mut group = vec![i];
        assigned[i] = true;
        for j in i + 1..points.len() {
            if !assigned[j] && points[i].dist_sq(&points[j]) <= alpha_sq {
                assigned[j] = true;
                group.push(j);
            }
        }
        groups.push(group);
    }
    groups
}
