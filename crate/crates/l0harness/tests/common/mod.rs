//! Shared test oracles.

use l0sketch::Point;

/// Exact minimum number of diameter-`alpha` groups, by dynamic programming
/// over subsets. Exponential; meant for instances of at most ~14 points.
pub fn min_partition_exhaustive(points: &[Point], alpha: f64) -> usize {
    let n = points.len();
    assert!(n <= 14, "exhaustive partition oracle is exponential");
    if n == 0 {
        return 0;
    }
    let alpha_sq = alpha * alpha;
    let full = (1usize << n) - 1;

    // valid[mask]: all pairs in mask within alpha
    let mut valid = vec![false; full + 1];
    valid[0] = true;
    for mask in 1..=full {
        let i = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << i);
        valid[mask] = valid[rest]
            && (0..n)
                .filter(|j| rest & (1 << j) != 0)
                .all(|j| points[i].dist_sq(&points[j]) <= alpha_sq);
    }

    let mut best = vec![u32::MAX; full + 1];
    best[0] = 0;
    for mask in 1..=full {
        // fix the lowest uncovered point; enumerate valid subsets containing it
        let low = mask.trailing_zeros() as usize;
        let candidates = mask & !(1 << low);
        let mut sub = candidates;
        loop {
            let group = sub | (1 << low);
            if valid[group] && best[mask & !group] != u32::MAX {
                best[mask] = best[mask].min(best[mask & !group] + 1);
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & candidates;
        }
    }
    best[full] as usize
}

#[allow(dead_code)]
pub fn brute_force_groups_in_window(labels: &[u64], w: u64) -> std::collections::BTreeSet<u64> {
    let start = labels.len().saturating_sub(w as usize);
    labels[start..].iter().copied().collect()
}
