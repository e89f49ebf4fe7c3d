//! Reproducible noisy-stream generation with known ground-truth groups.
//!
//! Pipeline: take base points (random or user-supplied), rescale them so the
//! minimum pairwise distance is 1, then blow each point up into a group by
//! adding near-duplicates within distance `1/(2 d^1.5)` of it. Group counts
//! are either uniform in `1..=max` or power-law (`ceil(n/i)` after a random
//! ordering). The labeled output stream is uniformly shuffled.
//!
//! After rescaling, intra-group diameters stay at most `1/d^1.5` while
//! distinct groups stay at least `1 - 1/d^1.5` apart, so `alpha = 1/d^1.5`
//! separates them cleanly for d >= 2.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::point::Point;

/// A generated stream with ground-truth group labels.
#[derive(Debug, Clone)]
pub struct LabeledStream {
    /// Shuffled points with group ids; arrival indices follow stream order.
    pub points: Vec<(Point, u64)>,
    pub n_groups: usize,
    /// Guaranteed intra-group diameter bound, `1/d^1.5`.
    pub alpha_truth: f64,
    pub dim: usize,
}

impl LabeledStream {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Group label of a stream position.
    pub fn group_of(&self, arrival_index: u64) -> Option<u64> {
        self.points
            .get(arrival_index as usize)
            .map(|(_, g)| *g)
    }

    /// Distinct groups with a point among the last `w` stream items.
    pub fn groups_in_window(&self, w: u64) -> std::collections::BTreeSet<u64> {
        let start = self.points.len().saturating_sub(w as usize);
        self.points[start..].iter().map(|(_, g)| *g).collect()
    }
}

/// How many near-duplicates each base point receives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DuplicateMode {
    /// Uniform in `1..=max` per point.
    Uniform { max: u32 },
    /// `ceil(n / i)` duplicates for the i-th point of a random ordering.
    PowerLaw,
}

/// `n` points with coordinates uniform in (0, 1), deterministic per seed.
pub fn random_dataset(n: usize, dim: usize, seed: u64) -> Result<Vec<Point>, Error> {
    if n < 2 {
        return Err(Error::Data("need at least 2 points"));
    }
    if dim == 0 {
        return Err(Error::Data("dimension must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|i| Point::new((0..dim).map(|_| rng.gen::<f64>()).collect(), i as u64))
        .collect())
}

/// Rescales all coordinates by the reciprocal of the minimum pairwise
/// distance, making that minimum exactly 1 (up to rounding).
pub fn rescale_min_distance(points: &[Point]) -> Result<Vec<Point>, Error> {
    if points.len() < 2 {
        return Err(Error::Data("need at least 2 points to rescale"));
    }
    let mut min_sq = f64::INFINITY;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            min_sq = min_sq.min(a.dist_sq(b));
        }
    }
    if min_sq == 0.0 {
        return Err(Error::Data("duplicate points: minimum pairwise distance is zero"));
    }
    let scale = 1.0 / min_sq.sqrt();
    Ok(points
        .iter()
        .map(|p| Point {
            coords: p.coords.iter().map(|c| c * scale).collect(),
            arrival_index: p.arrival_index,
            timestamp: p.timestamp,
        })
        .collect())
}

/// Expands rescaled centers into a labeled noisy stream.
///
/// Every duplicate of center `x` is `x + z * (l / |z|)` with `z` drawn
/// coordinate-wise from (0, 1) and `l` uniform in `(0, 1/(2 d^1.5))`. That
/// direction choice is biased toward the positive orthant on purpose: it
/// reproduces the generation procedure this harness benchmarks against.
/// The stream is a uniform shuffle of centers and duplicates; timestamps
/// equal arrival indices so time-based windows behave like sequence windows.
pub fn add_near_duplicates(
    centers: &[Point],
    mode: DuplicateMode,
    seed: u64,
) -> Result<LabeledStream, Error> {
    if centers.is_empty() {
        return Err(Error::Data("no centers to expand"));
    }
    let dim = centers[0].dim();
    if dim == 0 || centers.iter().any(|c| c.dim() != dim) {
        return Err(Error::Data("centers must share a positive dimension"));
    }
    let n = centers.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let counts: Vec<usize> = match mode {
        DuplicateMode::Uniform { max } => {
            if max == 0 {
                return Err(Error::Data("uniform duplicate bound must be positive"));
            }
            (0..n).map(|_| rng.gen_range(1..=max) as usize).collect()
        }
        DuplicateMode::PowerLaw => {
            let mut order: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                let j = rng.gen_range(0..=i);
                order.swap(i, j);
            }
            let mut counts = vec![0usize; n];
            for (pos, &center) in order.iter().enumerate() {
                counts[center] = (n + pos) / (pos + 1); // ceil(n / (pos+1))
            }
            counts
        }
    };

    let radius = 0.5 / (dim as f64).powf(1.5);
    let mut labeled: Vec<(Vec<f64>, u64)> = Vec::new();
    for (g, center) in centers.iter().enumerate() {
        labeled.push((center.coords.clone(), g as u64));
        for _ in 0..counts[g] {
            let z: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
            let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
            let len = rng.gen::<f64>() * radius;
            let coords = center
                .coords
                .iter()
                .zip(&z)
                .map(|(c, v)| c + v * (len / norm))
                .collect();
            labeled.push((coords, g as u64));
        }
    }

    for i in (1..labeled.len()).rev() {
        let j = rng.gen_range(0..=i);
        labeled.swap(i, j);
    }
    let points = labeled
        .into_iter()
        .enumerate()
        .map(|(i, (coords, g))| (Point::with_timestamp(coords, i as u64, i as u64), g))
        .collect();
    Ok(LabeledStream {
        points,
        n_groups: n,
        alpha_truth: 1.0 / (dim as f64).powf(1.5),
        dim,
    })
}

/// Full pipeline: random base points, rescale, add near-duplicates.
pub fn generate(
    n: usize,
    dim: usize,
    mode: DuplicateMode,
    seed: u64,
) -> Result<LabeledStream, Error> {
    let base = random_dataset(n, dim, seed)?;
    let rescaled = rescale_min_distance(&base)?;
    add_near_duplicates(&rescaled, mode, seed.wrapping_add(1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(raw: &[&[f64]]) -> Vec<Point> {
        raw.iter()
            .enumerate()
            .map(|(i, c)| Point::new(c.to_vec(), i as u64))
            .collect()
    }

    #[test]
    fn rescale_simple_pair() {
        let out = rescale_min_distance(&pts(&[&[0.0, 0.0], &[0.0, 2.0]])).unwrap();
        assert_eq!(out[0].coords, vec![0.0, 0.0]);
        assert_eq!(out[1].coords, vec![0.0, 1.0]);
    }

    #[test]
    fn rescale_uses_minimum_pairwise_distance() {
        // pairwise distances 5, 10, sqrt(45): the brute-force minimum is 5
        let out = rescale_min_distance(&pts(&[&[0.0, 0.0], &[3.0, 4.0], &[0.0, 10.0]])).unwrap();
        let d01 = out[0].dist_sq(&out[1]).sqrt();
        assert!((d01 - 1.0).abs() < 1e-9);
        let d02 = out[0].dist_sq(&out[2]).sqrt();
        assert!((d02 - 2.0).abs() < 1e-9);
    }

    #[test]
    fn rescale_rejects_duplicates() {
        assert!(rescale_min_distance(&pts(&[&[1.0, 1.0], &[1.0, 1.0]])).is_err());
        assert!(rescale_min_distance(&pts(&[&[1.0, 1.0]])).is_err());
    }

    #[test]
    fn uniform_duplicates_stay_within_radius() {
        let centers = pts(&[&[0.0, 0.0]]);
        let s = add_near_duplicates(&centers, DuplicateMode::Uniform { max: 100 }, 3).unwrap();
        assert!(s.len() >= 2 && s.len() <= 101);
        let radius = 0.5 / 2f64.powf(1.5);
        for (p, g) in &s.points {
            assert_eq!(*g, 0);
            assert!(p.dist_sq(&centers[0]).sqrt() <= radius + 1e-12);
        }
    }

    #[test]
    fn powerlaw_counts_follow_harmonic_schedule() {
        let centers = pts(&[&[0.0, 0.0], &[10.0, 0.0], &[20.0, 0.0], &[30.0, 0.0]]);
        let s = add_near_duplicates(&centers, DuplicateMode::PowerLaw, 5).unwrap();
        // counts per position: ceil(4/1..4) = 4, 2, 2, 1 plus the centers
        assert_eq!(s.len(), 4 + 4 + 2 + 2 + 1);
        let mut per_group = [0usize; 4];
        for (_, g) in &s.points {
            per_group[*g as usize] += 1;
        }
        let mut sizes: Vec<usize> = per_group.to_vec();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![2, 3, 3, 5]);
    }

    #[test]
    fn random_dataset_is_deterministic() {
        let a = random_dataset(500, 5, 1).unwrap();
        let b = random_dataset(500, 5, 1).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|p| p.coords.iter().all(|&c| (0.0..1.0).contains(&c))));
        let c = random_dataset(500, 20, 1).unwrap();
        assert_eq!(c[0].dim(), 20);
    }

    /// Generated streams are (alpha, beta)-sparse with alpha = 1/d^1.5 and
    /// beta = 1 - 1/d^1.5: every pair is closer than alpha (same group) or
    /// farther than beta (different groups).
    #[test]
    fn generated_stream_is_sparse_and_label_faithful() {
        let s = generate(40, 3, DuplicateMode::Uniform { max: 5 }, 9).unwrap();
        let alpha = s.alpha_truth;
        let beta = 1.0 - alpha;
        assert!(beta > alpha);
        for (i, (p, gp)) in s.points.iter().enumerate() {
            for (q, gq) in &s.points[i + 1..] {
                let d = p.dist_sq(q).sqrt();
                if gp == gq {
                    assert!(d <= alpha + 1e-12, "intra-group distance {d}");
                } else {
                    assert!(d > beta - 1e-12, "inter-group distance {d}");
                }
            }
        }
    }

    /// The output order is a uniform permutation: chi-square over all 24
    /// orderings of a 4-point stream.
    #[test]
    fn shuffle_uniformity_rank_test() {
        let centers = pts(&[&[0.0, 0.0], &[10.0, 0.0], &[20.0, 0.0], &[30.0, 0.0]]);
        let mut perm_counts = std::collections::HashMap::<Vec<u64>, u64>::new();
        let trials = 24_000u64;
        for seed in 0..trials {
            let s = add_near_duplicates(&centers, DuplicateMode::Uniform { max: 1 }, seed).unwrap();
            // keep only the four centers' relative order
            let perm: Vec<u64> = s
                .points
                .iter()
                .filter(|(p, _)| centers.iter().any(|c| c.coords == p.coords))
                .map(|(_, g)| *g)
                .collect();
            assert_eq!(perm.len(), 4);
            *perm_counts.entry(perm).or_default() += 1;
        }
        assert_eq!(perm_counts.len(), 24);
        let expect = trials as f64 / 24.0;
        let chi2: f64 = perm_counts
            .values()
            .map(|&c| {
                let d = c as f64 - expect;
                d * d / expect
            })
            .sum();
        // df = 23: mean 23, sigma = sqrt(46); allow 4 sigma
        assert!(chi2 < 23.0 + 4.0 * 46f64.sqrt(), "chi2 = {chi2}");
    }

    #[test]
    fn empty_centers_rejected() {
        assert!(add_near_duplicates(&[], DuplicateMode::PowerLaw, 0).is_err());
    }
}
