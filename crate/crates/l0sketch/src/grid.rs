//! Randomly shifted axis-aligned grid over R^d.
//!
//! The grid maps points to integer cell coordinates and supports computing
//! the set of cells within Euclidean distance `alpha` of a point. That set is
//! found by a depth-first search over per-axis column choices with pruning on
//! the accumulated squared displacement, plus an exhaustive block-enumeration
//! oracle used to cross-check the search.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::point::Point;

/// Integer cell coordinates along each axis.
///
/// Two points in the same cell map to equal ids. The id is a coordinate
/// tuple rather than a flattened scalar so that negative coordinates and
/// unbounded domains need no special casing.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellId {
    pub coords: Vec<i64>,
}

impl CellId {
    pub fn new(coords: Vec<i64>) -> Self {
        Self { coords }
    }
}

/// Axis-aligned grid with a random offset drawn uniformly from `[0, side)^d`.
#[derive(Debug, Clone)]
pub struct Grid {
    dim: usize,
    side: f64,
    offset: Vec<f64>,
    seed: u64,
}

impl Grid {
    /// Creates a grid with the offset drawn deterministically from `seed`.
    pub fn new(dim: usize, side: f64, seed: u64) -> Result<Self, Error> {
        if dim == 0 {
            return Err(Error::Config("grid dimension must be at least 1"));
        }
        if !(side > 0.0) || !side.is_finite() {
            return Err(Error::Config("grid side length must be positive and finite"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let offset = (0..dim).map(|_| rng.gen::<f64>() * side).collect();
        Ok(Self { dim, side, offset, seed })
    }

    /// Creates a grid with an explicit offset. Offset components must lie in
    /// `[0, side)`.
    pub fn with_offset(dim: usize, side: f64, offset: Vec<f64>) -> Result<Self, Error> {
        if dim == 0 {
            return Err(Error::Config("grid dimension must be at least 1"));
        }
        if !(side > 0.0) || !side.is_finite() {
            return Err(Error::Config("grid side length must be positive and finite"));
        }
        if offset.len() != dim {
            return Err(Error::Config("offset length must equal the grid dimension"));
        }
        if offset.iter().any(|&o| !(0.0..side).contains(&o)) {
            return Err(Error::Config("offset components must lie in [0, side)"));
        }
        Ok(Self { dim, side, offset, seed: 0 })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn offset(&self) -> &[f64] {
        &self.offset
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Cell containing `p`: coordinate i is `floor((p[i] - offset[i]) / side)`.
    /// Points on a boundary belong to the cell given by floor.
    pub fn cell_of(&self, p: &Point) -> Result<CellId, Error> {
        if p.dim() != self.dim {
            return Err(Error::Usage("point dimension does not match grid dimension"));
        }
        Ok(CellId::new(
            p.coords
                .iter()
                .zip(&self.offset)
                .map(|(x, o)| ((x - o) / self.side).floor() as i64)
                .collect(),
        ))
    }

    /// Rescales `p` into grid units: cell boundaries sit on the integers.
    fn rescaled(&self, p: &Point) -> Vec<f64> {
        p.coords
            .iter()
            .zip(&self.offset)
            .map(|(x, o)| (x - o) / self.side)
            .collect()
    }

    /// All cells whose minimum distance to `p` is at most `alpha`, found by a
    /// pruned depth-first search. Always contains `cell_of(p)`.
    ///
    /// Per axis the search either stays in the point's own column (cost 0) or
    /// moves to a neighboring column boundary, accumulating the squared
    /// displacement; branches whose accumulated cost exceeds `alpha^2` are cut.
    pub fn adjacent_cells(&self, p: &Point, alpha: f64) -> Result<BTreeSet<CellId>, Error> {
        let mut out = BTreeSet::new();
        self.visit_adjacent_cells(p, alpha, |coords| {
            out.insert(CellId::new(coords.to_vec()));
            true
        })?;
        Ok(out)
    }

    /// Visits every cell within distance `alpha` of `p`, in search order.
    /// The closure may return `false` to stop early.
    pub fn visit_adjacent_cells(
        &self,
        p: &Point,
        alpha: f64,
        mut visit: impl FnMut(&[i64]) -> bool,
    ) -> Result<(), Error> {
        if p.dim() != self.dim {
            return Err(Error::Usage("point dimension does not match grid dimension"));
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::Usage("alpha must be positive and finite"));
        }
        let r = self.rescaled(p);
        let base: Vec<i64> = r.iter().map(|x| x.floor() as i64).collect();
        let alpha_r = alpha / self.side;
        let reach = alpha_r.ceil() as i64;
        let mut chosen = vec![0i64; self.dim];
        search(&r, &base, alpha_r * alpha_r, reach, 0, 0.0, &mut chosen, &mut visit);
        Ok(())
    }

    /// Exhaustive oracle for `adjacent_cells`: enumerates the whole
    /// `(2*ceil(alpha/side)+1)^d` block around `cell_of(p)` and keeps cells
    /// whose clamp distance to `p` is at most `alpha`.
    pub fn adjacent_cells_bruteforce(
        &self,
        p: &Point,
        alpha: f64,
    ) -> Result<BTreeSet<CellId>, Error> {
        if p.dim() != self.dim {
            return Err(Error::Usage("point dimension does not match grid dimension"));
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::Usage("alpha must be positive and finite"));
        }
        if self.dim > 12 {
            return Err(Error::Usage("brute-force enumeration supports at most 12 dimensions"));
        }
        let r = self.rescaled(p);
        let base: Vec<i64> = r.iter().map(|x| x.floor() as i64).collect();
        let alpha_r = alpha / self.side;
        let reach = alpha_r.ceil() as i64;
        let span = 2 * reach as u64 + 1;
        if span.pow(self.dim as u32) > 1 << 24 {
            return Err(Error::Usage("brute-force enumeration block is too large"));
        }

        let mut out = BTreeSet::new();
        let mut offsets = vec![-reach; self.dim];
        'outer: loop {
            let mut s = 0.0;
            for i in 0..self.dim {
                s += axis_cost(r[i], base[i], base[i] + offsets[i]);
            }
            if s <= alpha_r * alpha_r {
                let coords = base.iter().zip(&offsets).map(|(b, o)| b + o).collect();
                out.insert(CellId::new(coords));
            }
            // odometer over [-reach, reach]^d
            for i in (0..self.dim).rev() {
                offsets[i] += 1;
                if offsets[i] <= reach {
                    continue 'outer;
                }
                offsets[i] = -reach;
            }
            break;
        }
        Ok(out)
    }
}

/// Squared per-axis displacement for moving from coordinate `x` (in column
/// `base`) to the nearest point of column `col`, all in grid units.
#[inline]
fn axis_cost(x: f64, base: i64, col: i64) -> f64 {
    if col == base {
        0.0
    } else if col > base {
        let d = col as f64 - x;
        d * d
    } else {
        let d = x - (col + 1) as f64;
        d * d
    }
}

/// Depth-first search over per-axis column choices. `s` is the accumulated
/// squared displacement; branches with `s > limit_sq` are pruned. Returns
/// false when the visitor asked to stop.
fn search(
    r: &[f64],
    base: &[i64],
    limit_sq: f64,
    reach: i64,
    axis: usize,
    s: f64,
    chosen: &mut [i64],
    visit: &mut impl FnMut(&[i64]) -> bool,
) -> bool {
    if s > limit_sq {
        return true;
    }
    if axis == r.len() {
        return visit(chosen);
    }
    for col in base[axis] - reach..=base[axis] + reach {
        chosen[axis] = col;
        let cost = axis_cost(r[axis], base[axis], col);
        if !search(r, base, limit_sq, reach, axis + 1, s + cost, chosen, visit) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng as _;

    fn pt(coords: &[f64]) -> Point {
        Point::new(coords.to_vec(), 0)
    }

    #[test]
    fn new_grid_is_deterministic_and_seed_sensitive() {
        let a = Grid::new(2, 1.0, 7).unwrap();
        let b = Grid::new(2, 1.0, 7).unwrap();
        assert_eq!(a.offset(), b.offset());
        assert!(a.offset().iter().all(|&o| (0.0..1.0).contains(&o)));

        let c = Grid::new(5, 0.5, 7).unwrap();
        let d = Grid::new(5, 0.5, 8).unwrap();
        assert_ne!(c.offset(), d.offset());
    }

    #[test]
    fn zero_dimension_rejected() {
        assert!(matches!(Grid::new(0, 1.0, 0), Err(Error::Config(_))));
        assert!(Grid::new(2, 0.0, 0).is_err());
        assert!(Grid::new(2, -1.0, 0).is_err());
    }

    #[test]
    fn cell_of_matches_floor_convention() {
        let g = Grid::with_offset(2, 1.0, vec![0.0, 0.0]).unwrap();
        assert_eq!(g.cell_of(&pt(&[0.6, 1.2])).unwrap().coords, vec![0, 1]);
        assert_eq!(g.cell_of(&pt(&[-0.1, 0.0])).unwrap().coords, vec![-1, 0]);

        let g = Grid::with_offset(3, 0.5, vec![0.25, 0.25, 0.25]).unwrap();
        assert_eq!(g.cell_of(&pt(&[0.25, 0.25, 0.25])).unwrap().coords, vec![0, 0, 0]);
    }

    #[test]
    fn cell_of_dimension_mismatch() {
        let g = Grid::with_offset(2, 1.0, vec![0.0, 0.0]).unwrap();
        assert!(g.cell_of(&pt(&[1.0])).is_err());
    }

    #[test]
    fn adjacent_cells_center_point() {
        let g = Grid::with_offset(2, 1.0, vec![0.0, 0.0]).unwrap();
        let p = pt(&[0.5, 0.5]);

        // every neighboring cell is 0.5 away, so alpha = 0.4 keeps only the own cell
        let near = g.adjacent_cells(&p, 0.4).unwrap();
        assert_eq!(near.len(), 1);
        assert!(near.contains(&CellId::new(vec![0, 0])));

        // alpha = 0.6 adds the 4 edge neighbors; corners are at ~0.707
        let wider = g.adjacent_cells(&p, 0.6).unwrap();
        assert_eq!(wider.len(), 5);
        for coords in [[0, 0], [-1, 0], [1, 0], [0, -1], [0, 1]] {
            assert!(wider.contains(&CellId::new(coords.to_vec())));
        }
    }

    #[test]
    fn bruteforce_1d_boundary_distances_inclusive() {
        let g = Grid::with_offset(1, 1.0, vec![0.0]).unwrap();
        let cells = g.adjacent_cells_bruteforce(&pt(&[0.5]), 0.5).unwrap();
        let want: BTreeSet<CellId> =
            [-1, 0, 1].iter().map(|&c| CellId::new(vec![c])).collect();
        assert_eq!(cells, want);
    }

    #[test]
    fn bruteforce_2d_clamp_distances() {
        let g = Grid::with_offset(2, 1.0, vec![0.0, 0.0]).unwrap();
        let cells = g.adjacent_cells_bruteforce(&pt(&[0.1, 0.1]), 0.15).unwrap();
        let want: BTreeSet<CellId> = [[0, 0], [-1, 0], [0, -1], [-1, -1]]
            .iter()
            .map(|c| CellId::new(c.to_vec()))
            .collect();
        assert_eq!(cells, want);
    }

    #[test]
    fn own_cell_always_adjacent() {
        let g = Grid::new(3, 0.7, 42).unwrap();
        let p = pt(&[1.3, -2.2, 0.05]);
        let cells = g.adjacent_cells(&p, 1e-9).unwrap();
        assert!(cells.contains(&g.cell_of(&p).unwrap()));
        assert_eq!(cells.len(), 1);
    }

    /// 2D planar configuration: side = alpha/2, so the search spans two
    /// columns per side and the adjacent set is at most 5x5.
    #[test]
    fn planar_mode_cardinality_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let alpha = 0.2 + rng.gen::<f64>();
            let g = Grid::new(2, alpha / 2.0, rng.gen()).unwrap();
            let p = pt(&[rng.gen::<f64>() * 20.0 - 10.0, rng.gen::<f64>() * 20.0 - 10.0]);
            let cells = g.adjacent_cells(&p, alpha).unwrap();
            assert!(cells.len() <= 25, "got {} cells", cells.len());
            assert_eq!(cells, g.adjacent_cells_bruteforce(&p, alpha).unwrap());
        }
    }

    #[test]
    fn dfs_matches_bruteforce_randomized() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in 1..=6usize {
            for _ in 0..200 {
                let side = 0.1 + rng.gen::<f64>() * 2.0;
                // cover both alpha <= side and side < alpha <= 2*side
                let alpha = side * (0.05 + rng.gen::<f64>() * if d <= 4 { 1.95 } else { 0.95 });
                let g = Grid::new(d, side, rng.gen()).unwrap();
                let coords: Vec<f64> =
                    (0..d).map(|_| rng.gen::<f64>() * 40.0 - 20.0).collect();
                let p = pt(&coords);
                assert_eq!(
                    g.adjacent_cells(&p, alpha).unwrap(),
                    g.adjacent_cells_bruteforce(&p, alpha).unwrap(),
                    "d={d} side={side} alpha={alpha}"
                );
            }
        }
    }

    /// Shifting both the point and the offset by the same vector leaves the
    /// cell id unchanged. Dyadic inputs keep every sum exact so the check is
    /// not at the mercy of rounding near cell boundaries.
    #[test]
    fn translation_leaves_cell_id_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let dyadic = |rng: &mut ChaCha8Rng, lo: i64, hi: i64| -> f64 {
            rng.gen_range(lo * 1024..hi * 1024) as f64 / 1024.0
        };
        for _ in 0..2000 {
            let side = 1.0;
            let off = dyadic(&mut rng, 0, 1).abs() % side;
            let x = dyadic(&mut rng, -64, 64);
            let y = dyadic(&mut rng, -64, 64);
            let t = dyadic(&mut rng, -32, 32);
            // keep the shifted offset inside [0, side) by translating in
            // whole-cell steps plus the fractional part of t
            let tf = t - t.floor();
            let off2 = (off + tf) % side;
            let carry = (off + tf) - off2; // 0 or side, exact
            let g1 = Grid::with_offset(2, side, vec![off, off]).unwrap();
            let g2 = Grid::with_offset(2, side, vec![off2, off2]).unwrap();
            let shift = tf - carry;
            let c1 = g1.cell_of(&pt(&[x, y])).unwrap();
            let c2 = g2.cell_of(&pt(&[x + shift, y + shift])).unwrap();
            assert_eq!(c1, c2, "x={x} y={y} off={off} t={t}");
        }
    }

    proptest! {
        #[test]
        fn cell_containment_any_alpha(
            coords in proptest::collection::vec(-20.0f64..20.0, 1..5),
            alpha in 0.01f64..1.5,
            seed in 0u64..1000,
        ) {
            let d = coords.len();
            let g = Grid::new(d, 1.0, seed).unwrap();
            let p = pt(&coords);
            let cells = g.adjacent_cells(&p, alpha).unwrap();
            prop_assert!(cells.contains(&g.cell_of(&p).unwrap()));
        }
    }
}
