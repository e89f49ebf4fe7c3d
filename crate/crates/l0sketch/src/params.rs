use crate::error::Error;
use crate::grid::Grid;
use crate::hash::HashSampler;
use crate::point::Point;

/// Grid sizing relative to the duplicate threshold `alpha`.
///
/// `Planar` uses side `alpha/2` (meant for low, constant dimension, where a
/// group can span a handful of cells). `HighDim` uses side `dim * alpha`, so
/// that for sufficiently separated data each cell meets at most one group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridMode {
    Planar,
    HighDim,
}

impl GridMode {
    pub fn side(&self, dim: usize, alpha: f64) -> f64 {
        match self {
            Self::Planar => alpha / 2.0,
            Self::HighDim => dim as f64 * alpha,
        }
    }

    /// Planar for d <= 2, high-dimensional otherwise.
    pub fn auto(dim: usize) -> Self {
        if dim <= 2 {
            Self::Planar
        } else {
            Self::HighDim
        }
    }
}

pub(crate) fn derive_seed(seed: u64, tag: u64) -> u64 {
    // splitmix64 of (seed xor mixed tag); cheap and collision-safe for the
    // handful of sub-seeds we derive
    let mut x = seed ^ tag.wrapping_mul(0xA24B_AED4_963E_E407);
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Accept-set capacity from the failure-probability knob `kappa0`, the number
/// of requested samples `k` and the declared stream-length bound.
///
/// The subtraction guards against ulp dust in `kappa0 * k * log2(m_bound)`
/// pushing an exact product over the next integer.
pub(crate) fn capacity_threshold(kappa0: f64, k: usize, m_bound: u64) -> Result<usize, Error> {
    if !(kappa0 > 0.0) || !kappa0.is_finite() {
        return Err(Error::Config("kappa0 must be positive and finite"));
    }
    if k == 0 {
        return Err(Error::Config("sample count k must be at least 1"));
    }
    if m_bound < 2 {
        return Err(Error::Config("stream length bound must be at least 2"));
    }
    let raw = kappa0 * k as f64 * (m_bound as f64).log2();
    let t = (raw - 1e-9).ceil();
    Ok((t as usize).max(1))
}

/// Geometry and hashing shared by every sampler flavor: the random grid, the
/// cell hash, and the duplicate threshold.
#[derive(Debug, Clone)]
pub(crate) struct SamplerCore {
    pub dim: usize,
    pub alpha: f64,
    pub alpha_sq: f64,
    pub grid: Grid,
    pub hash: HashSampler,
}

impl SamplerCore {
    pub fn new(
        alpha: f64,
        dim: usize,
        m_bound: u64,
        seed: u64,
        grid_mode: GridMode,
    ) -> Result<Self, Error> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::Config("alpha must be positive and finite"));
        }
        if dim == 0 {
            return Err(Error::Config("dimension must be at least 1"));
        }
        if m_bound < 2 {
            return Err(Error::Config("stream length bound must be at least 2"));
        }
        let side = grid_mode.side(dim, alpha);
        let grid = Grid::new(dim, side, derive_seed(seed, 1))?;
        let degree = 16usize.max(2 * (m_bound as f64).log2().ceil() as usize);
        let hash = HashSampler::new(derive_seed(seed, 2), degree, 62)?;
        Ok(Self { dim, alpha, alpha_sq: alpha * alpha, grid, hash })
    }

    pub fn check_dim(&self, p: &Point) -> Result<(), Error> {
        if p.dim() != self.dim {
            return Err(Error::Usage("point dimension does not match sampler dimension"));
        }
        Ok(())
    }

    pub fn cell_coords(&self, p: &Point) -> Vec<i64> {
        p.coords
            .iter()
            .zip(self.grid.offset())
            .map(|(x, o)| ((x - o) / self.grid.side()).floor() as i64)
            .collect()
    }

    pub fn own_sampled(&self, p: &Point, rate_denom: u64) -> Result<bool, Error> {
        self.hash.is_sampled_coords(&self.cell_coords(p), rate_denom)
    }

    /// True when some cell within `alpha` of `p` is sampled at rate
    /// 1/rate_denom. Short-circuits the adjacency search on the first hit.
    pub fn any_adjacent_sampled(&self, p: &Point, rate_denom: u64) -> Result<bool, Error> {
        if !rate_denom.is_power_of_two() {
            return Err(Error::Usage("sample rate denominator must be a power of two"));
        }
        let mut hit = false;
        self.grid.visit_adjacent_cells(p, self.alpha, |coords| {
            if self.hash.is_sampled_coords(coords, rate_denom).unwrap_or(false) {
                hit = true;
                return false;
            }
            true
        })?;
        Ok(hit)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn capacity_threshold_examples() {
        assert_eq!(capacity_threshold(3.2, 1, 1024).unwrap(), 32);
        assert_eq!(capacity_threshold(3.2, 4, 1024).unwrap(), 128);
        assert!(capacity_threshold(3.2, 1, 1).is_err());
        assert!(capacity_threshold(0.0, 1, 1024).is_err());
    }

    #[test]
    fn grid_mode_sides() {
        assert_eq!(GridMode::Planar.side(7, 2.0), 1.0);
        assert_eq!(GridMode::HighDim.side(5, 0.5), 2.5);
        assert_eq!(GridMode::auto(2), GridMode::Planar);
        assert_eq!(GridMode::auto(3), GridMode::HighDim);
    }

    #[test]
    fn cell_coords_matches_grid_cell_of() {
        let core = SamplerCore::new(0.5, 3, 1024, 9, GridMode::HighDim).unwrap();
        let p = Point::new(vec![1.2, -0.7, 3.3], 0);
        assert_eq!(core.cell_coords(&p), core.grid.cell_of(&p).unwrap().coords);
    }
}
