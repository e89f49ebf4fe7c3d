//! Distinct-count (F0) estimation where near-duplicates count once.
//!
//! Infinite window: each copy is the distinct sampler with its accept-set
//! capacity replaced by `ceil(kappa_b / eps^2)`; `|accept| * R` estimates the
//! group count (the count-distinct scheme of Bar-Yossef et al.), and the
//! median over independent copies boosts the constant success probability.
//!
//! Sliding window: Flajolet-Martin style. Each copy tracks, per sampling
//! level, the last stream position at which any group whose representative's
//! cell is accepted at that level was active. The highest level with
//! activity still inside the window behaves like the top set bit of an FM
//! bitmap over the in-window groups, so `phi * 2^mean(level)` estimates the
//! in-window group count, with the classical `phi = 0.77351` bias constant
//! and a median over groups of copies on top.

use crate::error::Error;
use crate::iw::{IwConfig, IwSampler};
use crate::params::{derive_seed, GridMode};
use crate::point::{Point, Window};
use crate::sw::{InsertOutcome, SwConfig, SwSampler};

fn median(mut values: Vec<f64>) -> f64 {
    assert!(!values.is_empty());
    values.sort_by(|a, b| a.partial_cmp(b).expect("estimates are finite"));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

#[derive(Debug, Clone)]
pub struct F0IwConfig {
    pub alpha: f64,
    pub dim: usize,
    pub m_bound: u64,
    pub eps: f64,
    pub kappa_b: f64,
    pub copies: usize,
    pub seed: u64,
    pub grid_mode: GridMode,
}

impl F0IwConfig {
    pub fn new(alpha: f64, dim: usize, m_bound: u64, eps: f64, seed: u64) -> Self {
        Self {
            alpha,
            dim,
            m_bound,
            eps,
            kappa_b: 20.0,
            copies: 9,
            seed,
            grid_mode: GridMode::auto(dim),
        }
    }
}

/// Infinite-window distinct-count estimator.
#[derive(Debug, Clone)]
pub struct F0IwEstimator {
    copies: Vec<IwSampler>,
}

impl F0IwEstimator {
    pub fn new(config: F0IwConfig) -> Result<Self, Error> {
        if !(config.eps > 0.0 && config.eps < 1.0) {
            return Err(Error::Config("eps must lie in (0, 1)"));
        }
        if !(config.kappa_b > 0.0) || !config.kappa_b.is_finite() {
            return Err(Error::Config("kappa_b must be positive and finite"));
        }
        if config.copies == 0 {
            return Err(Error::Config("copy count must be at least 1"));
        }
        let threshold = (config.kappa_b / (config.eps * config.eps)).ceil() as usize;
        let copies = (0..config.copies)
            .map(|i| {
                let mut cfg = IwConfig::new(
                    config.alpha,
                    config.dim,
                    config.m_bound,
                    derive_seed(config.seed, 100 + i as u64),
                );
                cfg.grid_mode = config.grid_mode;
                cfg.threshold_override = Some(threshold.max(1));
                IwSampler::new(cfg)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { copies })
    }

    pub fn insert(&mut self, p: &Point) -> Result<(), Error> {
        for copy in &mut self.copies {
            copy.insert(p)?;
        }
        Ok(())
    }

    /// Median over copies of `|accept| * R`.
    pub fn estimate(&self) -> f64 {
        median(
            self.copies
                .iter()
                .map(|c| c.accept_len() as f64 * c.rate_denom() as f64)
                .collect(),
        )
    }

    pub fn copies(&self) -> &[IwSampler] {
        &self.copies
    }
}

#[derive(Debug, Clone)]
pub struct F0SwConfig {
    pub alpha: f64,
    pub dim: usize,
    pub window: Window,
    pub m_bound: u64,
    pub eps: f64,
    pub kappa0: f64,
    /// Copies averaged into one level estimate, Theta(1/eps^2).
    pub copies_per_group: usize,
    /// Independent groups of copies combined by a median.
    pub groups: usize,
    /// Flajolet-Martin bias correction.
    pub phi: f64,
    pub seed: u64,
    pub grid_mode: GridMode,
}

impl F0SwConfig {
    pub fn new(alpha: f64, dim: usize, window: Window, m_bound: u64, eps: f64, seed: u64) -> Self {
        Self {
            alpha,
            dim,
            window,
            m_bound,
            eps,
            kappa0: 3.2,
            copies_per_group: 16,
            groups: 9,
            phi: 0.77351,
            seed,
            grid_mode: GridMode::auto(dim),
        }
    }
}

#[derive(Debug)]
struct SwCopy {
    sampler: SwSampler,
    /// Per level: the last (arrival index, timestamp) at which a group whose
    /// representative's cell is accepted at that level produced a point.
    level_activity: Vec<Option<(u64, Option<u64>)>>,
    insert_errors: u64,
}

/// Sliding-window distinct-count estimator.
#[derive(Debug)]
pub struct F0SwEstimator {
    groups: Vec<Vec<SwCopy>>,
    window: Window,
    phi: f64,
    last_arrival: Option<(u64, Option<u64>)>,
}

impl F0SwEstimator {
    pub fn new(config: F0SwConfig) -> Result<Self, Error> {
        if !(config.eps > 0.0 && config.eps < 1.0) {
            return Err(Error::Config("eps must lie in (0, 1)"));
        }
        if config.copies_per_group == 0 || config.groups == 0 {
            return Err(Error::Config("copy and group counts must be at least 1"));
        }
        if !(config.phi > 0.0) || !config.phi.is_finite() {
            return Err(Error::Config("phi must be positive and finite"));
        }
        let mut groups = Vec::with_capacity(config.groups);
        for g in 0..config.groups {
            let mut copies = Vec::with_capacity(config.copies_per_group);
            for c in 0..config.copies_per_group {
                let mut sw = SwConfig::new(
                    config.alpha,
                    config.dim,
                    config.window,
                    config.m_bound,
                    derive_seed(config.seed, 1_000 + (g * config.copies_per_group + c) as u64),
                );
                sw.kappa0 = config.kappa0;
                sw.grid_mode = config.grid_mode;
                let sampler = SwSampler::new(sw)?;
                let levels = sampler.num_levels();
                copies.push(SwCopy {
                    sampler,
                    level_activity: vec![None; levels],
                    insert_errors: 0,
                });
            }
            groups.push(copies);
        }
        Ok(Self { groups, window: config.window, phi: config.phi, last_arrival: None })
    }

    pub fn insert(&mut self, p: &Point) -> Result<(), Error> {
        self.last_arrival = Some((p.arrival_index, p.timestamp));
        for copy in self.groups.iter_mut().flatten() {
            let level = match copy.sampler.insert(p) {
                Ok(InsertOutcome::NewRepresentative) => copy.sampler.sampled_level_of(p)?,
                Ok(InsertOutcome::MatchedAt { level, rep_index }) => {
                    let rep = copy
                        .sampler
                        .rep_point(level, rep_index)
                        .expect("matched representative is stored")
                        .clone();
                    copy.sampler.sampled_level_of(&rep)?
                }
                Err(Error::Sw(_)) => {
                    // a failed copy keeps its ladder frozen
                    copy.insert_errors += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            copy.level_activity[level] = Some((p.arrival_index, p.timestamp));
        }
        Ok(())
    }

    /// `phi * 2^(mean top level)` per group of copies, median over groups.
    /// `None` when no copy has any in-window activity.
    pub fn estimate(&self) -> Option<f64> {
        let (now_index, now_ts) = self.last_arrival?;
        let mut per_group = Vec::with_capacity(self.groups.len());
        for copies in &self.groups {
            let mut levels = Vec::with_capacity(copies.len());
            for copy in copies {
                let top = copy
                    .level_activity
                    .iter()
                    .enumerate()
                    .rev()
                    .find(|(_, slot)| {
                        slot.is_some_and(|(idx, ts)| {
                            let probe = Point { coords: Vec::new(), arrival_index: idx, timestamp: ts };
                            !self.window.expired_at(&probe, now_index, now_ts)
                        })
                    })
                    .map(|(l, _)| l);
                if let Some(l) = top {
                    levels.push(l as f64);
                }
            }
            if !levels.is_empty() {
                let mean = levels.iter().sum::<f64>() / levels.len() as f64;
                per_group.push(self.phi * mean.exp2());
            }
        }
        if per_group.is_empty() {
            None
        } else {
            Some(median(per_group))
        }
    }

    pub fn insert_errors(&self) -> u64 {
        self.groups.iter().flatten().map(|c| c.insert_errors).sum()
    }

    pub fn num_copies(&self) -> usize {
        self.groups.iter().map(|g| g.len()).sum()
    }
}
