//! Infinite-window distinct sampler for streams with near-duplicates.
//!
//! Points within `alpha` of each other count as one element (a group). The
//! sampler keeps the first-seen point (representative) of every group whose
//! grid neighborhood touches a sampled cell, in two sets:
//!
//! - accept set: representatives whose own cell is sampled at rate 1/R;
//! - reject set: representatives whose own cell is not sampled but that have
//!   a sampled cell within distance `alpha`.
//!
//! The reject set is what keeps the sampling judged by first points only: a
//! later point of a rejected group must not be mistaken for a new group when
//! it lands in a sampled cell. When the accept set outgrows its capacity the
//! rate halves (R doubles) and both sets are refiltered under the new rate;
//! nested power-of-two sampling makes the refiltered sets subsets of the old
//! candidates. A query returns up to k accepted representatives uniformly
//! without replacement.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::params::{capacity_threshold, derive_seed, GridMode, SamplerCore};
use crate::point::Point;

#[derive(Debug, Clone)]
pub struct IwConfig {
    pub alpha: f64,
    pub dim: usize,
    pub m_bound: u64,
    pub k: usize,
    pub kappa0: f64,
    pub seed: u64,
    pub grid_mode: GridMode,
    /// Maintain a uniformly random member per candidate group (reservoir of
    /// size one), so queries can return a random group member instead of the
    /// fixed representative.
    pub track_members: bool,
    /// Replace the capacity `ceil(kappa0 * k * log2(m_bound))`; used by the
    /// distinct-count estimator.
    pub threshold_override: Option<usize>,
}

impl IwConfig {
    pub fn new(alpha: f64, dim: usize, m_bound: u64, seed: u64) -> Self {
        Self {
            alpha,
            dim,
            m_bound,
            k: 1,
            kappa0: 3.2,
            seed,
            grid_mode: GridMode::auto(dim),
            track_members: false,
            threshold_override: None,
        }
    }
}

/// Running statistics, kept for space accounting and instrumentation.
#[derive(Debug, Clone, Copy, Default)]
pub struct IwStats {
    pub inserts: u64,
    pub rate_doublings: u64,
    pub peak_accept: usize,
    pub peak_reject: usize,
    pub peak_words: usize,
}

#[derive(Debug, Clone)]
pub struct IwSampler {
    core: SamplerCore,
    rate_denom: u64,
    threshold: usize,
    k: usize,
    accept: BTreeMap<u64, Point>,
    reject: BTreeMap<u64, Point>,
    // rep arrival index -> (current random member, points seen in the group)
    members: Option<BTreeMap<u64, (Point, u64)>>,
    member_rng: ChaCha8Rng,
    last_arrival: Option<u64>,
    stats: IwStats,
}

impl IwSampler {
    pub fn new(config: IwConfig) -> Result<Self, Error> {
        let core = SamplerCore::new(
            config.alpha,
            config.dim,
            config.m_bound,
            config.seed,
            config.grid_mode,
        )?;
        let threshold = match config.threshold_override {
            Some(t) if t >= 1 => t,
            Some(_) => return Err(Error::Config("threshold override must be at least 1")),
            None => capacity_threshold(config.kappa0, config.k, config.m_bound)?,
        };
        Ok(Self {
            core,
            rate_denom: 1,
            threshold,
            k: config.k,
            accept: BTreeMap::new(),
            reject: BTreeMap::new(),
            members: config.track_members.then(BTreeMap::new),
            member_rng: ChaCha8Rng::seed_from_u64(derive_seed(config.seed, 3)),
            last_arrival: None,
            stats: IwStats::default(),
        })
    }

    pub fn insert(&mut self, p: &Point) -> Result<(), Error> {
        self.core.check_dim(p)?;
        if let Some(last) = self.last_arrival {
            if p.arrival_index <= last {
                return Err(Error::Usage("arrival indices must be strictly increasing"));
            }
        }
        self.last_arrival = Some(p.arrival_index);
        self.stats.inserts += 1;

        // not the first point of a candidate group: only the member reservoir moves
        if let Some(rep) = self.match_candidate(p) {
            if let Some(members) = self.members.as_mut() {
                if let Some((member, count)) = members.get_mut(&rep) {
                    *count += 1;
                    if self.member_rng.gen_range(0..*count) == 0 {
                        *member = p.clone();
                    }
                }
            }
            return Ok(());
        }

        if self.core.own_sampled(p, self.rate_denom)? {
            self.accept.insert(p.arrival_index, p.clone());
        } else if self.core.any_adjacent_sampled(p, self.rate_denom)? {
            self.reject.insert(p.arrival_index, p.clone());
        } else {
            return Ok(());
        }
        if let Some(members) = self.members.as_mut() {
            members.insert(p.arrival_index, (p.clone(), 1));
        }

        while self.accept.len() > self.threshold {
            self.halve_rate()?;
        }
        debug_assert!(self.accept.len() <= self.threshold);
        self.note_peaks();
        Ok(())
    }

    /// Returns up to k accepted representatives, uniformly without
    /// replacement. Empty only when the accept set is empty.
    pub fn query(&self, rng_seed: u64) -> Vec<Point> {
        let mut pool: Vec<&Point> = self.accept.values().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        let take = self.k.min(pool.len());
        let mut out = Vec::with_capacity(take);
        for i in 0..take {
            let j = rng.gen_range(i..pool.len());
            pool.swap(i, j);
            out.push(pool[i].clone());
        }
        out
    }

    /// Returns the reservoir member of a uniformly chosen sampled group.
    pub fn query_member(&self, rng_seed: u64) -> Result<Option<Point>, Error> {
        let members = self
            .members
            .as_ref()
            .ok_or(Error::Usage("member tracking is disabled for this sampler"))?;
        if self.accept.is_empty() {
            return Ok(None);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        let pick = rng.gen_range(0..self.accept.len());
        let rep = *self.accept.keys().nth(pick).expect("index in range");
        Ok(members.get(&rep).map(|(member, _)| member.clone()))
    }

    fn match_candidate(&self, p: &Point) -> Option<u64> {
        self.accept
            .iter()
            .chain(self.reject.iter())
            .find(|(_, u)| u.dist_sq(p) <= self.core.alpha_sq)
            .map(|(idx, _)| *idx)
    }

    fn halve_rate(&mut self) -> Result<(), Error> {
        let doubled = self
            .rate_denom
            .checked_mul(2)
            .filter(|r| *r <= 1 << 62)
            .ok_or(Error::Usage("sample rate denominator overflow"))?;
        self.rate_denom = doubled;
        self.stats.rate_doublings += 1;

        let old_accept = std::mem::take(&mut self.accept);
        for (idx, u) in old_accept {
            if self.core.own_sampled(&u, doubled)? {
                self.accept.insert(idx, u);
            } else if self.core.any_adjacent_sampled(&u, doubled)? {
                // still next to a sampled cell: remember it so later points of
                // the group cannot pose as new representatives
                self.reject.insert(idx, u);
            } else if let Some(members) = self.members.as_mut() {
                members.remove(&idx);
            }
        }
        let old_reject = std::mem::take(&mut self.reject);
        for (idx, u) in old_reject {
            if self.core.any_adjacent_sampled(&u, doubled)? {
                self.reject.insert(idx, u);
            } else if let Some(members) = self.members.as_mut() {
                members.remove(&idx);
            }
        }
        Ok(())
    }

    fn note_peaks(&mut self) {
        self.stats.peak_accept = self.stats.peak_accept.max(self.accept.len());
        self.stats.peak_reject = self.stats.peak_reject.max(self.reject.len());
        self.stats.peak_words = self.stats.peak_words.max(self.space_words());
    }

    /// Logical sampler state in 64-bit words: each stored point costs
    /// `dim + 2` words (coordinates, arrival index, bookkeeping), a member
    /// entry an extra `dim + 3`.
    pub fn space_words(&self) -> usize {
        let per_point = self.core.dim + 2;
        let mut words = (self.accept.len() + self.reject.len()) * per_point;
        if let Some(members) = &self.members {
            words += members.len() * (per_point + 1);
        }
        words
    }

    pub fn rate_denom(&self) -> u64 {
        self.rate_denom
    }

    pub fn threshold(&self) -> usize {
        self.threshold
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn accept_len(&self) -> usize {
        self.accept.len()
    }

    pub fn reject_len(&self) -> usize {
        self.reject.len()
    }

    pub fn accept_points(&self) -> impl Iterator<Item = &Point> {
        self.accept.values()
    }

    pub fn reject_points(&self) -> impl Iterator<Item = &Point> {
        self.reject.values()
    }

    pub fn stats(&self) -> IwStats {
        self.stats
    }

    /// Re-checks the stored sets against their definitions at the current
    /// rate: accepted representatives sit in sampled cells, rejected ones do
    /// not but have a sampled cell within `alpha`, and no two stored
    /// representatives are within `alpha` of each other.
    pub fn check_membership_invariants(&self) -> Result<(), Error> {
        for u in self.accept.values() {
            if !self.core.own_sampled(u, self.rate_denom)? {
                return Err(Error::Usage("accepted point in an unsampled cell"));
            }
        }
        for u in self.reject.values() {
            if self.core.own_sampled(u, self.rate_denom)? {
                return Err(Error::Usage("rejected point in a sampled cell"));
            }
            if !self.core.any_adjacent_sampled(u, self.rate_denom)? {
                return Err(Error::Usage("rejected point with no sampled cell nearby"));
            }
        }
        let stored: Vec<&Point> = self.accept.values().chain(self.reject.values()).collect();
        for (i, a) in stored.iter().enumerate() {
            for b in &stored[i + 1..] {
                if a.dist_sq(b) <= self.core.alpha_sq {
                    return Err(Error::Usage("two stored representatives within alpha"));
                }
            }
        }
        Ok(())
    }
}
