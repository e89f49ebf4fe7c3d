//! Sliding-window candidate tracking at one fixed sample rate 1/R.
//!
//! The instance keeps, for every candidate group with a point in the window,
//! exactly one representative and the group's latest point:
//!
//! - a new point within `alpha` of a stored representative only refreshes the
//!   stored latest point;
//! - otherwise the point becomes a new representative, accepted when its own
//!   cell is sampled at rate 1/R, rejected when only some cell within `alpha`
//!   of it is sampled, ignored otherwise;
//! - when a group's latest point falls out of the window the whole entry is
//!   dropped. The representative itself may live before the window for as
//!   long as the group keeps producing points inside it.
//!
//! The resulting representative of a group is the latest group point with no
//! earlier group point in the window-length stretch right before it. That
//! choice depends only on the stream, never on the hash.
//!
//! Space is not bounded here (up to w/R entries); the hierarchical sampler
//! composes these instances and prunes them to get its space guarantee.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, SwError};
use crate::params::{GridMode, SamplerCore};
use crate::point::{Point, Window};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObserveOutcome {
    /// The point refreshed the latest-point slot of the group keyed by this
    /// representative arrival index.
    Matched { rep_index: u64 },
    NewAccept,
    NewReject,
    Ignored,
}

#[derive(Debug, Clone)]
pub struct FixedRateInstance {
    core: Arc<SamplerCore>,
    rate_denom: u64,
    window: Window,
    accept: BTreeMap<u64, Point>,
    reject: BTreeMap<u64, Point>,
    latest: BTreeMap<u64, Point>,
    last_arrival: Option<(u64, Option<u64>)>,
}

impl FixedRateInstance {
    /// Standalone constructor with its own grid and hash.
    pub fn new(
        alpha: f64,
        dim: usize,
        rate_denom: u64,
        window: Window,
        seed: u64,
    ) -> Result<Self, Error> {
        let core = Arc::new(SamplerCore::new(
            alpha,
            dim,
            1024,
            seed,
            GridMode::auto(dim),
        )?);
        Self::with_core(core, rate_denom, window)
    }

    pub(crate) fn with_core(
        core: Arc<SamplerCore>,
        rate_denom: u64,
        window: Window,
    ) -> Result<Self, Error> {
        if !rate_denom.is_power_of_two() || rate_denom > 1 << 61 {
            return Err(Error::Config("sample rate denominator must be a power of two"));
        }
        Ok(Self {
            core,
            rate_denom,
            window,
            accept: BTreeMap::new(),
            reject: BTreeMap::new(),
            latest: BTreeMap::new(),
            last_arrival: None,
        })
    }

    /// Processes one arriving point: expiry sweep, then group match or new
    /// representative per the sampling rules.
    pub fn observe(&mut self, p: &Point) -> Result<ObserveOutcome, Error> {
        self.core.check_dim(p)?;
        self.check_order(p)?;
        if let Some(rep) = self.expire_and_match(p) {
            self.update_latest(rep, p);
            return Ok(ObserveOutcome::Matched { rep_index: rep });
        }
        if self.core.own_sampled(p, self.rate_denom)? {
            self.insert_accept(p);
            Ok(ObserveOutcome::NewAccept)
        } else if self.core.any_adjacent_sampled(p, self.rate_denom)? {
            self.insert_reject(p);
            Ok(ObserveOutcome::NewReject)
        } else {
            Ok(ObserveOutcome::Ignored)
        }
    }

    /// Latest points of the groups keyed by accepted representatives.
    pub fn accepted_latest(&self) -> Vec<Point> {
        self.accept
            .keys()
            .filter_map(|idx| self.latest.get(idx).cloned())
            .collect()
    }

    pub(crate) fn check_order(&self, p: &Point) -> Result<(), Error> {
        if let Some((last_idx, last_ts)) = self.last_arrival {
            if p.arrival_index <= last_idx {
                return Err(Error::Usage("arrival indices must be strictly increasing"));
            }
            if let Window::Time { .. } = self.window {
                let ts = p
                    .timestamp
                    .ok_or(Error::Usage("time-based window requires timestamps"))?;
                if last_ts.is_some_and(|t| ts < t) {
                    return Err(Error::Usage("timestamps must be nondecreasing"));
                }
            }
        } else if matches!(self.window, Window::Time { .. }) && p.timestamp.is_none() {
            return Err(Error::Usage("time-based window requires timestamps"));
        }
        Ok(())
    }

    /// Removes pairs whose latest point expired relative to `now`, then scans
    /// the surviving representatives for one within `alpha` of `p`.
    pub(crate) fn expire_and_match(&mut self, p: &Point) -> Option<u64> {
        self.last_arrival = Some((p.arrival_index, p.timestamp));
        self.sweep(p);
        self.accept
            .iter()
            .chain(self.reject.iter())
            .find(|(_, u)| u.dist_sq(p) <= self.core.alpha_sq)
            .map(|(idx, _)| *idx)
    }

    pub(crate) fn sweep(&mut self, now: &Point) {
        self.sweep_at(now.arrival_index, now.timestamp);
    }

    pub(crate) fn sweep_at(&mut self, now_index: u64, now_timestamp: Option<u64>) {
        let expired: Vec<u64> = self
            .latest
            .iter()
            .filter(|(_, q)| self.window.expired_at(q, now_index, now_timestamp))
            .map(|(idx, _)| *idx)
            .collect();
        for idx in expired {
            self.latest.remove(&idx);
            self.accept.remove(&idx);
            self.reject.remove(&idx);
        }
    }

    pub(crate) fn update_latest(&mut self, rep_index: u64, p: &Point) {
        self.latest.insert(rep_index, p.clone());
    }

    pub(crate) fn insert_accept(&mut self, p: &Point) {
        self.accept.insert(p.arrival_index, p.clone());
        self.latest.insert(p.arrival_index, p.clone());
    }

    pub(crate) fn insert_reject(&mut self, p: &Point) {
        self.reject.insert(p.arrival_index, p.clone());
        self.latest.insert(p.arrival_index, p.clone());
    }

    /// Consumes the instance, yielding every tracked group as
    /// (representative, latest point, accepted?).
    pub(crate) fn drain_tracked(mut self) -> Vec<(Point, Point, bool)> {
        let mut out = Vec::with_capacity(self.latest.len());
        for (idx, latest) in std::mem::take(&mut self.latest) {
            if let Some(rep) = self.accept.remove(&idx) {
                out.push((rep, latest, true));
            } else if let Some(rep) = self.reject.remove(&idx) {
                out.push((rep, latest, false));
            }
        }
        out
    }

    /// Adopts an already-tracked group, keyed by its representative.
    pub(crate) fn insert_tracked(&mut self, rep: Point, latest: Point, accepted: bool) {
        let idx = rep.arrival_index;
        if accepted {
            self.accept.insert(idx, rep);
        } else {
            self.reject.insert(idx, rep);
        }
        self.latest.insert(idx, latest);
    }

    /// Splits off the prefix that survives resampling at the doubled rate.
    ///
    /// `t` is the largest arrival index of an accepted representative whose
    /// cell is still sampled at rate 1/(2R). The promoted instance keeps
    /// representatives with index <= t, refiltered at the doubled rate
    /// (accepted ones that lose their cell but keep a sampled cell within
    /// `alpha` demote to rejected); the remainder keeps everything after `t`
    /// at the old rate. Pairs follow their keys. Fails when no accepted
    /// representative survives, which has probability (1/2)^|accept|.
    pub fn split(self) -> Result<(FixedRateInstance, FixedRateInstance), SwError> {
        let doubled = self.rate_denom * 2;
        let survives = |u: &Point| {
            self.core
                .own_sampled(u, doubled)
                .expect("rate stays within the hash range")
        };
        let t = self
            .accept
            .iter()
            .rev()
            .find(|(_, u)| survives(u))
            .map(|(idx, _)| *idx)
            .ok_or(SwError::DegenerateSplit)?;

        let mut promoted = FixedRateInstance::with_core(
            Arc::clone(&self.core),
            doubled,
            self.window,
        )
        .expect("doubled rate stays a power of two");
        let mut remainder =
            FixedRateInstance::with_core(Arc::clone(&self.core), self.rate_denom, self.window)
                .expect("rate unchanged");
        promoted.last_arrival = self.last_arrival;
        remainder.last_arrival = self.last_arrival;

        let adjacent = |u: &Point| {
            self.core
                .any_adjacent_sampled(u, doubled)
                .expect("rate stays within the hash range")
        };
        for (idx, u) in &self.accept {
            if *idx > t {
                remainder.accept.insert(*idx, u.clone());
            } else if survives(u) {
                promoted.accept.insert(*idx, u.clone());
            } else if adjacent(u) {
                promoted.reject.insert(*idx, u.clone());
            }
        }
        for (idx, u) in &self.reject {
            if *idx > t {
                remainder.reject.insert(*idx, u.clone());
            } else if adjacent(u) {
                promoted.reject.insert(*idx, u.clone());
            }
        }
        for (idx, q) in &self.latest {
            if promoted.accept.contains_key(idx) || promoted.reject.contains_key(idx) {
                promoted.latest.insert(*idx, q.clone());
            } else if remainder.accept.contains_key(idx) || remainder.reject.contains_key(idx) {
                remainder.latest.insert(*idx, q.clone());
            }
        }
        Ok((promoted, remainder))
    }

    /// Union of two instances at the same rate over disjoint, adjacent index
    /// ranges.
    pub fn merge(a: FixedRateInstance, b: FixedRateInstance) -> Result<FixedRateInstance, Error> {
        if a.rate_denom != b.rate_denom {
            return Err(Error::Usage("merged instances must share the sample rate"));
        }
        if a.window != b.window
            || a.core.dim != b.core.dim
            || a.core.grid.seed() != b.core.grid.seed()
            || a.core.grid.side() != b.core.grid.side()
            || a.core.hash.seed() != b.core.hash.seed()
        {
            return Err(Error::Usage("merged instances must share grid, hash and window"));
        }
        debug_assert!(
            a.max_rep_index().zip(b.min_rep_index()).map_or(true, |(am, bm)| am < bm)
                || b.max_rep_index().zip(a.min_rep_index()).map_or(true, |(bm, am)| bm < am),
            "merged index ranges overlap"
        );
        let mut out = a;
        out.accept.extend(b.accept);
        out.reject.extend(b.reject);
        out.latest.extend(b.latest);
        out.last_arrival = match (out.last_arrival, b.last_arrival) {
            (Some(x), Some(y)) => Some(x.max(y)),
            (x, y) => x.or(y),
        };
        Ok(out)
    }

    pub fn rate_denom(&self) -> u64 {
        self.rate_denom
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn accept_len(&self) -> usize {
        self.accept.len()
    }

    pub fn reject_len(&self) -> usize {
        self.reject.len()
    }

    pub fn is_empty(&self) -> bool {
        self.latest.is_empty()
    }

    pub fn accept_reps(&self) -> impl Iterator<Item = &Point> {
        self.accept.values()
    }

    pub fn reject_reps(&self) -> impl Iterator<Item = &Point> {
        self.reject.values()
    }

    /// Pairs (representative, latest point, accepted?) in representative
    /// arrival order.
    pub fn pairs(&self) -> impl Iterator<Item = (&Point, &Point, bool)> {
        self.latest.iter().map(|(idx, q)| {
            if let Some(u) = self.accept.get(idx) {
                (u, q, true)
            } else {
                (&self.reject[idx], q, false)
            }
        })
    }

    pub fn min_rep_index(&self) -> Option<u64> {
        self.latest.keys().next().copied()
    }

    pub fn max_rep_index(&self) -> Option<u64> {
        self.latest.keys().next_back().copied()
    }

    /// Stored state in 64-bit words: representatives cost `dim + 2` words,
    /// pair slots `dim + 3` (latest point plus the key reference).
    pub fn space_words(&self) -> usize {
        let per_point = self.core.dim + 2;
        (self.accept.len() + self.reject.len()) * per_point
            + self.latest.len() * (per_point + 1)
    }
}
