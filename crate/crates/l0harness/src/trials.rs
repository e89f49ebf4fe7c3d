//! Repeated-trial experiment runner.
//!
//! Each trial replays the full stream into a freshly seeded sampler and
//! queries once at the end; for sliding windows the final window covers the
//! last `w` items, which is a random window of a shuffled dataset. The data
//! (and therefore the ground-truth labels) stay fixed across trials; all
//! variance comes from the samplers' seeds. Trials are independent and run
//! in parallel.

use rayon::prelude::*;

use l0sketch::datagen::LabeledStream;
use l0sketch::{Error, GridMode, IwConfig, IwSampler, SwConfig, SwSampler, Window};

use crate::metrics::EmpiricalDistribution;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerMode {
    Iw,
    Sw,
}

#[derive(Debug, Clone)]
pub struct TrialSpec {
    pub mode: SamplerMode,
    pub alpha: f64,
    pub m_bound: u64,
    pub kappa0: f64,
    pub k: usize,
    pub grid_mode: GridMode,
    /// Required in sliding-window mode.
    pub window: Option<Window>,
    pub runs: u64,
    pub base_seed: u64,
}

impl TrialSpec {
    pub fn new(mode: SamplerMode, alpha: f64, m_bound: u64, runs: u64, base_seed: u64) -> Self {
        Self {
            mode,
            alpha,
            m_bound,
            kappa0: 3.2,
            k: 1,
            grid_mode: GridMode::HighDim,
            window: None,
            runs,
            base_seed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub dist: EmpiricalDistribution,
    /// Trials where the sampler reported a failure event.
    pub errors: u64,
    /// Trials that produced no sample (failure events included).
    pub empty: u64,
}

fn mix_seed(seed: u64, tag: u64) -> u64 {
    let mut x = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// One full-stream replay; returns the sampled point's group, or None.
fn run_one(data: &LabeledStream, spec: &TrialSpec, seed: u64) -> Result<(Option<u64>, bool), Error> {
    match spec.mode {
        SamplerMode::Iw => {
            let mut cfg = IwConfig::new(spec.alpha, data.dim, spec.m_bound, seed);
            cfg.kappa0 = spec.kappa0;
            cfg.k = spec.k;
            cfg.grid_mode = spec.grid_mode;
            let mut sampler = IwSampler::new(cfg)?;
            for (p, _) in &data.points {
                sampler.insert(p)?;
            }
            let picked = sampler.query(mix_seed(seed, 0xa11ce));
            Ok((
                picked.first().and_then(|p| data.group_of(p.arrival_index)),
                false,
            ))
        }
        SamplerMode::Sw => {
            let window = spec
                .window
                .ok_or(Error::Config("sliding-window trials need a window"))?;
            let mut cfg = SwConfig::new(spec.alpha, data.dim, window, spec.m_bound, seed);
            cfg.kappa0 = spec.kappa0;
            cfg.grid_mode = spec.grid_mode;
            let mut sampler = SwSampler::new(cfg)?;
            let mut failed = false;
            for (p, _) in &data.points {
                match sampler.insert(p) {
                    Ok(_) => {}
                    Err(Error::Sw(_)) => {
                        failed = true;
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
            if failed {
                return Ok((None, true));
            }
            let picked = sampler.query(mix_seed(seed, 0xa11ce));
            Ok((
                picked.and_then(|p| data.group_of(p.arrival_index)),
                false,
            ))
        }
    }
}

/// Ground-truth group count the trials are measured against: all groups for
/// the infinite window, the groups with a point in the final window for the
/// sliding window.
pub fn ground_truth_groups(data: &LabeledStream, spec: &TrialSpec) -> usize {
    match (spec.mode, spec.window) {
        (SamplerMode::Sw, Some(w)) => data.groups_in_window(w.width()).len(),
        _ => data.n_groups,
    }
}

pub fn run_trials(data: &LabeledStream, spec: &TrialSpec) -> Result<TrialOutcome, Error> {
    if data.is_empty() {
        return Err(Error::Data("empty stream"));
    }
    let outcomes: Vec<(Option<u64>, bool)> = (0..spec.runs)
        .into_par_iter()
        .map(|i| run_one(data, spec, spec.base_seed.wrapping_add(i)))
        .collect::<Result<_, _>>()?;

    let mut dist = EmpiricalDistribution {
        trials: spec.runs,
        n_groups: ground_truth_groups(data, spec),
        ..Default::default()
    };
    let mut errors = 0;
    let mut empty = 0;
    for (group, failed) in outcomes {
        match group {
            Some(g) => *dist.hits.entry(g).or_default() += 1,
            None => empty += 1,
        }
        if failed {
            errors += 1;
        }
    }
    Ok(TrialOutcome { dist, errors, empty })
}

#[cfg(test)]
mod tests {
    use super::*;
    use l0sketch::datagen::{add_near_duplicates, DuplicateMode};
    use l0sketch::Point;

    fn two_singletons() -> LabeledStream {
        let centers = vec![
            Point::new(vec![0.0, 0.0], 0),
            Point::new(vec![10.0, 0.0], 1),
        ];
        add_near_duplicates(&centers, DuplicateMode::Uniform { max: 1 }, 5).unwrap()
    }

    #[test]
    fn one_group_always_hit() {
        let centers = vec![Point::new(vec![0.0, 0.0], 0)];
        let data = add_near_duplicates(&centers, DuplicateMode::Uniform { max: 3 }, 1).unwrap();
        let spec = TrialSpec::new(SamplerMode::Iw, 1.0, 64, 200, 7);
        let out = run_trials(&data, &spec).unwrap();
        assert_eq!(out.dist.hits[&0], 200);
        assert_eq!(out.errors, 0);
        assert_eq!(out.empty, 0);
    }

    #[test]
    fn two_singleton_groups_are_balanced() {
        let data = two_singletons();
        let spec = TrialSpec::new(SamplerMode::Iw, 1.0, 64, 10_000, 11);
        let out = run_trials(&data, &spec).unwrap();
        for g in [0u64, 1] {
            let f = out.dist.hits[&g] as f64 / 10_000.0;
            assert!((f - 0.5).abs() < 0.03, "group {g}: {f}");
        }
    }

    #[test]
    fn trials_are_deterministic() {
        let data = two_singletons();
        let spec = TrialSpec::new(SamplerMode::Iw, 1.0, 64, 500, 3);
        let a = run_trials(&data, &spec).unwrap();
        let b = run_trials(&data, &spec).unwrap();
        assert_eq!(a.dist.hits, b.dist.hits);
    }

    #[test]
    fn sw_mode_requires_window() {
        let data = two_singletons();
        let spec = TrialSpec::new(SamplerMode::Sw, 1.0, 64, 10, 3);
        assert!(run_trials(&data, &spec).is_err());
    }

    #[test]
    fn sw_trials_hit_only_window_groups() {
        let data = two_singletons();
        let mut spec = TrialSpec::new(SamplerMode::Sw, 1.0, 64, 2000, 3);
        spec.window = Some(Window::sequence(2).unwrap());
        let out = run_trials(&data, &spec).unwrap();
        let want = data.groups_in_window(2);
        for g in out.dist.hits.keys() {
            assert!(want.contains(g), "sampled group {g} outside the final window");
        }
        assert_eq!(out.dist.n_groups, want.len());
    }
}
