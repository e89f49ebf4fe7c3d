//! Per-item processing time and peak logical state size.
//!
//! Time is wall-clock per item averaged over repeated single-threaded scans
//! of the whole stream; space is the samplers' own word-count instrumentation
//! (stored points and pair slots, not allocator overhead), maximized over the
//! stream.

use std::time::Instant;

use l0sketch::datagen::LabeledStream;
use l0sketch::{Error, IwConfig, IwSampler, SwConfig, SwSampler};

use crate::trials::{SamplerMode, TrialSpec};

#[derive(Debug, Clone, Copy)]
pub struct ResourceReport {
    /// Milliseconds per item, averaged over all scans.
    pub p_time_ms: f64,
    /// Peak 64-bit words of sampler state, maximum over scans.
    pub p_space_words: usize,
}

/// Scans the whole stream `scans` times with per-scan seeds.
pub fn measure_resources(
    data: &LabeledStream,
    spec: &TrialSpec,
    scans: u64,
) -> Result<ResourceReport, Error> {
    if data.is_empty() {
        return Ok(ResourceReport { p_time_ms: 0.0, p_space_words: 0 });
    }
    let mut peak_words = 0usize;
    let mut total = std::time::Duration::ZERO;
    for scan in 0..scans.max(1) {
        let seed = spec.base_seed.wrapping_add(scan);
        match spec.mode {
            SamplerMode::Iw => {
                let mut cfg = IwConfig::new(spec.alpha, data.dim, spec.m_bound, seed);
                cfg.kappa0 = spec.kappa0;
                cfg.k = spec.k;
                cfg.grid_mode = spec.grid_mode;
                let mut sampler = IwSampler::new(cfg)?;
                let start = Instant::now();
                for (p, _) in &data.points {
                    sampler.insert(p)?;
                }
                total += start.elapsed();
                peak_words = peak_words.max(sampler.stats().peak_words);
            }
            SamplerMode::Sw => {
                let window = spec
                    .window
                    .ok_or(Error::Config("sliding-window measurement needs a window"))?;
                let mut cfg = SwConfig::new(spec.alpha, data.dim, window, spec.m_bound, seed);
                cfg.kappa0 = spec.kappa0;
                cfg.grid_mode = spec.grid_mode;
                let mut sampler = SwSampler::new(cfg)?;
                let start = Instant::now();
                for (p, _) in &data.points {
                    match sampler.insert(p) {
                        Ok(_) => {}
                        Err(Error::Sw(_)) => break,
                        Err(e) => return Err(e),
                    }
                }
                total += start.elapsed();
                peak_words = peak_words.max(sampler.stats().peak_words);
            }
        }
    }
    let items = (scans.max(1) as f64) * data.len() as f64;
    Ok(ResourceReport {
        p_time_ms: total.as_secs_f64() * 1e3 / items,
        p_space_words: peak_words,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use l0sketch::datagen::{generate, DuplicateMode};

    #[test]
    fn iw_peak_space_within_candidate_bound() {
        // stored candidates cost (dim + 2) words each; rejected
        // representatives stay within a small multiple of the accept capacity
        let data = generate(120, 5, DuplicateMode::Uniform { max: 10 }, 21).unwrap();
        let spec = TrialSpec::new(SamplerMode::Iw, data.alpha_truth, 2048, 1, 5);
        let report = measure_resources(&data, &spec, 20).unwrap();
        let threshold = 36; // ceil(3.2 * log2(2048))
        let bound = (1 + 8) * threshold * (5 + 2);
        assert!(report.p_space_words > 0);
        assert!(
            report.p_space_words <= bound,
            "peak {} words exceeds bound {bound}",
            report.p_space_words
        );
    }

    #[test]
    fn sw_costs_more_space_than_iw_but_bounded() {
        let data = generate(120, 5, DuplicateMode::Uniform { max: 10 }, 22).unwrap();
        let mut iw = TrialSpec::new(SamplerMode::Iw, data.alpha_truth, 2048, 1, 5);
        let mut sw = TrialSpec::new(SamplerMode::Sw, data.alpha_truth, 2048, 1, 5);
        sw.mode = SamplerMode::Sw;
        sw.window = Some(l0sketch::Window::sequence(200).unwrap());
        iw.runs = 1;
        let iw_report = measure_resources(&data, &iw, 10).unwrap();
        let sw_report = measure_resources(&data, &sw, 10).unwrap();
        let levels = 9; // ceil(log2(200)) + 1
        assert!(sw_report.p_space_words >= iw_report.p_space_words);
        assert!(
            sw_report.p_space_words <= 2 * levels * iw_report.p_space_words,
            "sw {} vs iw {}",
            sw_report.p_space_words,
            iw_report.p_space_words
        );
    }

    #[test]
    fn per_item_time_is_sane() {
        let data = generate(100, 5, DuplicateMode::Uniform { max: 10 }, 23).unwrap();
        let spec = TrialSpec::new(SamplerMode::Iw, data.alpha_truth, 2048, 1, 5);
        let report = measure_resources(&data, &spec, 5).unwrap();
        assert!(report.p_time_ms > 0.0 && report.p_time_ms < 1.0);
    }
}
