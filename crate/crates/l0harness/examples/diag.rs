//! Scratch diagnostic for sliding-window per-group deviations.

use rayon::prelude::*;

use l0sketch::datagen::{add_near_duplicates, random_dataset, rescale_min_distance, DuplicateMode};
use l0sketch::{GridMode, SwConfig, SwSampler, Window};

fn main() {
    let base = random_dataset(100, 5, 42).unwrap();
    let rescaled = rescale_min_distance(&base).unwrap();
    let data = add_near_duplicates(&rescaled, DuplicateMode::Uniform { max: 20 }, 43).unwrap();
    let w = 200u64;
    let in_window = data.groups_in_window(w);
    let trials = 50_000u64;

    let outcomes: Vec<Option<u64>> = (0..trials)
        .into_par_iter()
        .map(|seed| {
            let mut cfg = SwConfig::new(
                data.alpha_truth,
                5,
                Window::sequence(w).unwrap(),
                (2 * data.len() as u64).next_power_of_two(),
                11_000 + seed,
            );
            cfg.grid_mode = GridMode::HighDim;
            let mut s = SwSampler::new(cfg).unwrap();
            for (p, _) in &data.points {
                if s.insert(p).is_err() {
                    return None;
                }
            }
            s.query(seed ^ 0xa11ce).and_then(|q| data.group_of(q.arrival_index))
        })
        .collect();

    let mut hits = std::collections::BTreeMap::<u64, u64>::new();
    for g in outcomes.into_iter().flatten() {
        *hits.entry(g).or_default() += 1;
    }
    let total: u64 = hits.values().sum();
    println!("answered {total} / {trials}; window groups {}", in_window.len());

    // per-group features: points in window, latest index, first in-window index
    let start = data.len() - w as usize;
    let mut rows = Vec::new();
    for g in &in_window {
        let f = *hits.get(g).unwrap_or(&0) as f64 / total as f64;
        let dev = (f * in_window.len() as f64) - 1.0; // relative deviation
        let in_w: Vec<u64> = data.points[start..]
            .iter()
            .filter(|(_, gg)| gg == g)
            .map(|(p, _)| p.arrival_index)
            .collect();
        let before = data.points[..start].iter().filter(|(_, gg)| gg == g).count();
        rows.push((dev, *g, in_w.len(), before, *in_w.last().unwrap()));
    }
    rows.sort_by(|a, b| b.0.abs().partial_cmp(&a.0.abs()).unwrap());
    println!("top deviations: (rel_dev, group, pts_in_window, pts_before, latest_idx)");
    for r in rows.iter().take(12) {
        println!("{:+.3}  g={} in_w={} before={} latest={}", r.0, r.1, r.2, r.3, r.4);
    }
    let mean_dev_small: f64 = rows.iter().filter(|r| r.2 <= 2).map(|r| r.0).sum::<f64>()
        / rows.iter().filter(|r| r.2 <= 2).count() as f64;
    let mean_dev_large: f64 = rows.iter().filter(|r| r.2 >= 5).map(|r| r.0).sum::<f64>()
        / rows.iter().filter(|r| r.2 >= 5).count() as f64;
    println!("mean rel dev: groups with <=2 window pts {mean_dev_small:+.4}, >=5 pts {mean_dev_large:+.4}");
    let mean_dev_old: f64 = rows.iter().filter(|r| r.4 < (data.len() as u64 - 100)).map(|r| r.0).sum::<f64>()
        / rows.iter().filter(|r| r.4 < (data.len() as u64 - 100)).count().max(1) as f64;
    let mean_dev_new: f64 = rows.iter().filter(|r| r.4 >= (data.len() as u64 - 100)).map(|r| r.0).sum::<f64>()
        / rows.iter().filter(|r| r.4 >= (data.len() as u64 - 100)).count().max(1) as f64;
    println!("mean rel dev: latest in older half {mean_dev_old:+.4}, newer half {mean_dev_new:+.4}");
}
