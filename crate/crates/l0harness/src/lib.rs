//! Experiment harness for the `l0sketch` samplers: CSV stream ingestion,
//! repeated-trial runners with deviation metrics, per-item time and peak
//! state measurement, a greedy partition baseline, and JSON reporting.

pub mod csv;
pub mod greedy;
pub mod json;
pub mod metrics;
pub mod resources;
pub mod trials;
