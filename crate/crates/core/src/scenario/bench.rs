//! Throughput measurement: batches of independent single-order
//! scenarios at ascending order counts, run data-parallel when the
//! `parallel` feature is enabled, with a sequential fallback.

use std::time::Instant;

use serde::{Deserialize, Serialize};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::netbus::CostProfile;

use super::config::{ScenarioConfig, ScenarioError};
use super::report::{LatencyStats, TIMING_DISCLAIMER};
use super::runner::run_scenario;

/// One row of the throughput table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchRow {
    pub orders: u64,
    pub median_ms: u64,
    pub p95_ms: u64,
    pub wall_clock_ms: u64,
    pub orders_ok: u64,
}

/// The full throughput report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchReport {
    pub profile: String,
    pub parallel: bool,
    pub rows: Vec<BenchRow>,
    /// Whether the median simulated per-order latency of the largest
    /// batch stayed within twice the smallest batch's median.
    pub flat: bool,
    pub timing_disclaimer: String,
}

fn order_config(seed: u64, profile: &str) -> ScenarioConfig {
    ScenarioConfig {
        seed,
        customers: 1,
        orders_per_customer: 1,
        crp_db_size: 4,
        robot_pool_size: 1,
        profile: profile.to_string(),
        ..ScenarioConfig::default()
    }
}

fn one_order(seed: u64, profile: &str) -> Result<(u64, bool), ScenarioError> {
    let run = run_scenario(&order_config(seed, profile))?;
    let order = run
        .report
        .orders
        .first()
        .ok_or_else(|| ScenarioError::Internal("empty batch report".to_string()))?;
    Ok((order.latency_ms, order.vb1))
}

/// Simulated latency and success bit for `count` independent orders,
/// sequentially.
pub fn batch_latencies_sequential(
    seed: u64,
    profile: &str,
    count: u64,
) -> Result<Vec<(u64, bool)>, ScenarioError> {
    (0..count)
        .map(|i| one_order(seed.wrapping_add(i), profile))
        .collect()
}

/// Same batch, data-parallel across orders when the `parallel` feature
/// is on. Each order is an isolated scenario, so the result is
/// identical to the sequential path.
#[cfg(feature = "parallel")]
pub fn batch_latencies(seed: u64, profile: &str, count: u64) -> Result<Vec<(u64, bool)>, ScenarioError> {
    (0..count)
        .into_par_iter()
        .map(|i| one_order(seed.wrapping_add(i), profile))
        .collect()
}

#[cfg(not(feature = "parallel"))]
pub fn batch_latencies(seed: u64, profile: &str, count: u64) -> Result<Vec<(u64, bool)>, ScenarioError> {
    batch_latencies_sequential(seed, profile, count)
}

/// Runs the throughput suite over ascending order counts.
pub fn bench_throughput(
    seed: u64,
    profile: &str,
    counts: &[u64],
) -> Result<BenchReport, ScenarioError> {
    if counts.is_empty() {
        return Err(ScenarioError::ConfigInvalid(
            "order counts must not be empty".to_string(),
        ));
    }
    if !counts.windows(2).all(|w| w[0] < w[1]) {
        return Err(ScenarioError::ConfigInvalid(
            "order counts must be strictly ascending".to_string(),
        ));
    }
    if counts.iter().any(|&c| c == 0 || c > 100_000) {
        return Err(ScenarioError::ConfigInvalid(
            "order counts must be in 1..=100000".to_string(),
        ));
    }
    if CostProfile::by_name(profile).is_none() {
        return Err(ScenarioError::ConfigInvalid(format!(
            "unknown accounting profile: {profile}"
        )));
    }

    let mut rows = Vec::new();
    for &count in counts {
        let started = Instant::now();
        let samples = batch_latencies(seed, profile, count)?;
        let wall_clock_ms = started.elapsed().as_millis() as u64;
        let latencies: Vec<u64> = samples.iter().map(|(l, _)| *l).collect();
        let stats = LatencyStats::from_samples(&latencies);
        rows.push(BenchRow {
            orders: count,
            median_ms: stats.median_ms,
            p95_ms: stats.p95_ms,
            wall_clock_ms,
            orders_ok: samples.iter().filter(|(_, ok)| *ok).count() as u64,
        });
    }
    let flat = rows.last().unwrap().median_ms <= 2 * rows.first().unwrap().median_ms;
    Ok(BenchReport {
        profile: profile.to_string(),
        parallel: cfg!(feature = "parallel"),
        rows,
        flat,
        timing_disclaimer: TIMING_DISCLAIMER.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ascending_counts_enforced() {
        assert!(matches!(
            bench_throughput(1, "default", &[]),
            Err(ScenarioError::ConfigInvalid(_))
        ));
        assert!(bench_throughput(1, "default", &[10, 10]).is_err());
        assert!(bench_throughput(1, "default", &[10, 5]).is_err());
        assert!(bench_throughput(1, "exotic", &[1, 2]).is_err());
    }

    #[test]
    fn small_suite_runs_and_is_flat() {
        let report = bench_throughput(5, "default", &[2, 4]).unwrap();
        assert_eq!(report.rows.len(), 2);
        assert_eq!(report.rows[0].orders_ok, 2);
        assert_eq!(report.rows[1].orders_ok, 4);
        assert!(report.flat);
    }

    #[test]
    fn parallel_and_sequential_batches_agree() {
        let par = batch_latencies(9, "default", 3).unwrap();
        let seq = batch_latencies_sequential(9, "default", 3).unwrap();
        assert_eq!(par, seq);
    }
}
