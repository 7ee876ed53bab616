//! Scenario harness: configuration, the end-to-end runner over the
//! simulated bus, named attack drills, throughput measurement, and the
//! JSON report with its shipped schema.

pub mod attacks;
pub mod bench;
pub mod config;
pub mod report;
pub mod runner;

pub use attacks::{run_attack, run_attack_suite, AttackOutcome, AttackReport, ATTACK_NAMES};
pub use bench::{batch_latencies, batch_latencies_sequential, bench_throughput, BenchReport, BenchRow};
pub use config::{ScenarioConfig, ScenarioError, ADVERSARY_NAMES};
pub use report::{
    validate_report, LatencyStats, MessageCost, OrderRecord, PhaseCost, ScenarioReport,
    REPORT_SCHEMA_JSON, TIMING_DISCLAIMER,
};
pub use runner::{
    run_scenario, OrderTokens, ScenarioRun, REFERENCE_BITS_CUSTOMER_VERIFICATION,
    REFERENCE_BITS_ORDER_PLACING, REFERENCE_BITS_ROBOT_VERIFICATION,
};
