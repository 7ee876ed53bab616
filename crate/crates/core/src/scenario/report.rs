//! Scenario report structure, the shipped JSON schema, and a structural
//! validator covering the schema subset the report uses.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::{ScenarioConfig, ScenarioError};

/// The schema every emitted report must validate against.
pub const REPORT_SCHEMA_JSON: &str = include_str!("../../../../schemas/report.schema.json");

/// Fixed wording for all wall-clock figures: they depend on the host and
/// are never compared against external reference timings.
pub const TIMING_DISCLAIMER: &str = "Wall-clock timings depend on the host hardware and build \
profile; they are reported for context only and are not asserted against any reference values. \
Simulated latencies are seed-deterministic.";

/// Nominal bit cost of one logged message.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageCost {
    pub phase: String,
    pub kind: String,
    pub bits: u64,
}

/// Per-phase nominal cost of a single order, with the externally
/// published reference total where one exists. Only the order-placing
/// figure is exact by construction; the others are reported beside
/// their references without being asserted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseCost {
    pub phase: String,
    pub bits_per_order: u64,
    pub reference_bits: Option<u64>,
    pub asserted: bool,
}

/// Summary statistics over simulated per-order end-to-end latency.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatencyStats {
    pub median_ms: u64,
    pub p95_ms: u64,
    pub min_ms: u64,
    pub max_ms: u64,
}

impl LatencyStats {
    pub fn from_samples(samples: &[u64]) -> LatencyStats {
        if samples.is_empty() {
            return LatencyStats {
                median_ms: 0,
                p95_ms: 0,
                min_ms: 0,
                max_ms: 0,
            };
        }
        let mut sorted = samples.to_vec();
        sorted.sort_unstable();
        let n = sorted.len();
        LatencyStats {
            median_ms: sorted[n / 2],
            p95_ms: sorted[((n - 1) * 95).div_ceil(100)],
            min_ms: sorted[0],
            max_ms: sorted[n - 1],
        }
    }
}

/// Outcome of one order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderRecord {
    pub customer: u32,
    pub order: u32,
    pub delivered: bool,
    pub vb1: bool,
    pub failure: Option<String>,
    pub latency_ms: u64,
}

/// The full scenario report. Everything except `wall_clock_ms` is a
/// deterministic function of the configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub schema_version: u32,
    pub config: ScenarioConfig,
    pub orders_total: u64,
    pub orders_delivered: u64,
    pub orders_vb1: u64,
    pub phase_costs: Vec<PhaseCost>,
    pub message_breakdown: Vec<MessageCost>,
    pub orders: Vec<OrderRecord>,
    pub simulated_latency: LatencyStats,
    pub wall_clock_ms: u64,
    pub timing_disclaimer: String,
}

impl ScenarioReport {
    pub const SCHEMA_VERSION: u32 = 1;

    /// Copy with wall-clock timing zeroed, for determinism comparisons.
    pub fn normalized(&self) -> ScenarioReport {
        let mut out = self.clone();
        out.wall_clock_ms = 0;
        out
    }

    /// The assertion set the CLI exit code reflects. Empty means pass.
    pub fn assertions(&self) -> Vec<String> {
        let mut fails = Vec::new();
        if self.config.adversary == "passive" {
            if self.orders_delivered != self.orders_total {
                fails.push(format!(
                    "expected every order delivered, got {}/{}",
                    self.orders_delivered, self.orders_total
                ));
            }
            if self.orders_vb1 != self.orders_total {
                fails.push(format!(
                    "expected robot verification to pass for every order, got {}/{}",
                    self.orders_vb1, self.orders_total
                ));
            }
        } else {
            if self.orders_delivered != 0 || self.orders_vb1 != 0 {
                fails.push(format!(
                    "active adversary '{}' must never yield an accepted order, got {} delivered / {} verified",
                    self.config.adversary, self.orders_delivered, self.orders_vb1
                ));
            }
        }
        for pc in &self.phase_costs {
            if pc.asserted {
                if let Some(reference) = pc.reference_bits {
                    if pc.bits_per_order != reference {
                        fails.push(format!(
                            "phase {} cost {} bits does not match the asserted reference {}",
                            pc.phase, pc.bits_per_order, reference
                        ));
                    }
                }
            }
        }
        fails
    }

    /// Serializes and validates against the shipped schema.
    pub fn to_validated_json(&self) -> Result<String, ScenarioError> {
        let value =
            serde_json::to_value(self).map_err(|e| ScenarioError::Internal(e.to_string()))?;
        validate_report(&value)?;
        serde_json::to_string_pretty(&value).map_err(|e| ScenarioError::Internal(e.to_string()))
    }
}

/// Checks a JSON value against the shipped report schema. Supports the
/// subset of JSON Schema the report schema uses: `type` (including
/// union types), `required`, `properties`, and `items`.
pub fn validate_report(value: &Value) -> Result<(), ScenarioError> {
    let schema: Value = serde_json::from_str(REPORT_SCHEMA_JSON)
        .map_err(|e| ScenarioError::Internal(format!("bad shipped schema: {e}")))?;
    validate_node(value, &schema, "$")
}

fn type_matches(value: &Value, ty: &str) -> bool {
    match ty {
        "object" => value.is_object(),
        "array" => value.is_array(),
        "string" => value.is_string(),
        "boolean" => value.is_boolean(),
        "integer" => value.as_i64().is_some() || value.as_u64().is_some(),
        "number" => value.is_number(),
        "null" => value.is_null(),
        _ => false,
    }
}

fn validate_node(value: &Value, schema: &Value, path: &str) -> Result<(), ScenarioError> {
    let invalid = |msg: String| Err(ScenarioError::Internal(format!("schema: {msg}")));
    match schema.get("type") {
        Some(Value::String(ty)) => {
            if !type_matches(value, ty) {
                return invalid(format!("{path}: expected {ty}"));
            }
        }
        Some(Value::Array(types)) => {
            let ok = types
                .iter()
                .filter_map(Value::as_str)
                .any(|ty| type_matches(value, ty));
            if !ok {
                return invalid(format!("{path}: matches none of the union types"));
            }
        }
        _ => {}
    }
    if let Some(required) = schema.get("required").and_then(Value::as_array) {
        for key in required.iter().filter_map(Value::as_str) {
            if value.get(key).is_none() {
                return invalid(format!("{path}: missing required key {key}"));
            }
        }
    }
    if let (Some(props), Some(obj)) = (
        schema.get("properties").and_then(Value::as_object),
        value.as_object(),
    ) {
        for (key, sub) in props {
            if let Some(child) = obj.get(key) {
                validate_node(child, sub, &format!("{path}.{key}"))?;
            }
        }
    }
    if let (Some(items), Some(arr)) = (schema.get("items"), value.as_array()) {
        for (i, child) in arr.iter().enumerate() {
            validate_node(child, items, &format!("{path}[{i}]"))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ScenarioReport {
        ScenarioReport {
            schema_version: ScenarioReport::SCHEMA_VERSION,
            config: ScenarioConfig::default(),
            orders_total: 1,
            orders_delivered: 1,
            orders_vb1: 1,
            phase_costs: vec![PhaseCost {
                phase: "order-placing".to_string(),
                bits_per_order: 448,
                reference_bits: Some(448),
                asserted: true,
            }],
            message_breakdown: vec![MessageCost {
                phase: "order-placing".to_string(),
                kind: "ORD_M1".to_string(),
                bits: 320,
            }],
            orders: vec![OrderRecord {
                customer: 0,
                order: 0,
                delivered: true,
                vb1: true,
                failure: None,
                latency_ms: 150,
            }],
            simulated_latency: LatencyStats::from_samples(&[150]),
            wall_clock_ms: 12,
            timing_disclaimer: TIMING_DISCLAIMER.to_string(),
        }
    }

    #[test]
    fn sample_report_validates_against_shipped_schema() {
        sample().to_validated_json().unwrap();
    }

    #[test]
    fn missing_required_key_fails_validation() {
        let mut value = serde_json::to_value(sample()).unwrap();
        value.as_object_mut().unwrap().remove("orders_total");
        assert!(validate_report(&value).is_err());
        let mut value = serde_json::to_value(sample()).unwrap();
        value["simulated_latency"]["median_ms"] = Value::String("fast".to_string());
        assert!(validate_report(&value).is_err());
    }

    #[test]
    fn assertions_catch_shortfalls() {
        let mut report = sample();
        assert!(report.assertions().is_empty());
        report.orders_vb1 = 0;
        assert_eq!(report.assertions().len(), 1);
        report.orders_vb1 = 1;
        report.phase_costs[0].bits_per_order = 447;
        assert_eq!(report.assertions().len(), 1);
        report.phase_costs[0].bits_per_order = 448;
        report.config.adversary = "drop".to_string();
        // An active adversary must not have accepted orders.
        assert_eq!(report.assertions().len(), 1);
        report.orders_delivered = 0;
        report.orders_vb1 = 0;
        assert!(report.assertions().is_empty());
    }

    #[test]
    fn latency_stats_order_statistics() {
        let stats = LatencyStats::from_samples(&[10, 30, 20, 50, 40]);
        assert_eq!(stats.median_ms, 30);
        assert_eq!(stats.min_ms, 10);
        assert_eq!(stats.max_ms, 50);
        assert_eq!(stats.p95_ms, 50);
    }

    #[test]
    fn normalized_strips_wall_clock_only() {
        let report = sample();
        let mut expected = report.clone();
        expected.wall_clock_ms = 0;
        assert_eq!(report.normalized(), expected);
    }
}
