use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::lifelong::{compute_lifelong_metrics, compute_transfer_validation, LifelongMetrics, PerformanceMatrix, TransferValidation};
use super::metrics::{compute_core_metrics, compute_efficiency, CoreMetrics, Efficiency};
use super::record::{FailureReason, OutcomeRecord, SquanderedBooking};
use crate::dataset::DatasetCounts;

pub const TURN_ACCOUNTING: &str = "every agent response counts as one turn, including responses that fail to parse or call an unavailable tool";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub run_id: String,
    pub dataset_name: String,
    pub dataset_hash: String,
    pub agent: String,
    pub preset: String,
    pub seed: u64,
    pub max_turns: u32,
    pub turn_accounting: String,
    /// Wall-clock duration of the run.
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub meta: RunMeta,
    pub dataset_counts: DatasetCounts,
    pub tasks_evaluated: u32,
    pub core: CoreMetrics,
    pub failure_reasons: BTreeMap<FailureReason, u32>,
    pub lifelong: Option<LifelongMetrics>,
    pub transfer: Option<TransferValidation>,
    pub efficiency: Efficiency,
    pub squandered_bookings: Vec<SquanderedBooking>,
}

impl ReportBundle {
    pub fn build(
        meta: RunMeta,
        dataset_counts: DatasetCounts,
        records: &[OutcomeRecord],
        squandered: &[SquanderedBooking],
        matrix: Option<&PerformanceMatrix>,
    ) -> Result<Self, String> {
        let mut failure_reasons = BTreeMap::new();
        for r in records {
            if let Some(f) = r.failure_reason {
                *failure_reasons.entry(f).or_insert(0) += 1;
            }
        }
        let lifelong = matrix.filter(|m| !m.is_empty()).map(compute_lifelong_metrics).transpose()?;
        let transfer = matrix.and_then(|m| {
            let base = m.baseline.as_ref()?;
            let n = m.len();
            (n > 0).then(|| {
                let diag = (0..n).map(|i| m.rows[i][i]).sum::<f64>() / n as f64;
                let b = base.iter().sum::<f64>() / n as f64;
                compute_transfer_validation(diag, b)
            })
        });
        Ok(Self {
            meta,
            dataset_counts,
            tasks_evaluated: records.len() as u32,
            core: compute_core_metrics(records, squandered),
            failure_reasons,
            lifelong,
            transfer,
            efficiency: compute_efficiency(records),
            squandered_bookings: squandered.to_vec(),
        })
    }

    /// Clears every field that depends on wall-clock time.
    pub fn zero_wall_clock(&mut self) {
        self.meta.elapsed_ms = 0;
        if self.efficiency.mean_latency_ms.is_some() {
            self.efficiency.mean_latency_ms = Some(0.0);
        }
    }

    /// Pretty JSON with keys in sorted order, newline-terminated.
    pub fn to_json(&self) -> String {
        let v = serde_json::to_value(self).expect("report serializes");
        let mut s = serde_json::to_string_pretty(&v).expect("report serializes");
        s.push('\n');
        s
    }

    /// One `metric,value` row per scalar, keyed by its dotted path.
    pub fn to_csv(&self) -> String {
        let v = serde_json::to_value(self).expect("report serializes");
        let mut rows = Vec::new();
        flatten("", &v, &mut rows);
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["metric", "value"]).expect("in-memory write");
        for (k, v) in rows {
            w.write_record([k, v]).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, v)| flatten(&join(k), v, out)),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, v)| flatten(&join(&i.to_string()), v, out)),
        Value::Null => out.push((prefix.to_string(), String::new())),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}
