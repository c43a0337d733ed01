use serde::{Deserialize, Serialize};

use super::ScenarioConfig;

pub const CSV_HEADER: &str = "step,composite_wellformed_rate,orphan_count,contradiction_count,drift,repair_invocations";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepMetrics {
    pub step: usize,
    /// Fraction of sampled cross-agent compositions that were defined and coherent.
    pub composite_wellformed_rate: f64,
    pub orphan_count: usize,
    pub contradiction_count: usize,
    /// Mean edge-set Jaccard distance of each agent from its initial space.
    pub drift: f64,
    pub repair_invocations: usize,
    /// Distinct node labels summed over agents.
    pub distinct_labels: usize,
    /// Violation counts after divergence, before this step's repair.
    pub orphans_before_repair: usize,
    pub contradictions_before_repair: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsSeries {
    pub records: Vec<StepMetrics>,
}

impl MetricsSeries {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn rates(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.composite_wellformed_rate)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER.split(',')).expect("in-memory write");
        for r in &self.records {
            w.write_record([
                r.step.to_string(),
                r.composite_wellformed_rate.to_string(),
                r.orphan_count.to_string(),
                r.contradiction_count.to_string(),
                r.drift.to_string(),
                r.repair_invocations.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.records).expect("metrics always serialize")
    }

    /// Config echo written next to the CSV.
    pub fn sidecar(&self, cfg: &ScenarioConfig) -> String {
        let doc = serde_json::json!({
            "config": cfg,
            "seed": cfg.seed,
            "steps_recorded": self.records.len(),
        });
        serde_json::to_string_pretty(&doc).expect("sidecar always serializes")
    }
}
