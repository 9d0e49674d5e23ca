//! Metrics report emitted as JSON:
//! {phase_ms:{}, bytes:{channel:{payload,frames}}, ops:{...}, residuals:{}}.

use std::collections::BTreeMap;

use serde::Serialize;
use threepc::{FreshShareStat, Metrics, OpCounts};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ByteStat {
    pub payload: u64,
    pub frames: u64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Report {
    pub phase_ms: BTreeMap<String, f64>,
    /// Keyed by directed channel, e.g. "p0->p2".
    pub bytes: BTreeMap<String, ByteStat>,
    pub ops: OpCounts,
    /// Benchmark: measured minus closed-form bytes per protocol.
    pub residuals: BTreeMap<String, i64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub per_op_bytes: BTreeMap<String, u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fresh: Option<FreshShareStat>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub predictions: Vec<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub peak_live_bytes: Option<usize>,
}

impl Report {
    pub fn add_metrics(&mut self, m: &Metrics) {
        for (k, v) in &m.channels {
            self.bytes.insert(
                k.clone(),
                ByteStat {
                    payload: v.payload,
                    frames: v.frames,
                },
            );
        }
        self.per_op_bytes = m.per_op.clone();
        self.ops = m.ops;
        self.fresh = Some(m.fresh);
    }

    pub fn phase(&mut self, name: &str, d: std::time::Duration) {
        self.phase_ms
            .insert(name.to_string(), d.as_secs_f64() * 1e3);
    }

    pub fn total_payload(&self) -> u64 {
        self.bytes.values().map(|b| b.payload).sum()
    }
}
