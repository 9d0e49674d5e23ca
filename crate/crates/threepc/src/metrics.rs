use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Sent-byte accounting for one directed channel. `payload` covers only the
/// canonical ring-element encoding; the 5-byte frame headers are tallied
/// separately.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelStat {
    pub payload: u64,
    pub frames: u64,
    pub header_bytes: u64,
}

/// How many protocol instances had their explicit fresh share from the
/// helper party directed at each of P0/P1. The PRF-partner side of each
/// sharing is derived locally, so one instance costs one explicit share, and
/// alternating the destination by instance parity halves the critical path.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreshShareStat {
    pub to_p0: u64,
    pub to_p1: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCounts {
    pub relu: u64,
    pub comparisons: u64,
    pub scaledown_elems: u64,
}

/// Per-party communication metrics; sessions merge the three parties' views.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Metrics {
    /// Keyed by directed channel name, e.g. "p0->p2".
    pub channels: BTreeMap<String, ChannelStat>,
    /// Payload bytes attributed to the innermost labeled operation that was
    /// active when the send happened.
    pub per_op: BTreeMap<String, u64>,
    pub fresh: FreshShareStat,
    pub ops: OpCounts,
}

impl Metrics {
    pub fn record_send(&mut self, channel: &str, op: Option<&str>, payload_len: usize) {
        let st = self.channels.entry(channel.to_string()).or_default();
        st.payload += payload_len as u64;
        st.frames += 1;
        st.header_bytes += super::channel::FRAME_HEADER_BYTES;
        if let Some(op) = op {
            *self.per_op.entry(op.to_string()).or_default() += payload_len as u64;
        }
    }

    pub fn total_payload(&self) -> u64 {
        self.channels.values().map(|c| c.payload).sum()
    }

    pub fn merge(&mut self, other: &Metrics) {
        for (k, v) in &other.channels {
            let st = self.channels.entry(k.clone()).or_default();
            st.payload += v.payload;
            st.frames += v.frames;
            st.header_bytes += v.header_bytes;
        }
        for (k, v) in &other.per_op {
            *self.per_op.entry(k.clone()).or_default() += v;
        }
        self.fresh.to_p0 += other.fresh.to_p0;
        self.fresh.to_p1 += other.fresh.to_p1;
        self.ops.relu = self.ops.relu.max(other.ops.relu);
        self.ops.comparisons = self.ops.comparisons.max(other.ops.comparisons);
        self.ops.scaledown_elems = self.ops.scaledown_elems.max(other.ops.scaledown_elems);
    }
}
