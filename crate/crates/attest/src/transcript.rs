//! Append-only, hash-chained message log. Each party records every frame it
//! sends or accepts; the running chain digest commits to the whole history,
//! so a retroactive edit cannot reproduce the digest.

use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranscriptEntry {
    /// "sent" or "recv".
    pub direction: &'static str,
    pub channel: String,
    pub ctr: u64,
    pub payload_hash: [u8; 32],
}

#[derive(Debug, Clone, Default)]
pub struct Transcript {
    pub entries: Vec<TranscriptEntry>,
    chain: [u8; 32],
}

impl Transcript {
    pub fn append(&mut self, direction: &'static str, channel: &str, ctr: u64, payload: &[u8]) {
        let payload_hash: [u8; 32] = Sha256::digest(payload).into();
        let mut h = Sha256::new();
        h.update(self.chain);
        h.update(direction.as_bytes());
        h.update(channel.as_bytes());
        h.update(ctr.to_le_bytes());
        h.update(payload_hash);
        self.chain = h.finalize().into();
        self.entries.push(TranscriptEntry {
            direction,
            channel: channel.to_string(),
            ctr,
            payload_hash,
        });
    }

    pub fn digest(&self) -> [u8; 32] {
        self.chain
    }

    /// Recompute the chain from the entries; false if the log was edited.
    pub fn verify_chain(&self) -> bool {
        let mut chain = [0u8; 32];
        for e in &self.entries {
            let mut h = Sha256::new();
            h.update(chain);
            h.update(e.direction.as_bytes());
            h.update(e.channel.as_bytes());
            h.update(e.ctr.to_le_bytes());
            h.update(e.payload_hash);
            chain = h.finalize().into();
        }
        chain == self.chain
    }
}
