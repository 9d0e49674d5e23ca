//! The signed next-message wrapper as a transport layer: every outgoing
//! frame gains a signature over (frame, channel counter, direction), every
//! incoming frame is verified against the expected counter before the
//! protocol sees it, and both directions feed the hash-chained transcript.
//! Any failed check records an abort report and surfaces as a session abort.

use std::sync::{Arc, Mutex};
use std::time::Duration;

use ed25519_dalek::{Signature, SigningKey, Verifier, VerifyingKey};
use serde::{Deserialize, Serialize};
use threepc::channel::Transport;
use threepc::{ProtoError, Role};

use crate::functionality::wire_message;
use crate::transcript::Transcript;

pub const SIG_LEN: usize = 64;

/// Direction tag bound into every signature: which ordered pair of parties
/// the frame travels between.
pub fn dir_tag(from: Role, to: Role) -> u8 {
    (from.index() * 3 + to.index()) as u8
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct AbortReport {
    /// Per-channel frame counter at which the check failed.
    pub round: u64,
    /// Directed channel, e.g. "p1->p0".
    pub channel: String,
    /// Which verification failed: "signature", "truncated", "timeout".
    pub check: String,
    /// Filled in by the harness; empty for organic aborts.
    pub strategy: String,
}

pub type AbortCell = Arc<Mutex<Option<AbortReport>>>;

pub struct SignedTransport {
    inner: Box<dyn Transport>,
    sk: SigningKey,
    peer_vk: VerifyingKey,
    me: Role,
    peer: Role,
    ctr_out: u64,
    ctr_in: u64,
    transcript: Arc<Mutex<Transcript>>,
    abort: AbortCell,
}

impl SignedTransport {
    pub fn new(
        inner: Box<dyn Transport>,
        sk: SigningKey,
        peer_vk: VerifyingKey,
        me: Role,
        peer: Role,
        transcript: Arc<Mutex<Transcript>>,
        abort: AbortCell,
    ) -> Self {
        SignedTransport {
            inner,
            sk,
            peer_vk,
            me,
            peer,
            ctr_out: 0,
            ctr_in: 0,
            transcript,
            abort,
        }
    }

    fn fail(&self, check: &str) -> ProtoError {
        let channel = format!("{}->{}", self.peer.name(), self.me.name());
        let report = AbortReport {
            round: self.ctr_in,
            channel: channel.clone(),
            check: check.to_string(),
            strategy: String::new(),
        };
        let mut cell = self.abort.lock().unwrap();
        if cell.is_none() {
            *cell = Some(report);
        }
        ProtoError::Abort(format!("{check} check failed on {channel} round {}", self.ctr_in))
    }
}

impl Transport for SignedTransport {
    fn send_frame(&mut self, frame: Vec<u8>) -> threepc::Result<()> {
        use ed25519_dalek::Signer;
        let sig = self
            .sk
            .sign(&wire_message(&frame, self.ctr_out, dir_tag(self.me, self.peer)));
        self.transcript.lock().unwrap().append(
            "sent",
            &format!("{}->{}", self.me.name(), self.peer.name()),
            self.ctr_out,
            &frame,
        );
        let mut out = frame;
        out.extend_from_slice(&sig.to_bytes());
        self.ctr_out += 1;
        self.inner.send_frame(out)
    }

    fn recv_frame(&mut self, timeout: Duration) -> threepc::Result<Vec<u8>> {
        let raw = match self.inner.recv_frame(timeout) {
            Ok(r) => r,
            Err(ProtoError::Timeout(_)) => return Err(self.fail("timeout")),
            Err(e) => return Err(e),
        };
        if raw.len() < SIG_LEN + 5 {
            return Err(self.fail("truncated"));
        }
        let (frame, sig_bytes) = raw.split_at(raw.len() - SIG_LEN);
        let sig = Signature::from_bytes(sig_bytes.try_into().unwrap());
        let msg = wire_message(frame, self.ctr_in, dir_tag(self.peer, self.me));
        if self.peer_vk.verify(&msg, &sig).is_err() {
            return Err(self.fail("signature"));
        }
        self.transcript.lock().unwrap().append(
            "recv",
            &format!("{}->{}", self.peer.name(), self.me.name()),
            self.ctr_in,
            frame,
        );
        self.ctr_in += 1;
        Ok(frame.to_vec())
    }
}
