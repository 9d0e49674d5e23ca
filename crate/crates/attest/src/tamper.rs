//! Adversary harness: a man-in-the-middle wrapper on one directed channel
//! that corrupts traffic according to a strategy at a chosen frame index.
//! Every strategy must drive at least one honest party to abort.

use std::time::Duration;

use ed25519_dalek::{Signer, SigningKey};
use threepc::channel::Transport;
use threepc::Role;

use crate::functionality::wire_message;
use crate::signed::{dir_tag, SIG_LEN};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Flip one payload bit.
    BitFlip,
    /// Cut bytes off the end of the frame.
    Truncate,
    /// Deliver a copy of the previous frame instead of the current one.
    Replay,
    /// Swap delivery order of this frame and the next.
    Reorder,
    /// Swallow the frame; the receiver times out.
    Drop,
    /// Re-sign the frame with a key the adversary generated itself.
    ForgeKey,
    /// Substitute a frame recomputed from different inputs: altered payload
    /// carrying an adversary signature, modeling a host that restarts its
    /// functionality with a new input after round 1.
    WrongInput,
}

impl Strategy {
    pub const ALL: [Strategy; 7] = [
        Strategy::BitFlip,
        Strategy::Truncate,
        Strategy::Replay,
        Strategy::Reorder,
        Strategy::Drop,
        Strategy::ForgeKey,
        Strategy::WrongInput,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::BitFlip => "bit-flip",
            Strategy::Truncate => "truncate",
            Strategy::Replay => "replay",
            Strategy::Reorder => "reorder",
            Strategy::Drop => "drop",
            Strategy::ForgeKey => "forge-fresh-key",
            Strategy::WrongInput => "wrong-input-reuse",
        }
    }
}

/// Where and how to strike: the `frame_index`-th frame sent from `from` to
/// `to`.
#[derive(Debug, Clone, Copy)]
pub struct TamperSpec {
    pub from: Role,
    pub to: Role,
    pub frame_index: usize,
    pub strategy: Strategy,
}

/// Sender-side interposer equivalent to an on-path adversary for this
/// directed channel. Receives pass through untouched.
pub struct TamperTransport {
    inner: Box<dyn Transport>,
    strategy: Strategy,
    target: usize,
    from: Role,
    to: Role,
    count: usize,
    prev: Option<Vec<u8>>,
    held: Option<Vec<u8>>,
    adversary_sk: SigningKey,
}

impl TamperTransport {
    pub fn new(inner: Box<dyn Transport>, spec: TamperSpec) -> Self {
        TamperTransport {
            inner,
            strategy: spec.strategy,
            target: spec.frame_index,
            from: spec.from,
            to: spec.to,
            count: 0,
            prev: None,
            held: None,
            adversary_sk: SigningKey::from_bytes(&[0x42; 32]),
        }
    }

    fn resign(&self, mut raw: Vec<u8>, ctr: u64) -> Vec<u8> {
        let cut = raw.len() - SIG_LEN;
        let msg = wire_message(&raw[..cut], ctr, dir_tag(self.from, self.to));
        let sig = self.adversary_sk.sign(&msg);
        raw[cut..].copy_from_slice(&sig.to_bytes());
        raw
    }
}

impl Transport for TamperTransport {
    fn send_frame(&mut self, frame: Vec<u8>) -> threepc::Result<()> {
        let idx = self.count;
        self.count += 1;
        let clean = frame.clone();
        let result = if idx == self.target {
            match self.strategy {
                Strategy::BitFlip => {
                    let mut f = frame;
                    let mid = f.len() / 2;
                    f[mid] ^= 0x01;
                    self.inner.send_frame(f)
                }
                Strategy::Truncate => {
                    let mut f = frame;
                    let keep = f.len().saturating_sub(SIG_LEN / 2);
                    f.truncate(keep.max(1));
                    self.inner.send_frame(f)
                }
                Strategy::Replay => {
                    // With no earlier frame to replay, send a same-length
                    // dummy; re-sending the identical frame would be a no-op.
                    let again = self
                        .prev
                        .clone()
                        .unwrap_or_else(|| vec![0u8; frame.len()]);
                    self.inner.send_frame(again)
                }
                Strategy::Reorder => {
                    self.held = Some(frame);
                    Ok(())
                }
                Strategy::Drop => Ok(()),
                Strategy::ForgeKey => {
                    let f = self.resign(frame, idx as u64);
                    self.inner.send_frame(f)
                }
                Strategy::WrongInput => {
                    let mut f = frame;
                    let cut = f.len() - SIG_LEN;
                    for b in f[5..cut].iter_mut().take(8) {
                        *b = b.wrapping_add(1);
                    }
                    let f = self.resign(f, idx as u64);
                    self.inner.send_frame(f)
                }
            }
        } else if let Some(held) = self.held.take() {
            // Reorder: deliver the current frame first, then the held one.
            self.inner.send_frame(frame)?;
            self.inner.send_frame(held)
        } else {
            self.inner.send_frame(frame)
        };
        self.prev = Some(clean);
        result
    }

    fn recv_frame(&mut self, timeout: Duration) -> threepc::Result<Vec<u8>> {
        self.inner.recv_frame(timeout)
    }
}
