//! Software stand-in for an attested-execution functionality: commits to a
//! code identity once, then evaluates the committed step function statefully,
//! signing every output with its round counter. The host sees all state
//! (including randomness); the guarantees are integrity only.

use ed25519_dalek::{Signature, Signer, SigningKey, Verifier, VerifyingKey};
use sha2::{Digest, Sha256};

use crate::error::{AttestError, Result};

/// Signed opaque state handed back to the host between rounds. Tampering or
/// replaying an older round's state is caught before computing.
#[derive(Debug, Clone)]
pub struct SignedState {
    pub ctr: u64,
    pub digest: [u8; 32],
    pub sig: [u8; 64],
}

pub struct AttestFunctionality {
    sk: SigningKey,
    committed: Option<[u8; 32]>,
    ctr: u64,
}

fn state_message(ctr: u64, digest: &[u8; 32]) -> Vec<u8> {
    let mut m = Vec::with_capacity(40);
    m.extend_from_slice(digest);
    m.extend_from_slice(&ctr.to_le_bytes());
    m
}

/// Canonical signing payload for a wire message: payload, then the channel
/// round counter little-endian, then a direction tag byte.
pub fn wire_message(payload: &[u8], ctr: u64, dir: u8) -> Vec<u8> {
    let mut m = Vec::with_capacity(payload.len() + 9);
    m.extend_from_slice(payload);
    m.extend_from_slice(&ctr.to_le_bytes());
    m.push(dir);
    m
}

impl AttestFunctionality {
    pub fn from_seed(seed: &[u8; 32]) -> Self {
        AttestFunctionality {
            sk: SigningKey::from_bytes(seed),
            committed: None,
            ctr: 0,
        }
    }

    pub fn verifying_key(&self) -> VerifyingKey {
        self.sk.verifying_key()
    }

    /// Commit to the code identity. The first call returns the empty initial
    /// state; later calls are ignored.
    pub fn commit(&mut self, code_hash: [u8; 32]) -> Option<SignedState> {
        if self.committed.is_some() {
            return None;
        }
        self.committed = Some(code_hash);
        let digest = [0u8; 32];
        let sig = self.sk.sign(&state_message(0, &digest)).to_bytes();
        Some(SignedState {
            ctr: 0,
            digest,
            sig,
        })
    }

    /// Run one round of the committed step function on host-supplied input
    /// `w` and the previous signed state. Returns the signed output and the
    /// next state.
    pub fn compute(&mut self, w: &[u8], state: &SignedState) -> Result<(Vec<u8>, Signature, SignedState)> {
        if self.committed.is_none() {
            return Err(AttestError::State("not committed".into()));
        }
        let vk = self.sk.verifying_key();
        let sig = Signature::from_bytes(&state.sig);
        vk.verify(&state_message(state.ctr, &state.digest), &sig)
            .map_err(|_| AttestError::State("state signature invalid".into()))?;
        if state.ctr != self.ctr {
            return Err(AttestError::State(format!(
                "state from round {}, expected {}",
                state.ctr, self.ctr
            )));
        }
        // The step function itself is opaque here; a keyed digest stands in
        // for "run g on (ctr, w, state)".
        let mut h = Sha256::new();
        h.update(b"step");
        h.update(self.ctr.to_le_bytes());
        h.update(w);
        h.update(state.digest);
        let y: Vec<u8> = h.finalize().to_vec();
        let out_sig = self.sk.sign(&wire_message(&y, self.ctr, 0));

        let mut h = Sha256::new();
        h.update(state.digest);
        h.update(&y);
        h.update(w);
        let digest: [u8; 32] = h.finalize().into();
        self.ctr += 1;
        let next_sig = self.sk.sign(&state_message(self.ctr, &digest)).to_bytes();
        Ok((
            y,
            out_sig,
            SignedState {
                ctr: self.ctr,
                digest,
                sig: next_sig,
            },
        ))
    }

    /// Sign one outgoing wire frame for the wrapped next-message function.
    pub fn sign_wire(&self, payload: &[u8], ctr: u64, dir: u8) -> Signature {
        self.sk.sign(&wire_message(payload, ctr, dir))
    }
}
