//! Setup-time code-identity tokens. A local root authority stands in for the
//! remote attestation service: it signs (code hash, party verification key)
//! pairs, and every party holds the root verification key out of band.

use ed25519_dalek::{Signature, Signer, SigningKey, Verifier, VerifyingKey};
use sha2::{Digest, Sha256};

use crate::error::{AttestError, Result};

pub const TOKEN_VERSION: u8 = 1;
pub const TOKEN_LEN: usize = 1 + 32 + 32 + 64;

/// The hash identifying the wrapped next-message code this build runs.
pub fn code_identity() -> [u8; 32] {
    let tag = concat!("signed-next-message/", env!("CARGO_PKG_VERSION"));
    Sha256::digest(tag.as_bytes()).into()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttestToken {
    pub version: u8,
    pub code_hash: [u8; 32],
    pub vk: [u8; 32],
    pub root_sig: [u8; 64],
}

impl AttestToken {
    pub fn to_bytes(&self) -> [u8; TOKEN_LEN] {
        let mut out = [0u8; TOKEN_LEN];
        out[0] = self.version;
        out[1..33].copy_from_slice(&self.code_hash);
        out[33..65].copy_from_slice(&self.vk);
        out[65..].copy_from_slice(&self.root_sig);
        out
    }

    pub fn from_bytes(b: &[u8]) -> Result<AttestToken> {
        if b.len() != TOKEN_LEN {
            return Err(AttestError::Token(format!(
                "token is {} bytes, want {TOKEN_LEN}",
                b.len()
            )));
        }
        Ok(AttestToken {
            version: b[0],
            code_hash: b[1..33].try_into().unwrap(),
            vk: b[33..65].try_into().unwrap(),
            root_sig: b[65..].try_into().unwrap(),
        })
    }
}

fn token_message(code_hash: &[u8; 32], vk: &[u8; 32]) -> Vec<u8> {
    let mut m = Vec::with_capacity(64);
    m.extend_from_slice(code_hash);
    m.extend_from_slice(vk);
    m
}

pub struct RootAuthority {
    sk: SigningKey,
}

impl RootAuthority {
    pub fn from_seed(seed: &[u8; 32]) -> Self {
        RootAuthority {
            sk: SigningKey::from_bytes(seed),
        }
    }

    pub fn verifying_key(&self) -> VerifyingKey {
        self.sk.verifying_key()
    }

    pub fn issue(&self, code_hash: [u8; 32], vk: &VerifyingKey) -> AttestToken {
        let vk = vk.to_bytes();
        let sig = self.sk.sign(&token_message(&code_hash, &vk));
        AttestToken {
            version: TOKEN_VERSION,
            code_hash,
            vk,
            root_sig: sig.to_bytes(),
        }
    }
}

/// Check a peer token: root signature valid and code hash equal to the hash
/// this party runs. Returns the peer verification key.
pub fn verify_token(
    root_vk: &VerifyingKey,
    token: &AttestToken,
    expected_hash: &[u8; 32],
) -> Result<VerifyingKey> {
    if token.version != TOKEN_VERSION {
        return Err(AttestError::Token(format!(
            "unsupported token version {}",
            token.version
        )));
    }
    let sig = Signature::from_bytes(&token.root_sig);
    root_vk
        .verify(&token_message(&token.code_hash, &token.vk), &sig)
        .map_err(|e| AttestError::Token(format!("root signature invalid: {e}")))?;
    if &token.code_hash != expected_hash {
        return Err(AttestError::Token("code hash mismatch".into()));
    }
    VerifyingKey::from_bytes(&token.vk)
        .map_err(|e| AttestError::Token(format!("bad verification key: {e}")))
}
