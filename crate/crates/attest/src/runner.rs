//! Malicious-model session runner: token setup, signed transports, optional
//! on-path adversary, and abort collection.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use ed25519_dalek::SigningKey;
use sha2::{Digest, Sha256};
use threepc::channel::{in_proc_pair, Transport};
use threepc::{derive_party_keys, Metrics, ProtocolContext, Role};

use crate::error::Result as AttestResult;
use crate::signed::{AbortCell, AbortReport, SignedTransport};
use crate::tamper::{TamperSpec, TamperTransport};
use crate::token::{code_identity, verify_token, AttestToken, RootAuthority};
use crate::transcript::Transcript;

fn subseed(seed: &[u8; 16], label: &str) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(seed);
    h.update(label.as_bytes());
    h.finalize().into()
}

pub struct MaliciousOutcome<T0, T1, T2> {
    /// Per-party protocol results; a party that aborted carries `Err`.
    pub results: (
        threepc::Result<T0>,
        threepc::Result<T1>,
        threepc::Result<T2>,
    ),
    pub metrics: [Metrics; 3],
    /// Abort reports in role order, `strategy` filled from the tamper spec.
    pub aborts: Vec<AbortReport>,
    /// Per-party transcript chain digests.
    pub transcript_digests: [[u8; 32]; 3],
}

impl<T0, T1, T2> MaliciousOutcome<T0, T1, T2> {
    pub fn completed(&self) -> bool {
        self.results.0.is_ok() && self.results.1.is_ok() && self.results.2.is_ok()
    }
}

/// Run a three-party session with every channel routed through the signed
/// wrapper, optionally corrupted by one adversary placement. Setup performs
/// the token exchange: each party checks the other tokens against the root
/// key and its own code hash.
pub fn run_malicious<T0, T1, T2>(
    session_seed: &[u8; 16],
    tamper: Option<TamperSpec>,
    timeout: Duration,
    f0: impl FnOnce(&mut ProtocolContext) -> threepc::Result<T0> + Send,
    f1: impl FnOnce(&mut ProtocolContext) -> threepc::Result<T1> + Send,
    f2: impl FnOnce(&mut ProtocolContext) -> threepc::Result<T2> + Send,
) -> AttestResult<MaliciousOutcome<T0, T1, T2>>
where
    T0: Send,
    T1: Send,
    T2: Send,
{
    let root = RootAuthority::from_seed(&subseed(session_seed, "root-authority"));
    let root_vk = root.verifying_key();
    let hash = code_identity();
    let sks: Vec<SigningKey> = (0..3)
        .map(|i| SigningKey::from_bytes(&subseed(session_seed, &format!("party-sign-{i}"))))
        .collect();
    let tokens: Vec<AttestToken> = sks
        .iter()
        .map(|sk| root.issue(hash, &sk.verifying_key()))
        .collect();
    // Token exchange: parse and verify every peer token before any protocol
    // byte flows.
    let mut vks = Vec::new();
    for t in &tokens {
        let roundtrip = AttestToken::from_bytes(&t.to_bytes())?;
        vks.push(verify_token(&root_vk, &roundtrip, &hash)?);
    }

    let transcripts: Vec<Arc<Mutex<Transcript>>> =
        (0..3).map(|_| Arc::new(Mutex::new(Transcript::default()))).collect();
    let cells: Vec<AbortCell> = (0..3).map(|_| Arc::new(Mutex::new(None))).collect();

    let pairs = [(Role::P0, Role::P1), (Role::P0, Role::P2), (Role::P1, Role::P2)];
    let mut transports: HashMap<(Role, Role), Box<dyn Transport>> = HashMap::new();
    for (a, b) in pairs {
        let (ta, tb) = in_proc_pair(a.name(), b.name());
        let mut ta: Box<dyn Transport> = Box::new(ta);
        let mut tb: Box<dyn Transport> = Box::new(tb);
        if let Some(spec) = tamper {
            // The interposer sits on the corrupting sender's side of the
            // link; it only touches frames flowing `from -> to`.
            if (spec.from, spec.to) == (a, b) {
                ta = Box::new(TamperTransport::new(ta, spec));
            } else if (spec.from, spec.to) == (b, a) {
                tb = Box::new(TamperTransport::new(tb, spec));
            }
        }
        let wrap = |inner: Box<dyn Transport>, me: Role, peer: Role| -> Box<dyn Transport> {
            Box::new(SignedTransport::new(
                inner,
                sks[me.index()].clone(),
                vks[peer.index()],
                me,
                peer,
                transcripts[me.index()].clone(),
                cells[me.index()].clone(),
            ))
        };
        transports.insert((a, b), wrap(ta, a, b));
        transports.insert((b, a), wrap(tb, b, a));
    }

    let keys = derive_party_keys(session_seed);
    let mk = |role: Role, transports: &mut HashMap<(Role, Role), Box<dyn Transport>>| {
        let mut m: HashMap<Role, Box<dyn Transport>> = HashMap::new();
        for peer in [Role::P0, Role::P1, Role::P2] {
            if peer != role {
                m.insert(peer, transports.remove(&(role, peer)).unwrap());
            }
        }
        let mut ctx = ProtocolContext::new(role, &keys[role.index()], m);
        ctx.timeout = timeout;
        ctx
    };
    let mut c0 = mk(Role::P0, &mut transports);
    let mut c1 = mk(Role::P1, &mut transports);
    let mut c2 = mk(Role::P2, &mut transports);

    let (r0, r1, r2, m0, m1, m2) = std::thread::scope(|scope| {
        let h0 = scope.spawn(move || {
            let r = f0(&mut c0);
            (r, c0.metrics)
        });
        let h1 = scope.spawn(move || {
            let r = f1(&mut c1);
            (r, c1.metrics)
        });
        let h2 = scope.spawn(move || {
            let r = f2(&mut c2);
            (r, c2.metrics)
        });
        let (r0, m0) = h0.join().expect("p0 thread panicked");
        let (r1, m1) = h1.join().expect("p1 thread panicked");
        let (r2, m2) = h2.join().expect("p2 thread panicked");
        (r0, r1, r2, m0, m1, m2)
    });

    let strategy_name = tamper.map(|t| t.strategy.name()).unwrap_or("");
    let mut aborts = Vec::new();
    for cell in &cells {
        if let Some(mut report) = cell.lock().unwrap().take() {
            report.strategy = strategy_name.to_string();
            aborts.push(report);
        }
    }
    let digests = [
        transcripts[0].lock().unwrap().digest(),
        transcripts[1].lock().unwrap().digest(),
        transcripts[2].lock().unwrap().digest(),
    ];
    Ok(MaliciousOutcome {
        results: (r0, r1, r2),
        metrics: [m0, m1, m2],
        aborts,
        transcript_digests: digests,
    })
}
