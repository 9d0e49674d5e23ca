use std::collections::HashMap;
use std::time::Duration;

use ring_core::{PrfStream, RingId, RingTensor};

use crate::channel::{decode_frame, encode_frame, in_proc_pair, Transport};
use crate::error::{ProtoError, Result};
use crate::metrics::Metrics;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    P0,
    P1,
    P2,
}

impl Role {
    pub fn index(self) -> usize {
        match self {
            Role::P0 => 0,
            Role::P1 => 1,
            Role::P2 => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Role::P0 => "p0",
            Role::P1 => "p1",
            Role::P2 => "p2",
        }
    }

    /// The additive-share index j in protocol formulas (P2 holds no shares).
    pub fn j(self) -> u64 {
        self.index() as u64
    }
}

pub const ROLES: [Role; 3] = [Role::P0, Role::P1, Role::P2];

/// Which party receives the explicit half of the fresh sharing produced by
/// protocol instance `base + idx`. Alternating by parity keeps the helper's
/// outbound traffic balanced across the two computing parties.
pub fn fresh_dest(base: u64, idx: usize) -> Role {
    if (base + idx as u64) % 2 == 0 {
        Role::P0
    } else {
        Role::P1
    }
}

/// PRF keys one party holds. k0 pairs P0 with P2, k1 pairs P1 with P2, k01
/// pairs P0 with P1; `private` is this party's own randomness. All protocol
/// randomness flows from these, so a session is reproducible from its seed.
#[derive(Clone)]
pub struct PartyKeys {
    pub k0: Option<[u8; 16]>,
    pub k1: Option<[u8; 16]>,
    pub k01: Option<[u8; 16]>,
    pub private: [u8; 16],
}

pub fn derive_party_keys(session_seed: &[u8; 16]) -> [PartyKeys; 3] {
    let mut st = PrfStream::new(session_seed, 0x6b65795f73657475); // "key_setu"
    let mut next_key = || {
        let mut k = [0u8; 16];
        for b in k.iter_mut() {
            *b = st.next_byte();
        }
        k
    };
    let (k0, k1, k01) = (next_key(), next_key(), next_key());
    let (pr0, pr1, pr2) = (next_key(), next_key(), next_key());
    [
        PartyKeys {
            k0: Some(k0),
            k1: None,
            k01: Some(k01),
            private: pr0,
        },
        PartyKeys {
            k0: None,
            k1: Some(k1),
            k01: Some(k01),
            private: pr1,
        },
        PartyKeys {
            k0: Some(k0),
            k1: Some(k1),
            k01: None,
            private: pr2,
        },
    ]
}

pub struct ProtocolContext {
    pub role: Role,
    pub k0: Option<PrfStream>,
    pub k1: Option<PrfStream>,
    pub k01: Option<PrfStream>,
    pub private: PrfStream,
    transports: HashMap<Role, Box<dyn Transport>>,
    pub metrics: Metrics,
    pub timeout: Duration,
    instance_ctr: u64,
    op_label: Option<String>,
}

impl ProtocolContext {
    pub fn new(
        role: Role,
        keys: &PartyKeys,
        transports: HashMap<Role, Box<dyn Transport>>,
    ) -> Self {
        let stream = |k: &Option<[u8; 16]>| k.as_ref().map(|k| PrfStream::new(k, 0));
        ProtocolContext {
            role,
            k0: stream(&keys.k0),
            k1: stream(&keys.k1),
            k01: stream(&keys.k01),
            private: PrfStream::new(&keys.private, 0),
            transports,
            metrics: Metrics::default(),
            timeout: Duration::from_secs(10),
            instance_ctr: 0,
            op_label: None,
        }
    }

    pub fn k0(&mut self) -> &mut PrfStream {
        self.k0.as_mut().expect("k0 not held by this party")
    }

    pub fn k1(&mut self) -> &mut PrfStream {
        self.k1.as_mut().expect("k1 not held by this party")
    }

    pub fn k01(&mut self) -> &mut PrfStream {
        self.k01.as_mut().expect("k01 not held by this party")
    }

    /// Reserve `n` consecutive instance-counter values (for load balancing).
    pub fn alloc_instances(&mut self, n: usize) -> u64 {
        let base = self.instance_ctr;
        self.instance_ctr += n as u64;
        base
    }

    /// Helper-side accounting: one explicit fresh share per instance, aimed
    /// at alternating parties.
    pub fn record_fresh(&mut self, base: u64, n: usize) {
        if self.role != Role::P2 {
            return;
        }
        for idx in 0..n {
            match fresh_dest(base, idx) {
                Role::P0 => self.metrics.fresh.to_p0 += 1,
                _ => self.metrics.fresh.to_p1 += 1,
            }
        }
    }

    /// Attribute sends to `label` for the duration of `f`, unless an outer
    /// operation label is already active.
    pub fn with_op<R>(&mut self, label: &str, f: impl FnOnce(&mut Self) -> R) -> R {
        let installed = if self.op_label.is_none() {
            self.op_label = Some(label.to_string());
            true
        } else {
            false
        };
        let r = f(self);
        if installed {
            self.op_label = None;
        }
        r
    }

    pub fn send_bytes(&mut self, to: Role, tag: u8, payload: &[u8]) -> Result<()> {
        let channel = format!("{}->{}", self.role.name(), to.name());
        self.metrics
            .record_send(&channel, self.op_label.as_deref(), payload.len());
        let t = self
            .transports
            .get_mut(&to)
            .unwrap_or_else(|| panic!("no transport to {}", to.name()));
        t.send_frame(encode_frame(tag, payload))
    }

    pub fn recv_bytes(&mut self, from: Role, tag: u8) -> Result<Vec<u8>> {
        let t = self
            .transports
            .get_mut(&from)
            .unwrap_or_else(|| panic!("no transport to {}", from.name()));
        let frame = t.recv_frame(self.timeout)?;
        let (got, payload) = decode_frame(&frame)?;
        if got != tag {
            return Err(ProtoError::UnexpectedTag { want: tag, got });
        }
        Ok(payload.to_vec())
    }

    pub fn send_tensor(&mut self, to: Role, tag: u8, t: &RingTensor) -> Result<()> {
        self.send_bytes(to, tag, &ring_core::wire::encode_tensor(t))
    }

    pub fn recv_tensor(
        &mut self,
        from: Role,
        tag: u8,
        ring: RingId,
        shape: &[usize],
    ) -> Result<RingTensor> {
        let payload = self.recv_bytes(from, tag)?;
        Ok(ring_core::wire::decode_tensor(ring, shape, &payload)?)
    }
}

/// Run the three party functions over in-process transports and return their
/// results plus per-party metrics.
pub fn run_parties<T0, T1, T2>(
    session_seed: &[u8; 16],
    f0: impl FnOnce(&mut ProtocolContext) -> Result<T0> + Send,
    f1: impl FnOnce(&mut ProtocolContext) -> Result<T1> + Send,
    f2: impl FnOnce(&mut ProtocolContext) -> Result<T2> + Send,
) -> Result<((T0, T1, T2), [Metrics; 3])>
where
    T0: Send,
    T1: Send,
    T2: Send,
{
    let keys = derive_party_keys(session_seed);
    let (t01, t10) = in_proc_pair("p0", "p1");
    let (t02, t20) = in_proc_pair("p0", "p2");
    let (t12, t21) = in_proc_pair("p1", "p2");

    let mk = |role: Role, keys: &PartyKeys, a: (Role, Box<dyn Transport>), b: (Role, Box<dyn Transport>)| {
        let mut m: HashMap<Role, Box<dyn Transport>> = HashMap::new();
        m.insert(a.0, a.1);
        m.insert(b.0, b.1);
        ProtocolContext::new(role, keys, m)
    };
    let mut c0 = mk(Role::P0, &keys[0], (Role::P1, Box::new(t01)), (Role::P2, Box::new(t02)));
    let mut c1 = mk(Role::P1, &keys[1], (Role::P0, Box::new(t10)), (Role::P2, Box::new(t12)));
    let mut c2 = mk(Role::P2, &keys[2], (Role::P0, Box::new(t20)), (Role::P1, Box::new(t21)));

    std::thread::scope(|scope| {
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
        Ok(((r0?, r1?, r2?), [m0, m1, m2]))
    })
}
