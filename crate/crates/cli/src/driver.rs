//! Batch inference drivers over the three execution modes, plus the protocol
//! communication benchmark.

use std::collections::HashMap;
use std::path::Path;
use std::time::Duration;

use attest::{MaliciousOutcome, TamperSpec};
use model_compiler::fixed::quantize_tensor_checked;
use model_compiler::{fixed_interpret, FixedModel, FloatTensor, IntTensor};
use ring_core::{reconstruct_parts, share_tensor, PrfStream, RingId, RingTensor};
use sha2::{Digest, Sha256};
use threepc::batchnorm::fused_batchnorm;
use threepc::beaver::{matmul_3pc, mult_elementwise};
use threepc::budget;
use threepc::channel::{in_proc_pair, Transport};
use threepc::conv::conv2d_3pc;
use threepc::convert::share_convert;
use threepc::executor::{deal_shares, execute_program, SharedInputs};
use threepc::maxpool::maxpool_argmax;
use threepc::msb::compute_msb;
use threepc::relu::{drelu, relu};
use threepc::{derive_party_keys, Metrics, PartyKeys, ProtocolContext, Role};

use crate::tcp::tcp_pair;
use crate::{CliError, Result};

/// Hash an operator-supplied seed string down to PRF key material.
pub fn derive_seed(s: &str) -> [u8; 16] {
    let digest: [u8; 32] = Sha256::digest(s.as_bytes()).into();
    digest[..16].try_into().unwrap()
}

/// Independent seed for chunk `idx` of a batched run.
pub fn chunk_seed(seed: &[u8; 16], idx: u64) -> [u8; 16] {
    let mut h = Sha256::new();
    h.update(seed);
    h.update(idx.to_le_bytes());
    let digest: [u8; 32] = h.finalize().into();
    digest[..16].try_into().unwrap()
}

/// Read a batch of float32 row-major tensors of shape `dims`.
pub fn load_images(path: &Path, dims: &[usize], count: Option<usize>) -> Result<Vec<FloatTensor>> {
    let bytes = std::fs::read(path)?;
    let numel: usize = dims.iter().product();
    let stride = numel * 4;
    if stride == 0 || bytes.len() % stride != 0 {
        return Err(CliError::Invalid(format!(
            "{} bytes is not a whole number of {:?} float32 images",
            bytes.len(),
            dims
        )));
    }
    let total = bytes.len() / stride;
    let take = count.unwrap_or(total).min(total);
    Ok((0..take)
        .map(|i| {
            let data = bytes[i * stride..(i + 1) * stride]
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
                .collect();
            FloatTensor::new(dims.to_vec(), data)
        })
        .collect())
}

/// One label byte per image.
pub fn load_labels(path: &Path, count: Option<usize>) -> Result<Vec<usize>> {
    let bytes = std::fs::read(path)?;
    let take = count.unwrap_or(bytes.len()).min(bytes.len());
    Ok(bytes[..take].iter().map(|&b| b as usize).collect())
}

pub fn quantize_inputs(inputs: &[FloatTensor], s: u32) -> Result<Vec<IntTensor>> {
    inputs
        .iter()
        .map(|t| quantize_tensor_checked(t, s).map_err(CliError::Compile))
        .collect()
}

pub fn run_plaintext_batch(m: &FixedModel, inputs: &[IntTensor]) -> Result<Vec<IntTensor>> {
    inputs
        .iter()
        .map(|x| fixed_interpret(m, x).map_err(CliError::Compile))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransportKind {
    InProc,
    Tcp,
}

impl TransportKind {
    pub fn parse(s: &str) -> Option<TransportKind> {
        match s {
            "inproc" => Some(TransportKind::InProc),
            "tcp" => Some(TransportKind::Tcp),
            _ => None,
        }
    }
}

fn make_pair(
    kind: TransportKind,
    a: Role,
    b: Role,
) -> threepc::Result<(Box<dyn Transport>, Box<dyn Transport>)> {
    match kind {
        TransportKind::InProc => {
            let (ta, tb) = in_proc_pair(a.name(), b.name());
            Ok((Box::new(ta), Box::new(tb)))
        }
        TransportKind::Tcp => {
            let (ta, tb) = tcp_pair(a.name(), b.name()).map_err(|e| threepc::ProtoError::Channel {
                channel: format!("{}<->{}", a.name(), b.name()),
                msg: e.to_string(),
            })?;
            Ok((Box::new(ta), Box::new(tb)))
        }
    }
}

/// Run the three party functions over the chosen transport. `wrap` may
/// interpose on each directed endpoint (me, peer); identity for plain runs.
pub fn run_session<T0, T1, T2>(
    seed: &[u8; 16],
    kind: TransportKind,
    mut wrap: impl FnMut(Box<dyn Transport>, Role, Role) -> Box<dyn Transport>,
    f0: impl FnOnce(&mut ProtocolContext) -> threepc::Result<T0> + Send,
    f1: impl FnOnce(&mut ProtocolContext) -> threepc::Result<T1> + Send,
    f2: impl FnOnce(&mut ProtocolContext) -> threepc::Result<T2> + Send,
) -> threepc::Result<((T0, T1, T2), [Metrics; 3])>
where
    T0: Send,
    T1: Send,
    T2: Send,
{
    let keys = derive_party_keys(seed);
    let (t01, t10) = make_pair(kind, Role::P0, Role::P1)?;
    let (t02, t20) = make_pair(kind, Role::P0, Role::P2)?;
    let (t12, t21) = make_pair(kind, Role::P1, Role::P2)?;

    let mut mk = |role: Role,
                  keys: &PartyKeys,
                  a: (Role, Box<dyn Transport>),
                  b: (Role, Box<dyn Transport>)| {
        let mut m: HashMap<Role, Box<dyn Transport>> = HashMap::new();
        m.insert(a.0, wrap(a.1, role, a.0));
        m.insert(b.0, wrap(b.1, role, b.0));
        ProtocolContext::new(role, keys, m)
    };
    let mut c0 = mk(Role::P0, &keys[0], (Role::P1, t01), (Role::P2, t02));
    let mut c1 = mk(Role::P1, &keys[1], (Role::P0, t10), (Role::P2, t12));
    let mut c2 = mk(Role::P2, &keys[2], (Role::P0, t20), (Role::P1, t21));

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

pub fn merge_metrics(ms: &[Metrics]) -> Metrics {
    let mut out = Metrics::default();
    for m in ms {
        out.merge(m);
    }
    out
}

const DEAL_LABEL: u64 = 0x6465616c; // "deal"

fn outputs_from_shares(
    p0: Vec<RingTensor>,
    p1: Vec<RingTensor>,
    out_dims: &[usize],
) -> Result<Vec<IntTensor>> {
    p0.into_iter()
        .zip(p1)
        .map(|(a, b)| {
            let t = reconstruct_parts(&a, &b).map_err(threepc::ProtoError::Ring)?;
            Ok(IntTensor::new(out_dims.to_vec(), t.to_i64_vec()))
        })
        .collect()
}

fn run_3pc_chunk(
    m: &FixedModel,
    inputs: &[IntTensor],
    seed: &[u8; 16],
    kind: TransportKind,
) -> Result<(Vec<IntTensor>, [Metrics; 3])> {
    let mut dealer = PrfStream::new(seed, DEAL_LABEL);
    let mut shares0 = Vec::with_capacity(inputs.len());
    let mut shares1 = Vec::with_capacity(inputs.len());
    for x in inputs {
        let [s0, s1] = deal_shares(m, x, &mut dealer);
        shares0.push(s0);
        shares1.push(s1);
    }
    let prog = &m.graph;
    let count = inputs.len();
    let party = |shares: Vec<SharedInputs>| {
        move |ctx: &mut ProtocolContext| -> threepc::Result<Vec<RingTensor>> {
            shares
                .iter()
                .map(|sh| {
                    execute_program(ctx, prog, Some(sh)).map(|o| o.expect("party output"))
                })
                .collect()
        }
    };
    let ((o0, o1, ()), metrics) = run_session(
        seed,
        kind,
        |t, _, _| t,
        party(shares0),
        party(shares1),
        move |ctx| {
            for _ in 0..count {
                execute_program(ctx, prog, None)?;
            }
            Ok(())
        },
    )?;
    let out_dims = prog.dims(&prog.output)?.to_vec();
    Ok((outputs_from_shares(o0, o1, &out_dims)?, metrics))
}

/// Semi-honest inference over a batch, split into independently seeded
/// sessions of `chunk` images run in parallel.
pub fn run_3pc_batch(
    m: &FixedModel,
    inputs: &[IntTensor],
    seed: &[u8; 16],
    kind: TransportKind,
    chunk: usize,
) -> Result<(Vec<IntTensor>, Metrics)> {
    let chunk = chunk.max(1);
    let parts: Vec<Result<(Vec<IntTensor>, [Metrics; 3])>> = std::thread::scope(|scope| {
        let handles: Vec<_> = inputs
            .chunks(chunk)
            .enumerate()
            .map(|(i, batch)| {
                let s = chunk_seed(seed, i as u64);
                scope.spawn(move || run_3pc_chunk(m, batch, &s, kind))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("chunk thread panicked"))
            .collect()
    });
    let mut outputs = Vec::with_capacity(inputs.len());
    let mut metrics = Metrics::default();
    for part in parts {
        let (outs, ms) = part?;
        outputs.extend(outs);
        metrics = {
            let mut acc = metrics;
            acc.merge(&merge_metrics(&ms));
            acc
        };
    }
    Ok((outputs, metrics))
}

/// Malicious-model inference: one signed session over the whole batch, with
/// an optional adversary placement.
pub fn run_malicious_batch(
    m: &FixedModel,
    inputs: &[IntTensor],
    seed: &[u8; 16],
    tamper: Option<TamperSpec>,
    timeout: Duration,
) -> Result<MaliciousOutcome<Vec<RingTensor>, Vec<RingTensor>, ()>> {
    let mut dealer = PrfStream::new(seed, DEAL_LABEL);
    let mut shares0 = Vec::with_capacity(inputs.len());
    let mut shares1 = Vec::with_capacity(inputs.len());
    for x in inputs {
        let [s0, s1] = deal_shares(m, x, &mut dealer);
        shares0.push(s0);
        shares1.push(s1);
    }
    let prog = &m.graph;
    let count = inputs.len();
    let party = |shares: Vec<SharedInputs>| {
        move |ctx: &mut ProtocolContext| -> threepc::Result<Vec<RingTensor>> {
            shares
                .iter()
                .map(|sh| {
                    execute_program(ctx, prog, Some(sh)).map(|o| o.expect("party output"))
                })
                .collect()
        }
    };
    Ok(attest::run_malicious(
        seed,
        tamper,
        timeout,
        party(shares0),
        party(shares1),
        move |ctx| {
            for _ in 0..count {
                execute_program(ctx, prog, None)?;
            }
            Ok(())
        },
    )?)
}

/// Reconstruct malicious-run outputs once the session completed cleanly.
pub fn malicious_outputs(
    m: &FixedModel,
    outcome: MaliciousOutcome<Vec<RingTensor>, Vec<RingTensor>, ()>,
) -> Result<(Vec<IntTensor>, [Metrics; 3])> {
    let (r0, r1, r2) = outcome.results;
    r2?;
    let out_dims = m.graph.dims(&m.graph.output)?.to_vec();
    Ok((outputs_from_shares(r0?, r1?, &out_dims)?, outcome.metrics))
}

#[derive(Debug, Clone, Copy)]
pub struct BenchEntry {
    pub measured: u64,
    pub formula: u64,
}

impl BenchEntry {
    pub fn residual(&self) -> i64 {
        self.measured as i64 - self.formula as i64
    }
}

fn split(t: &RingTensor, rng: &mut PrfStream) -> (RingTensor, RingTensor) {
    let sh = share_tensor(t, rng);
    (sh.part0, sh.part1)
}

fn measure<T0: Send, T1: Send>(
    seed: &[u8; 16],
    f0: impl FnOnce(&mut ProtocolContext) -> threepc::Result<T0> + Send,
    f1: impl FnOnce(&mut ProtocolContext) -> threepc::Result<T1> + Send,
    f2: impl FnOnce(&mut ProtocolContext) -> threepc::Result<()> + Send,
) -> Result<u64> {
    let (_, ms) = threepc::run_parties(seed, f0, f1, f2)?;
    Ok(merge_metrics(&ms).total_payload())
}

/// Meter each protocol against its closed-form wire cost.
pub fn bench_protocols(seed: &[u8; 16]) -> Result<std::collections::BTreeMap<String, BenchEntry>> {
    let mut rng = PrfStream::new(seed, 0x62656e6368); // "bench"
    let mut out = std::collections::BTreeMap::new();
    let mut add = |name: &str, measured: u64, formula: u64| {
        out.insert(name.to_string(), BenchEntry { measured, formula });
    };

    let rand_zl = |rng: &mut PrfStream, n: usize| {
        RingTensor::from_vec(RingId::ZL, vec![n], (0..n).map(|_| rng.next_u64()).collect()).unwrap()
    };
    let small = |rng: &mut PrfStream, n: usize, shift: u32| {
        let vals: Vec<i64> = (0..n).map(|_| (rng.next_u64() as i64) >> shift).collect();
        RingTensor::from_i64_vec(vec![n], &vals).unwrap()
    };

    // Elementwise Beaver multiplication.
    {
        let n = 1000;
        let (x0, x1) = split(&rand_zl(&mut rng, n), &mut rng);
        let (y0, y1) = split(&rand_zl(&mut rng, n), &mut rng);
        let b = measure(
            seed,
            move |ctx| mult_elementwise(ctx, Some(&x0), Some(&y0), &[n]),
            move |ctx| mult_elementwise(ctx, Some(&x1), Some(&y1), &[n]),
            |ctx| mult_elementwise(ctx, None, None, &[n]).map(|_| ()),
        )?;
        add("Mult", b, budget::mult_bytes(n));
    }

    // Matrix multiplication.
    {
        let (l, mid, n) = (8, 8, 8);
        let a = rand_zl(&mut rng, l * mid).reshape(vec![l, mid]).unwrap();
        let b = rand_zl(&mut rng, mid * n).reshape(vec![mid, n]).unwrap();
        let (a0, a1) = split(&a, &mut rng);
        let (b0, b1) = split(&b, &mut rng);
        let bytes = measure(
            seed,
            move |ctx| matmul_3pc(ctx, Some(&a0), Some(&b0), (l, mid, n)),
            move |ctx| matmul_3pc(ctx, Some(&a1), Some(&b1), (l, mid, n)),
            move |ctx| matmul_3pc(ctx, None, None, (l, mid, n)).map(|_| ()),
        )?;
        add("MatMul", bytes, budget::matmul_bytes(l, mid, n));
    }

    // Convolutions, including the 592-byte anchor case.
    for (h, w, i, f, g, o) in [(5usize, 5usize, 1usize, 2usize, 2usize, 1usize), (8, 8, 2, 3, 3, 4)] {
        let x = rand_zl(&mut rng, h * w * i).reshape(vec![h, w, i]).unwrap();
        let k = rand_zl(&mut rng, f * g * i * o)
            .reshape(vec![f, g, i, o])
            .unwrap();
        let (x0, x1) = split(&x, &mut rng);
        let (k0, k1) = split(&k, &mut rng);
        let in_shape = vec![h, w, i];
        let wd = vec![f, g, i, o];
        let (s0, s1, s2) = (in_shape.clone(), in_shape.clone(), in_shape);
        let (w0, w1, w2) = (wd.clone(), wd.clone(), wd);
        let bytes = measure(
            seed,
            move |ctx| conv2d_3pc(ctx, Some(&x0), Some(&k0), &s0, &w0),
            move |ctx| conv2d_3pc(ctx, Some(&x1), Some(&k1), &s1, &w1),
            move |ctx| conv2d_3pc(ctx, None, None, &s2, &w2).map(|_| ()),
        )?;
        add(
            &format!("Conv2d-{h}x{w}x{i}-{f}x{g}x{o}"),
            bytes,
            budget::conv2d_bytes(h, w, i, f, g, o),
        );
    }

    // Share conversion.
    {
        let n = 100;
        let (a0, a1) = split(&rand_zl(&mut rng, n), &mut rng);
        let b = measure(
            seed,
            move |ctx| share_convert(ctx, Some(&a0), &[n]),
            move |ctx| share_convert(ctx, Some(&a1), &[n]),
            |ctx| share_convert(ctx, None, &[n]).map(|_| ()),
        )?;
        add("ShareConvert", b, budget::share_convert_bytes(n));
    }

    // MSB extraction over the odd ring.
    {
        let n = 100;
        let vals: Vec<u64> = (0..n)
            .map(|_| rng.next_u64() % (u64::MAX - 1))
            .collect();
        let a = RingTensor::from_vec(RingId::ZLm1, vec![n], vals).unwrap();
        let (a0, a1) = split(&a, &mut rng);
        let b = measure(
            seed,
            move |ctx| compute_msb(ctx, Some(&a0), &[n]),
            move |ctx| compute_msb(ctx, Some(&a1), &[n]),
            |ctx| compute_msb(ctx, None, &[n]).map(|_| ()),
        )?;
        add("ComputeMSB", b, budget::msb_bytes(n));
    }

    // Sign bit.
    {
        let n = 100;
        let (a0, a1) = split(&small(&mut rng, n, 3), &mut rng);
        let b = measure(
            seed,
            move |ctx| drelu(ctx, Some(&a0), &[n]),
            move |ctx| drelu(ctx, Some(&a1), &[n]),
            |ctx| drelu(ctx, None, &[n]).map(|_| ()),
        )?;
        add("DReLU", b, budget::drelu_bytes(n));
    }

    // Rectification, the per-element payload the batch criterion gates.
    {
        let n = 1000;
        let (a0, a1) = split(&small(&mut rng, n, 3), &mut rng);
        let b = measure(
            seed,
            move |ctx| relu(ctx, Some(&a0), &[n]),
            move |ctx| relu(ctx, Some(&a1), &[n]),
            |ctx| relu(ctx, None, &[n]).map(|_| ()),
        )?;
        add("ReLU", b, budget::relu_bytes(n));
    }

    // Tournament maximum.
    {
        let (lanes, count) = (16, 4);
        let mut s0 = Vec::new();
        let mut s1 = Vec::new();
        for _ in 0..count {
            let (a, b) = split(&small(&mut rng, lanes, 20), &mut rng);
            s0.push(a);
            s1.push(b);
        }
        let b = measure(
            seed,
            move |ctx| maxpool_argmax(ctx, Some(&s0), lanes, count),
            move |ctx| maxpool_argmax(ctx, Some(&s1), lanes, count),
            move |ctx| maxpool_argmax(ctx, None, lanes, count).map(|_| ()),
        )?;
        add("MaxPool", b, budget::maxpool_bytes(lanes, count));
    }

    // Folded batch normalization.
    {
        let (rows, c) = (16, 16);
        let shape = vec![rows, c];
        let x = rand_zl(&mut rng, rows * c).reshape(shape.clone()).unwrap();
        let (x0, x1) = split(&x, &mut rng);
        let (m0, m1) = split(&small(&mut rng, c, 40), &mut rng);
        let (b0, b1) = split(&small(&mut rng, c, 30), &mut rng);
        let (sa, sb, sc) = (shape.clone(), shape.clone(), shape);
        let b = measure(
            seed,
            move |ctx| fused_batchnorm(ctx, Some(&x0), Some(&m0), Some(&b0), &sa),
            move |ctx| fused_batchnorm(ctx, Some(&x1), Some(&m1), Some(&b1), &sb),
            move |ctx| fused_batchnorm(ctx, None, None, None, &sc).map(|_| ()),
        )?;
        add("FusedBatchNorm", b, budget::batchnorm_bytes(rows * c));
    }

    Ok(out)
}
