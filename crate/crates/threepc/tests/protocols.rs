use std::collections::BTreeMap;

use model_compiler::fixed::quantize_tensor_checked;
use model_compiler::graph::{Attrs, FloatTensor, GraphFile, NodeDecl, TensorDecl};
use model_compiler::{build_model, fixed_interpret, lower, FixedConfig, RhoMode};
use ring_core::{reconstruct_parts, share_tensor, PrfStream, RingId, RingTensor};
use threepc::beaver::{matmul_3pc, mult_elementwise};
use threepc::budget;
use threepc::compare::private_compare;
use threepc::conv::conv2d_3pc;
use threepc::convert::share_convert;
use threepc::executor::{deal_shares, execute_program};
use threepc::maxpool::maxpool_argmax;
use threepc::msb::compute_msb;
use threepc::relu::{drelu, relu};
use threepc::truncate::scaledown_local;
use threepc::{run_parties, Metrics};

const SEED: [u8; 16] = *b"session-seed-007";
const ZL: RingId = RingId::ZL;
const ZLM1: RingId = RingId::ZLm1;
const ZP: RingId = RingId::Zp;

fn test_rng(label: u64) -> PrfStream {
    PrfStream::new(b"protocol-tests!!", label)
}

fn merged(ms: &[Metrics; 3]) -> Metrics {
    let mut out = Metrics::default();
    for m in ms {
        out.merge(m);
    }
    out
}

fn split2(t: &RingTensor, rng: &mut PrfStream) -> (RingTensor, RingTensor) {
    let sh = share_tensor(t, rng);
    (sh.part0, sh.part1)
}

#[test]
fn beaver_mult_matches_plaintext_and_budget() {
    let n = 1000usize;
    let mut rng = test_rng(1);
    let x = rng.next_tensor(ZL, &[n]);
    let y = rng.next_tensor(ZL, &[n]);
    let (x0, x1) = split2(&x, &mut rng);
    let (y0, y1) = split2(&y, &mut rng);
    let ((z0, z1, ()), ms) = run_parties(
        &SEED,
        move |ctx| Ok(mult_elementwise(ctx, Some(&x0), Some(&y0), &[n])?.unwrap()),
        move |ctx| Ok(mult_elementwise(ctx, Some(&x1), Some(&y1), &[n])?.unwrap()),
        |ctx| mult_elementwise(ctx, None, None, &[n]).map(|_| ()),
    )
    .unwrap();
    let z = reconstruct_parts(&z0, &z1).unwrap();
    for i in 0..n {
        assert_eq!(z.data()[i], x.data()[i].wrapping_mul(y.data()[i]));
    }
    assert_eq!(merged(&ms).total_payload(), budget::mult_bytes(n));
}

#[test]
fn beaver_matmul_matches_plaintext_and_budget() {
    let (l, m, n) = (7usize, 5usize, 3usize);
    let mut rng = test_rng(2);
    let x = rng.next_tensor(ZL, &[l, m]);
    let y = rng.next_tensor(ZL, &[m, n]);
    let (x0, x1) = split2(&x, &mut rng);
    let (y0, y1) = split2(&y, &mut rng);
    let ((z0, z1, ()), ms) = run_parties(
        &SEED,
        move |ctx| Ok(matmul_3pc(ctx, Some(&x0), Some(&y0), (l, m, n))?.unwrap()),
        move |ctx| Ok(matmul_3pc(ctx, Some(&x1), Some(&y1), (l, m, n))?.unwrap()),
        move |ctx| matmul_3pc(ctx, None, None, (l, m, n)).map(|_| ()),
    )
    .unwrap();
    let z = reconstruct_parts(&z0, &z1).unwrap();
    let expect = x.matmul(&y).unwrap();
    assert_eq!(z.data(), expect.data());
    assert_eq!(merged(&ms).total_payload(), budget::matmul_bytes(l, m, n));
}

/// Plaintext wrapping convolution on the h x w x ci / f x g x ci x o layout.
fn conv_plain(x: &RingTensor, w: &RingTensor) -> RingTensor {
    let (h, wd, ci) = (x.shape()[0], x.shape()[1], x.shape()[2]);
    let (f, g, o) = (w.shape()[0], w.shape()[1], w.shape()[3]);
    let (qh, qw) = (h - f + 1, wd - g + 1);
    let mut data = vec![0u64; qh * qw * o];
    for y in 0..qh {
        for xx in 0..qw {
            for oc in 0..o {
                let mut acc = 0u64;
                for k in 0..f {
                    for ll in 0..g {
                        for c in 0..ci {
                            let xv = x.data()[((y + k) * wd + (xx + ll)) * ci + c];
                            let wv = w.data()[((k * g + ll) * ci + c) * o + oc];
                            acc = acc.wrapping_add(xv.wrapping_mul(wv));
                        }
                    }
                }
                data[(y * qw + xx) * o + oc] = acc;
            }
        }
    }
    RingTensor::from_vec(ZL, vec![qh, qw, o], data).unwrap()
}

#[test]
fn conv2d_matches_plaintext_and_budget() {
    let (h, wd, ci, f, g, o) = (6usize, 5usize, 2usize, 3usize, 2usize, 4usize);
    let mut rng = test_rng(3);
    let x = rng.next_tensor(ZL, &[h, wd, ci]);
    let w = rng.next_tensor(ZL, &[f, g, ci, o]);
    let (x0, x1) = split2(&x, &mut rng);
    let (w0, w1) = split2(&w, &mut rng);
    let in_shape = vec![h, wd, ci];
    let w_shape = vec![f, g, ci, o];
    let (is0, ws0) = (in_shape.clone(), w_shape.clone());
    let (is1, ws1) = (in_shape.clone(), w_shape.clone());
    let ((z0, z1, ()), ms) = run_parties(
        &SEED,
        move |ctx| Ok(conv2d_3pc(ctx, Some(&x0), Some(&w0), &is0, &ws0)?.unwrap()),
        move |ctx| Ok(conv2d_3pc(ctx, Some(&x1), Some(&w1), &is1, &ws1)?.unwrap()),
        move |ctx| conv2d_3pc(ctx, None, None, &in_shape, &w_shape).map(|_| ()),
    )
    .unwrap();
    let z = reconstruct_parts(&z0, &z1).unwrap();
    assert_eq!(z.data(), conv_plain(&x, &w).data());
    assert_eq!(
        merged(&ms).total_payload(),
        budget::conv2d_bytes(h, wd, ci, f, g, o)
    );
}

#[test]
fn conv2d_five_by_five_single_channel_costs_592_bytes() {
    let mut rng = test_rng(4);
    let x = rng.next_tensor(ZL, &[5, 5, 1]);
    let w = rng.next_tensor(ZL, &[2, 2, 1, 1]);
    let (x0, x1) = split2(&x, &mut rng);
    let (w0, w1) = split2(&w, &mut rng);
    let ((z0, z1, ()), ms) = run_parties(
        &SEED,
        move |ctx| Ok(conv2d_3pc(ctx, Some(&x0), Some(&w0), &[5, 5, 1], &[2, 2, 1, 1])?.unwrap()),
        move |ctx| Ok(conv2d_3pc(ctx, Some(&x1), Some(&w1), &[5, 5, 1], &[2, 2, 1, 1])?.unwrap()),
        |ctx| conv2d_3pc(ctx, None, None, &[5, 5, 1], &[2, 2, 1, 1]).map(|_| ()),
    )
    .unwrap();
    let z = reconstruct_parts(&z0, &z1).unwrap();
    assert_eq!(z.data(), conv_plain(&x, &w).data());
    assert_eq!(merged(&ms).total_payload(), 592);
    assert_eq!(budget::conv2d_bytes(5, 5, 1, 2, 2, 1), 592);
}

#[test]
fn private_compare_exhaustive_over_8_bit_inputs() {
    let nbits = 8u32;
    let mut xs = Vec::new();
    let mut rs = Vec::new();
    let mut betas = Vec::new();
    for beta in 0..2u64 {
        for x in 0..256u64 {
            // Sweep r diagonally so every (x, r) pair appears across the two
            // beta blocks without an oversized session.
            for r in [0, 1, x.wrapping_sub(1) & 255, x, (x + 1) & 255, 254, 255] {
                xs.push(x);
                rs.push(r);
                betas.push(beta);
            }
        }
    }
    let n = xs.len();
    let mut rng = test_rng(5);
    let mut b0 = Vec::with_capacity(n * 8);
    let mut b1 = Vec::with_capacity(n * 8);
    for &x in &xs {
        for i in 0..8 {
            let bit = (x >> i) & 1;
            let s0 = rng.next_elem(ZP);
            b0.push(s0);
            b1.push(ZP.sub(bit, s0));
        }
    }
    let t0 = RingTensor::from_vec(ZP, vec![n, 8], b0).unwrap();
    let t1 = RingTensor::from_vec(ZP, vec![n, 8], b1).unwrap();
    let (r0, r1, bt0, bt1) = (rs.clone(), rs.clone(), betas.clone(), betas.clone());
    let ((_, _, got), ms) = run_parties(
        &SEED,
        move |ctx| private_compare(ctx, Some(&t0), Some(&r0), Some(&bt0), n, nbits),
        move |ctx| private_compare(ctx, Some(&t1), Some(&r1), Some(&bt1), n, nbits),
        move |ctx| Ok(private_compare(ctx, None, None, None, n, nbits)?.unwrap()),
    )
    .unwrap();
    for i in 0..n {
        let expect = betas[i] ^ u64::from(xs[i] > rs[i]);
        assert_eq!(got[i], expect, "x={} r={} beta={}", xs[i], rs[i], betas[i]);
    }
    assert_eq!(
        merged(&ms).total_payload(),
        budget::private_compare_bytes(n, nbits)
    );
}

#[test]
fn share_convert_is_exact_and_on_budget() {
    let n = 1000usize;
    let mut rng = test_rng(6);
    let mut vals: Vec<u64> = (0..n).map(|_| rng.next_u64()).collect();
    vals[0] = 0;
    vals[1] = 1;
    vals[2] = 1u64 << 63;
    vals[3] = u64::MAX - 1;
    // The modulus-switch precondition excludes only the all-ones value.
    for v in vals.iter_mut() {
        if *v == u64::MAX {
            *v = 7;
        }
    }
    let a = RingTensor::from_vec(ZL, vec![n], vals.clone()).unwrap();
    let (a0, a1) = split2(&a, &mut rng);
    let ((y0, y1, ()), ms) = run_parties(
        &SEED,
        move |ctx| Ok(share_convert(ctx, Some(&a0), &[n])?.unwrap()),
        move |ctx| Ok(share_convert(ctx, Some(&a1), &[n])?.unwrap()),
        |ctx| share_convert(ctx, None, &[n]).map(|_| ()),
    )
    .unwrap();
    let y = reconstruct_parts(&y0, &y1).unwrap();
    assert_eq!(y.ring(), ZLM1);
    // Values below 2^64 - 1 are their own canonical residue.
    assert_eq!(y.data(), &vals[..]);
    let m = merged(&ms);
    assert_eq!(m.total_payload(), budget::share_convert_bytes(n));
    assert_eq!(m.fresh.to_p0, n as u64 / 2);
    assert_eq!(m.fresh.to_p1, n as u64 / 2);
}

#[test]
fn compute_msb_is_exact_and_on_budget() {
    let n = 1000usize;
    let mut rng = test_rng(7);
    let mut vals: Vec<u64> = (0..n).map(|_| rng.next_elem(ZLM1)).collect();
    vals[0] = 0;
    vals[1] = (1u64 << 63) - 1;
    vals[2] = 1u64 << 63;
    vals[3] = u64::MAX - 2;
    let a = RingTensor::from_vec(ZLM1, vec![n], vals.clone()).unwrap();
    let (a0, a1) = split2(&a, &mut rng);
    let ((y0, y1, ()), ms) = run_parties(
        &SEED,
        move |ctx| Ok(compute_msb(ctx, Some(&a0), &[n])?.unwrap()),
        move |ctx| Ok(compute_msb(ctx, Some(&a1), &[n])?.unwrap()),
        |ctx| compute_msb(ctx, None, &[n]).map(|_| ()),
    )
    .unwrap();
    let y = reconstruct_parts(&y0, &y1).unwrap();
    for i in 0..n {
        assert_eq!(y.data()[i], vals[i] >> 63, "value {}", vals[i]);
    }
    assert_eq!(merged(&ms).total_payload(), budget::msb_bytes(n));
}

#[test]
fn drelu_matches_sign_and_budget() {
    let n = 1001usize;
    let mut rng = test_rng(8);
    let mut vals: Vec<i64> = (0..n)
        .map(|_| (rng.next_u64() as i64) >> 2)
        .collect();
    vals[0] = 0;
    vals[1] = -1;
    vals[2] = 1;
    vals[3] = (1i64 << 62) - 1;
    vals[4] = -(1i64 << 62) + 1;
    let a = RingTensor::from_i64_vec(vec![n], &vals).unwrap();
    let (a0, a1) = split2(&a, &mut rng);
    let ((y0, y1, ()), ms) = run_parties(
        &SEED,
        move |ctx| Ok(drelu(ctx, Some(&a0), &[n])?.unwrap()),
        move |ctx| Ok(drelu(ctx, Some(&a1), &[n])?.unwrap()),
        |ctx| drelu(ctx, None, &[n]).map(|_| ()),
    )
    .unwrap();
    let y = reconstruct_parts(&y0, &y1).unwrap();
    for i in 0..n {
        assert_eq!(y.data()[i], u64::from(vals[i] >= 0), "value {}", vals[i]);
    }
    let m = merged(&ms);
    assert_eq!(m.total_payload(), budget::drelu_bytes(n));
    assert_eq!(m.ops.comparisons, n as u64);
    // Odd count: the explicit fresh shares split with one extra toward P0.
    assert_eq!(m.fresh.to_p0, (n as u64 + 1) / 2);
    assert_eq!(m.fresh.to_p1, n as u64 / 2);
}

#[test]
fn relu_matches_plaintext_and_budget() {
    let n = 1000usize;
    let mut rng = test_rng(9);
    let mut vals: Vec<i64> = (0..n)
        .map(|_| (rng.next_u64() as i64) >> 20)
        .collect();
    vals[0] = 0;
    vals[1] = -5;
    let a = RingTensor::from_i64_vec(vec![n], &vals).unwrap();
    let (a0, a1) = split2(&a, &mut rng);
    let ((y0, y1, ()), ms) = run_parties(
        &SEED,
        move |ctx| Ok(relu(ctx, Some(&a0), &[n])?.unwrap()),
        move |ctx| Ok(relu(ctx, Some(&a1), &[n])?.unwrap()),
        |ctx| relu(ctx, None, &[n]).map(|_| ()),
    )
    .unwrap();
    let y = reconstruct_parts(&y0, &y1).unwrap();
    for i in 0..n {
        assert_eq!(y.to_i64_vec()[i], vals[i].max(0), "value {}", vals[i]);
    }
    let m = merged(&ms);
    assert_eq!(m.total_payload(), budget::relu_bytes(n));
    assert_eq!(m.ops.relu, n as u64);
    assert_eq!(m.ops.comparisons, n as u64);
    assert_eq!(m.fresh.to_p0 + m.fresh.to_p1, n as u64);
    assert_eq!(m.fresh.to_p0, n as u64 / 2);
}

#[test]
fn maxpool_argmax_tournament_keeps_first_of_ties() {
    let lanes = 20usize;
    let count = 4usize;
    let mut rng = test_rng(10);
    let mut plain: Vec<Vec<i64>> = (0..count)
        .map(|_| (0..lanes).map(|_| (rng.next_u64() as i64) >> 40).collect())
        .collect();
    // Force ties in a few lanes.
    plain[2][0] = plain[0][0];
    plain[3][5] = plain[1][5];
    plain[1][7] = plain[0][7];
    let tensors: Vec<RingTensor> = plain
        .iter()
        .map(|v| RingTensor::from_i64_vec(vec![lanes], v).unwrap())
        .collect();
    let mut s0 = Vec::new();
    let mut s1 = Vec::new();
    for t in &tensors {
        let (a, b) = split2(t, &mut rng);
        s0.push(a);
        s1.push(b);
    }
    let ((r0, r1, ()), ms) = run_parties(
        &SEED,
        move |ctx| Ok(maxpool_argmax(ctx, Some(s0.as_slice()), lanes, count)?.unwrap()),
        move |ctx| Ok(maxpool_argmax(ctx, Some(s1.as_slice()), lanes, count)?.unwrap()),
        move |ctx| maxpool_argmax(ctx, None, lanes, count).map(|_| ()),
    )
    .unwrap();
    let max = reconstruct_parts(&r0.0, &r1.0).unwrap().to_i64_vec();
    let arg = reconstruct_parts(&r0.1, &r1.1).unwrap().to_i64_vec();
    for lane in 0..lanes {
        let mut best = 0usize;
        for k in 1..count {
            if plain[k][lane] > plain[best][lane] {
                best = k;
            }
        }
        assert_eq!(max[lane], plain[best][lane], "lane {lane}");
        assert_eq!(arg[lane], best as i64, "lane {lane}");
    }
    assert_eq!(merged(&ms).total_payload(), budget::maxpool_bytes(lanes, count));
}

#[test]
fn scaledown_reconstructs_within_one_unit() {
    let n = 1000usize;
    let s = 12u32;
    let mut rng = test_rng(11);
    // Keep magnitudes well below 2^63: the local-shift trick fails when the
    // random share sum crosses the signed boundary, which has probability
    // about |v| / 2^64 per element.
    let vals: Vec<i64> = (0..n).map(|_| (rng.next_u64() as i64) >> 24).collect();
    let a = RingTensor::from_i64_vec(vec![n], &vals).unwrap();
    let (a0, a1) = split2(&a, &mut rng);
    let ((y0, y1, ()), ms) = run_parties(
        &SEED,
        move |ctx| Ok(scaledown_local(ctx, Some(&a0), s)?.unwrap()),
        move |ctx| Ok(scaledown_local(ctx, Some(&a1), s)?.unwrap()),
        move |ctx| scaledown_local(ctx, None, s).map(|_| ()),
    )
    .unwrap();
    let y = reconstruct_parts(&y0, &y1).unwrap().to_i64_vec();
    for i in 0..n {
        assert!((y[i] - (vals[i] >> s)).abs() <= 1, "value {}", vals[i]);
    }
    let m = merged(&ms);
    assert_eq!(m.total_payload(), 0);
    assert_eq!(m.ops.scaledown_elems, n as u64);
}

#[test]
fn fused_batchnorm_matches_plaintext() {
    let shape = [4usize, 3usize];
    let n = 12usize;
    let mut rng = test_rng(12);
    let x = rng.next_tensor(ZL, &shape);
    let mult = rng.next_tensor(ZL, &[3]);
    let bias = rng.next_tensor(ZL, &[3]);
    let (x0, x1) = split2(&x, &mut rng);
    let (m0, m1) = split2(&mult, &mut rng);
    let (b0, b1) = split2(&bias, &mut rng);
    use threepc::batchnorm::fused_batchnorm;
    let ((y0, y1, ()), ms) = run_parties(
        &SEED,
        move |ctx| {
            Ok(fused_batchnorm(ctx, Some(&x0), Some(&m0), Some(&b0), &shape)?.unwrap())
        },
        move |ctx| {
            Ok(fused_batchnorm(ctx, Some(&x1), Some(&m1), Some(&b1), &shape)?.unwrap())
        },
        move |ctx| fused_batchnorm(ctx, None, None, None, &shape).map(|_| ()),
    )
    .unwrap();
    let y = reconstruct_parts(&y0, &y1).unwrap();
    for i in 0..n {
        let expect = x.data()[i]
            .wrapping_mul(mult.data()[i % 3])
            .wrapping_add(bias.data()[i % 3]);
        assert_eq!(y.data()[i], expect);
    }
    assert_eq!(merged(&ms).total_payload(), budget::batchnorm_bytes(n));
}

#[test]
fn sessions_are_deterministic_under_a_fixed_seed() {
    let run = || {
        let n = 64usize;
        let mut rng = test_rng(13);
        let vals: Vec<i64> = (0..n).map(|_| (rng.next_u64() as i64) >> 20).collect();
        let a = RingTensor::from_i64_vec(vec![n], &vals).unwrap();
        let (a0, a1) = split2(&a, &mut rng);
        run_parties(
            &SEED,
            move |ctx| Ok(relu(ctx, Some(&a0), &[n])?.unwrap()),
            move |ctx| Ok(relu(ctx, Some(&a1), &[n])?.unwrap()),
            |ctx| relu(ctx, None, &[n]).map(|_| ()),
        )
        .unwrap()
    };
    let ((x0, x1, ()), ma) = run();
    let ((y0, y1, ()), mb) = run();
    assert_eq!(x0.data(), y0.data());
    assert_eq!(x1.data(), y1.data());
    for (a, b) in ma.iter().zip(mb.iter()) {
        assert_eq!(a.channels, b.channels);
        assert_eq!(a.per_op, b.per_op);
    }
}

fn decl(name: &str, dims: &[usize]) -> TensorDecl {
    TensorDecl {
        name: name.into(),
        dims: dims.to_vec(),
    }
}

fn node(op: &str, inputs: &[&str], output: &str, attrs: Attrs) -> NodeDecl {
    NodeDecl {
        op: op.into(),
        inputs: inputs.iter().map(|s| s.to_string()).collect(),
        output: output.into(),
        attrs,
    }
}

#[test]
fn executor_runs_a_small_network_like_the_plaintext_interpreter() {
    let s = 12u32;
    let gf = GraphFile {
        tensors: vec![
            decl("input", &[8, 8, 1]),
            decl("w1", &[3, 3, 1, 2]),
            decl("w2", &[18, 4]),
            decl("b2", &[4]),
            decl("flat", &[1, 18]),
        ],
        nodes: vec![
            node("Conv", &["input", "w1"], "c1", Attrs::default()),
            node("ReLU", &["c1"], "r1", Attrs::default()),
            node(
                "MaxPool",
                &["r1"],
                "p1",
                Attrs {
                    pool: Some([2, 2]),
                    ..Attrs::default()
                },
            ),
            node("Reshape", &["p1"], "flat", Attrs::default()),
            node("MatMul", &["flat", "w2"], "m2", Attrs::default()),
            node("MatAdd", &["m2", "b2"], "logits", Attrs::default()),
            node("ArgMax", &["logits"], "label", Attrs::default()),
        ],
        input: "input".into(),
        output: "label".into(),
    };
    let mut rng = test_rng(14);
    let mut randf = |n: usize, scale: f32| -> Vec<f32> {
        (0..n)
            .map(|_| (rng.next_u64() as f64 / u64::MAX as f64 - 0.5) as f32 * scale)
            .collect()
    };
    let mut weights = BTreeMap::new();
    weights.insert("w1".to_string(), FloatTensor::new(vec![3, 3, 1, 2], randf(18, 1.0)));
    weights.insert("w2".to_string(), FloatTensor::new(vec![18, 4], randf(72, 1.0)));
    weights.insert("b2".to_string(), FloatTensor::new(vec![4], randf(4, 0.5)));
    let fm = build_model(gf, weights).unwrap();
    let fixed = lower(&fm, FixedConfig { s }, RhoMode::Checked).unwrap();

    let input = FloatTensor::new(vec![8, 8, 1], randf(64, 2.0));
    let input_int = quantize_tensor_checked(&input, s).unwrap();
    let expect = fixed_interpret(&fixed, &input_int).unwrap();

    let mut deal_rng = test_rng(15);
    let [in0, in1] = deal_shares(&fixed, &input_int, &mut deal_rng);
    let (g0, g1, g2) = (fixed.graph.clone(), fixed.graph.clone(), fixed.graph.clone());
    let ((y0, y1, ()), ms) = run_parties(
        &SEED,
        move |ctx| Ok(execute_program(ctx, &g0, Some(&in0))?.unwrap()),
        move |ctx| Ok(execute_program(ctx, &g1, Some(&in1))?.unwrap()),
        move |ctx| execute_program(ctx, &g2, None).map(|_| ()),
    )
    .unwrap();
    let y = reconstruct_parts(&y0, &y1).unwrap();
    assert_eq!(y.to_i64_vec(), expect.data);

    let m = merged(&ms);
    // All rectification traffic lands on the ReLU label: 6x6x2 elements.
    assert_eq!(m.per_op.get("ReLU").copied(), Some(budget::relu_bytes(72)));
    assert_eq!(m.ops.relu, 72);
    // Truncations: one after Conv (72 elements) and one after MatMul (4).
    assert_eq!(m.ops.scaledown_elems, 76);
}

#[test]
fn executor_residuals_stay_within_truncation_error() {
    let s = 12u32;
    let gf = GraphFile {
        tensors: vec![
            decl("input", &[1, 16]),
            decl("w", &[16, 6]),
            decl("b", &[6]),
        ],
        nodes: vec![
            node("MatMul", &["input", "w"], "m", Attrs::default()),
            node("MatAdd", &["m", "b"], "a", Attrs::default()),
            node("ReLU", &["a"], "out", Attrs::default()),
        ],
        input: "input".into(),
        output: "out".into(),
    };
    let mut rng = test_rng(16);
    let mut randf = |n: usize| -> Vec<f32> {
        (0..n)
            .map(|_| (rng.next_u64() as f64 / u64::MAX as f64 - 0.5) as f32)
            .collect()
    };
    let mut weights = BTreeMap::new();
    weights.insert("w".to_string(), FloatTensor::new(vec![16, 6], randf(96)));
    weights.insert("b".to_string(), FloatTensor::new(vec![6], randf(6)));
    let fm = build_model(gf, weights).unwrap();
    let fixed = lower(&fm, FixedConfig { s }, RhoMode::Checked).unwrap();
    let input = FloatTensor::new(vec![1, 16], randf(16));
    let input_int = quantize_tensor_checked(&input, s).unwrap();
    let expect = fixed_interpret(&fixed, &input_int).unwrap();

    let mut deal_rng = test_rng(17);
    let [in0, in1] = deal_shares(&fixed, &input_int, &mut deal_rng);
    let (g0, g1, g2) = (fixed.graph.clone(), fixed.graph.clone(), fixed.graph.clone());
    let ((y0, y1, ()), _) = run_parties(
        &SEED,
        move |ctx| Ok(execute_program(ctx, &g0, Some(&in0))?.unwrap()),
        move |ctx| Ok(execute_program(ctx, &g1, Some(&in1))?.unwrap()),
        move |ctx| execute_program(ctx, &g2, None).map(|_| ()),
    )
    .unwrap();
    let y = reconstruct_parts(&y0, &y1).unwrap().to_i64_vec();
    for (got, want) in y.iter().zip(&expect.data) {
        assert!((got - want).abs() <= 1, "got {got}, want {want}");
    }
}
