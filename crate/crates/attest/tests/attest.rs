use std::time::Duration;

use attest::{
    code_identity, run_malicious, verify_token, AttestFunctionality, AttestToken, RootAuthority,
    Strategy, TamperSpec,
};
use ring_core::{reconstruct_parts, share_tensor, PrfStream, RingTensor};
use threepc::relu::relu;
use threepc::{run_parties, Role};

const SEED: [u8; 16] = *b"malicious-seed-1";

fn test_rng(label: u64) -> PrfStream {
    PrfStream::new(b"attest-test-rng!", label)
}

#[test]
fn token_roundtrip_and_verification() {
    let root = RootAuthority::from_seed(&[7u8; 32]);
    let fa = AttestFunctionality::from_seed(&[9u8; 32]);
    let hash = code_identity();
    let token = root.issue(hash, &fa.verifying_key());
    let bytes = token.to_bytes();
    assert_eq!(bytes.len(), attest::TOKEN_LEN);
    let parsed = AttestToken::from_bytes(&bytes).unwrap();
    assert_eq!(parsed, token);
    let vk = verify_token(&root.verifying_key(), &parsed, &hash).unwrap();
    assert_eq!(vk, fa.verifying_key());

    // Token for different code fails the hash comparison.
    let other_hash = [0xAAu8; 32];
    assert!(verify_token(&root.verifying_key(), &parsed, &other_hash).is_err());
    // A tampered token fails the root signature.
    let mut bad = parsed.clone();
    bad.vk[0] ^= 1;
    assert!(verify_token(&root.verifying_key(), &bad, &hash).is_err());
    // A token signed by a different authority is rejected.
    let rogue = RootAuthority::from_seed(&[8u8; 32]);
    let forged = rogue.issue(hash, &fa.verifying_key());
    assert!(verify_token(&root.verifying_key(), &forged, &hash).is_err());
}

#[test]
fn functionality_commit_once_and_state_chain() {
    let mut fa = AttestFunctionality::from_seed(&[3u8; 32]);
    let s0 = fa.commit(code_identity()).expect("first commit accepted");
    assert_eq!(s0.ctr, 0);
    assert!(fa.commit(code_identity()).is_none(), "second commit ignored");

    let (y1, _sig1, s1) = fa.compute(b"round-1-input", &s0).unwrap();
    let (_y2, _sig2, s2) = fa.compute(b"round-2-input", &s1).unwrap();

    // Replaying an older state is rejected.
    assert!(fa.compute(b"round-3-input", &s1).is_err());
    // A tampered state blob fails its signature.
    let mut bad = s2.clone();
    bad.digest[0] ^= 1;
    assert!(fa.compute(b"round-3-input", &bad).is_err());

    // Same seed and inputs reproduce the same outputs.
    let mut fb = AttestFunctionality::from_seed(&[3u8; 32]);
    let t0 = fb.commit(code_identity()).unwrap();
    let (z1, _, _) = fb.compute(b"round-1-input", &t0).unwrap();
    assert_eq!(y1, z1);
}

fn relu_workload(
    n: usize,
) -> (
    Vec<i64>,
    RingTensor,
    RingTensor,
) {
    let mut rng = test_rng(1);
    let vals: Vec<i64> = (0..n).map(|_| (rng.next_u64() as i64) >> 20).collect();
    let a = RingTensor::from_i64_vec(vec![n], &vals).unwrap();
    let sh = share_tensor(&a, &mut rng);
    (vals, sh.part0, sh.part1)
}

#[test]
fn untampered_malicious_run_equals_semi_honest_run() {
    let n = 32usize;
    let (vals, a0, a1) = relu_workload(n);
    let (b0, b1) = (a0.clone(), a1.clone());
    let ((x0, x1, ()), sh_metrics) = run_parties(
        &SEED,
        move |ctx| Ok(relu(ctx, Some(&a0), &[n])?.unwrap()),
        move |ctx| Ok(relu(ctx, Some(&a1), &[n])?.unwrap()),
        |ctx| relu(ctx, None, &[n]).map(|_| ()),
    )
    .unwrap();

    let outcome = run_malicious(
        &SEED,
        None,
        Duration::from_secs(5),
        move |ctx| Ok(relu(ctx, Some(&b0), &[n])?.unwrap()),
        move |ctx| Ok(relu(ctx, Some(&b1), &[n])?.unwrap()),
        |ctx| relu(ctx, None, &[n]).map(|_| ()),
    )
    .unwrap();
    assert!(outcome.completed());
    assert!(outcome.aborts.is_empty());
    let (y0, y1, ()) = (
        outcome.results.0.unwrap(),
        outcome.results.1.unwrap(),
        outcome.results.2.unwrap(),
    );
    // Bit-equal outputs and identical payload accounting: the signed wrapper
    // adds signatures outside the metered payload.
    assert_eq!(x0.data(), y0.data());
    assert_eq!(x1.data(), y1.data());
    for (a, b) in sh_metrics.iter().zip(outcome.metrics.iter()) {
        assert_eq!(a.channels, b.channels);
    }
    let y = reconstruct_parts(&y0, &y1).unwrap().to_i64_vec();
    for i in 0..n {
        assert_eq!(y[i], vals[i].max(0));
    }

    // Transcripts are deterministic under the seed.
    let (c0, c1) = {
        let (_, a0, a1) = relu_workload(n);
        (a0, a1)
    };
    let again = run_malicious(
        &SEED,
        None,
        Duration::from_secs(5),
        move |ctx| Ok(relu(ctx, Some(&c0), &[n])?.unwrap()),
        move |ctx| Ok(relu(ctx, Some(&c1), &[n])?.unwrap()),
        |ctx| relu(ctx, None, &[n]).map(|_| ()),
    )
    .unwrap();
    assert_eq!(outcome.transcript_digests, again.transcript_digests);
}

#[test]
fn every_tamper_strategy_forces_an_abort() {
    let n = 16usize;
    let channels = [
        (Role::P0, Role::P2),
        (Role::P1, Role::P0),
        (Role::P2, Role::P1),
    ];
    for strategy in Strategy::ALL {
        for &(from, to) in &channels {
            for frame_index in [0usize, 1, 2] {
                let (_, a0, a1) = relu_workload(n);
                let spec = TamperSpec {
                    from,
                    to,
                    frame_index,
                    strategy,
                };
                let outcome = run_malicious(
                    &SEED,
                    Some(spec),
                    Duration::from_millis(300),
                    move |ctx| Ok(relu(ctx, Some(&a0), &[n])?.unwrap()),
                    move |ctx| Ok(relu(ctx, Some(&a1), &[n])?.unwrap()),
                    |ctx| relu(ctx, None, &[n]).map(|_| ()),
                )
                .unwrap();
                assert!(
                    !outcome.completed(),
                    "{} on {}->{} frame {} completed silently",
                    strategy.name(),
                    from.name(),
                    to.name(),
                    frame_index
                );
                assert!(
                    !outcome.aborts.is_empty(),
                    "{} on {}->{} frame {} aborted without a report",
                    strategy.name(),
                    from.name(),
                    to.name(),
                    frame_index
                );
                for r in &outcome.aborts {
                    assert_eq!(r.strategy, strategy.name());
                    assert!(!r.check.is_empty());
                }
            }
        }
    }
}

#[test]
fn abort_report_serializes_round_channel_check_strategy() {
    let n = 8usize;
    let (_, a0, a1) = relu_workload(n);
    let spec = TamperSpec {
        from: Role::P0,
        to: Role::P2,
        frame_index: 0,
        strategy: Strategy::BitFlip,
    };
    let outcome = run_malicious(
        &SEED,
        Some(spec),
        Duration::from_millis(300),
        move |ctx| Ok(relu(ctx, Some(&a0), &[n])?.unwrap()),
        move |ctx| Ok(relu(ctx, Some(&a1), &[n])?.unwrap()),
        |ctx| relu(ctx, None, &[n]).map(|_| ()),
    )
    .unwrap();
    // The helper's signature failure is the root cause; the other parties
    // may additionally report cascading timeouts.
    let report = outcome
        .aborts
        .iter()
        .find(|r| r.check == "signature")
        .expect("signature abort recorded");
    let json = serde_json::to_value(report).unwrap();
    assert_eq!(json["channel"], "p0->p2");
    assert_eq!(json["round"], 0);
    assert_eq!(json["check"], "signature");
    assert_eq!(json["strategy"], "bit-flip");
}
