use std::collections::{BTreeMap, BTreeSet};

use model_compiler::graph::{Attrs, FloatTensor, GraphFile, IntTensor, NodeDecl, TensorDecl};
use model_compiler::hlil::{HlilProgram, Node};
use model_compiler::{
    build_model, count_scaledown, fixed_interpret, liveness, lower, parse_weights,
    relu_maxpool_switch, scale_sweep, write_weights, CompileError, FixedConfig, FloatModel,
    LlilProgram, OpKind, RhoMode,
};

fn decl(name: &str, dims: &[usize]) -> TensorDecl {
    TensorDecl {
        name: name.into(),
        dims: dims.to_vec(),
    }
}

fn node(op: &str, inputs: &[&str], output: &str) -> NodeDecl {
    NodeDecl {
        op: op.into(),
        inputs: inputs.iter().map(|s| s.to_string()).collect(),
        output: output.into(),
        attrs: Attrs::default(),
    }
}

fn pooled(mut n: NodeDecl, a: usize, b: usize) -> NodeDecl {
    n.attrs.pool = Some([a, b]);
    n
}

fn ft(dims: &[usize], data: &[f32]) -> FloatTensor {
    FloatTensor::new(dims.to_vec(), data.to_vec())
}

fn weights(entries: &[(&str, FloatTensor)]) -> BTreeMap<String, FloatTensor> {
    entries
        .iter()
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect()
}

fn logistic_regression() -> FloatModel {
    let gf = GraphFile {
        tensors: vec![decl("x", &[1, 784]), decl("w", &[784, 10]), decl("b", &[10])],
        nodes: vec![
            node("MatMul", &["x", "w"], "xw"),
            node("MatAdd", &["xw", "b"], "logits"),
            node("ArgMax", &["logits"], "pred"),
        ],
        input: "x".into(),
        output: "pred".into(),
    };
    let w = weights(&[
        ("w", ft(&[784, 10], &vec![0.01f32; 7840])),
        ("b", ft(&[10], &[0.1; 10])),
    ]);
    build_model(gf, w).unwrap()
}

#[test]
fn logistic_regression_loads_and_lowers() {
    let m = logistic_regression();
    assert_eq!(m.graph.nodes.len(), 3);
    assert_eq!(m.graph.dims("xw").unwrap(), &[1, 10]);
    // Rank-1 bias is expanded at load time.
    assert_eq!(m.graph.dims("b").unwrap(), &[1, 10]);
    assert_eq!(m.weights["b"].dims, vec![1, 10]);

    let fm = lower(&m, FixedConfig::new(15).unwrap(), RhoMode::Checked).unwrap();
    let ops: Vec<OpKind> = fm.graph.stmts.iter().map(|s| s.op).collect();
    assert_eq!(
        ops,
        vec![OpKind::MatMul, OpKind::ScaleDown, OpKind::MatAdd, OpKind::ArgMax]
    );
    assert_eq!(count_scaledown(&fm.graph).unwrap(), 10);
}

#[test]
fn conv_shape_inference() {
    let gf = GraphFile {
        tensors: vec![decl("x", &[28, 28, 1]), decl("w", &[5, 5, 1, 16])],
        nodes: vec![node("Conv", &["x", "w"], "y")],
        input: "x".into(),
        output: "y".into(),
    };
    let w = weights(&[("w", ft(&[5, 5, 1, 16], &vec![0.0; 400]))]);
    let m = build_model(gf, w).unwrap();
    assert_eq!(m.graph.dims("y").unwrap(), &[24, 24, 16]);
}

#[test]
fn empty_graph_is_empty_program() {
    let gf = GraphFile {
        tensors: vec![decl("x", &[4])],
        nodes: vec![],
        input: "x".into(),
        output: "x".into(),
    };
    let m = build_model(gf, BTreeMap::new()).unwrap();
    assert!(m.graph.nodes.is_empty());
    let fm = lower(&m, FixedConfig::new(8).unwrap(), RhoMode::Checked).unwrap();
    assert!(fm.graph.stmts.is_empty());
    let x = IntTensor::new(vec![4], vec![1, -2, 3, -4]);
    assert_eq!(fixed_interpret(&fm, &x).unwrap(), x);
}

#[test]
fn loader_rejects_malformed_graphs() {
    let base = |nodes: Vec<NodeDecl>| GraphFile {
        tensors: vec![decl("x", &[2, 2])],
        nodes,
        input: "x".into(),
        output: "y".into(),
    };
    let err = build_model(base(vec![node("Frobnicate", &["x"], "y")]), BTreeMap::new());
    assert!(matches!(err, Err(CompileError::UnknownOp(_))));
    let err = build_model(base(vec![node("ReLU", &["ghost"], "y")]), BTreeMap::new());
    assert!(matches!(err, Err(CompileError::UndefinedTensor(_))));
    let err = build_model(base(vec![node("MatMul", &["x", "x"], "x")]), BTreeMap::new());
    assert!(matches!(err, Err(CompileError::Redefined(_))));
    // Declared output shape contradicting inference.
    let gf = GraphFile {
        tensors: vec![decl("x", &[2, 2]), decl("y", &[3, 3])],
        nodes: vec![node("ReLU", &["x"], "y")],
        input: "x".into(),
        output: "y".into(),
    };
    assert!(matches!(
        build_model(gf, BTreeMap::new()),
        Err(CompileError::Shape { .. })
    ));
}

#[test]
fn weights_file_roundtrip() {
    let w = weights(&[
        ("alpha", ft(&[2, 3], &[1.0, -2.5, 3.25, 0.0, 1e-7, -1e7])),
        ("beta", ft(&[1], &[42.0])),
    ]);
    let bytes = write_weights(&w);
    assert_eq!(parse_weights(&bytes).unwrap(), w);
    assert!(parse_weights(&bytes[..bytes.len() - 2]).is_err());
}

#[test]
fn matmul_worked_example_at_scale_24() {
    let gf = GraphFile {
        tensors: vec![decl("x", &[1, 2]), decl("w", &[2, 1])],
        nodes: vec![node("MatMul", &["x", "w"], "y")],
        input: "x".into(),
        output: "y".into(),
    };
    let m = build_model(gf, weights(&[("w", ft(&[2, 1], &[0.3, 0.1]))])).unwrap();
    let fm = lower(&m, FixedConfig::new(24).unwrap(), RhoMode::Checked).unwrap();
    let x = IntTensor::new(vec![1, 2], vec![6_712_564_224, 3_357_121_024]);
    let y = fixed_interpret(&fm, &x).unwrap();
    assert_eq!(y.data, vec![2_349_481_329]);
}

#[test]
fn relu_and_maxpool_fixed_semantics() {
    // ReLU of a negative fixed-point value is zero.
    let gf = GraphFile {
        tensors: vec![decl("x", &[1, 1])],
        nodes: vec![node("ReLU", &["x"], "y")],
        input: "x".into(),
        output: "y".into(),
    };
    let m = build_model(gf, BTreeMap::new()).unwrap();
    let fm = lower(&m, FixedConfig::new(12).unwrap(), RhoMode::Checked).unwrap();
    let y = fixed_interpret(&fm, &IntTensor::new(vec![1, 1], vec![-6144])).unwrap();
    assert_eq!(y.data, vec![0]);

    // MaxPool 2x2 over scaled [[1,2],[3,4]] picks 4 * 2^s.
    let s = 9u32;
    let gf = GraphFile {
        tensors: vec![decl("x", &[2, 2, 1])],
        nodes: vec![pooled(node("MaxPool", &["x"], "y"), 2, 2)],
        input: "x".into(),
        output: "y".into(),
    };
    let m = build_model(gf, BTreeMap::new()).unwrap();
    let fm = lower(&m, FixedConfig::new(s).unwrap(), RhoMode::Checked).unwrap();
    let x = IntTensor::new(vec![2, 2, 1], vec![1 << s, 2 << s, 3 << s, 4 << s]);
    let y = fixed_interpret(&fm, &x).unwrap();
    assert_eq!(y.data, vec![4 << s]);
}

#[test]
fn scale_zero_equals_integer_evaluation() {
    let gf = GraphFile {
        tensors: vec![decl("x", &[1, 3]), decl("w", &[3, 2])],
        nodes: vec![node("MatMul", &["x", "w"], "y")],
        input: "x".into(),
        output: "y".into(),
    };
    let m = build_model(gf, weights(&[("w", ft(&[3, 2], &[1.0, -2.0, 3.0, 0.0, 5.0, -6.0]))]))
        .unwrap();
    let fm = lower(&m, FixedConfig::new(0).unwrap(), RhoMode::Checked).unwrap();
    let x = IntTensor::new(vec![1, 3], vec![7, -8, 9]);
    let y = fixed_interpret(&fm, &x).unwrap();
    // Plain integer matmul: [7*1-8*3+9*5, 7*(-2)+0+9*(-6)]
    assert_eq!(y.data, vec![28, -68]);
}

#[test]
fn batchnorm_fold_identity_params() {
    let s = 12u32;
    let gf = GraphFile {
        tensors: vec![
            decl("x", &[2, 2, 3]),
            decl("g", &[3]),
            decl("bt", &[3]),
            decl("mu", &[3]),
            decl("var", &[3]),
        ],
        nodes: vec![node("FusedBatchNorm", &["x", "g", "bt", "mu", "var"], "y")],
        input: "x".into(),
        output: "y".into(),
    };
    let eps = 1e-5f32;
    let m = build_model(
        gf,
        weights(&[
            ("g", ft(&[3], &[1.0; 3])),
            ("bt", ft(&[3], &[0.0; 3])),
            ("mu", ft(&[3], &[0.0; 3])),
            ("var", ft(&[3], &[1.0 - eps; 3])),
        ]),
    )
    .unwrap();
    let fm = lower(&m, FixedConfig::new(s).unwrap(), RhoMode::Checked).unwrap();
    assert_eq!(fm.weights["y__bn_mult"].data, vec![1 << s; 3]);
    assert_eq!(fm.weights["y__bn_bias"].data, vec![0; 3]);
    // Raw batch-norm parameters are folded away, not quantized as weights.
    assert!(!fm.weights.contains_key("g"));
    // Identity batch norm: FusedBatchNorm + ScaleDown leaves values intact.
    let x = IntTensor::new(vec![2, 2, 3], (0..12).map(|v| v * 100 - 600).collect());
    assert_eq!(fixed_interpret(&fm, &x).unwrap(), x);
}

#[test]
fn scaledown_count_matches_product_nodes() {
    let gf = GraphFile {
        tensors: vec![
            decl("x", &[6, 6, 2]),
            decl("w", &[3, 3, 2, 4]),
            decl("g", &[4]),
            decl("bt", &[4]),
            decl("mu", &[4]),
            decl("var", &[4]),
            decl("flat", &[1, 16]),
            decl("fc", &[16, 5]),
        ],
        nodes: vec![
            node("Conv", &["x", "w"], "c"),
            node("FusedBatchNorm", &["c", "g", "bt", "mu", "var"], "bn"),
            node("ReLU", &["bn"], "r"),
            pooled(node("MaxPool", &["r"], "p"), 2, 2),
            node("Reshape", &["p"], "flat"),
            node("MatMul", &["flat", "fc"], "y"),
        ],
        input: "x".into(),
        output: "y".into(),
    };
    let m = build_model(
        gf,
        weights(&[
            ("w", ft(&[3, 3, 2, 4], &vec![0.1; 72])),
            ("g", ft(&[4], &[1.0; 4])),
            ("bt", ft(&[4], &[0.0; 4])),
            ("mu", ft(&[4], &[0.0; 4])),
            ("var", ft(&[4], &[1.0; 4])),
            ("fc", ft(&[16, 5], &vec![0.02; 80])),
        ]),
    )
    .unwrap();
    let fm = lower(&m, FixedConfig::new(10).unwrap(), RhoMode::Checked).unwrap();
    // Conv out 4x4x4 = 64, FusedBatchNorm 64, MatMul 5; MatAdd-free model.
    let expected: usize = m
        .graph
        .nodes
        .iter()
        .filter(|n| {
            matches!(
                n.op,
                OpKind::MatMul | OpKind::Conv | OpKind::FusedBatchNorm
            )
        })
        .map(|n| m.graph.dims(&n.output).unwrap().iter().product::<usize>())
        .sum();
    assert_eq!(expected, 64 + 64 + 5);
    assert_eq!(count_scaledown(&fm.graph).unwrap(), expected);
}

#[test]
fn switch_commutes_relu_past_maxpool() {
    let p = HlilProgram {
        decls: [
            ("a".to_string(), vec![112, 112, 64]),
            ("r".to_string(), vec![112, 112, 64]),
            ("y".to_string(), vec![56, 56, 64]),
        ]
        .into_iter()
        .collect(),
        nodes: vec![
            Node {
                op: OpKind::Relu,
                inputs: vec!["a".into()],
                output: "r".into(),
                attrs: Attrs::default(),
            },
            Node {
                op: OpKind::MaxPool,
                inputs: vec!["r".into()],
                output: "y".into(),
                attrs: Attrs {
                    pool: Some([2, 2]),
                    ..Attrs::default()
                },
            },
        ],
        input: "a".into(),
        output: "y".into(),
    };
    let relu_elems = |p: &HlilProgram| -> usize {
        p.nodes
            .iter()
            .filter(|n| n.op == OpKind::Relu)
            .map(|n| p.decls[&n.output].iter().product::<usize>())
            .sum()
    };
    assert_eq!(relu_elems(&p), 802_816);
    let q = relu_maxpool_switch(&p);
    assert_eq!(q.nodes[0].op, OpKind::MaxPool);
    assert_eq!(q.nodes[1].op, OpKind::Relu);
    assert_eq!(q.decls["r"], vec![56, 56, 64]);
    assert_eq!(relu_elems(&q), 200_704);
    assert_eq!(802_816 / relu_elems(&q), 4);
}

#[test]
fn switch_leaves_other_programs_alone() {
    let gf = GraphFile {
        tensors: vec![decl("x", &[4, 4, 1])],
        nodes: vec![
            node("ReLU", &["x"], "r"),
            pooled(node("AvgPool", &["r"], "y"), 2, 2),
        ],
        input: "x".into(),
        output: "y".into(),
    };
    let m = build_model(gf, BTreeMap::new()).unwrap();
    let q = relu_maxpool_switch(&m.graph);
    assert_eq!(q.nodes[0].op, OpKind::Relu);
    assert_eq!(q.nodes[1].op, OpKind::AvgPool);
}

#[test]
fn switch_preserves_fixed_semantics() {
    let gf = GraphFile {
        tensors: vec![decl("x", &[6, 6, 1]), decl("w", &[3, 3, 1, 2])],
        nodes: vec![
            node("Conv", &["x", "w"], "c"),
            node("ReLU", &["c"], "r"),
            pooled(node("MaxPool", &["r"], "y"), 2, 2),
        ],
        input: "x".into(),
        output: "y".into(),
    };
    let wdata: Vec<f32> = (0..18).map(|i| (i as f32 - 9.0) * 0.07).collect();
    let m = build_model(gf, weights(&[("w", ft(&[3, 3, 1, 2], &wdata))])).unwrap();
    let switched = FloatModel {
        graph: relu_maxpool_switch(&m.graph),
        weights: m.weights.clone(),
    };
    let cfg = FixedConfig::new(8).unwrap();
    let f1 = lower(&m, cfg, RhoMode::Checked).unwrap();
    let f2 = lower(&switched, cfg, RhoMode::Checked).unwrap();
    let mut rng = 0x2545F4914F6CDD1Du64;
    for _ in 0..50 {
        let data: Vec<i64> = (0..36)
            .map(|_| {
                rng ^= rng << 13;
                rng ^= rng >> 7;
                rng ^= rng << 17;
                (rng % 4096) as i64 - 2048
            })
            .collect();
        let x = IntTensor::new(vec![6, 6, 1], data);
        assert_eq!(
            fixed_interpret(&f1, &x).unwrap().data,
            fixed_interpret(&f2, &x).unwrap().data
        );
    }
}

fn chain_program(n: usize) -> LlilProgram {
    let relu = |a: &str, o: &str| model_compiler::LlilStmt {
        op: OpKind::Relu,
        args: vec![a.into()],
        output: Some(o.into()),
        attrs: Default::default(),
    };
    LlilProgram {
        decls: [
            ("x".to_string(), vec![n]),
            ("a".to_string(), vec![n]),
            ("b".to_string(), vec![n]),
            ("c".to_string(), vec![n]),
        ]
        .into_iter()
        .collect(),
        stmts: vec![relu("x", "a"), relu("a", "b"), relu("b", "c")],
        input: "x".into(),
        output: "c".into(),
    }
}

#[test]
fn liveness_chain_peaks_at_two_tensors() {
    let n = 100;
    let p = chain_program(n);
    let rep = liveness(&p, &BTreeSet::new()).unwrap();
    assert_eq!(rep.peak_bytes, 2 * n * 8);
    assert_eq!(rep.total_bytes, 4 * n * 8);
    // x dies after the first statement, a after the second.
    assert_eq!(rep.free_after[0], vec!["x".to_string()]);
    assert_eq!(rep.free_after[1], vec!["a".to_string()]);
    assert_eq!(rep.free_after[2], vec!["b".to_string()]);
    assert!(rep.live[0].contains("x") && rep.live[0].contains("a"));
    assert!(!rep.live[1].contains("x"));
}

#[test]
fn liveness_all_used_at_end_peaks_at_total() {
    let n = 10;
    let mut p = chain_program(n);
    // Final statement consumes everything.
    p.decls.insert("z".into(), vec![4 * n]);
    p.stmts.push(model_compiler::LlilStmt {
        op: OpKind::Concat,
        args: vec!["x".into(), "a".into(), "b".into(), "c".into()],
        output: Some("z".into()),
        attrs: Default::default(),
    });
    p.output = "z".into();
    let rep = liveness(&p, &BTreeSet::new()).unwrap();
    assert_eq!(rep.peak_bytes, rep.total_bytes);
}

#[test]
fn liveness_rejects_use_before_def() {
    let mut p = chain_program(5);
    p.stmts[0].args = vec!["nope".into()];
    assert!(matches!(
        liveness(&p, &BTreeSet::new()),
        Err(CompileError::UndefinedTensor(_))
    ));
}

#[test]
fn sweep_zero_weights_ties_to_scale_zero() {
    let gf = GraphFile {
        tensors: vec![decl("x", &[1, 2]), decl("w", &[2, 2])],
        nodes: vec![node("MatMul", &["x", "w"], "y")],
        input: "x".into(),
        output: "y".into(),
    };
    let m = build_model(gf, weights(&[("w", ft(&[2, 2], &[0.0; 4]))])).unwrap();
    let val = vec![
        (ft(&[1, 2], &[1.0, 2.0]), 0usize),
        (ft(&[1, 2], &[2.0, 1.0]), 0usize),
    ];
    let r = scale_sweep(&m, &val).unwrap();
    assert_eq!(r.best_s, 0);
    assert_eq!(r.table.len(), 64);
    let first = r.table[0].1;
    assert!(r.table.iter().all(|&(_, a)| a == first));
}

#[test]
fn sweep_selects_mid_range_scale_for_stiff_model() {
    // y0 = 400.1 * x against a fixed threshold y1 = 1.0. The labels are only
    // recoverable when the products keep enough fractional precision and do
    // not overflow 64 bits.
    let gf = GraphFile {
        tensors: vec![decl("x", &[1, 2]), decl("w", &[2, 2]), decl("b", &[2])],
        nodes: vec![
            node("MatMul", &["x", "w"], "xw"),
            node("MatAdd", &["xw", "b"], "y"),
        ],
        input: "x".into(),
        output: "y".into(),
    };
    let m = build_model(
        gf,
        weights(&[
            ("w", ft(&[2, 2], &[400.1, 0.0, 0.0, 0.0])),
            ("b", ft(&[2], &[0.0, 1.0])),
        ]),
    )
    .unwrap();
    let mut val = Vec::new();
    for i in 0..12 {
        let x = 0.0020 + 0.0001 * i as f32;
        let label = usize::from(400.1 * x <= 1.0);
        val.push((ft(&[1, 2], &[x, 0.0]), label));
    }
    let r = scale_sweep(&m, &val).unwrap();
    assert!(
        (10..=44).contains(&r.best_s),
        "best scale {} not in mid band",
        r.best_s
    );
    let acc = |s: u32| r.table[s as usize].1;
    let best = acc(r.best_s);
    assert_eq!(best, 1.0);
    assert!(acc(2) < best, "s=2 should lose precision");
    assert!(acc(60) < best, "s=60 should overflow");
}
