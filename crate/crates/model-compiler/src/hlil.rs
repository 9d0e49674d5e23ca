use std::collections::BTreeMap;

use crate::error::CompileError;
use crate::graph::{Attrs, OpKind};

#[derive(Debug, Clone)]
pub struct Node {
    pub op: OpKind,
    pub inputs: Vec<String>,
    pub output: String,
    pub attrs: Attrs,
}

/// Shape-resolved high-level program: float tensors, no explicit scaling.
#[derive(Debug, Clone)]
pub struct HlilProgram {
    pub decls: BTreeMap<String, Vec<usize>>,
    pub nodes: Vec<Node>,
    pub input: String,
    pub output: String,
}

impl HlilProgram {
    pub fn dims(&self, name: &str) -> Result<&[usize], CompileError> {
        self.decls
            .get(name)
            .map(|d| d.as_slice())
            .ok_or_else(|| CompileError::UndefinedTensor(name.to_string()))
    }
}

fn attr_pool(node: &Node) -> Result<[usize; 2], CompileError> {
    node.attrs.pool.ok_or(CompileError::MissingAttr {
        node: node.output.clone(),
        attr: "pool",
    })
}

/// Output shape of `node` given its input shapes. Convolution and pooling use
/// a height x width x channels layout; filters are f x f x in x out.
pub fn infer_shape(node: &Node, ins: &[&[usize]]) -> Result<Vec<usize>, CompileError> {
    let shape_err = |msg: String| CompileError::Shape {
        node: node.output.clone(),
        msg,
    };
    let want_arity = |want: usize| -> Result<(), CompileError> {
        if ins.len() != want {
            Err(CompileError::BadArity {
                node: node.output.clone(),
                want,
                got: ins.len(),
            })
        } else {
            Ok(())
        }
    };
    match node.op {
        OpKind::MatMul => {
            want_arity(2)?;
            let (a, b) = (ins[0], ins[1]);
            if a.len() != 2 || b.len() != 2 || a[1] != b[0] {
                return Err(shape_err(format!("matmul {a:?} x {b:?}")));
            }
            Ok(vec![a[0], b[1]])
        }
        OpKind::MatAdd => {
            want_arity(2)?;
            if ins[0] != ins[1] {
                return Err(shape_err(format!("matadd {:?} + {:?}", ins[0], ins[1])));
            }
            Ok(ins[0].to_vec())
        }
        OpKind::Conv => {
            want_arity(2)?;
            let (x, w) = (ins[0], ins[1]);
            if x.len() != 3 || w.len() != 4 || x[2] != w[2] {
                return Err(shape_err(format!("conv input {x:?} filter {w:?}")));
            }
            if let Some(strides) = node.attrs.strides {
                if strides != [1, 1] {
                    return Err(CompileError::Unsupported {
                        node: node.output.clone(),
                        msg: format!("conv stride {strides:?}; only [1, 1] supported"),
                    });
                }
            }
            let (f, g) = (w[0], w[1]);
            match node.attrs.padding.as_deref().unwrap_or("valid") {
                "valid" => {
                    if x[0] < f || x[1] < g {
                        return Err(shape_err(format!("filter {f}x{g} exceeds input {x:?}")));
                    }
                    Ok(vec![x[0] - f + 1, x[1] - g + 1, w[3]])
                }
                "same" => {
                    if f % 2 == 0 || g % 2 == 0 {
                        return Err(CompileError::Unsupported {
                            node: node.output.clone(),
                            msg: "same padding needs odd filter dims".into(),
                        });
                    }
                    Ok(vec![x[0], x[1], w[3]])
                }
                other => Err(CompileError::Unsupported {
                    node: node.output.clone(),
                    msg: format!("padding {other:?}"),
                }),
            }
        }
        OpKind::MaxPool | OpKind::AvgPool => {
            want_arity(1)?;
            let [a, b] = attr_pool(node)?;
            let x = ins[0];
            if x.len() != 3 || a == 0 || b == 0 || x[0] % a != 0 || x[1] % b != 0 {
                return Err(shape_err(format!("pool {a}x{b} over {x:?}")));
            }
            Ok(vec![x[0] / a, x[1] / b, x[2]])
        }
        OpKind::ArgMax => {
            want_arity(1)?;
            Ok(vec![1])
        }
        OpKind::FusedBatchNorm => {
            want_arity(5)?;
            let x = ins[0];
            let c = *x.last().ok_or_else(|| shape_err("rank-0 input".into()))?;
            for (i, p) in ins[1..].iter().enumerate() {
                if **p != [c] {
                    return Err(shape_err(format!("param {i} dims {p:?}, want [{c}]")));
                }
            }
            Ok(x.to_vec())
        }
        OpKind::Relu => {
            want_arity(1)?;
            Ok(ins[0].to_vec())
        }
        OpKind::Reshape => {
            // The target shape comes from the output declaration; validated
            // by the caller against element count.
            want_arity(1)?;
            Err(shape_err("reshape target resolved from declaration".into()))
        }
        OpKind::Transpose => {
            want_arity(1)?;
            let x = ins[0];
            if x.len() != 2 {
                return Err(shape_err(format!("transpose of rank {}", x.len())));
            }
            Ok(vec![x[1], x[0]])
        }
        OpKind::Pad => {
            want_arity(1)?;
            let pad = node.attrs.pad.as_ref().ok_or(CompileError::MissingAttr {
                node: node.output.clone(),
                attr: "pad",
            })?;
            let x = ins[0];
            if pad.len() != x.len() {
                return Err(shape_err(format!("pad spec {pad:?} for {x:?}")));
            }
            Ok(x.iter().zip(pad).map(|(&d, p)| d + p[0] + p[1]).collect())
        }
        OpKind::Concat => {
            if ins.is_empty() {
                return Err(shape_err("concat of nothing".into()));
            }
            let first = ins[0];
            let axis = first.len() - 1;
            let mut last = 0;
            for s in ins {
                if s.len() != first.len() || s[..axis] != first[..axis] {
                    return Err(shape_err(format!("concat {ins:?}")));
                }
                last += s[axis];
            }
            let mut out = first.to_vec();
            out[axis] = last;
            Ok(out)
        }
        OpKind::ScaleDown => Err(CompileError::UnknownOp("ScaleDown in HLIL".into())),
    }
}

/// Commute adjacent `MaxPool(ReLU(A))` pairs to `ReLU(MaxPool(A))`.
///
/// Max and ReLU commute elementwise, so semantics are unchanged while the
/// ReLU runs on the pooled (smaller) tensor. Only applied when the ReLU
/// result has no other consumer.
pub fn relu_maxpool_switch(p: &HlilProgram) -> HlilProgram {
    let mut out = p.clone();
    loop {
        let mut changed = false;
        for i in 0..out.nodes.len().saturating_sub(1) {
            let (a, b) = (&out.nodes[i], &out.nodes[i + 1]);
            let fusable = a.op == OpKind::Relu
                && b.op == OpKind::MaxPool
                && b.inputs == [a.output.clone()]
                && a.output != out.output
                && out
                    .nodes
                    .iter()
                    .filter(|n| n.inputs.contains(&a.output))
                    .count()
                    == 1;
            if !fusable {
                continue;
            }
            let relu_in = a.inputs[0].clone();
            let mid = a.output.clone();
            let attrs = b.attrs.clone();
            let final_out = b.output.clone();
            let pooled_dims = out.decls[&final_out].clone();
            out.nodes[i] = Node {
                op: OpKind::MaxPool,
                inputs: vec![relu_in],
                output: mid.clone(),
                attrs,
            };
            out.nodes[i + 1] = Node {
                op: OpKind::Relu,
                inputs: vec![mid.clone()],
                output: final_out,
                attrs: Attrs::default(),
            };
            out.decls.insert(mid, pooled_dims);
            changed = true;
            break;
        }
        if !changed {
            return out;
        }
    }
}
