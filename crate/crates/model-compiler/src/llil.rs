use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::CompileError;
use crate::fixed::{
    quantize_tensor_checked, quantize_tensor_wrapping, rho_checked, rho_wrapping, FixedConfig,
};
use crate::graph::{FloatTensor, IntTensor, OpKind};
use crate::loader::FloatModel;

/// Attributes carried on a lowered statement. `scale` is the public scale
/// exponent for ScaleDown and AvgPool; `avg_mult` is the quantized reciprocal
/// of the pool area used by AvgPool's public multiplication.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LlilAttrs {
    pub pool: Option<[usize; 2]>,
    pub padding: Option<String>,
    pub pad: Option<Vec<[usize; 2]>>,
    pub scale: Option<u32>,
    pub avg_mult: Option<i64>,
}

/// One lowered statement. ScaleDown rewrites its argument in place and has no
/// output; every other statement defines `output` exactly once.
#[derive(Debug, Clone)]
pub struct LlilStmt {
    pub op: OpKind,
    pub args: Vec<String>,
    pub output: Option<String>,
    pub attrs: LlilAttrs,
}

/// Integer-typed lowered program. The statement list doubles as the backend
/// call trace: the secure runtime executes it in order.
#[derive(Debug, Clone)]
pub struct LlilProgram {
    pub decls: BTreeMap<String, Vec<usize>>,
    pub stmts: Vec<LlilStmt>,
    pub input: String,
    pub output: String,
}

impl LlilProgram {
    pub fn dims(&self, name: &str) -> Result<&[usize], CompileError> {
        self.decls
            .get(name)
            .map(|d| d.as_slice())
            .ok_or_else(|| CompileError::UndefinedTensor(name.to_string()))
    }

    pub fn numel(&self, name: &str) -> Result<usize, CompileError> {
        Ok(self.dims(name)?.iter().product())
    }
}

/// Fully quantized model: lowered graph plus integer weights at scale `s`.
#[derive(Debug, Clone)]
pub struct FixedModel {
    pub graph: LlilProgram,
    pub weights: BTreeMap<String, IntTensor>,
    pub config: FixedConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhoMode {
    /// Error on values outside the signed 64-bit range.
    Checked,
    /// Reduce mod 2^64; used by the scale sweep, where overflowing scales
    /// must still run (and score badly) rather than abort.
    Wrapping,
}

fn rho(r: f32, s: u32, mode: RhoMode) -> Result<i64, CompileError> {
    match mode {
        RhoMode::Checked => rho_checked(r, s),
        RhoMode::Wrapping => Ok(rho_wrapping(r, s)),
    }
}

fn quantize_tensor(
    t: &FloatTensor,
    s: u32,
    mode: RhoMode,
) -> Result<IntTensor, CompileError> {
    match mode {
        RhoMode::Checked => quantize_tensor_checked(t, s),
        RhoMode::Wrapping => Ok(quantize_tensor_wrapping(t, s)),
    }
}

/// Lower a float model to fixed point at scale `cfg.s`.
///
/// Inserts one ScaleDown after every MatMul, Conv, and FusedBatchNorm (their
/// products sit at scale 2s) and none after MatAdd. Batch-norm parameters are
/// folded into a per-channel multiplier at scale s and offset at scale 2s so
/// the fused op needs the same single ScaleDown as a product. AvgPool keeps
/// its reciprocal multiplication and rescale internal to the op.
pub fn lower(m: &FloatModel, cfg: FixedConfig, mode: RhoMode) -> Result<FixedModel, CompileError> {
    let s = cfg.s;
    let mut fbn_params: BTreeSet<&String> = BTreeSet::new();
    for n in &m.graph.nodes {
        if n.op == OpKind::FusedBatchNorm {
            fbn_params.extend(&n.inputs[1..]);
        }
    }

    let mut weights = BTreeMap::new();
    for (name, w) in &m.weights {
        if !fbn_params.contains(name) {
            weights.insert(name.clone(), quantize_tensor(w, s, mode)?);
        }
    }

    let mut decls = m.graph.decls.clone();
    for p in &fbn_params {
        decls.remove(*p);
    }

    let mut stmts = Vec::new();
    for n in &m.graph.nodes {
        let out_dims = m.graph.dims(&n.output)?;
        match n.op {
            OpKind::FusedBatchNorm => {
                let get = |i: usize| -> Result<&FloatTensor, CompileError> {
                    m.weights
                        .get(&n.inputs[i])
                        .ok_or_else(|| CompileError::Unsupported {
                            node: n.output.clone(),
                            msg: "batch-norm parameters must be weight tensors".into(),
                        })
                };
                let (gamma, beta, mean, var) = (get(1)?, get(2)?, get(3)?, get(4)?);
                let eps = n.attrs.epsilon.unwrap_or(1e-5) as f64;
                let c = gamma.numel();
                let mut bm = Vec::with_capacity(c);
                let mut cm = Vec::with_capacity(c);
                for i in 0..c {
                    let inv = 1.0 / ((var.data[i] as f64 + eps).sqrt());
                    let b = gamma.data[i] as f64 * inv;
                    let cc = beta.data[i] as f64 - gamma.data[i] as f64 * mean.data[i] as f64 * inv;
                    bm.push(rho(b as f32, s, mode)?);
                    cm.push(rho(cc as f32, 2 * s, mode)?);
                }
                let bname = format!("{}__bn_mult", n.output);
                let cname = format!("{}__bn_bias", n.output);
                decls.insert(bname.clone(), vec![c]);
                decls.insert(cname.clone(), vec![c]);
                weights.insert(bname.clone(), IntTensor::new(vec![c], bm));
                weights.insert(cname.clone(), IntTensor::new(vec![c], cm));
                stmts.push(LlilStmt {
                    op: OpKind::FusedBatchNorm,
                    args: vec![n.inputs[0].clone(), bname, cname],
                    output: Some(n.output.clone()),
                    attrs: LlilAttrs::default(),
                });
            }
            OpKind::AvgPool => {
                let [a, b] = n.attrs.pool.unwrap();
                let recip = 1.0f32 / (a * b) as f32;
                stmts.push(LlilStmt {
                    op: OpKind::AvgPool,
                    args: n.inputs.clone(),
                    output: Some(n.output.clone()),
                    attrs: LlilAttrs {
                        pool: Some([a, b]),
                        scale: Some(s),
                        avg_mult: Some(rho(recip, s, mode)?),
                        ..LlilAttrs::default()
                    },
                });
            }
            _ => {
                stmts.push(LlilStmt {
                    op: n.op,
                    args: n.inputs.clone(),
                    output: Some(n.output.clone()),
                    attrs: LlilAttrs {
                        pool: n.attrs.pool,
                        padding: n.attrs.padding.clone(),
                        pad: n.attrs.pad.clone(),
                        ..LlilAttrs::default()
                    },
                });
            }
        }
        if matches!(n.op, OpKind::MatMul | OpKind::Conv | OpKind::FusedBatchNorm) {
            let _ = out_dims;
            stmts.push(LlilStmt {
                op: OpKind::ScaleDown,
                args: vec![n.output.clone()],
                output: None,
                attrs: LlilAttrs {
                    scale: Some(s),
                    ..LlilAttrs::default()
                },
            });
        }
    }

    Ok(FixedModel {
        graph: LlilProgram {
            decls,
            stmts,
            input: m.graph.input.clone(),
            output: m.graph.output.clone(),
        },
        weights,
        config: cfg,
    })
}

/// Total elements passed through ScaleDown statements; the static count of
/// truncation work the secure backend will perform.
pub fn count_scaledown(p: &LlilProgram) -> Result<usize, CompileError> {
    let mut total = 0;
    for st in &p.stmts {
        if st.op == OpKind::ScaleDown {
            total += p.numel(&st.args[0])?;
        }
    }
    Ok(total)
}

#[derive(Debug, Clone)]
pub struct LivenessReport {
    /// Tensors live during each statement.
    pub live: Vec<BTreeSet<String>>,
    /// Tensors whose last use is statement i and may be freed after it.
    pub free_after: Vec<Vec<String>>,
    /// Max over program points of the bytes of simultaneously live tensors.
    pub peak_bytes: usize,
    /// Bytes if every tensor were held for the whole run.
    pub total_bytes: usize,
}

/// Live ranges at 8 bytes per element. Weights and the program input are
/// defined before the first statement; the program output is kept live to the
/// end.
pub fn liveness(p: &LlilProgram, weights: &BTreeSet<String>) -> Result<LivenessReport, CompileError> {
    let n = p.stmts.len();
    // A buffer exists from the start of its defining statement (def point i
    // for the output of stmt i, 0 for pre-defined names) through the end of
    // its last using statement.
    let mut def: HashMap<&str, usize> = HashMap::new();
    def.insert(p.input.as_str(), 0);
    for w in weights {
        def.insert(w.as_str(), 0);
    }
    let mut last_use: HashMap<&str, usize> = HashMap::new();
    for (i, st) in p.stmts.iter().enumerate() {
        for a in &st.args {
            if !def.contains_key(a.as_str()) {
                return Err(CompileError::UndefinedTensor(a.clone()));
            }
            last_use.insert(a.as_str(), i + 1);
        }
        if let Some(o) = &st.output {
            def.insert(o.as_str(), i);
        }
    }
    if !def.contains_key(p.output.as_str()) {
        return Err(CompileError::UndefinedTensor(p.output.clone()));
    }
    last_use.insert(p.output.as_str(), n + 1);

    let bytes = |name: &str| -> usize { p.decls.get(name).map_or(0, |d| d.iter().product::<usize>() * 8) };
    let mut live: Vec<BTreeSet<String>> = vec![BTreeSet::new(); n];
    let mut free_after: Vec<Vec<String>> = vec![Vec::new(); n];
    for (&name, &d) in &def {
        let Some(&lu) = last_use.get(name) else { continue };
        // Live during statements d..lu (def point d precedes stmt d).
        for slot in live.iter_mut().take(lu.min(n)).skip(d) {
            slot.insert(name.to_string());
        }
        if lu <= n && lu >= 1 {
            free_after[lu - 1].push(name.to_string());
        }
    }
    for f in &mut free_after {
        f.sort();
    }
    let peak_bytes = live
        .iter()
        .map(|set| set.iter().map(|t| bytes(t)).sum())
        .max()
        .unwrap_or(0);
    let total_bytes = def.keys().map(|t| bytes(t)).sum();
    Ok(LivenessReport {
        live,
        free_after,
        peak_bytes,
        total_bytes,
    })
}
