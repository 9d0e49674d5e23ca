use rayon::prelude::*;

use crate::error::CompileError;
use crate::fixed::{quantize_tensor_wrapping, FixedConfig};
use crate::graph::{FloatTensor, IntTensor, OpKind};
use crate::interp::fixed_interpret;
use crate::llil::{lower, FixedModel, RhoMode};
use crate::loader::FloatModel;

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub best_s: u32,
    /// Top-1 accuracy for every scale 0..=63.
    pub table: Vec<(u32, f64)>,
}

/// Predicted class from a model output: either the index emitted by a final
/// ArgMax, or the argmax of the output logits.
pub fn predict_fixed(m: &FixedModel, out: &IntTensor) -> usize {
    let ends_in_argmax = m
        .graph
        .stmts
        .iter()
        .rev()
        .find(|st| st.op != OpKind::ScaleDown)
        .is_some_and(|st| st.op == OpKind::ArgMax);
    if ends_in_argmax {
        out.data[0] as usize
    } else {
        let mut best = 0;
        for (i, &v) in out.data.iter().enumerate() {
            if v > out.data[best] {
                best = i;
            }
        }
        best
    }
}

pub fn accuracy_at_scale(
    m: &FloatModel,
    s: u32,
    validation: &[(FloatTensor, usize)],
) -> Result<f64, CompileError> {
    let fixed = lower(m, FixedConfig::new(s)?, RhoMode::Wrapping)?;
    let mut hits = 0usize;
    for (x, label) in validation {
        let xi = quantize_tensor_wrapping(x, s);
        let out = fixed_interpret(&fixed, &xi)?;
        if predict_fixed(&fixed, &out) == *label {
            hits += 1;
        }
    }
    Ok(hits as f64 / validation.len() as f64)
}

/// Try every scale exponent on the validation set and keep the most accurate,
/// preferring the smallest scale on ties. The chosen scale depends on the
/// weights and validation data and is treated as public.
pub fn scale_sweep(
    m: &FloatModel,
    validation: &[(FloatTensor, usize)],
) -> Result<SweepResult, CompileError> {
    assert!(!validation.is_empty(), "scale sweep needs validation data");
    let table: Vec<(u32, f64)> = (0u32..=63)
        .into_par_iter()
        .map(|s| accuracy_at_scale(m, s, validation).map(|a| (s, a)))
        .collect::<Result<_, _>>()?;
    let mut best_s = 0;
    let mut best_acc = -1.0;
    for &(s, acc) in &table {
        if acc > best_acc {
            best_acc = acc;
            best_s = s;
        }
    }
    Ok(SweepResult { best_s, table })
}
