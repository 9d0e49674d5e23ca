//! Compiled-bundle serialization: the lowered integer program, quantized
//! weights, chosen scale, and (when swept) the per-scale accuracy table, in
//! one JSON file.

use std::collections::BTreeMap;
use std::path::Path;

use model_compiler::llil::LlilAttrs;
use model_compiler::{FixedConfig, FixedModel, IntTensor, LlilProgram, LlilStmt, OpKind};
use serde::{Deserialize, Serialize};

use crate::{CliError, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StmtRecord {
    pub op: String,
    pub args: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pool: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub padding: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pad: Option<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub avg_mult: Option<i64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TensorRecord {
    pub dims: Vec<usize>,
    pub data: Vec<i64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Bundle {
    pub scale: u32,
    pub input: String,
    pub output: String,
    pub decls: BTreeMap<String, Vec<usize>>,
    /// Statement list; doubles as the backend call trace.
    pub stmts: Vec<StmtRecord>,
    pub weights: BTreeMap<String, TensorRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy_table: Option<Vec<(u32, f64)>>,
}

impl Bundle {
    pub fn from_model(m: &FixedModel, accuracy_table: Option<Vec<(u32, f64)>>) -> Bundle {
        Bundle {
            scale: m.config.s,
            input: m.graph.input.clone(),
            output: m.graph.output.clone(),
            decls: m.graph.decls.clone(),
            stmts: m
                .graph
                .stmts
                .iter()
                .map(|st| StmtRecord {
                    op: st.op.name().to_string(),
                    args: st.args.clone(),
                    output: st.output.clone(),
                    pool: st.attrs.pool,
                    padding: st.attrs.padding.clone(),
                    pad: st.attrs.pad.clone(),
                    scale: st.attrs.scale,
                    avg_mult: st.attrs.avg_mult,
                })
                .collect(),
            weights: m
                .weights
                .iter()
                .map(|(k, t)| {
                    (
                        k.clone(),
                        TensorRecord {
                            dims: t.dims.clone(),
                            data: t.data.clone(),
                        },
                    )
                })
                .collect(),
            accuracy_table,
        }
    }

    pub fn to_model(&self) -> Result<FixedModel> {
        let mut stmts = Vec::with_capacity(self.stmts.len());
        for st in &self.stmts {
            let op = if st.op == "ScaleDown" {
                OpKind::ScaleDown
            } else {
                OpKind::parse(&st.op)
                    .ok_or_else(|| CliError::Invalid(format!("unknown op {:?}", st.op)))?
            };
            stmts.push(LlilStmt {
                op,
                args: st.args.clone(),
                output: st.output.clone(),
                attrs: LlilAttrs {
                    pool: st.pool,
                    padding: st.padding.clone(),
                    pad: st.pad.clone(),
                    scale: st.scale,
                    avg_mult: st.avg_mult,
                },
            });
        }
        Ok(FixedModel {
            graph: LlilProgram {
                decls: self.decls.clone(),
                stmts,
                input: self.input.clone(),
                output: self.output.clone(),
            },
            weights: self
                .weights
                .iter()
                .map(|(k, t)| (k.clone(), IntTensor::new(t.dims.clone(), t.data.clone())))
                .collect(),
            config: FixedConfig::new(self.scale).map_err(CliError::Compile)?,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        Ok(std::fs::write(path, serde_json::to_vec(self)?)?)
    }

    pub fn load(path: &Path) -> Result<Bundle> {
        Ok(serde_json::from_slice(&std::fs::read(path)?)?)
    }
}
