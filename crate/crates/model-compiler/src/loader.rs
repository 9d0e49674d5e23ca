use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::path::Path;

use crate::error::CompileError;
use crate::graph::{FloatTensor, GraphFile, OpKind};
use crate::hlil::{infer_shape, HlilProgram, Node};

/// A loaded float model: shape-resolved program plus named float32 weights.
#[derive(Debug, Clone)]
pub struct FloatModel {
    pub graph: HlilProgram,
    pub weights: BTreeMap<String, FloatTensor>,
}

pub fn load_model(
    graph_path: &Path,
    weights_path: &Path,
) -> Result<FloatModel, CompileError> {
    let gf: GraphFile = serde_json::from_reader(std::fs::File::open(graph_path)?)?;
    let weights = read_weights(weights_path)?;
    build_model(gf, weights)
}

pub fn build_model(
    gf: GraphFile,
    mut weights: BTreeMap<String, FloatTensor>,
) -> Result<FloatModel, CompileError> {
    let mut decls: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for t in &gf.tensors {
        if decls.insert(t.name.clone(), t.dims.clone()).is_some() {
            return Err(CompileError::Redefined(t.name.clone()));
        }
    }
    for (name, w) in &weights {
        match decls.get(name) {
            Some(d) if *d != w.dims => {
                return Err(CompileError::WeightShape {
                    name: name.clone(),
                    decl: d.clone(),
                    file: w.dims.clone(),
                });
            }
            Some(_) => {}
            None => {
                decls.insert(name.clone(), w.dims.clone());
            }
        }
    }
    if !decls.contains_key(&gf.input) {
        return Err(CompileError::UndefinedTensor(gf.input.clone()));
    }

    let mut nodes = Vec::new();
    let mut defined: BTreeSet<String> = weights.keys().cloned().collect();
    defined.insert(gf.input.clone());

    for nd in &gf.nodes {
        let op = OpKind::parse(&nd.op).ok_or_else(|| CompileError::UnknownOp(nd.op.clone()))?;
        let mut node = Node {
            op,
            inputs: nd.inputs.clone(),
            output: nd.output.clone(),
            attrs: nd.attrs.clone(),
        };
        for i in &node.inputs {
            if !defined.contains(i) {
                return Err(CompileError::UndefinedTensor(i.clone()));
            }
        }
        if defined.contains(&node.output) {
            return Err(CompileError::Redefined(node.output.clone()));
        }

        // Broadcast a rank-1 bias over the rows of a rank-2 addend by
        // materializing the tiled weight now, so every later stage sees
        // plain same-shape tensors.
        if op == OpKind::MatAdd && node.inputs.len() == 2 {
            let a = decls[&node.inputs[0]].clone();
            let bname = node.inputs[1].clone();
            let b = decls[&bname].clone();
            if a.len() == 2 && b.len() == 1 && b[0] == a[1] {
                let w = weights.get(&bname).ok_or_else(|| CompileError::Unsupported {
                    node: node.output.clone(),
                    msg: "broadcast addend must be a weight tensor".into(),
                })?;
                let tiled: Vec<f32> = w.data.repeat(a[0]);
                weights.insert(bname.clone(), FloatTensor::new(a.clone(), tiled));
                decls.insert(bname, a);
            }
        }

        let in_dims: Vec<&[usize]> = node
            .inputs
            .iter()
            .map(|n| decls[n].as_slice())
            .collect();
        let out_dims = if op == OpKind::Reshape {
            let declared = decls
                .get(&node.output)
                .ok_or_else(|| CompileError::UndefinedTensor(node.output.clone()))?;
            let n_in: usize = in_dims[0].iter().product();
            if declared.iter().product::<usize>() != n_in {
                return Err(CompileError::Shape {
                    node: node.output.clone(),
                    msg: format!("reshape {:?} -> {:?}", in_dims[0], declared),
                });
            }
            declared.clone()
        } else {
            infer_shape(&node, &in_dims)?
        };
        match decls.get(&node.output) {
            Some(d) if *d != out_dims => {
                return Err(CompileError::Shape {
                    node: node.output.clone(),
                    msg: format!("declared {d:?}, inferred {out_dims:?}"),
                });
            }
            Some(_) => {}
            None => {
                decls.insert(node.output.clone(), out_dims);
            }
        }
        defined.insert(node.output.clone());
        node.attrs = nd.attrs.clone();
        nodes.push(node);
    }

    if !defined.contains(&gf.output) {
        return Err(CompileError::UndefinedTensor(gf.output.clone()));
    }
    Ok(FloatModel {
        graph: HlilProgram {
            decls,
            nodes,
            input: gf.input,
            output: gf.output,
        },
        weights,
    })
}

/// Binary weights: repeated (name-length u32, name, rank u32, dims u32 x rank,
/// float32 payload row-major), all little-endian.
pub fn read_weights(path: &Path) -> Result<BTreeMap<String, FloatTensor>, CompileError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    parse_weights(&bytes)
}

pub fn parse_weights(bytes: &[u8]) -> Result<BTreeMap<String, FloatTensor>, CompileError> {
    let mut out = BTreeMap::new();
    let mut pos = 0usize;
    let take = |pos: &mut usize, n: usize| -> Result<&[u8], CompileError> {
        let end = pos
            .checked_add(n)
            .filter(|&e| e <= bytes.len())
            .ok_or_else(|| CompileError::Weights(format!("truncated at byte {pos}")))?;
        let s = &bytes[*pos..end];
        *pos = end;
        Ok(s)
    };
    let take_u32 = |pos: &mut usize| -> Result<u32, CompileError> {
        Ok(u32::from_le_bytes(take(pos, 4)?.try_into().unwrap()))
    };
    while pos < bytes.len() {
        let name_len = take_u32(&mut pos)? as usize;
        let name = String::from_utf8(take(&mut pos, name_len)?.to_vec())
            .map_err(|e| CompileError::Weights(e.to_string()))?;
        let rank = take_u32(&mut pos)? as usize;
        let mut dims = Vec::with_capacity(rank);
        for _ in 0..rank {
            dims.push(take_u32(&mut pos)? as usize);
        }
        let n: usize = dims.iter().product();
        let data: Vec<f32> = take(&mut pos, n * 4)?
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        if out
            .insert(name.clone(), FloatTensor::new(dims, data))
            .is_some()
        {
            return Err(CompileError::Redefined(name));
        }
    }
    Ok(out)
}

pub fn write_weights(weights: &BTreeMap<String, FloatTensor>) -> Vec<u8> {
    let mut out = Vec::new();
    for (name, w) in weights {
        out.extend_from_slice(&(name.len() as u32).to_le_bytes());
        out.extend_from_slice(name.as_bytes());
        out.extend_from_slice(&(w.dims.len() as u32).to_le_bytes());
        for &d in &w.dims {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for &v in &w.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}
