use serde::{Deserialize, Serialize};

/// On-disk model graph. Weights live in a separate binary file keyed by
/// tensor name; `tensors` declares shapes for inputs, weights, and
/// (optionally) intermediates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphFile {
    pub tensors: Vec<TensorDecl>,
    pub nodes: Vec<NodeDecl>,
    pub input: String,
    pub output: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TensorDecl {
    pub name: String,
    pub dims: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NodeDecl {
    pub op: String,
    pub inputs: Vec<String>,
    pub output: String,
    #[serde(default, skip_serializing_if = "Attrs::is_empty")]
    pub attrs: Attrs,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct Attrs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strides: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub padding: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pool: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f32>,
    /// Per-axis (before, after) padding for the Pad library op.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pad: Option<Vec<[usize; 2]>>,
}

impl Attrs {
    pub fn is_empty(&self) -> bool {
        *self == Attrs::default()
    }
}

/// Operation kinds across both IR levels. `ScaleDown` only appears after
/// lowering; the last four are data-movement library ops executed locally.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpKind {
    MatMul,
    MatAdd,
    Conv,
    AvgPool,
    MaxPool,
    ArgMax,
    FusedBatchNorm,
    Relu,
    ScaleDown,
    Reshape,
    Pad,
    Transpose,
    Concat,
}

impl OpKind {
    pub fn parse(s: &str) -> Option<OpKind> {
        Some(match s {
            "MatMul" => OpKind::MatMul,
            "MatAdd" => OpKind::MatAdd,
            "Conv" => OpKind::Conv,
            "AvgPool" => OpKind::AvgPool,
            "MaxPool" => OpKind::MaxPool,
            "ArgMax" => OpKind::ArgMax,
            "FusedBatchNorm" => OpKind::FusedBatchNorm,
            "ReLU" => OpKind::Relu,
            "Reshape" => OpKind::Reshape,
            "Pad" => OpKind::Pad,
            "Transpose" => OpKind::Transpose,
            "Concat" => OpKind::Concat,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            OpKind::MatMul => "MatMul",
            OpKind::MatAdd => "MatAdd",
            OpKind::Conv => "Conv",
            OpKind::AvgPool => "AvgPool",
            OpKind::MaxPool => "MaxPool",
            OpKind::ArgMax => "ArgMax",
            OpKind::FusedBatchNorm => "FusedBatchNorm",
            OpKind::Relu => "ReLU",
            OpKind::ScaleDown => "ScaleDown",
            OpKind::Reshape => "Reshape",
            OpKind::Pad => "Pad",
            OpKind::Transpose => "Transpose",
            OpKind::Concat => "Concat",
        }
    }

    /// True for the data-movement ops that run locally on shares.
    pub fn is_library(self) -> bool {
        matches!(
            self,
            OpKind::Reshape | OpKind::Pad | OpKind::Transpose | OpKind::Concat
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FloatTensor {
    pub dims: Vec<usize>,
    pub data: Vec<f32>,
}

impl FloatTensor {
    pub fn new(dims: Vec<usize>, data: Vec<f32>) -> Self {
        assert_eq!(dims.iter().product::<usize>(), data.len());
        FloatTensor { dims, data }
    }

    pub fn numel(&self) -> usize {
        self.data.len()
    }
}

/// Signed-64-bit tensor; values are two's-complement readings of `Z_{2^64}`
/// elements at some fixed-point scale.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntTensor {
    pub dims: Vec<usize>,
    pub data: Vec<i64>,
}

impl IntTensor {
    pub fn new(dims: Vec<usize>, data: Vec<i64>) -> Self {
        assert_eq!(dims.iter().product::<usize>(), data.len());
        IntTensor { dims, data }
    }

    pub fn zeros(dims: Vec<usize>) -> Self {
        let n = dims.iter().product();
        IntTensor {
            dims,
            data: vec![0; n],
        }
    }

    pub fn numel(&self) -> usize {
        self.data.len()
    }
}
