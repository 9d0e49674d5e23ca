use thiserror::Error;

#[derive(Debug, Error)]
pub enum CompileError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("graph json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown op {0:?}")]
    UnknownOp(String),
    #[error("tensor {0:?} referenced but never declared or produced")]
    UndefinedTensor(String),
    #[error("tensor {0:?} defined more than once")]
    Redefined(String),
    #[error("node {node}: expected {want} inputs, got {got}")]
    BadArity { node: String, want: usize, got: usize },
    #[error("node {node}: shape error: {msg}")]
    Shape { node: String, msg: String },
    #[error("node {node}: missing attribute {attr}")]
    MissingAttr { node: String, attr: &'static str },
    #[error("node {node}: unsupported: {msg}")]
    Unsupported { node: String, msg: String },
    #[error("weights file: {0}")]
    Weights(String),
    #[error("weight {name:?}: declared dims {decl:?} but file has {file:?}")]
    WeightShape {
        name: String,
        decl: Vec<usize>,
        file: Vec<usize>,
    },
    #[error("scale {0} out of range 0..=63")]
    BadScale(u32),
    #[error("fixed-point overflow converting {value} at scale {scale}")]
    RhoOverflow { value: f32, scale: u32 },
    #[error("interpreter: tensor {0:?} unavailable")]
    MissingValue(String),
}
