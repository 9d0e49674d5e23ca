//! Model loading, fixed-point quantization, and lowering for the secure
//! inference runtime.
//!
//! A float model (JSON graph + binary weights) is parsed into a shape-checked
//! high-level program, optimized (ReLU/MaxPool reordering), quantized to a
//! single global scale chosen by a validation sweep, and lowered to a list of
//! integer statements the cryptographic backend executes in order. A plaintext
//! fixed-point interpreter provides the exact reference the backend is tested
//! against.

mod error;
pub mod fixed;
pub mod graph;
pub mod hlil;
pub mod interp;
pub mod llil;
pub mod loader;
pub mod sweep;

pub use error::CompileError;
pub use fixed::{rho_checked, rho_wrapping, FixedConfig};
pub use graph::{Attrs, FloatTensor, GraphFile, IntTensor, NodeDecl, OpKind, TensorDecl};
pub use hlil::{relu_maxpool_switch, HlilProgram, Node};
pub use interp::{fixed_interpret, float_interpret};
pub use llil::{count_scaledown, liveness, lower, FixedModel, LivenessReport, LlilProgram, LlilStmt, RhoMode};
pub use loader::{build_model, load_model, parse_weights, write_weights, FloatModel};
pub use sweep::{accuracy_at_scale, predict_fixed, scale_sweep, SweepResult};
