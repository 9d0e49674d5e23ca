//! Session orchestration and operator tooling: TCP and in-process transports,
//! compiled-bundle serialization, batch drivers for plaintext, semi-honest,
//! and malicious inference, protocol benchmarks, and metrics reports.

pub mod bundle;
pub mod driver;
pub mod report;
pub mod tcp;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("compile: {0}")]
    Compile(#[from] model_compiler::CompileError),
    #[error("protocol: {0}")]
    Proto(#[from] threepc::ProtoError),
    #[error("attest: {0}")]
    Attest(#[from] attest::AttestError),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Process exit codes: protocol aborts and transport timeouts are
/// distinguishable so tamper campaigns can be scripted.
pub fn exit_code(e: &CliError) -> i32 {
    match e {
        CliError::Proto(threepc::ProtoError::Abort(_)) => 2,
        CliError::Proto(threepc::ProtoError::Timeout(_)) => 3,
        _ => 1,
    }
}
