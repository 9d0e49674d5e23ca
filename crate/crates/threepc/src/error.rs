use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProtoError {
    #[error("ring: {0}")]
    Ring(#[from] ring_core::RingError),
    #[error("channel {channel}: {msg}")]
    Channel { channel: String, msg: String },
    #[error("timed out waiting for a message from {0}")]
    Timeout(String),
    #[error("expected message tag {want:#04x}, got {got:#04x}")]
    UnexpectedTag { want: u8, got: u8 },
    #[error("malformed payload: {0}")]
    Malformed(String),
    #[error("protocol precondition violated: {0}")]
    Precondition(String),
    #[error("session aborted: {0}")]
    Abort(String),
    #[error("compile: {0}")]
    Compile(#[from] model_compiler::CompileError),
}

pub type Result<T> = std::result::Result<T, ProtoError>;
