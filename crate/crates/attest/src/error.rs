use thiserror::Error;

#[derive(Debug, Error)]
pub enum AttestError {
    #[error("token: {0}")]
    Token(String),
    #[error("signature rejected: {0}")]
    Signature(String),
    #[error("state rejected: {0}")]
    State(String),
    #[error("protocol: {0}")]
    Proto(#[from] threepc::ProtoError),
}

pub type Result<T> = std::result::Result<T, AttestError>;
