use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RingError {
    #[error("shape mismatch: {0:?} vs {1:?}")]
    ShapeMismatch(Vec<usize>, Vec<usize>),
    #[error("ring mismatch: {0:?} vs {1:?}")]
    RingMismatch(crate::RingId, crate::RingId),
    #[error("value {0} is not canonical in {1:?}")]
    NotCanonical(u64, crate::RingId),
    #[error("payload length {got} does not match {want} expected bytes")]
    BadPayloadLength { got: usize, want: usize },
    #[error("reshape from {0:?} to {1:?} changes element count")]
    BadReshape(Vec<usize>, Vec<usize>),
    #[error("matmul expects 2-d operands with matching inner dim, got {0:?} x {1:?}")]
    BadMatmul(Vec<usize>, Vec<usize>),
}
