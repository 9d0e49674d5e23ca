//! Malicious security with abort for the three-party protocols: a software
//! attested-execution functionality signs every protocol message, peers
//! verify signatures and per-channel counters before accepting, transcripts
//! are hash-chained, and code identity is bound by root-signed tokens. Any
//! deviation an on-path adversary can mount without the signing key is
//! detected and converted to an abort before output.

mod error;
pub mod functionality;
pub mod runner;
pub mod signed;
pub mod tamper;
pub mod token;
pub mod transcript;

pub use error::{AttestError, Result};
pub use functionality::{AttestFunctionality, SignedState};
pub use runner::{run_malicious, MaliciousOutcome};
pub use signed::{AbortReport, SignedTransport};
pub use tamper::{Strategy, TamperSpec};
pub use token::{code_identity, verify_token, AttestToken, RootAuthority, TOKEN_LEN};
pub use transcript::Transcript;
