use thiserror::Error;

/// Errors raised by the analysis library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A residue modulus cannot be resolved by the modulus tower in use.
    #[error("precision error: modulus {modulus} {}", depth_hint(*.required_depth))]
    Precision {
        modulus: String,
        /// Smallest lcm-tower depth that would resolve the modulus, when known.
        required_depth: Option<usize>,
    },

    /// A numerical routine produced a non-finite value.
    #[error("numeric error: {0}")]
    Numeric(String),
}

fn depth_hint(depth: Option<usize>) -> String {
    match depth {
        Some(d) => format!("requires tower depth ≥ {d}"),
        None => "is not resolvable by this tower".to_string(),
    }
}

pub type Result<T> = std::result::Result<T, Error>;
