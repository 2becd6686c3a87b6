use thiserror::Error;

use crate::branch::BranchRow;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u32),

    #[error("characteristic {0} is even; only odd characteristic is supported")]
    EvenCharacteristic(u32),

    #[error("{what} = {value} exceeds the configured cap {cap}")]
    SizeCapExceeded { what: &'static str, value: u64, cap: u64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{0} is not an odd prime power")]
    NotPrimePower(u32),

    #[error("quadratic character is undefined at zero")]
    ZeroInput,

    #[error("no suitable prime found below {cap}")]
    SearchCapExceeded { cap: u64 },

    #[error("eigenspace splitting did not terminate after {attempts} attempts")]
    SplitFailure { attempts: usize },

    #[error("orthogonality check failed: {0}")]
    OrthogonalityFailure(String),

    #[error("residue {residue} mod {ell} does not lift into [0, ell/2)")]
    LiftOutOfRange { residue: u64, ell: u64 },

    #[error("class function is not irreducible (norm {0})")]
    NotIrreducible(u64),

    #[error("class function does not match any row of the character table")]
    NotInTable,

    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),

    #[error("branching formula failed on {} row(s): {}", .0.len(), describe_rows(.0))]
    VerificationFailure(Vec<BranchRow>),

    #[error("structure check failed: {0}")]
    StructureFailure(String),

    #[error("independent computations disagree: {0}")]
    InternalMismatch(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

fn describe_rows(rows: &[BranchRow]) -> String {
    rows.iter()
        .map(|r| {
            format!(
                "{} (lhs {}, t {:?}, rhs {}, orbit sizes {:?}, residues {:?})",
                r.label, r.lhs, r.t, r.rhs, r.orbit_sizes, r.residues
            )
        })
        .collect::<Vec<_>>()
        .join("; ")
}
