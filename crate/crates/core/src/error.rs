use crate::fock::FockLabel;

/// Errors produced by the model, the statistics and the key-rate engine.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Two states or vectors live in incompatible spaces.
    #[error("dimension mismatch: {what} ({left} vs {right})")]
    DimensionMismatch {
        /// What was compared.
        what: &'static str,
        /// Left-hand dimension.
        left: usize,
        /// Right-hand dimension.
        right: usize,
    },
    /// A basis label lies outside the configured truncation.
    #[error("label {label:?} exceeds truncation n_max = {n_max}")]
    LabelOutOfRange {
        /// Offending label.
        label: FockLabel,
        /// Configured truncation.
        n_max: u8,
    },
    /// An Eve-ancilla index lies outside the ancilla dimension.
    #[error("eve index {index} out of range for dimension {dim}")]
    EveIndexOutOfRange {
        /// Offending index.
        index: usize,
        /// Ancilla dimension.
        dim: usize,
    },
    /// A measurement was requested on a state with zero norm.
    #[error("degenerate state: zero norm")]
    DegenerateState,
    /// Alice's ancilla register was not the vacuum before her operation.
    #[error("alice ancilla must be in the vacuum before her operation")]
    NonVacuumAncilla,
    /// A state that must be normalized is not.
    #[error("state not normalized: norm squared = {0}")]
    NotNormalized(f64),
    /// A scalar parameter lies outside its domain.
    #[error("parameter `{name}` = {value} outside its domain")]
    InvalidParameter {
        /// Parameter name.
        name: &'static str,
        /// Rejected value.
        value: f64,
    },
    /// The reverse attack is not an isometry.
    #[error("reverse attack is not an isometry")]
    NotIsometric,
    /// The reverse attack is applied to an input it does not define.
    #[error("reverse attack undefined on input {label:?} with eve index {eve}")]
    UndefinedReverseInput {
        /// Bob-register label of the input.
        label: FockLabel,
        /// Eve-ancilla basis index of the input.
        eve: usize,
    },
    /// Observed statistics violate their invariants.
    #[error("invalid statistics: {0}")]
    InvalidStatistics(&'static str),
    /// No raw key exists (`M = 0`), so the bound is undefined.
    #[error("degenerate statistics: no raw-key events (M = 0)")]
    NoRawKey,
    /// A Monte Carlo run was requested with zero rounds.
    #[error("at least one round is required")]
    ZeroRounds,
    /// The key rate has no sign change in the search bracket.
    #[error("no sign change of the key rate in [{low}, {high}]")]
    NoSignChange {
        /// Lower end of the bracket.
        low: f64,
        /// Upper end of the bracket.
        high: f64,
    },
}

/// Crate result alias.
pub type Result<T> = core::result::Result<T, Error>;
